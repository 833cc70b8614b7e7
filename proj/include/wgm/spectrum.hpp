#ifndef WGM_SPECTRUM_HPP
#define WGM_SPECTRUM_HPP

#include "wgm/solver.hpp"

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace wgm
{

// A measured or simulated intensity trace on a detuning grid (GHz) relative
// to an absolute origin (THz).
struct Spectrum
{
    double origin_thz = 0.0;
    std::vector<double> detuning_ghz;
    std::vector<double> intensity;
    std::vector<double> sigma; // empty: unweighted

    std::size_t size() const { return detuning_ghz.size(); }
    double frequency_thz(std::size_t i) const;
    // Median spacing of the grid.
    double grid_spacing_ghz() const;
    Spectrum window(double lo_ghz, double hi_ghz) const;
    Spectrum scaled(double factor) const;
    void check() const;
};

Spectrum spectrum_from_ports(const PortSpectra &spectra, Port port);

// Comma-separated table with a mandatory header row.
struct CsvTable
{
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    std::optional<std::size_t> column(const std::string &name) const;
    double number(std::size_t row, std::size_t column) const;
};

CsvTable read_csv(std::istream &in);
CsvTable read_csv_file(const std::filesystem::path &path);

// Accepts frequency_THz or detuning_GHz (with origin), intensity and an
// optional sigma column. With a port column, rows are filtered by `port`.
// Frequencies given in THz are re-expressed as detunings from the first row
// unless an origin is supplied.
Spectrum spectrum_from_csv(const CsvTable &table, std::optional<double> origin_thz = std::nullopt,
                           const std::string &port = "");

void write_spectrum_csv(const Spectrum &spectrum, std::ostream &out);

} // namespace wgm

#endif
