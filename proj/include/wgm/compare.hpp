#ifndef WGM_COMPARE_HPP
#define WGM_COMPARE_HPP

#include "wgm/spectrum.hpp"

#include <string>
#include <vector>

#include <json.hpp>

namespace wgm
{

struct ToleranceSpec
{
    double max_deviation = 0.02; // on intensities normalized to the input power
    double rms_deviation = 0.02;
    bool interpolate = false;    // linear interpolation onto the reference grid
};

struct PortComparison
{
    std::string port;
    std::size_t points = 0;
    double max_deviation = 0.0;
    double rms_deviation = 0.0;
    double max_at_thz = 0.0; // where the largest deviation occurs
    bool pass = false;
};

struct ComparisonReport
{
    std::vector<PortComparison> ports;
    bool interpolated = false;
    bool pass = false;
};

// Compares the intensities of a simulated port table (frequency_THz, port,
// intensity) against a reference table of the same shape. A reference
// without a port column is compared against `default_port`.
ComparisonReport compare_reference(const CsvTable &simulated, const CsvTable &reference, const ToleranceSpec &tolerance,
                                   const std::string &default_port = "drop");

nlohmann::json to_json(const ComparisonReport &report, const ToleranceSpec &tolerance);

} // namespace wgm

#endif
