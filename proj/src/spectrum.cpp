#include "wgm/spectrum.hpp"

#include "wgm/errors.hpp"
#include "wgm/format.hpp"
#include "wgm/units.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace wgm
{
namespace
{

std::string trim(const std::string &s)
{
    const auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos)
    {
        return "";
    }
    const auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

std::vector<std::string> split(const std::string &line)
{
    std::vector<std::string> cells;
    std::stringstream in(line);
    std::string cell;
    while (std::getline(in, cell, ','))
    {
        cells.push_back(trim(cell));
    }
    if (!line.empty() && line.back() == ',')
    {
        cells.emplace_back();
    }
    return cells;
}

} // namespace

double Spectrum::frequency_thz(std::size_t i) const { return origin_thz + units::ghz_to_thz(detuning_ghz.at(i)); }

double Spectrum::grid_spacing_ghz() const
{
    if (size() < 2)
    {
        return 0.0;
    }
    std::vector<double> steps(size() - 1);
    for (std::size_t i = 1; i < size(); ++i)
    {
        steps[i - 1] = detuning_ghz[i] - detuning_ghz[i - 1];
    }
    std::nth_element(steps.begin(), steps.begin() + std::ptrdiff_t(steps.size() / 2), steps.end());
    return steps[steps.size() / 2];
}

Spectrum Spectrum::window(double lo_ghz, double hi_ghz) const
{
    Spectrum out;
    out.origin_thz = origin_thz;
    for (std::size_t i = 0; i < size(); ++i)
    {
        if (detuning_ghz[i] >= lo_ghz && detuning_ghz[i] <= hi_ghz)
        {
            out.detuning_ghz.push_back(detuning_ghz[i]);
            out.intensity.push_back(intensity[i]);
            if (!sigma.empty())
            {
                out.sigma.push_back(sigma[i]);
            }
        }
    }
    return out;
}

Spectrum Spectrum::scaled(double factor) const
{
    Spectrum out = *this;
    for (double &v : out.intensity)
    {
        v *= factor;
    }
    for (double &s : out.sigma)
    {
        s *= std::abs(factor);
    }
    return out;
}

void Spectrum::check() const
{
    if (detuning_ghz.size() != intensity.size() || (!sigma.empty() && sigma.size() != intensity.size()))
    {
        throw ValidationError("spectrum: column lengths differ");
    }
    for (std::size_t i = 0; i < size(); ++i)
    {
        if (!std::isfinite(detuning_ghz[i]) || !std::isfinite(intensity[i]))
        {
            throw ValidationError("spectrum: non-finite value in row " + std::to_string(i));
        }
        if (i > 0 && !(detuning_ghz[i] > detuning_ghz[i - 1]))
        {
            throw ValidationError("spectrum: frequency grid must be strictly increasing");
        }
        if (!sigma.empty() && !(sigma[i] > 0.0))
        {
            throw ValidationError("spectrum: sigma must be positive");
        }
    }
}

Spectrum spectrum_from_ports(const PortSpectra &spectra, Port port)
{
    Spectrum s;
    s.origin_thz = spectra.origin_thz;
    s.detuning_ghz = spectra.detuning_ghz;
    s.intensity = spectra.intensities(port);
    return s;
}

std::optional<std::size_t> CsvTable::column(const std::string &name) const
{
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end())
    {
        return std::nullopt;
    }
    return std::size_t(it - header.begin());
}

double CsvTable::number(std::size_t row, std::size_t column) const
{
    const std::string &cell = rows.at(row).at(column);
    try
    {
        std::size_t used = 0;
        const double value = std::stod(cell, &used);
        if (used != cell.size())
        {
            throw std::invalid_argument(cell);
        }
        return value;
    }
    catch (const std::exception &)
    {
        throw ParseError("row " + std::to_string(row + 2) + ", column " + header.at(column),
                         "not a number: \"" + cell + "\"");
    }
}

CsvTable read_csv(std::istream &in)
{
    CsvTable table;
    std::string line;
    while (std::getline(in, line))
    {
        if (trim(line).empty() || trim(line).front() == '#')
        {
            continue;
        }
        if (table.header.empty())
        {
            table.header = split(line);
            continue;
        }
        auto cells = split(line);
        if (cells.size() != table.header.size())
        {
            throw ParseError("row " + std::to_string(table.rows.size() + 2), "column count differs from header");
        }
        table.rows.push_back(std::move(cells));
    }
    if (table.header.empty())
    {
        throw ParseError("", "CSV header row missing");
    }
    return table;
}

CsvTable read_csv_file(const std::filesystem::path &path)
{
    std::ifstream in(path);
    if (!in)
    {
        throw IoError("cannot open " + path.string());
    }
    return read_csv(in);
}

Spectrum spectrum_from_csv(const CsvTable &table, std::optional<double> origin_thz, const std::string &port)
{
    const auto frequency = table.column("frequency_THz");
    const auto detuning = table.column("detuning_GHz");
    const auto intensity = table.column("intensity");
    const auto sigma = table.column("sigma");
    const auto port_column = table.column("port");
    if (!intensity)
    {
        throw ParseError("intensity", "required column missing");
    }
    if (!frequency && !detuning)
    {
        throw ParseError("frequency_THz", "either frequency_THz or detuning_GHz is required");
    }
    if (!frequency && !origin_thz)
    {
        throw ParseError("detuning_GHz", "a detuning column needs a declared origin");
    }

    std::vector<std::size_t> rows;
    std::string seen_port;
    for (std::size_t r = 0; r < table.rows.size(); ++r)
    {
        if (port_column)
        {
            const std::string &name = table.rows[r][*port_column];
            if (port.empty())
            {
                if (!seen_port.empty() && name != seen_port)
                {
                    throw InterfaceError("spectrum CSV holds several ports; select one");
                }
                seen_port = name;
            }
            else if (name != port)
            {
                continue;
            }
        }
        rows.push_back(r);
    }
    if (rows.empty())
    {
        throw ValidationError("spectrum CSV has no rows" + (port.empty() ? std::string() : " for port " + port));
    }

    Spectrum s;
    if (frequency)
    {
        s.origin_thz = origin_thz ? *origin_thz : table.number(rows.front(), *frequency);
        for (std::size_t r : rows)
        {
            s.detuning_ghz.push_back(units::thz_to_ghz(table.number(r, *frequency) - s.origin_thz));
        }
    }
    else
    {
        s.origin_thz = *origin_thz;
        for (std::size_t r : rows)
        {
            s.detuning_ghz.push_back(table.number(r, *detuning));
        }
    }
    for (std::size_t r : rows)
    {
        s.intensity.push_back(table.number(r, *intensity));
        if (sigma)
        {
            s.sigma.push_back(table.number(r, *sigma));
        }
    }
    s.check();
    return s;
}

void write_spectrum_csv(const Spectrum &spectrum, std::ostream &out)
{
    out << "frequency_THz,detuning_GHz,intensity" << (spectrum.sigma.empty() ? "" : ",sigma") << '\n';
    for (std::size_t i = 0; i < spectrum.size(); ++i)
    {
        out << format_number(spectrum.frequency_thz(i)) << ',' << format_number(spectrum.detuning_ghz[i]) << ','
            << format_number(spectrum.intensity[i]);
        if (!spectrum.sigma.empty())
        {
            out << ',' << format_number(spectrum.sigma[i]);
        }
        out << '\n';
    }
}

} // namespace wgm
