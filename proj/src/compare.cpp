#include "wgm/compare.hpp"

#include "wgm/errors.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace wgm
{
namespace
{

// Frequencies are written with 12 significant digits, which resolves about
// 1 kHz at optical frequencies.
constexpr double kGridMatchThz = 1e-9;

struct Trace
{
    std::vector<double> frequency_thz;
    std::vector<double> intensity;
};

std::map<std::string, Trace> traces(const CsvTable &table, const std::string &default_port, const char *which)
{
    const auto frequency = table.column("frequency_THz");
    const auto intensity = table.column("intensity");
    const auto port = table.column("port");
    if (!frequency || !intensity)
    {
        throw ParseError(which, "frequency_THz and intensity columns are required");
    }
    std::map<std::string, Trace> out;
    for (std::size_t r = 0; r < table.rows.size(); ++r)
    {
        Trace &t = out[port ? table.rows[r][*port] : default_port];
        t.frequency_thz.push_back(table.number(r, *frequency));
        t.intensity.push_back(table.number(r, *intensity));
    }
    for (const auto &[name, t] : out)
    {
        for (std::size_t i = 1; i < t.frequency_thz.size(); ++i)
        {
            if (!(t.frequency_thz[i] > t.frequency_thz[i - 1]))
            {
                throw ValidationError(std::string(which) + ": frequencies of port " + name + " are not increasing");
            }
        }
    }
    return out;
}

double interpolate_at(const Trace &t, double f)
{
    const auto &x = t.frequency_thz;
    if (f < x.front() - kGridMatchThz || f > x.back() + kGridMatchThz)
    {
        throw InterfaceError("reference frequency " + std::to_string(f) + " THz lies outside the simulated grid");
    }
    const auto it = std::lower_bound(x.begin(), x.end(), f);
    if (it == x.begin())
    {
        return t.intensity.front();
    }
    if (it == x.end())
    {
        return t.intensity.back();
    }
    const std::size_t hi = std::size_t(it - x.begin());
    const std::size_t lo = hi - 1;
    const double w = (f - x[lo]) / (x[hi] - x[lo]);
    return (1.0 - w) * t.intensity[lo] + w * t.intensity[hi];
}

bool same_grid(const Trace &a, const Trace &b)
{
    if (a.frequency_thz.size() != b.frequency_thz.size())
    {
        return false;
    }
    for (std::size_t i = 0; i < a.frequency_thz.size(); ++i)
    {
        if (std::abs(a.frequency_thz[i] - b.frequency_thz[i]) > kGridMatchThz)
        {
            return false;
        }
    }
    return true;
}

} // namespace

ComparisonReport compare_reference(const CsvTable &simulated, const CsvTable &reference, const ToleranceSpec &tolerance,
                                   const std::string &default_port)
{
    const auto sim = traces(simulated, default_port, "simulated");
    const auto ref = traces(reference, default_port, "reference");
    if (ref.empty())
    {
        throw ValidationError("reference table has no rows");
    }

    ComparisonReport report;
    report.pass = true;
    for (const auto &[name, r] : ref)
    {
        const auto found = sim.find(name);
        if (found == sim.end())
        {
            throw InterfaceError("port " + name + " is missing from the simulated bundle");
        }
        const Trace &s = found->second;
        const bool aligned = same_grid(s, r);
        if (!aligned && !tolerance.interpolate)
        {
            throw InterfaceError("frequency grids of port " + name + " differ; enable interpolation");
        }
        report.interpolated = report.interpolated || !aligned;

        PortComparison c;
        c.port = name;
        c.points = r.frequency_thz.size();
        double sum = 0.0;
        for (std::size_t i = 0; i < r.frequency_thz.size(); ++i)
        {
            const double value = aligned ? s.intensity[i] : interpolate_at(s, r.frequency_thz[i]);
            const double d = std::abs(value - r.intensity[i]);
            sum += d * d;
            if (d > c.max_deviation || i == 0)
            {
                c.max_deviation = d;
                c.max_at_thz = r.frequency_thz[i];
            }
        }
        c.rms_deviation = std::sqrt(sum / double(c.points));
        c.pass = c.max_deviation <= tolerance.max_deviation && c.rms_deviation <= tolerance.rms_deviation;
        report.pass = report.pass && c.pass;
        report.ports.push_back(c);
    }
    return report;
}

nlohmann::json to_json(const ComparisonReport &report, const ToleranceSpec &tolerance)
{
    nlohmann::json ports = nlohmann::json::array();
    for (const PortComparison &c : report.ports)
    {
        ports.push_back({{"port", c.port},
                         {"points", c.points},
                         {"max_deviation", c.max_deviation},
                         {"rms_deviation", c.rms_deviation},
                         {"max_deviation_at_THz", c.max_at_thz},
                         {"pass", c.pass}});
    }
    return {{"pass", report.pass},
            {"interpolated", report.interpolated},
            {"tolerance", {{"max_deviation", tolerance.max_deviation}, {"rms_deviation", tolerance.rms_deviation}}},
            {"ports", ports}};
}

} // namespace wgm
