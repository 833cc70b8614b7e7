#include "wgm/compare.hpp"
#include "wgm/errors.hpp"
#include "wgm/format.hpp"
#include "wgm/lineshape.hpp"
#include "wgm/model.hpp"
#include "wgm/parallel.hpp"
#include "wgm/qed_metrics.hpp"
#include "wgm/scenario.hpp"
#include "wgm/spectrum.hpp"
#include "wgm/units.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace
{

using nlohmann::json;
namespace fs = std::filesystem;

enum ExitCode
{
    kOk = 0,
    kOther = 1,
    kValidation = 2,
    kFit = 3,
    kIo = 4,
};

std::string read_text(const fs::path &path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
    {
        throw wgm::IoError("cannot open " + path.string());
    }
    std::ostringstream text;
    text << in.rdbuf();
    return text.str();
}

json read_json(const fs::path &path)
{
    try
    {
        return json::parse(read_text(path));
    }
    catch (const json::parse_error &e)
    {
        throw wgm::ParseError(path.string(), e.what());
    }
}

void write_text(const fs::path &dir, const std::string &name, const std::string &content)
{
    std::error_code ec;
    fs::create_directories(dir, ec);
    std::ofstream out(dir / name, std::ios::binary);
    out << content;
    if (ec || !out)
    {
        throw wgm::IoError("cannot write " + (dir / name).string());
    }
}

struct SimulateArgs
{
    std::string config;
    std::string scenario = "custom";
    std::string ports = "drop,add,transmission";
    std::string out;
    std::size_t workers = 0;
};

int run_simulate(const SimulateArgs &args)
{
    wgm::Scenario s;
    s.name = args.scenario;
    s.ports = wgm::parse_port_list(args.ports);
    if (s.ports.empty())
    {
        throw wgm::ValidationError("--ports: at least one port is required");
    }
    s.workers = args.workers;
    if (!args.config.empty())
    {
        s.config_text = read_text(args.config);
        s.model = wgm::load_model_text(s.config_text);
    }
    const wgm::ScenarioBundle bundle = wgm::run_scenario(s);
    wgm::write_bundle(bundle, args.out);
    for (const auto &f : bundle.files)
    {
        std::cout << (fs::path(args.out) / f.name).string() << '\n';
    }
    return kOk;
}

struct FitArgs
{
    std::string data;
    std::string init;
    std::string out;
    std::string port;
    std::optional<double> origin;
};

std::optional<double> optional_number(const json &node, const std::string &key)
{
    if (!node.contains(key))
    {
        return std::nullopt;
    }
    if (!node.at(key).is_number())
    {
        throw wgm::ParseError(key, "expected a number");
    }
    return node.at(key).get<double>();
}

int run_fit(const FitArgs &args)
{
    const wgm::Spectrum spectrum =
        wgm::spectrum_from_csv(wgm::read_csv_file(args.data), args.origin, args.port);
    json init = args.init.empty() ? json::object() : read_json(args.init);
    if (!init.is_object())
    {
        throw wgm::ParseError("init", "expected an object");
    }
    for (const auto &item : init.items())
    {
        static const std::vector<std::string> known{"background", "fit_background", "co_fit_background", "mask_GHz",
                                                    "windowed", "center_THz", "center_GHz", "linewidth_MHz",
                                                    "amplitude", "phase_rad", "max_iterations"};
        if (std::find(known.begin(), known.end(), item.key()) == known.end())
        {
            throw wgm::ParseError("init." + item.key(), "unknown key");
        }
    }

    wgm::FanoInit fano;
    if (const auto c = optional_number(init, "center_THz"))
    {
        fano.center_ghz = wgm::units::thz_to_ghz(*c - spectrum.origin_thz);
    }
    if (const auto c = optional_number(init, "center_GHz"))
    {
        fano.center_ghz = *c;
    }
    if (const auto w = optional_number(init, "linewidth_MHz"))
    {
        fano.linewidth_ghz = wgm::units::mhz_to_ghz(*w);
    }
    fano.amplitude = optional_number(init, "amplitude");
    fano.phase = optional_number(init, "phase_rad");

    wgm::FanoFitOptions options;
    if (init.contains("max_iterations"))
    {
        options.lm.max_iterations = init.at("max_iterations").get<int>();
    }
    wgm::BackgroundModel background;
    json background_report = nullptr;
    if (init.contains("background"))
    {
        background = wgm::background_from_json(init.at("background"));
        if (init.value("fit_background", false))
        {
            wgm::BackgroundFitOptions bg;
            bg.windowed = init.value("windowed", false);
            if (init.contains("mask_GHz"))
            {
                const auto mask = init.at("mask_GHz").get<std::vector<double>>();
                if (mask.size() != 2)
                {
                    throw wgm::ParseError("init.mask_GHz", "expected [low, high]");
                }
                bg.mask = std::make_pair(mask[0], mask[1]);
            }
            const wgm::BackgroundFit fit = wgm::fit_background(spectrum, background, bg);
            background = fit.model;
            background_report = {{"residual_norm", fit.residual_norm}, {"iterations", fit.iterations}};
        }
        options.co_fit_background = init.value("co_fit_background", false);
    }
    else
    {
        // No resonator profile given: a flat baseline at the median, co-fitted.
        std::vector<double> sorted = spectrum.intensity;
        std::nth_element(sorted.begin(), sorted.begin() + std::ptrdiff_t(sorted.size() / 2), sorted.end());
        background.offset = sorted[sorted.size() / 2];
        options.co_fit_background = true;
    }

    const wgm::FanoFitResult result = wgm::fit_fano(spectrum, background, fano, options);
    json report = wgm::to_json(result);
    report["data"] = fs::path(args.data).filename().string();
    if (!background_report.is_null())
    {
        report["background_fit"] = background_report;
    }
    write_text(args.out, "fit.json", wgm::dump_json(report));
    for (const auto &w : result.warnings)
    {
        std::cerr << "warning: " << w << '\n';
    }
    std::cout << (fs::path(args.out) / "fit.json").string() << '\n';
    return kOk;
}

struct MetricsArgs
{
    std::string from;
    std::string out;
    double free_linewidth_mhz = 33.0;
    double branching_ratio = 1.0 / 3.0;
};

int run_metrics(const MetricsArgs &args)
{
    const json doc = read_json(args.from);
    wgm::QedMetrics metrics;
    if (doc.is_object() && doc.contains("parameters") && doc.at("parameters").contains("linewidth_MHz"))
    {
        metrics = wgm::metrics_from_linewidth(doc.at("parameters").at("linewidth_MHz").get<double>(),
                                              args.free_linewidth_mhz, args.branching_ratio);
    }
    else
    {
        metrics = wgm::metrics_from_model(wgm::load_model(doc));
    }
    write_text(args.out, "metrics.json", wgm::dump_json(wgm::to_json(metrics)));
    std::cout << (fs::path(args.out) / "metrics.json").string() << '\n';
    return kOk;
}

struct CompareArgs
{
    std::string simulated;
    std::string reference;
    std::string out;
    std::string port = "drop";
    wgm::ToleranceSpec tolerance;
};

int run_compare(const CompareArgs &args)
{
    const wgm::ComparisonReport report = wgm::compare_reference(
        wgm::read_csv_file(args.simulated), wgm::read_csv_file(args.reference), args.tolerance, args.port);
    write_text(args.out, "comparison.json", wgm::dump_json(wgm::to_json(report, args.tolerance)));
    for (const auto &p : report.ports)
    {
        std::cout << p.port << ": max " << wgm::format_number(p.max_deviation) << " rms "
                  << wgm::format_number(p.rms_deviation) << (p.pass ? " pass" : " FAIL") << '\n';
    }
    return report.pass ? kOk : kValidation;
}

} // namespace

int main(int argc, char **argv)
{
    CLI::App app{"Steady-state simulator and Fano fitting for waveguide-coupled microresonators with emitters"};
    app.require_subcommand(1);
    app.set_version_flag("--version", wgm::kToolVersion);

    SimulateArgs sim;
    auto *simulate = app.add_subcommand("simulate", "Run a preset or custom scenario");
    simulate->add_option("--config", sim.config, "Model configuration (JSON)")->check(CLI::ExistingFile);
    simulate->add_option("--scenario", sim.scenario, "fig1c, fig2a, fig2b, fig2d, fig3a, fig3bc or custom");
    simulate->add_option("--ports", sim.ports, "Comma-separated ports: drop,add,transmission,reflection,int1,int2");
    simulate->add_option("--out", sim.out, "Output directory")->required();
    simulate->add_option("--workers", sim.workers,
                         std::string("Worker threads (default: $") + wgm::kWorkersEnv + " or all cores)");

    FitArgs fit;
    auto *fit_cmd = app.add_subcommand("fit", "Fit a Fano line to a measured or simulated spectrum");
    fit_cmd->add_option("--data", fit.data, "Spectrum CSV")->required()->check(CLI::ExistingFile);
    fit_cmd->add_option("--init", fit.init, "Initial guess and background (JSON)")->check(CLI::ExistingFile);
    fit_cmd->add_option("--out", fit.out, "Output directory")->required();
    fit_cmd->add_option("--port", fit.port, "Port to fit when the CSV holds several");
    fit_cmd->add_option("--origin", fit.origin, "Detuning origin in THz");

    MetricsArgs met;
    auto *metrics = app.add_subcommand("metrics", "Derive cavity-QED figures from a fit report or a configuration");
    metrics->add_option("--from", met.from, "fit.json or model configuration")->required()->check(CLI::ExistingFile);
    metrics->add_option("--out", met.out, "Output directory")->required();
    metrics->add_option("--free-linewidth", met.free_linewidth_mhz, "Free-space linewidth in MHz (fit input)");
    metrics->add_option("--branching", met.branching_ratio, "Free-space ZPL branching ratio (fit input)");

    CompareArgs cmp;
    auto *compare = app.add_subcommand("compare", "Compare simulated spectra against a reference CSV");
    compare->add_option("--simulated", cmp.simulated, "spectra.csv from simulate")->required()->check(CLI::ExistingFile);
    compare->add_option("--reference", cmp.reference, "Reference CSV")->required()->check(CLI::ExistingFile);
    compare->add_option("--out", cmp.out, "Output directory")->required();
    compare->add_option("--port", cmp.port, "Port of a reference without a port column");
    compare->add_option("--max-deviation", cmp.tolerance.max_deviation, "Largest allowed deviation");
    compare->add_option("--rms-deviation", cmp.tolerance.rms_deviation, "Largest allowed RMS deviation");
    compare->add_flag("--interpolate", cmp.tolerance.interpolate, "Interpolate onto the reference grid");

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError &e)
    {
        const int code = app.exit(e);
        return code == 0 ? kOk : kValidation;
    }

    try
    {
        if (*simulate)
            return run_simulate(sim);
        if (*fit_cmd)
            return run_fit(fit);
        if (*metrics)
            return run_metrics(met);
        if (*compare)
            return run_compare(cmp);
    }
    catch (const wgm::FitError &e)
    {
        std::cerr << "fit error: " << e.what() << '\n';
        return kFit;
    }
    catch (const wgm::IoError &e)
    {
        std::cerr << "i/o error: " << e.what() << '\n';
        return kIo;
    }
    catch (const wgm::ParseError &e)
    {
        std::cerr << "parse error: " << e.what() << '\n';
        return kValidation;
    }
    catch (const wgm::ValidationError &e)
    {
        std::cerr << "validation error: " << e.what() << '\n';
        return kValidation;
    }
    catch (const wgm::DomainError &e)
    {
        std::cerr << "domain error: " << e.what() << '\n';
        return kValidation;
    }
    catch (const wgm::InterfaceError &e)
    {
        std::cerr << "interface error: " << e.what() << '\n';
        return kValidation;
    }
    catch (const nlohmann::json::exception &e)
    {
        std::cerr << "parse error: " << e.what() << '\n';
        return kValidation;
    }
    catch (const std::exception &e)
    {
        std::cerr << "error: " << e.what() << '\n';
        return kOther;
    }
    return kOther;
}
