#include "wgm/scenario.hpp"

#include "wgm/errors.hpp"
#include "wgm/fixtures.hpp"
#include "wgm/format.hpp"
#include "wgm/lineshape.hpp"
#include "wgm/parallel.hpp"
#include "wgm/qed_metrics.hpp"
#include "wgm/spectrum.hpp"
#include "wgm/units.hpp"
#include "wgm/waterfall.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

namespace wgm
{
namespace
{

using nlohmann::json;

constexpr int kDetuningSweepPoints = 33;
constexpr double kDetuningSweepLinewidths = 8.0;
constexpr double kLineWindowGhz = 0.6;
constexpr std::size_t kLineWindowPoints = 601;
constexpr double kStarkStartVolts = -160.0;
constexpr double kStarkStopVolts = 0.0;
constexpr double kStarkStepVolts = 10.0;

SystemModel without_molecules(const SystemModel &model)
{
    SystemModel bare = model;
    bare.emitters.clear();
    return bare;
}

std::vector<Port> with_port(std::vector<Port> ports, Port extra)
{
    if (std::find(ports.begin(), ports.end(), extra) == ports.end())
    {
        ports.push_back(extra);
    }
    return ports;
}

std::string spectra_csv(const PortSpectra &spectra)
{
    std::ostringstream out;
    write_port_spectra_csv(spectra, out);
    return out.str();
}

// Drop spectrum divided by the molecule-free drop spectrum on the same grid:
// the resonator profile becomes a flat unit background.
Spectrum normalized_drop(const PortSpectra &with, const PortSpectra &without)
{
    Spectrum s = spectrum_from_ports(with, Port::drop);
    const std::vector<double> reference = without.intensities(Port::drop);
    for (std::size_t i = 0; i < s.size(); ++i)
    {
        s.intensity[i] /= reference[i];
    }
    return s;
}

BackgroundModel unit_background()
{
    BackgroundModel b;
    b.offset = 1.0;
    return b;
}

FanoFitResult fit_molecular_line(const SystemModel &model, std::size_t workers)
{
    const std::vector<Port> drop{Port::drop};
    const PortSpectra with = port_spectrum(model, drop, workers);
    const PortSpectra without = port_spectrum(without_molecules(model), drop, workers);
    FanoInit init;
    init.center_ghz = units::thz_to_ghz(model.emitters.front().transition_frequency_thz - model.drive.origin_thz);
    // The cavity dispersion leaves a small constant offset in the normalized
    // trace; an affine baseline is co-fitted to absorb it.
    FanoFitOptions options;
    options.co_fit_background = true;
    return fit_fano(normalized_drop(with, without), unit_background(), init, options);
}

json metrics_json(const QedMetrics &metrics) { return to_json(metrics); }

void add_file(ScenarioBundle &bundle, std::string name, std::string content)
{
    bundle.files.push_back({std::move(name), std::move(content)});
}

SystemModel require_model(const Scenario &s, SystemModel fallback)
{
    SystemModel m = s.model ? *s.model : std::move(fallback);
    validate(m);
    return m;
}

void require_emitters(const SystemModel &m, std::size_t count, const std::string &preset)
{
    if (m.emitters.size() < count)
    {
        throw ValidationError(preset + " needs at least " + std::to_string(count) + " emitter(s)");
    }
}

void run_fig1c(const Scenario &s, ScenarioBundle &bundle)
{
    const SystemModel model = require_model(s, fixtures::resonator());
    const PortSpectra spectra = port_spectrum(model, s.ports, s.workers);
    add_file(bundle, "spectra.csv", spectra_csv(spectra));

    const std::vector<Port> internal{Port::drop, Port::transmission};
    const PortSpectra bare = port_spectrum(without_molecules(model), internal, s.workers);
    const ModePair &pair = model.fundamental();
    const Spectrum drop = spectrum_from_ports(bare, Port::drop);
    BackgroundModel init;
    init.resonances.push_back({units::thz_to_ghz(pair.center_frequency_thz - model.drive.origin_thz), pair.linewidth_ghz,
                               *std::max_element(drop.intensity.begin(), drop.intensity.end())});
    BackgroundFitOptions options;
    options.windowed = drop.detuning_ghz.back() - drop.detuning_ghz.front() < 3.0 * pair.linewidth_ghz;
    const BackgroundFit fit = fit_background(drop, init, options);
    add_file(bundle, "fit.json",
             dump_json({{"port", "drop"},
                        {"background", to_json(fit.model)},
                        {"residual_norm", fit.residual_norm},
                        {"iterations", fit.iterations}}));

    QedMetrics metrics = metrics_from_model(model);
    const std::vector<double> t = bare.intensities(Port::transmission);
    metrics.entries.push_back({"transmission_dip", 1.0 - *std::min_element(t.begin(), t.end()), "", "derived"});
    metrics.entries.push_back({"fitted_linewidth", fit.model.resonances.front().width_ghz, "GHz", "fitted"});
    add_file(bundle, "metrics.json", dump_json(metrics_json(metrics)));
}

void run_single_line(const Scenario &s, ScenarioBundle &bundle, SystemModel fallback, const std::string &preset)
{
    const SystemModel model = require_model(s, std::move(fallback));
    require_emitters(model, 1, preset);
    const PortSpectra spectra = port_spectrum(model, s.ports, s.workers);
    add_file(bundle, "spectra.csv", spectra_csv(spectra));

    const std::vector<Port> drop{Port::drop};
    const PortSpectra with = port_spectrum(model, drop, s.workers);
    const PortSpectra without = port_spectrum(without_molecules(model), drop, s.workers);
    const FanoFitResult fit = fit_molecular_line(model, s.workers);
    json fit_doc = to_json(fit);
    fit_doc["port"] = "drop";
    fit_doc["background_source"] = "molecule-free simulation";
    add_file(bundle, "fit.json", dump_json(fit_doc));

    const Emitter &e = model.emitters.front();
    QedMetrics metrics = metrics_from_linewidth(fit.linewidth_mhz, e.linewidth_mhz, e.branching_ratio);
    metrics.entries.push_back(
        {"drop_dip", molecular_dip(with.intensities(Port::drop), without.intensities(Port::drop)), "", "derived"});
    const QedMetrics configured = metrics_from_model(model);
    for (const char *name : {"visibility", "cooperativity", "exchange_J", "finesse", "quality_factor"})
    {
        if (const Metric *m = configured.find(name))
        {
            metrics.entries.push_back(*m);
        }
    }
    add_file(bundle, "metrics.json", dump_json(metrics_json(metrics)));
}

void run_fig2d(const Scenario &s, ScenarioBundle &bundle)
{
    const SystemModel model = require_model(s, fixtures::two_pair_single_molecule());
    require_emitters(model, 1, "fig2d");
    bundle.axis = SweepAxis::cavity_detuning;
    const Emitter &e = model.emitters.front();
    const double kappa = model.fundamental().linewidth_ghz;
    const std::vector<double> detunings =
        fixtures::linspace(-kDetuningSweepLinewidths * kappa, kDetuningSweepLinewidths * kappa, kDetuningSweepPoints);

    SystemModel single_pair = model;
    single_pair.mode_pairs = {model.fundamental()};
    for (Emitter &em : single_pair.emitters)
    {
        em.coupling_mhz = {em.coupling_mhz[model.fundamental_index()]};
        if (!em.coupling_phase_rad.empty())
        {
            em.coupling_phase_rad = {em.coupling_phase_rad[model.fundamental_index()]};
        }
    }

    const auto local_model = [&](double detuning) {
        SystemModel m = with_cavity_detuning(model, 0, detuning);
        m.drive.origin_thz = e.transition_frequency_thz;
        m.drive.detuning_ghz = fixtures::linspace(-kLineWindowGhz, kLineWindowGhz, kLineWindowPoints);
        return m;
    };

    std::vector<FanoFitResult> fits(detunings.size());
    std::vector<double> eliminated(detunings.size());
    std::vector<double> single(detunings.size());
    parallel_for(
        detunings.size(),
        [&](std::size_t i) {
            fits[i] = fit_molecular_line(local_model(detunings[i]), 1);
            eliminated[i] = effective_emitter_response(model, 0, detunings[i]).linewidth_mhz;
            single[i] = effective_emitter_response(single_pair, 0, detunings[i]).linewidth_mhz;
        },
        s.workers);

    const SystemModel centered = local_model(0.0);
    add_file(bundle, "spectra.csv", spectra_csv(port_spectrum(centered, s.ports, s.workers)));

    std::ostringstream table;
    table << "cavity_detuning_GHz,fitted_linewidth_MHz,fitted_linewidth_error_MHz,fitted_center_shift_MHz,"
             "eliminated_linewidth_MHz,single_pair_linewidth_MHz,relative_fluorescence\n";
    json fit_list = json::array();
    for (std::size_t i = 0; i < detunings.size(); ++i)
    {
        const FanoFitResult &f = fits[i];
        table << format_number(detunings[i]) << ',' << format_number(f.linewidth_mhz) << ','
              << format_number(f.errors[1]) << ',' << format_number(units::ghz_to_mhz(f.line.center_ghz)) << ','
              << format_number(eliminated[i]) << ',' << format_number(single[i]) << ','
              << format_number(fluorescence_scaling(f.linewidth_mhz, e.linewidth_mhz)) << '\n';
        json entry = to_json(f);
        entry["cavity_detuning_GHz"] = detunings[i];
        fit_list.push_back(entry);
    }
    add_file(bundle, "linewidth_vs_detuning.csv", table.str());
    add_file(bundle, "fit.json", dump_json({{"port", "drop"}, {"fits", fit_list}}));

    const std::size_t middle = detunings.size() / 2;
    QedMetrics metrics = metrics_from_linewidth(fits[middle].linewidth_mhz, e.linewidth_mhz, e.branching_ratio);
    metrics.entries.push_back({"far_detuned_linewidth", fits.back().linewidth_mhz, "MHz", "fitted"});
    metrics.entries.push_back({"far_detuned_linewidth_low_side", fits.front().linewidth_mhz, "MHz", "fitted"});
    metrics.entries.push_back({"eliminated_linewidth_resonant", eliminated[middle], "MHz", "configured"});
    add_file(bundle, "metrics.json", dump_json(metrics_json(metrics)));
}

void run_fig3a(const Scenario &s, ScenarioBundle &bundle)
{
    const SystemModel model = require_model(s, fixtures::stark_pair());
    require_emitters(model, 2, "fig3a");
    bundle.axis = SweepAxis::stark_voltage;
    std::vector<double> voltages;
    for (double v = kStarkStartVolts; v <= kStarkStopVolts + 1e-9; v += kStarkStepVolts)
    {
        voltages.push_back(v);
    }
    const std::vector<Port> ports = with_port(s.ports, Port::drop);
    const PortSpectra without = port_spectrum(without_molecules(model), std::vector<Port>{Port::drop}, s.workers);

    std::vector<PortSpectra> steps(voltages.size());
    std::vector<Spectrum> normalized(voltages.size());
    for (std::size_t k = 0; k < voltages.size(); ++k)
    {
        steps[k] = port_spectrum(apply_stark(model, voltages[k]), ports, s.workers);
        normalized[k] = normalized_drop(steps[k], without);
    }

    std::ostringstream waterfall;
    waterfall << "voltage_V,frequency_THz,detuning_GHz,port,re_amplitude,im_amplitude,intensity\n";
    for (std::size_t k = 0; k < voltages.size(); ++k)
    {
        const PortSpectra &sp = steps[k];
        for (std::size_t i = 0; i < sp.detuning_ghz.size(); ++i)
        {
            for (Port p : s.ports)
            {
                const cplx a = sp.amplitude[sp.slot(p)][i];
                waterfall << format_number(voltages[k]) << ','
                          << format_number(sp.origin_thz + units::ghz_to_thz(sp.detuning_ghz[i])) << ','
                          << format_number(sp.detuning_ghz[i]) << ',' << to_string(p) << ','
                          << format_number(a.real()) << ',' << format_number(a.imag()) << ','
                          << format_number(std::norm(a)) << '\n';
            }
        }
    }
    add_file(bundle, "spectra.csv", waterfall.str());

    WaterfallInit init;
    init.molecules = model.emitters.size();
    init.workers = s.workers;
    double widest = 0.0;
    for (std::size_t j = 0; j < model.emitters.size(); ++j)
    {
        const double detuning =
            units::thz_to_ghz(model.emitters[j].transition_frequency_thz - model.fundamental().center_frequency_thz);
        widest = std::max(widest, effective_emitter_response(model, j, detuning).linewidth_mhz);
    }
    init.linewidth_ghz = units::mhz_to_ghz(widest);
    const WaterfallResult tracks = track_waterfall(normalized, voltages, unit_background(), init);

    std::ostringstream track_table;
    track_table << "voltage_V,molecule,center_THz,center_detuning_GHz,merged\n";
    for (std::size_t k = 0; k < voltages.size(); ++k)
    {
        for (std::size_t j = 0; j < tracks.molecules(); ++j)
        {
            const auto &c = tracks.steps[k].center_ghz[j];
            track_table << format_number(voltages[k]) << ',' << j << ','
                        << (c ? format_number(tracks.origin_thz + units::ghz_to_thz(*c)) : std::string()) << ','
                        << (c ? format_number(*c) : std::string()) << ','
                        << (tracks.steps[k].merged[j] ? "true" : "false") << '\n';
        }
    }
    add_file(bundle, "tracks.csv", track_table.str());

    json lines = json::array();
    std::vector<TrackLine> fitted;
    for (std::size_t j = 0; j < tracks.molecules(); ++j)
    {
        fitted.push_back(fit_track_line(tracks, j));
        lines.push_back({{"molecule", j},
                         {"stark_MHz_per_V", units::ghz_to_mhz(fitted.back().slope)},
                         {"intercept_detuning_GHz", fitted.back().intercept},
                         {"points", fitted.back().points},
                         {"rms_MHz", units::ghz_to_mhz(fitted.back().rms_ghz)}});
    }
    const double crossing = track_crossing(fitted[0], fitted[1]);
    add_file(bundle, "fit.json", dump_json({{"port", "drop"}, {"tracks", lines}, {"crossing_V", crossing}}));

    const Emitter &a = model.emitters[0];
    const Emitter &b = model.emitters[1];
    const double configured_crossing =
        units::ghz_to_mhz(units::thz_to_ghz(b.transition_frequency_thz - a.transition_frequency_thz)) /
        (a.stark_mhz_per_volt - b.stark_mhz_per_volt);
    const SystemModel at_crossing = apply_stark(model, std::round(crossing));
    QedMetrics metrics;
    metrics.entries.push_back({"crossing_voltage", crossing, "V", "fitted"});
    metrics.entries.push_back({"configured_crossing_voltage", configured_crossing, "V", "configured"});
    metrics.entries.push_back(
        {"residual_detuning_at_crossing",
         std::abs(units::ghz_to_mhz(units::thz_to_ghz(at_crossing.emitters[0].transition_frequency_thz -
                                                      at_crossing.emitters[1].transition_frequency_thz))),
         "MHz", "derived"});
    for (std::size_t j = 0; j < fitted.size(); ++j)
    {
        metrics.entries.push_back(
            {"stark_coefficient_" + std::to_string(j), units::ghz_to_mhz(fitted[j].slope), "MHz/V", "fitted"});
    }
    add_file(bundle, "metrics.json", dump_json(metrics_json(metrics)));
}

void run_fig3bc(const Scenario &s, ScenarioBundle &bundle)
{
    const SystemModel model = require_model(
        s, fixtures::two_molecules(0.75, fixtures::kM2Efficiency, fixtures::kMeasuredPhaseDifference * std::numbers::pi,
                                   10.0));
    require_emitters(model, 2, "fig3bc");
    add_file(bundle, "spectra.csv", spectra_csv(port_spectrum(model, s.ports, s.workers)));

    const std::vector<Port> internal{Port::drop, Port::int1};
    SystemModel first_only = model;
    first_only.emitters.resize(1);
    const PortSpectra both = port_spectrum(model, internal, s.workers);
    const PortSpectra one = port_spectrum(first_only, internal, s.workers);
    const PortSpectra none = port_spectrum(without_molecules(model), internal, s.workers);

    const auto dip = [&](const PortSpectra &p) {
        return molecular_dip(p.intensities(Port::drop), none.intensities(Port::drop));
    };
    const auto modulation = [&](const PortSpectra &p) {
        return signal_modulation(p.intensities(Port::int1), none.intensities(Port::int1));
    };
    QedMetrics metrics;
    metrics.entries.push_back({"drop_dip", dip(both), "", "derived"});
    metrics.entries.push_back({"single_molecule_drop_dip", dip(one), "", "derived"});
    metrics.entries.push_back({"interferometer_modulation", modulation(both), "", "derived"});
    metrics.entries.push_back({"single_molecule_interferometer_modulation", modulation(one), "", "derived"});
    const double phase = model.coupling_phase(1, model.fundamental_index()) - model.coupling_phase(0, model.fundamental_index());
    metrics.entries.push_back({"round_trip_phase_difference", 2.0 * phase / std::numbers::pi, "pi rad", "configured"});
    add_file(bundle, "metrics.json", dump_json(metrics_json(metrics)));
}

void run_custom(const Scenario &s, ScenarioBundle &bundle)
{
    if (!s.model)
    {
        throw ValidationError("custom scenario requires a configuration");
    }
    const SystemModel model = require_model(s, {});
    add_file(bundle, "spectra.csv", spectra_csv(port_spectrum(model, s.ports, s.workers)));
    if (model.emitters.size() == 1)
    {
        json fit_doc = to_json(fit_molecular_line(model, s.workers));
        fit_doc["port"] = "drop";
        fit_doc["background_source"] = "molecule-free simulation";
        add_file(bundle, "fit.json", dump_json(fit_doc));
    }
    add_file(bundle, "metrics.json", dump_json(metrics_json(metrics_from_model(model))));
}

template <typename Body>
void with_context(const std::string &scenario, Body &&body)
{
    const std::string prefix = "scenario " + scenario + ": ";
    try
    {
        body();
    }
    catch (const FitError &e)
    {
        throw FitError(prefix + e.what(), e.last_residual());
    }
    catch (const ParseError &e)
    {
        throw ParseError(e.path(), prefix + e.what());
    }
    catch (const ValidationError &e)
    {
        throw ValidationError(prefix + e.what());
    }
    catch (const DomainError &e)
    {
        throw DomainError(prefix + e.what());
    }
    catch (const InterfaceError &e)
    {
        throw InterfaceError(prefix + e.what());
    }
    catch (const NumericalError &e)
    {
        throw NumericalError(prefix + e.what());
    }
    catch (const IoError &e)
    {
        throw IoError(prefix + e.what());
    }
}

} // namespace

const OutputFile *ScenarioBundle::find(const std::string &name) const
{
    const auto it = std::find_if(files.begin(), files.end(), [&](const OutputFile &f) { return f.name == name; });
    return it == files.end() ? nullptr : &*it;
}

std::vector<std::string> preset_names() { return {"fig1c", "fig2a", "fig2b", "fig2d", "fig3a", "fig3bc"}; }

bool is_preset(const std::string &name)
{
    const auto names = preset_names();
    return std::find(names.begin(), names.end(), name) != names.end();
}

std::string_view to_string(SweepAxis axis)
{
    switch (axis)
    {
    case SweepAxis::laser_frequency:
        return "laser-frequency";
    case SweepAxis::cavity_detuning:
        return "cavity-detuning";
    case SweepAxis::stark_voltage:
        return "stark-voltage";
    }
    return "?";
}

ScenarioBundle run_scenario(const Scenario &scenario)
{
    if (scenario.ports.empty())
    {
        throw ValidationError("scenario " + scenario.name + ": port list is empty");
    }
    if (scenario.name != "custom" && !is_preset(scenario.name))
    {
        throw ValidationError("unknown scenario \"" + scenario.name + "\"");
    }
    const auto start = std::chrono::steady_clock::now();
    ScenarioBundle bundle;
    bundle.scenario = scenario.name;
    with_context(scenario.name, [&] {
        const std::string &n = scenario.name;
        if (n == "fig1c")
            run_fig1c(scenario, bundle);
        else if (n == "fig2a")
            run_single_line(scenario, bundle, fixtures::single_molecule(), n);
        else if (n == "fig2b")
        {
            SystemModel m2 = fixtures::single_molecule();
            m2.emitters = {fixtures::m2_emitter()};
            run_single_line(scenario, bundle, m2, n);
        }
        else if (n == "fig2d")
            run_fig2d(scenario, bundle);
        else if (n == "fig3a")
            run_fig3a(scenario, bundle);
        else if (n == "fig3bc")
            run_fig3bc(scenario, bundle);
        else
            run_custom(scenario, bundle);
    });
    const double elapsed_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();

    json ports = json::array();
    for (Port p : scenario.ports)
    {
        ports.push_back(std::string(to_string(p)));
    }
    const std::string config = scenario.config_text.empty() && scenario.model
                                   ? save_model(*scenario.model).dump()
                                   : scenario.config_text;
    json outputs = json::object();
    for (const OutputFile &f : bundle.files)
    {
        outputs[f.name] = sha256_hex(f.content);
    }
    bundle.manifest = {
        {"tool", kToolName},
        {"version", kToolVersion},
        {"scenario", scenario.name},
        {"sweep_axis", std::string(to_string(bundle.axis))},
        {"ports", ports},
        {"config_sha256", config.empty() ? json(nullptr) : json(sha256_hex(config))},
        {"outputs", outputs},
        {"timings_ms", {{"total", elapsed_ms}}},
    };
    return bundle;
}

void write_bundle(const ScenarioBundle &bundle, const std::filesystem::path &directory)
{
    std::error_code ec;
    std::filesystem::create_directories(directory, ec);
    if (ec)
    {
        throw IoError("cannot create " + directory.string() + ": " + ec.message());
    }
    const auto write = [&](const std::string &name, const std::string &content) {
        std::ofstream out(directory / name, std::ios::binary);
        out << content;
        if (!out)
        {
            throw IoError("cannot write " + (directory / name).string());
        }
    };
    for (const OutputFile &f : bundle.files)
    {
        write(f.name, f.content);
    }
    write("manifest.json", dump_json(bundle.manifest));
}

} // namespace wgm
