#include "wgm/qed_metrics.hpp"

#include "wgm/errors.hpp"
#include "wgm/solver.hpp"
#include "wgm/units.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>

namespace wgm
{

PurcellFigures purcell_from_linewidth(double enhanced_linewidth_mhz, double free_linewidth_mhz, double branching_ratio)
{
    if (!(free_linewidth_mhz > 0.0))
    {
        throw DomainError("purcell_from_linewidth: free-space linewidth must be positive");
    }
    if (!(branching_ratio > 0.0 && branching_ratio <= 1.0))
    {
        throw DomainError("purcell_from_linewidth: branching ratio must lie in (0, 1]");
    }
    if (!(enhanced_linewidth_mhz >= free_linewidth_mhz))
    {
        throw DomainError("purcell_from_linewidth: enhanced linewidth below the free-space linewidth");
    }
    const double zpl = branching_ratio * free_linewidth_mhz;
    PurcellFigures out;
    out.purcell = (enhanced_linewidth_mhz - free_linewidth_mhz) / zpl;
    out.alpha_prime = (1.0 + out.purcell) * zpl / enhanced_linewidth_mhz;
    out.beta = out.purcell * zpl / enhanced_linewidth_mhz;
    return out;
}

namespace
{

void check_beta(double beta, const char *who)
{
    if (!(beta >= 0.0 && beta <= 1.0))
    {
        throw DomainError(std::string(who) + ": beta must lie in [0, 1]");
    }
}

} // namespace

double extinction_ring(double beta)
{
    check_beta(beta, "extinction_ring");
    const double t = 1.0 - beta / 2.0;
    return t * t;
}

double extinction_fabry_perot(double beta)
{
    check_beta(beta, "extinction_fabry_perot");
    const double t = 1.0 - beta;
    return t * t;
}

CollectiveCoupling cooperativity_exchange(double g_ghz, double kappa_ghz, double free_linewidth_ghz)
{
    if (!(g_ghz >= 0.0) || !(kappa_ghz > 0.0) || !(free_linewidth_ghz > 0.0))
    {
        throw DomainError("cooperativity_exchange: rates must be positive");
    }
    CollectiveCoupling out;
    out.g_eff_ghz = std::sqrt(2.0) * g_ghz;
    const double g2 = out.g_eff_ghz * out.g_eff_ghz;
    out.cooperativity = 4.0 * g2 / (kappa_ghz * free_linewidth_ghz);
    out.exchange_ghz = g2 / kappa_ghz;
    return out;
}

SuperSub super_sub_linewidths(const SystemModel &model, std::optional<double> phase_difference_rad,
                              double cavity_detuning_ghz)
{
    if (model.emitters.size() != 2)
    {
        throw DomainError("super_sub_linewidths: exactly two emitters are required");
    }
    const Emitter &e0 = model.emitters[0];
    const Emitter &e1 = model.emitters[1];
    if (std::abs(units::thz_to_ghz(e0.transition_frequency_thz - e1.transition_frequency_thz)) > 1e-9)
    {
        throw DomainError("super_sub_linewidths: emitters are not degenerate");
    }

    SystemModel local = model;
    if (phase_difference_rad)
    {
        const double m1 = double(model.fundamental().azimuthal_order);
        std::vector<double> phase0(model.mode_pairs.size());
        std::vector<double> phase1(model.mode_pairs.size());
        for (std::size_t p = 0; p < model.mode_pairs.size(); ++p)
        {
            phase0[p] = model.coupling_phase(0, p);
            phase1[p] = phase0[p] + *phase_difference_rad * double(model.mode_pairs[p].azimuthal_order) / m1;
        }
        local.emitters[0].coupling_phase_rad = phase0;
        local.emitters[1].coupling_phase_rad = phase1;
    }
    local = with_cavity_detuning(local, 0, cavity_detuning_ghz);

    const Eigen::MatrixXcd h = effective_emitter_matrix(local, e0.transition_frequency_thz);
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> eig(h, false);
    std::vector<double> widths;
    for (Eigen::Index i = 0; i < eig.eigenvalues().size(); ++i)
    {
        widths.push_back(units::ghz_to_mhz(-2.0 * eig.eigenvalues()(i).real()));
    }
    std::sort(widths.begin(), widths.end());
    return {widths[1], widths[0]};
}

double fluorescence_scaling(double linewidth_mhz, double reference_linewidth_mhz)
{
    if (!(linewidth_mhz > 0.0) || !(reference_linewidth_mhz > 0.0))
    {
        throw DomainError("fluorescence_scaling: linewidths must be positive");
    }
    const double r = reference_linewidth_mhz / linewidth_mhz;
    return r * r;
}

namespace
{

void check_traces(const std::vector<double> &a, const std::vector<double> &b, const char *who)
{
    if (a.size() != b.size() || a.empty())
    {
        throw InterfaceError(std::string(who) + ": traces must be non-empty and of equal length");
    }
}

} // namespace

double molecular_dip(const std::vector<double> &with_molecules, const std::vector<double> &without_molecules)
{
    check_traces(with_molecules, without_molecules, "molecular_dip");
    double lowest = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < with_molecules.size(); ++i)
    {
        if (!(without_molecules[i] > 0.0))
        {
            throw DomainError("molecular_dip: reference trace must be positive");
        }
        lowest = std::min(lowest, with_molecules[i] / without_molecules[i]);
    }
    return 1.0 - lowest;
}

double signal_modulation(const std::vector<double> &with_molecules, const std::vector<double> &without_molecules)
{
    check_traces(with_molecules, without_molecules, "signal_modulation");
    double largest = 0.0;
    for (std::size_t i = 0; i < with_molecules.size(); ++i)
    {
        largest = std::max(largest, std::abs(with_molecules[i] - without_molecules[i]));
    }
    return largest;
}

const Metric *QedMetrics::find(const std::string &name) const
{
    const auto it = std::find_if(entries.begin(), entries.end(), [&](const Metric &m) { return m.name == name; });
    return it == entries.end() ? nullptr : &*it;
}

double QedMetrics::value(const std::string &name) const
{
    const Metric *m = find(name);
    if (!m)
    {
        throw InterfaceError("no metric named " + name);
    }
    return m->value;
}

namespace
{

void add_purcell(QedMetrics &out, double enhanced_mhz, double free_mhz, double alpha0, const std::string &source)
{
    const PurcellFigures p = purcell_from_linewidth(enhanced_mhz, free_mhz, alpha0);
    out.entries.push_back({"enhanced_linewidth", enhanced_mhz, "MHz", source});
    out.entries.push_back({"purcell_factor", p.purcell, "", "derived"});
    out.entries.push_back({"alpha_prime", p.alpha_prime, "", "derived"});
    out.entries.push_back({"beta", p.beta, "", "derived"});
    out.entries.push_back({"transmission_ring", extinction_ring(p.beta), "", "derived"});
    out.entries.push_back({"transmission_fabry_perot", extinction_fabry_perot(p.beta), "", "derived"});
}

} // namespace

QedMetrics metrics_from_model(const SystemModel &model)
{
    validate(model);
    QedMetrics out;
    const ModePair &pair = model.fundamental();
    const std::size_t fp = model.fundamental_index();

    if (!model.emitters.empty())
    {
        const Emitter &e = model.emitters.front();
        const EmitterResponse r = effective_emitter_response(model, 0, 0.0);
        const double population_mhz = r.linewidth_mhz - 2.0 * e.dephasing_mhz;
        add_purcell(out, population_mhz, e.linewidth_mhz, e.branching_ratio, "configured");

        const double g = e.coupling_mhz.empty() ? 0.0 : e.coupling_mhz[fp];
        const CollectiveCoupling c =
            cooperativity_exchange(units::mhz_to_ghz(g), pair.linewidth_ghz, units::mhz_to_ghz(e.linewidth_mhz));
        out.entries.push_back({"g_eff", units::ghz_to_mhz(c.g_eff_ghz), "MHz", "configured"});
        out.entries.push_back({"cooperativity", c.cooperativity, "", "configured"});
        out.entries.push_back({"exchange_J", units::ghz_to_mhz(c.exchange_ghz), "MHz", "configured"});

        const SystemModel resonant = with_cavity_detuning(model, 0, 0.0);
        const StateAmplitudes state = solve_at(resonant, e.transition_frequency_thz);
        out.entries.push_back(
            {"visibility", standing_wave_visibility(state.cw[fp], state.ccw[fp]), "", "configured"});

        if (model.emitters.size() >= 2)
        {
            SystemModel pairwise = model;
            pairwise.emitters.resize(2);
            pairwise.emitters[1].transition_frequency_thz = e.transition_frequency_thz;
            const SuperSub at_zero = super_sub_linewidths(pairwise, std::nullopt, 0.0);
            const SuperSub at_kappa = super_sub_linewidths(pairwise, std::nullopt, pair.linewidth_ghz);
            out.entries.push_back({"gamma_super", at_zero.super_mhz, "MHz", "configured"});
            out.entries.push_back({"gamma_sub", at_zero.sub_mhz, "MHz", "configured"});
            out.entries.push_back({"gamma_super_detuned_kappa", at_kappa.super_mhz, "MHz", "configured"});
            out.entries.push_back({"gamma_sub_detuned_kappa", at_kappa.sub_mhz, "MHz", "configured"});
        }
    }

    if (pair.free_spectral_range_thz > 0.0)
    {
        const ResonatorFigures f =
            resonator_figures(pair.center_frequency_thz, pair.linewidth_ghz, pair.free_spectral_range_thz);
        out.entries.push_back({"finesse", f.finesse, "", "configured"});
        out.entries.push_back({"quality_factor", f.quality_factor, "", "configured"});
    }
    return out;
}

QedMetrics metrics_from_linewidth(double fitted_linewidth_mhz, double free_linewidth_mhz, double branching_ratio)
{
    QedMetrics out;
    add_purcell(out, fitted_linewidth_mhz, free_linewidth_mhz, branching_ratio, "fitted");
    out.entries.push_back({"free_linewidth", free_linewidth_mhz, "MHz", "configured"});
    out.entries.push_back({"branching_ratio", branching_ratio, "", "configured"});
    return out;
}

nlohmann::json to_json(const QedMetrics &metrics)
{
    nlohmann::json out = nlohmann::json::object();
    for (const Metric &m : metrics.entries)
    {
        out[m.name] = {{"value", m.value}, {"unit", m.unit}, {"provenance", m.provenance}};
    }
    return out;
}

} // namespace wgm
