#ifndef WGM_QED_METRICS_HPP
#define WGM_QED_METRICS_HPP

#include "wgm/model.hpp"

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace wgm
{

struct PurcellFigures
{
    double purcell = 0.0;      // F
    double alpha_prime = 0.0;  // cavity-enhanced ZPL branching ratio
    double beta = 0.0;         // fraction of the emission into the cavity
};

// gamma' = (1 + F) alpha0 gamma0 + (1 - alpha0) gamma0.
PurcellFigures purcell_from_linewidth(double enhanced_linewidth_mhz, double free_linewidth_mhz, double branching_ratio);

// Residual transmission on the molecular resonance: a ring with two
// counter-propagating modes, and a single-mode Fabry-Perot.
double extinction_ring(double beta);
double extinction_fabry_perot(double beta);

struct CollectiveCoupling
{
    double g_eff_ghz = 0.0;
    double cooperativity = 0.0;
    double exchange_ghz = 0.0; // J
};

CollectiveCoupling cooperativity_exchange(double g_ghz, double kappa_ghz, double free_linewidth_ghz);

struct SuperSub
{
    double super_mhz = 0.0;
    double sub_mhz = 0.0;
};

// Linewidths of the two collective states of two degenerate emitters after
// eliminating the cavity, with the fundamental resonance at detuning
// (omega_m - omega_r). A given phase difference replaces the configured one
// on the fundamental pair and scales with m_p / m_1 on the others.
SuperSub super_sub_linewidths(const SystemModel &model, std::optional<double> phase_difference_rad,
                              double cavity_detuning_ghz);

double fluorescence_scaling(double linewidth_mhz, double reference_linewidth_mhz);

// Depth of the molecular dip: 1 - min(with / without) over a common grid.
double molecular_dip(const std::vector<double> &with_molecules, const std::vector<double> &without_molecules);

// Largest change the molecules make to a trace: max |with - without|.
double signal_modulation(const std::vector<double> &with_molecules, const std::vector<double> &without_molecules);

struct Metric
{
    std::string name;
    double value = 0.0;
    std::string unit;
    std::string provenance; // fitted, configured or derived
};

struct QedMetrics
{
    std::vector<Metric> entries;

    const Metric *find(const std::string &name) const;
    double value(const std::string &name) const;
};

// Metrics derived from a model: the first emitter's Purcell figures at zero
// cavity detuning, the collective figures of the first two emitters, the
// standing-wave visibility on double resonance and the resonator figures.
QedMetrics metrics_from_model(const SystemModel &model);

// Metrics from a fitted linewidth and the configured free-space values.
QedMetrics metrics_from_linewidth(double fitted_linewidth_mhz, double free_linewidth_mhz, double branching_ratio);

nlohmann::json to_json(const QedMetrics &metrics);

} // namespace wgm

#endif
