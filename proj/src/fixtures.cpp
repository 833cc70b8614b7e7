#include "wgm/fixtures.hpp"

#include "wgm/units.hpp"

#include <numbers>

namespace wgm::fixtures
{

std::vector<double> linspace(double start, double stop, std::size_t points)
{
    std::vector<double> out(points);
    for (std::size_t i = 0; i < points; ++i)
    {
        out[i] = points == 1 ? start : start + (stop - start) * double(i) / double(points - 1);
    }
    return out;
}

ModePair fundamental_pair()
{
    ModePair p;
    p.label = ModeLabel::fundamental;
    p.center_frequency_thz = kCenterThz;
    p.linewidth_ghz = kLinewidthGhz;
    p.external_coupling_ghz = {kExternalFraction * kLinewidthGhz, kExternalFraction * kLinewidthGhz};
    p.intrinsic_loss_ghz = kLinewidthGhz - p.total_external_ghz();
    p.azimuthal_order = kAzimuthalOrder;
    p.free_spectral_range_thz = kFreeSpectralRangeThz;
    return p;
}

ModePair second_order_pair(const ModePair &fundamental)
{
    ModePair p = fundamental;
    p.label = ModeLabel::second_order;
    p.linewidth_ghz = 10.0 * fundamental.linewidth_ghz;
    p.center_frequency_thz = fundamental.center_frequency_thz + units::ghz_to_thz(30.0);
    p.intrinsic_loss_ghz = p.linewidth_ghz - p.total_external_ghz();
    p.free_spectral_range_thz = 0.0;
    return p;
}

namespace
{

Emitter base_emitter(const std::string &name)
{
    Emitter e;
    e.name = name;
    e.transition_frequency_thz = kCenterThz;
    e.linewidth_mhz = kFreeLinewidthMhz;
    e.branching_ratio = kBranchingRatio;
    return e;
}

} // namespace

Emitter m1_emitter()
{
    Emitter e = base_emitter("M1");
    e.coupling_mhz = {coupling_for_enhanced_linewidth(kM1EnhancedLinewidthMhz, e.coherence_linewidth_mhz(), kLinewidthGhz)};
    e.stark_mhz_per_volt = kM1StarkMhzPerVolt;
    return e;
}

Emitter m2_emitter()
{
    Emitter e = base_emitter("M2");
    e.coupling_mhz = {coupling_for_efficiency(kM2Efficiency, e.coherence_linewidth_mhz(), kLinewidthGhz)};
    e.stark_mhz_per_volt = kM2StarkMhzPerVolt;
    return e;
}

SystemModel resonator()
{
    SystemModel m;
    m.mode_pairs = {fundamental_pair()};
    m.drive.origin_thz = kCenterThz;
    m.drive.detuning_ghz = linspace(-3.0 * kLinewidthGhz, 3.0 * kLinewidthGhz, 601);
    return m;
}

SystemModel single_molecule()
{
    SystemModel m = resonator();
    m.emitters = {m1_emitter()};
    m.drive.detuning_ghz = linspace(-1.0, 1.0, 801);
    return m;
}

SystemModel two_molecules(double beta1, double beta2, double phase_difference_rad, double residual_detuning_mhz)
{
    SystemModel m = resonator();
    Emitter a = base_emitter("M1");
    Emitter b = base_emitter("M2");
    a.coupling_mhz = {coupling_for_efficiency(beta1, a.coherence_linewidth_mhz(), kLinewidthGhz)};
    b.coupling_mhz = {coupling_for_efficiency(beta2, b.coherence_linewidth_mhz(), kLinewidthGhz)};
    a.coupling_phase_rad = {0.0};
    b.coupling_phase_rad = {phase_difference_rad};
    const double half = units::ghz_to_thz(units::mhz_to_ghz(0.5 * residual_detuning_mhz));
    a.transition_frequency_thz = kCenterThz + half;
    b.transition_frequency_thz = kCenterThz - half;
    m.emitters = {a, b};
    m.drive.detuning_ghz = linspace(-1.0, 1.0, 801);
    return m;
}

SystemModel two_pair_single_molecule()
{
    SystemModel m = single_molecule();
    m.mode_pairs.push_back(second_order_pair(m.mode_pairs.front()));
    Emitter &e = m.emitters.front();
    e.coupling_mhz.push_back(0.5 * e.coupling_mhz.front());
    return m;
}

SystemModel stark_pair()
{
    SystemModel m = resonator();
    Emitter a = m1_emitter();
    Emitter b = m2_emitter();
    a.transition_frequency_thz = kCenterThz + units::ghz_to_thz(kM1OffsetGhz);
    b.transition_frequency_thz = kCenterThz + units::ghz_to_thz(kM2OffsetGhz);
    a.coupling_phase_rad = {0.0};
    b.coupling_phase_rad = {kMeasuredPhaseDifference * std::numbers::pi};
    m.emitters = {a, b};
    m.drive.detuning_ghz = linspace(-5.5, -2.5, 601);
    return m;
}

} // namespace wgm::fixtures
