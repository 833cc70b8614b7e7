#ifndef WGM_FIXTURES_HPP
#define WGM_FIXTURES_HPP

#include "wgm/model.hpp"

#include <cstddef>
#include <vector>

namespace wgm::fixtures
{

// Reference device: a microdisc resonance at 404.935 THz with a 27 GHz
// linewidth, under-coupled to two bus waveguides so that the bare
// transmission dip is 40%.
inline constexpr double kCenterThz = 404.935;
inline constexpr double kLinewidthGhz = 27.0;
inline constexpr double kFreeSpectralRangeThz = 6.3;
inline constexpr int kAzimuthalOrder = 48;
inline constexpr double kExternalFraction = 0.1127; // per waveguide, of kappa

inline constexpr double kFreeLinewidthMhz = 33.0;
inline constexpr double kBranchingRatio = 1.0 / 3.0;
inline constexpr double kM1EnhancedLinewidthMhz = 125.0;
inline constexpr double kM2Efficiency = 0.56;

// Stark calibration of the two-molecule device: opposite-sign shifts that
// bring both lines together near -110 V, 4 GHz below the resonance.
inline constexpr double kM1StarkMhzPerVolt = 8.0;
inline constexpr double kM2StarkMhzPerVolt = -6.0;
inline constexpr double kM1OffsetGhz = -3.115;
inline constexpr double kM2OffsetGhz = -4.665;
inline constexpr double kMeasuredPhaseDifference = 0.58; // in units of pi

std::vector<double> linspace(double start, double stop, std::size_t points);

ModePair fundamental_pair();
ModePair second_order_pair(const ModePair &fundamental);

// Emitters on the fundamental resonance unless moved.
Emitter m1_emitter();
Emitter m2_emitter();

// Resonator alone, drive over +-3 linewidths.
SystemModel resonator();

// Resonator with M1 on resonance, drive over +-1 GHz around it.
SystemModel single_molecule();

// Two emitters with coupling efficiencies beta1, beta2, coupling phase
// difference and a symmetric residual detuning about the resonance.
SystemModel two_molecules(double beta1, double beta2, double phase_difference_rad, double residual_detuning_mhz);

// Fundamental plus broad second-order pair, M1 on the fundamental resonance.
SystemModel two_pair_single_molecule();

// Stark-tunable pair at V = 0 with a drive window covering both lines over
// the -160..0 V sweep.
SystemModel stark_pair();

} // namespace wgm::fixtures

#endif
