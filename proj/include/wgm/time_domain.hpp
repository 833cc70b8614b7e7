#ifndef WGM_TIME_DOMAIN_HPP
#define WGM_TIME_DOMAIN_HPP

#include "wgm/solver.hpp"

namespace wgm
{

// Integrates the coupled-mode equations from the empty state until the
// steady state is reached, as an independent check of solve_steady_state.
//
// Time is measured in units of 1/(2 pi GHz), matching rates stored as
// ordinary frequencies. t_end <= 0 selects 40 decay times of the slowest
// possible mode. The residual slope |E x + f| bounds the distance to the
// fixed point; the result is returned once that bound is below
// 1e-3 * tolerance * |x|, or below tolerance * |x| when the slope has
// stopped falling.
StateAmplitudes time_domain_oracle(const SystemModel &model, double laser_frequency_thz, double t_end = 0.0,
                                   double tolerance = 1e-6, cplx input_amplitude = 1.0);

} // namespace wgm

#endif
