#include "wgm/time_domain.hpp"

#include "wgm/errors.hpp"
#include "wgm/format.hpp"

#include <cmath>
#include <limits>
#include <vector>

#include <boost/numeric/odeint.hpp>

namespace wgm
{
namespace
{

using State = std::vector<cplx>;

Eigen::Map<const Eigen::VectorXcd> view(const State &x)
{
    return {x.data(), Eigen::Index(x.size())};
}

} // namespace

StateAmplitudes time_domain_oracle(const SystemModel &model, double laser_frequency_thz, double t_end,
                                   double tolerance, cplx input_amplitude)
{
    namespace odeint = boost::numeric::odeint;

    const LinearSystem system = assemble_linear_system(model, laser_frequency_thz, input_amplitude);
    const Eigen::MatrixXcd &evolution = system.evolution;
    const Eigen::VectorXcd drive = -system.rhs;
    const double floor = dissipation_floor(evolution);
    if (!(floor > 0.0))
    {
        throw NumericalError("time_domain_oracle: no uniform decay bound (a loss-free subspace exists)");
    }
    if (t_end <= 0.0)
    {
        t_end = 40.0 / floor;
    }

    const auto rhs = [&](const State &x, State &dxdt, double) {
        Eigen::Map<Eigen::VectorXcd>(dxdt.data(), Eigen::Index(dxdt.size())) = evolution * view(x) + drive;
    };
    const auto slope = [&](const State &x) { return (evolution * view(x) + drive).norm(); };

    State x(system.index.size(), cplx{});
    if (drive.norm() == 0.0)
    {
        return StateAmplitudes::unflatten(view(x), system.index, laser_frequency_thz, input_amplitude);
    }

    auto stepper = odeint::make_controlled(1e-14, 1e-12, odeint::runge_kutta_dopri5<State>());
    const double chunk = 2.0 / floor;
    double t = 0.0;
    double dt = 1e-3 / std::max(1.0, evolution.cwiseAbs().maxCoeff());
    // |x - x*| <= |E x + f| / floor for a matrix with dissipative floor.
    // Integration continues well below the tolerance until the slope stops
    // falling at the integrator's noise level.
    double last_slope = std::numeric_limits<double>::infinity();
    const auto bound = [&] { return slope(x) / floor / view(x).norm(); };
    while (t < t_end)
    {
        const double stop = std::min(t + chunk, t_end);
        odeint::integrate_adaptive(stepper, rhs, x, t, stop, dt);
        t = stop;
        const double current = slope(x);
        const double relative = bound();
        if (relative <= 1e-3 * tolerance || (current > 0.5 * last_slope && relative <= tolerance))
        {
            return StateAmplitudes::unflatten(view(x), system.index, laser_frequency_thz, input_amplitude);
        }
        last_slope = current;
    }
    if (bound() <= tolerance)
    {
        return StateAmplitudes::unflatten(view(x), system.index, laser_frequency_thz, input_amplitude);
    }
    throw NumericalError("time_domain_oracle: not converged by t_end, residual slope " + format_number(slope(x)));
}

} // namespace wgm
