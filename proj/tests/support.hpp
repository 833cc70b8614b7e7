#ifndef WGM_TESTS_SUPPORT_HPP
#define WGM_TESTS_SUPPORT_HPP

#include "wgm/model.hpp"
#include "wgm/solver.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

namespace wgm::test
{

inline double uniform(std::mt19937_64 &rng, double lo, double hi)
{
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline double relative_difference(double a, double b)
{
    const double scale = std::max(std::abs(a), std::abs(b));
    return scale == 0.0 ? 0.0 : std::abs(a - b) / scale;
}

inline double vector_relative_difference(const Eigen::VectorXcd &a, const Eigen::VectorXcd &b)
{
    const double scale = std::max(a.norm(), b.norm());
    return scale == 0.0 ? 0.0 : (a - b).norm() / scale;
}

inline ModePair random_pair(std::mt19937_64 &rng, ModeLabel label, double center_thz)
{
    ModePair p;
    p.label = label;
    p.center_frequency_thz = center_thz;
    p.linewidth_ghz = uniform(rng, 5.0, 40.0);
    p.external_coupling_ghz = {p.linewidth_ghz * uniform(rng, 0.0, 0.45), p.linewidth_ghz * uniform(rng, 0.0, 0.45)};
    p.intrinsic_loss_ghz = p.linewidth_ghz - p.total_external_ghz();
    p.backscatter_ghz = uniform(rng, 0.0, 1.0) < 0.3 ? 0.0 : uniform(rng, 0.0, 8.0);
    p.azimuthal_order = int(uniform(rng, 10.0, 60.0));
    return p;
}

// A valid model with one or two mode pairs and up to three emitters near the
// fundamental resonance, driven on a short grid around it.
inline SystemModel random_model(std::mt19937_64 &rng, std::size_t max_emitters = 3)
{
    SystemModel m;
    const double center = uniform(rng, 300.0, 500.0);
    m.mode_pairs.push_back(random_pair(rng, ModeLabel::fundamental, center));
    if (uniform(rng, 0.0, 1.0) < 0.4)
    {
        m.mode_pairs.push_back(random_pair(rng, ModeLabel::second_order, center + uniform(rng, 0.01, 0.05)));
    }
    const auto emitters = std::size_t(uniform(rng, 0.0, double(max_emitters) + 0.999));
    for (std::size_t j = 0; j < emitters; ++j)
    {
        Emitter e;
        e.name = "E" + std::to_string(j);
        e.transition_frequency_thz = center + uniform(rng, -0.02, 0.02);
        e.linewidth_mhz = uniform(rng, 20.0, 300.0);
        e.branching_ratio = uniform(rng, 0.05, 1.0);
        e.dephasing_mhz = uniform(rng, 0.0, 1.0) < 0.5 ? 0.0 : uniform(rng, 0.0, 50.0);
        for (std::size_t p = 0; p < m.mode_pairs.size(); ++p)
        {
            e.coupling_mhz.push_back(uniform(rng, 0.0, 2000.0));
        }
        e.azimuth_rad = uniform(rng, 0.0, 2.0 * std::numbers::pi);
        e.stark_mhz_per_volt = uniform(rng, -10.0, 10.0);
        m.emitters.push_back(e);
    }
    m.drive.origin_thz = center;
    m.drive.detuning_ghz = {-15.0, -1.0, 0.0, 0.7, 12.0};
    return m;
}

inline double random_laser_thz(std::mt19937_64 &rng, const SystemModel &m)
{
    return m.fundamental().center_frequency_thz + uniform(rng, -0.03, 0.03);
}

} // namespace wgm::test

#endif
