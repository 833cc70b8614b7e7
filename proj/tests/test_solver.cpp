#include "support.hpp"

#include "wgm/errors.hpp"
#include "wgm/fixtures.hpp"
#include "wgm/lineshape.hpp"
#include "wgm/solver.hpp"
#include "wgm/time_domain.hpp"
#include "wgm/units.hpp"

#include <doctest.h>

#include <numbers>
#include <sstream>

using namespace wgm;

namespace
{

const std::vector<Port> kAllPorts{Port::transmission, Port::drop, Port::add, Port::reflection, Port::int1, Port::int2};

SystemModel with_couplings_zeroed(SystemModel m)
{
    for (Emitter &e : m.emitters)
    {
        std::fill(e.coupling_mhz.begin(), e.coupling_mhz.end(), 0.0);
    }
    return m;
}

} // namespace

TEST_CASE("mode pairs couple only through shared waveguides and in the same direction")
{
    SystemModel m = fixtures::resonator();
    m.mode_pairs.push_back(fixtures::second_order_pair(m.mode_pairs[0]));
    const LinearSystem s = assemble_linear_system(m, m.drive.laser_frequency_thz(0));
    REQUIRE(s.evolution.rows() == 4);
    CHECK(s.evolution(0, 3) == 0.0);
    CHECK(s.evolution(1, 2) == 0.0);
    double shared = 0.0;
    for (int w = 0; w < 2; ++w)
    {
        shared += std::sqrt(m.mode_pairs[0].external_coupling_ghz[w] * m.mode_pairs[1].external_coupling_ghz[w]);
    }
    CHECK(s.evolution(0, 2).real() == doctest::Approx(-0.5 * shared));
    CHECK(s.evolution(1, 3) == s.evolution(0, 2));
    CHECK(s.evolution(2, 0) == s.evolution(0, 2));
    m.mode_pairs[0].external_coupling_ghz = {0.0, 0.0};
    m.mode_pairs[0].intrinsic_loss_ghz = m.mode_pairs[0].linewidth_ghz;
    const LinearSystem t = assemble_linear_system(m, m.drive.laser_frequency_thz(0));
    CHECK(t.evolution.block(0, 2, 2, 2).norm() == 0.0);
    CHECK(t.evolution.block(2, 0, 2, 2).norm() == 0.0);
}

TEST_CASE("resonator on resonance matches the add-drop closed form")
{
    const SystemModel m = fixtures::resonator();
    const ModePair &p = m.fundamental();
    const StateAmplitudes s = solve_at(m, p.center_frequency_thz);
    const double expected = 4.0 * p.external_coupling_ghz[0] / (p.linewidth_ghz * p.linewidth_ghz);
    CHECK(test::relative_difference(std::norm(s.cw[0]), expected) < 1e-12);
    CHECK(std::norm(s.ccw[0]) == 0.0);
    const double drop = std::norm(port_amplitude(m, s, Port::drop));
    CHECK(test::relative_difference(drop, 4.0 * p.external_coupling_ghz[0] * p.external_coupling_ghz[1] /
                                              (p.linewidth_ghz * p.linewidth_ghz)) < 1e-12);
    CHECK(1.0 - std::norm(port_amplitude(m, s, Port::transmission)) == doctest::Approx(0.40).epsilon(0.01));
}

TEST_CASE("drop port of the bare resonator is a Lorentzian of width kappa")
{
    const SystemModel m = fixtures::resonator();
    const double kappa = m.fundamental().linewidth_ghz;
    const double peak = std::norm(port_amplitude(m, solve_at(m, m.drive.origin_thz), Port::drop));
    for (double d : {-40.0, -13.5, -3.0, 5.0, 13.5, 60.0})
    {
        const double laser = m.drive.origin_thz + units::ghz_to_thz(d);
        const double value = std::norm(port_amplitude(m, solve_at(m, laser), Port::drop));
        const double lorentz = peak / (1.0 + 4.0 * d * d / (kappa * kappa));
        CHECK(test::relative_difference(value, lorentz) < 1e-11);
    }
}

TEST_CASE("zero drive gives the zero state")
{
    const SystemModel m = fixtures::single_molecule();
    const StateAmplitudes s = solve_at(m, m.drive.origin_thz, 0.0);
    CHECK(s.flatten().norm() == 0.0);
}

TEST_CASE("steady state solves the linear system to 1e-12")
{
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 50; ++trial)
    {
        const SystemModel m = test::random_model(rng);
        const LinearSystem s = assemble_linear_system(m, test::random_laser_thz(rng, m));
        const Eigen::VectorXcd x = solve_steady_state(s).flatten();
        CHECK((s.evolution * x - s.rhs).norm() <= 1e-12 * s.rhs.norm());
    }
}

TEST_CASE("power balance closes to 1e-9 on random models")
{
    std::mt19937_64 rng(2024);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial)
    {
        const SystemModel m = test::random_model(rng);
        for (int k = 0; k < 5; ++k)
        {
            const PowerBalance b = power_balance(m, solve_at(m, test::random_laser_thz(rng, m)));
            worst = std::max(worst, std::abs(b.total_out() - b.input) / b.input);
        }
    }
    CHECK(worst <= 1e-9);
}

TEST_CASE("frequency-domain and time-domain solutions agree on random models")
{
    std::mt19937_64 rng(77);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial)
    {
        const SystemModel m = test::random_model(rng, 2);
        const double laser = test::random_laser_thz(rng, m);
        const Eigen::VectorXcd direct = solve_at(m, laser).flatten();
        const Eigen::VectorXcd integrated = time_domain_oracle(m, laser).flatten();
        worst = std::max(worst, test::vector_relative_difference(direct, integrated));
    }
    CHECK(worst <= 1e-6);
}

TEST_CASE("time-domain oracle reproduces M1 at three detunings")
{
    const SystemModel m = fixtures::single_molecule();
    for (double d : {-0.2, 0.0, 0.15})
    {
        const double laser = m.drive.origin_thz + units::ghz_to_thz(d);
        CHECK(test::vector_relative_difference(solve_at(m, laser).flatten(),
                                               time_domain_oracle(m, laser).flatten()) <= 1e-6);
    }
}

TEST_CASE("time-domain oracle reports non-convergence")
{
    const SystemModel m = fixtures::single_molecule();
    CHECK_THROWS_AS(time_domain_oracle(m, m.drive.origin_thz, 1e-3), NumericalError);
}

TEST_CASE("mirrored circuit with conjugated coupling phases has identical port intensities")
{
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 40; ++trial)
    {
        SystemModel m = test::random_model(rng);
        SystemModel mirror = m;
        mirror.topology = CircuitTopology::mirrored();
        for (std::size_t j = 0; j < m.emitters.size(); ++j)
        {
            mirror.emitters[j].coupling_phase_rad.clear();
            for (std::size_t p = 0; p < m.mode_pairs.size(); ++p)
            {
                mirror.emitters[j].coupling_phase_rad.push_back(-m.coupling_phase(j, p));
            }
        }
        const double laser = test::random_laser_thz(rng, m);
        const StateAmplitudes a = solve_at(m, laser);
        const StateAmplitudes b = solve_at(mirror, laser);
        for (Port port : kAllPorts)
        {
            const double x = std::norm(port_amplitude(m, a, port));
            const double y = std::norm(port_amplitude(mirror, b, port));
            CHECK(std::abs(x - y) <= 1e-12 * std::max(1.0, x));
        }
    }
}

TEST_CASE("outputs are linear in the input amplitude")
{
    std::mt19937_64 rng(9);
    for (int trial = 0; trial < 30; ++trial)
    {
        const SystemModel m = test::random_model(rng);
        const double laser = test::random_laser_thz(rng, m);
        const StateAmplitudes one = solve_at(m, laser, 1.0);
        const StateAmplitudes two = solve_at(m, laser, 2.0);
        CHECK(two.flatten() == 2.0 * one.flatten());
        for (Port port : kAllPorts)
        {
            CHECK(port_amplitude(m, two, port) == 2.0 * port_amplitude(m, one, port));
        }
    }
}

TEST_CASE("uncoupled emitters leave the resonator spectra bit-identical")
{
    std::mt19937_64 rng(13);
    for (int trial = 0; trial < 30; ++trial)
    {
        SystemModel m = test::random_model(rng);
        if (m.emitters.empty())
        {
            continue;
        }
        const SystemModel uncoupled = with_couplings_zeroed(m);
        SystemModel bare = m;
        bare.emitters.clear();
        const PortSpectra with = port_spectrum(uncoupled, kAllPorts);
        const PortSpectra without = port_spectrum(bare, kAllPorts);
        CHECK(with.amplitude == without.amplitude);
        const StateAmplitudes s = solve_at(uncoupled, test::random_laser_thz(rng, m));
        for (const cplx &c : s.emitters)
        {
            CHECK(c == cplx(0.0, 0.0));
        }
    }
}

TEST_CASE("port spectra do not depend on the worker count")
{
    SystemModel m = fixtures::two_pair_single_molecule();
    const PortSpectra one = port_spectrum(m, kAllPorts, 1);
    const PortSpectra many = port_spectrum(m, kAllPorts, 7);
    CHECK(one.amplitude == many.amplitude);
}

TEST_CASE("single emitter with unit efficiency leaves a quarter of the drop signal")
{
    SystemModel m = fixtures::single_molecule();
    Emitter &e = m.emitters[0];
    e.branching_ratio = 1.0;
    e.coupling_mhz = {1e5};
    const double laser = e.transition_frequency_thz;
    SystemModel bare = m;
    bare.emitters.clear();
    const double with = std::norm(port_amplitude(m, solve_at(m, laser), Port::drop));
    const double without = std::norm(port_amplitude(bare, solve_at(bare, laser), Port::drop));
    const EmitterResponse r = effective_emitter_response(m, 0, 0.0);
    const double beta = 1.0 - e.linewidth_mhz / r.linewidth_mhz;
    CHECK(with / without == doctest::Approx((1.0 - beta / 2.0) * (1.0 - beta / 2.0)).epsilon(1e-6));
    CHECK(with / without == doctest::Approx(0.25).epsilon(0.01));
}

TEST_CASE("M1 drop dip and add-port peak")
{
    const SystemModel m = fixtures::single_molecule();
    SystemModel bare = m;
    bare.emitters.clear();
    const double laser = m.emitters[0].transition_frequency_thz;
    const StateAmplitudes with = solve_at(m, laser);
    const StateAmplitudes without = solve_at(bare, laser);
    const double dip =
        1.0 - std::norm(port_amplitude(m, with, Port::drop)) / std::norm(port_amplitude(bare, without, Port::drop));
    CHECK(dip == doctest::Approx(0.61).epsilon(0.03 / 0.61));
    CHECK(std::norm(port_amplitude(m, with, Port::add)) > 100.0 * std::norm(port_amplitude(bare, without, Port::add)));
}

TEST_CASE("emitter rows carry the configured coupling phases")
{
    SystemModel m = fixtures::two_molecules(0.75, 0.56, 0.58 * std::numbers::pi, 0.0);
    const LinearSystem s = assemble_linear_system(m, m.drive.origin_thz);
    const StateIndex &ix = s.index;
    const cplx r0 = s.evolution(ix.emitter(0), ix.ccw(0)) / s.evolution(ix.emitter(0), ix.cw(0));
    const cplx r1 = s.evolution(ix.emitter(1), ix.ccw(0)) / s.evolution(ix.emitter(1), ix.cw(0));
    CHECK(std::arg(r1 / r0) == doctest::Approx(wrap_phase(-2.0 * 0.58 * std::numbers::pi)).epsilon(1e-12));
}

TEST_CASE("interchanging two emitters only relabels rows")
{
    std::mt19937_64 rng(21);
    for (int trial = 0; trial < 20; ++trial)
    {
        SystemModel m = test::random_model(rng, 3);
        if (m.emitters.size() < 2)
        {
            continue;
        }
        SystemModel swapped = m;
        std::swap(swapped.emitters[0], swapped.emitters[1]);
        const double laser = test::random_laser_thz(rng, m);
        const StateAmplitudes a = solve_at(m, laser);
        const StateAmplitudes b = solve_at(swapped, laser);
        CHECK(std::abs(a.emitters[0] - b.emitters[1]) <= 1e-12 * std::abs(a.emitters[0]) + 1e-300);
        for (Port port : kAllPorts)
        {
            CHECK(std::abs(port_amplitude(m, a, port) - port_amplitude(swapped, b, port)) <= 1e-12);
        }
    }
}

TEST_CASE("self-energy of one emitter in one pair is a Lorentzian of width kappa")
{
    SystemModel m = fixtures::single_molecule();
    const double kappa = m.fundamental().linewidth_ghz;
    const double peak = effective_emitter_response(m, 0, 0.0).linewidth_mhz - m.emitters[0].linewidth_mhz;
    for (double d : {-200.0, -27.0, -13.5, -1.0, 2.0, 13.5, 40.0, 500.0})
    {
        const EmitterResponse r = effective_emitter_response(m, 0, d);
        const double excess = r.linewidth_mhz - m.emitters[0].linewidth_mhz;
        CHECK(test::relative_difference(excess, peak / (1.0 + 4.0 * d * d / (kappa * kappa))) <= 1e-9);
    }
    CHECK(effective_emitter_response(m, 0, 0.0).linewidth_mhz == doctest::Approx(125.0).epsilon(1e-9));
    CHECK(effective_emitter_response(m, 0, 1e5).linewidth_mhz == doctest::Approx(33.0).epsilon(0.005));
}

TEST_CASE("self-energy equals the Schur complement of the evolution matrix")
{
    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 30; ++trial)
    {
        SystemModel m = test::random_model(rng, 1);
        if (m.emitters.empty())
        {
            continue;
        }
        const double laser = test::random_laser_thz(rng, m);
        const LinearSystem s = assemble_linear_system(m, laser);
        const Eigen::Index c = Eigen::Index(2 * m.mode_pairs.size());
        const Eigen::MatrixXcd cc = s.evolution.topLeftCorner(c, c);
        const Eigen::VectorXcd ce = s.evolution.block(0, c, c, 1);
        const Eigen::RowVectorXcd ec = s.evolution.block(c, 0, 1, c);
        const cplx eff = s.evolution(c, c) - (ec * cc.partialPivLu().solve(ce))(0);
        const cplx bare = s.evolution(c, c);
        CHECK(std::abs(emitter_self_energy(m, 0, laser) - (bare - eff)) <= 1e-9 * std::abs(bare - eff) + 1e-15);
    }
}

TEST_CASE("visibility of traveling and standing waves")
{
    CHECK(standing_wave_visibility(1.0, 0.0) == 0.0);
    CHECK(standing_wave_visibility(cplx(0.3, 0.4), cplx(-0.5, 0.0)) == doctest::Approx(1.0));
    SystemModel m = fixtures::resonator();
    StateAmplitudes s;
    s.cw = {1.0};
    s.ccw = {1.0};
    std::vector<double> grid;
    for (int i = 0; i < 4000; ++i)
    {
        grid.push_back(2.0 * std::numbers::pi * i / 4000.0);
    }
    const IntracavityField f = intracavity_field(m, s, 0, grid);
    CHECK(f.visibility == doctest::Approx(1.0));
    const double m_order = m.fundamental().azimuthal_order;
    const double node = std::fmod(f.node_azimuth_rad, std::numbers::pi / m_order);
    CHECK(std::abs(node - std::numbers::pi / (2.0 * m_order)) < 2.0 * std::numbers::pi / 4000.0);
}

TEST_CASE("M1 field has its node at the emitter")
{
    SystemModel m = fixtures::single_molecule();
    m.emitters[0].azimuth_rad = 0.3;
    const StateAmplitudes s = solve_at(m, m.emitters[0].transition_frequency_thz);
    std::vector<double> grid;
    const double m_order = m.fundamental().azimuthal_order;
    for (int i = 0; i <= 2000; ++i)
    {
        grid.push_back(0.3 + (i - 1000) * (std::numbers::pi / m_order) / 2000.0);
    }
    const IntracavityField f = intracavity_field(m, s, 0, grid);
    CHECK(std::abs(f.node_azimuth_rad - 0.3) < 2.0 * (std::numbers::pi / m_order) / 2000.0);
}

TEST_CASE("port names")
{
    CHECK(parse_port("int2") == Port::int2);
    CHECK_THROWS_AS(parse_port("through"), InterfaceError);
    CHECK(parse_port_list("drop, add") == std::vector<Port>{Port::drop, Port::add});
    const SystemModel m = fixtures::resonator();
    const std::vector<Port> ports{Port::drop};
    const PortSpectra s = port_spectrum(m, ports);
    CHECK_THROWS_AS(s.slot(Port::add), InterfaceError);
}

TEST_CASE("port spectra CSV has the documented columns")
{
    SystemModel m = fixtures::resonator();
    m.drive.detuning_ghz = {-1.0, 0.0, 1.0};
    const std::vector<Port> ports{Port::drop, Port::add};
    std::ostringstream out;
    write_port_spectra_csv(port_spectrum(m, ports), out);
    std::istringstream in(out.str());
    std::string header;
    std::getline(in, header);
    CHECK(header == "frequency_THz,detuning_GHz,port,re_amplitude,im_amplitude,intensity");
    int rows = 0;
    for (std::string line; std::getline(in, line);)
    {
        ++rows;
    }
    CHECK(rows == 6);
}
