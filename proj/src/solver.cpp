#include "wgm/solver.hpp"

#include "wgm/errors.hpp"
#include "wgm/format.hpp"
#include "wgm/parallel.hpp"
#include "wgm/units.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>

#include <Eigen/Eigenvalues>

namespace wgm
{
namespace
{

constexpr cplx kI{0.0, 1.0};
constexpr double kResidualTolerance = 1e-12;

StateIndex index_for(const SystemModel &model) { return {model.mode_pairs.size(), model.emitters.size()}; }

double detuning_ghz(double laser_thz, double reference_thz) { return units::thz_to_ghz(laser_thz - reference_thz); }

// Evolution matrix without the stability check.
Eigen::MatrixXcd evolution_matrix(const SystemModel &model, double laser_thz)
{
    const StateIndex idx = index_for(model);
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(Eigen::Index(idx.size()), Eigen::Index(idx.size()));
    const auto at = [&m](std::size_t r, std::size_t c) -> cplx & { return m(Eigen::Index(r), Eigen::Index(c)); };

    const std::size_t pairs = model.mode_pairs.size();
    for (std::size_t p = 0; p < pairs; ++p)
    {
        const ModePair &mp = model.mode_pairs[p];
        const cplx diagonal = kI * detuning_ghz(laser_thz, mp.center_frequency_thz) - 0.5 * mp.linewidth_ghz;
        at(idx.cw(p), idx.cw(p)) = diagonal;
        at(idx.ccw(p), idx.ccw(p)) = diagonal;
        at(idx.cw(p), idx.ccw(p)) = -kI * mp.backscatter_ghz;
        at(idx.ccw(p), idx.cw(p)) = -kI * mp.backscatter_ghz;
        // Pairs leaking into the same waveguide channel are coupled dissipatively.
        for (std::size_t q = 0; q < pairs; ++q)
        {
            if (q == p)
            {
                continue;
            }
            const ModePair &mq = model.mode_pairs[q];
            double shared = 0.0;
            for (int w = 0; w < 2; ++w)
            {
                shared += std::sqrt(mp.external_coupling_ghz[w] * mq.external_coupling_ghz[w]);
            }
            at(idx.cw(p), idx.cw(q)) = -0.5 * shared;
            at(idx.ccw(p), idx.ccw(q)) = -0.5 * shared;
        }
    }
    for (std::size_t j = 0; j < model.emitters.size(); ++j)
    {
        const Emitter &e = model.emitters[j];
        at(idx.emitter(j), idx.emitter(j)) = kI * detuning_ghz(laser_thz, e.transition_frequency_thz) -
                                             0.5 * units::mhz_to_ghz(e.coherence_linewidth_mhz());
        for (std::size_t p = 0; p < pairs; ++p)
        {
            const double g = units::mhz_to_ghz(e.coupling_mhz[p]);
            if (g == 0.0)
            {
                continue;
            }
            const cplx phase = std::polar(1.0, model.coupling_phase(j, p));
            at(idx.cw(p), idx.emitter(j)) = -kI * g * std::conj(phase);
            at(idx.ccw(p), idx.emitter(j)) = -kI * g * phase;
            at(idx.emitter(j), idx.cw(p)) = -kI * g * phase;
            at(idx.emitter(j), idx.ccw(p)) = -kI * g * std::conj(phase);
        }
    }
    return m;
}

Eigen::VectorXcd drive_vector(const SystemModel &model, const StateIndex &idx, cplx input)
{
    Eigen::VectorXcd f = Eigen::VectorXcd::Zero(Eigen::Index(idx.size()));
    const Channel &in = model.topology.input;
    for (std::size_t p = 0; p < idx.pairs; ++p)
    {
        const double ext = model.mode_pairs[p].external_coupling_ghz[std::size_t(in.waveguide - 1)];
        f(Eigen::Index(idx.mode(p, in.direction))) = std::sqrt(ext) * input;
    }
    return f;
}

Channel port_channel(const CircuitTopology &t, Port port)
{
    switch (port)
    {
    case Port::transmission:
        return t.transmission;
    case Port::drop:
        return t.drop;
    case Port::add:
        return t.add;
    case Port::reflection:
    case Port::int1:
    case Port::int2:
        return t.interferometer;
    }
    return t.transmission;
}

} // namespace

cplx StateAmplitudes::standing_plus(std::size_t p) const { return (cw.at(p) + ccw.at(p)) / std::numbers::sqrt2; }

cplx StateAmplitudes::standing_minus(std::size_t p) const { return (cw.at(p) - ccw.at(p)) / std::numbers::sqrt2; }

Eigen::VectorXcd StateAmplitudes::flatten() const
{
    const StateIndex idx{cw.size(), emitters.size()};
    Eigen::VectorXcd x(Eigen::Index(idx.size()));
    for (std::size_t p = 0; p < idx.pairs; ++p)
    {
        x(Eigen::Index(idx.cw(p))) = cw[p];
        x(Eigen::Index(idx.ccw(p))) = ccw[p];
    }
    for (std::size_t j = 0; j < idx.emitters; ++j)
    {
        x(Eigen::Index(idx.emitter(j))) = emitters[j];
    }
    return x;
}

StateAmplitudes StateAmplitudes::unflatten(const Eigen::VectorXcd &x, const StateIndex &idx, double laser_thz,
                                           cplx input)
{
    StateAmplitudes s;
    s.laser_frequency_thz = laser_thz;
    s.input_amplitude = input;
    for (std::size_t p = 0; p < idx.pairs; ++p)
    {
        s.cw.push_back(x(Eigen::Index(idx.cw(p))));
        s.ccw.push_back(x(Eigen::Index(idx.ccw(p))));
    }
    for (std::size_t j = 0; j < idx.emitters; ++j)
    {
        s.emitters.push_back(x(Eigen::Index(idx.emitter(j))));
    }
    return s;
}

double spectral_abscissa(const Eigen::MatrixXcd &evolution)
{
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(evolution, false);
    if (solver.info() != Eigen::Success)
    {
        throw NumericalError("eigenvalue computation failed");
    }
    return solver.eigenvalues().real().maxCoeff();
}

double dissipation_floor(const Eigen::MatrixXcd &evolution)
{
    const Eigen::MatrixXcd loss = -0.5 * (evolution + evolution.adjoint());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(loss, Eigen::EigenvaluesOnly);
    return solver.eigenvalues().minCoeff();
}

LinearSystem assemble_linear_system(const SystemModel &model, double laser_frequency_thz, cplx input_amplitude)
{
    LinearSystem system;
    system.index = index_for(model);
    system.laser_frequency_thz = laser_frequency_thz;
    system.input_amplitude = input_amplitude;
    system.evolution = evolution_matrix(model, laser_frequency_thz);
    system.rhs = -drive_vector(model, system.index, input_amplitude);
    if (!(spectral_abscissa(system.evolution) < 0.0))
    {
        throw NumericalError("model error: homogeneous evolution is not strictly stable");
    }
    return system;
}

StateAmplitudes solve_steady_state(const LinearSystem &system)
{
    // Undriven states without couplings stay at zero and are left out of the solve.
    const Eigen::Index n = system.evolution.rows();
    std::vector<Eigen::Index> active;
    for (Eigen::Index k = 0; k < n; ++k)
    {
        bool coupled = system.rhs(k) != 0.0;
        for (Eigen::Index i = 0; i < n && !coupled; ++i)
        {
            coupled = i != k && (system.evolution(i, k) != 0.0 || system.evolution(k, i) != 0.0);
        }
        if (coupled)
        {
            active.push_back(k);
        }
        else if (system.evolution(k, k) == 0.0)
        {
            throw NumericalError("singular steady-state system");
        }
    }
    const Eigen::Index m = Eigen::Index(active.size());
    Eigen::MatrixXcd a(m, m);
    Eigen::VectorXcd b(m);
    for (Eigen::Index i = 0; i < m; ++i)
    {
        b(i) = system.rhs(active[std::size_t(i)]);
        for (Eigen::Index k = 0; k < m; ++k)
        {
            a(i, k) = system.evolution(active[std::size_t(i)], active[std::size_t(k)]);
        }
    }

    Eigen::FullPivLU<Eigen::MatrixXcd> lu(a);
    if (!lu.isInvertible())
    {
        throw NumericalError("singular steady-state system");
    }
    Eigen::VectorXcd y = lu.solve(b);
    Eigen::VectorXcd residual = a * y - b;
    const double scale = std::max(b.norm(), a.norm() * y.norm());
    if (scale > 0.0 && residual.norm() > kResidualTolerance * scale)
    {
        y -= lu.solve(residual);
        residual = a * y - b;
        if (residual.norm() > kResidualTolerance * scale)
        {
            throw NumericalError("steady-state residual above tolerance");
        }
    }
    Eigen::VectorXcd x = Eigen::VectorXcd::Zero(n);
    for (Eigen::Index i = 0; i < m; ++i)
    {
        x(active[std::size_t(i)]) = y(i);
    }
    return StateAmplitudes::unflatten(x, system.index, system.laser_frequency_thz, system.input_amplitude);
}

StateAmplitudes solve_at(const SystemModel &model, double laser_frequency_thz, cplx input_amplitude)
{
    return solve_steady_state(assemble_linear_system(model, laser_frequency_thz, input_amplitude));
}

Port parse_port(std::string_view name)
{
    if (name == "transmission")
        return Port::transmission;
    if (name == "drop")
        return Port::drop;
    if (name == "add")
        return Port::add;
    if (name == "reflection")
        return Port::reflection;
    if (name == "int1")
        return Port::int1;
    if (name == "int2")
        return Port::int2;
    throw InterfaceError("unknown port \"" + std::string(name) + "\"");
}

std::string_view to_string(Port port)
{
    switch (port)
    {
    case Port::transmission:
        return "transmission";
    case Port::drop:
        return "drop";
    case Port::add:
        return "add";
    case Port::reflection:
        return "reflection";
    case Port::int1:
        return "int1";
    case Port::int2:
        return "int2";
    }
    return "?";
}

std::vector<Port> parse_port_list(std::string_view comma_separated)
{
    std::vector<Port> ports;
    std::size_t start = 0;
    while (start <= comma_separated.size())
    {
        const std::size_t end = std::min(comma_separated.find(',', start), comma_separated.size());
        std::string_view token = comma_separated.substr(start, end - start);
        while (!token.empty() && std::isspace(static_cast<unsigned char>(token.front())))
        {
            token.remove_prefix(1);
        }
        while (!token.empty() && std::isspace(static_cast<unsigned char>(token.back())))
        {
            token.remove_suffix(1);
        }
        if (!token.empty())
        {
            ports.push_back(parse_port(token));
        }
        start = end + 1;
    }
    return ports;
}

cplx channel_output(const SystemModel &model, const StateAmplitudes &state, const Channel &channel)
{
    cplx out = channel == model.topology.input ? state.input_amplitude : cplx{};
    const std::size_t w = std::size_t(channel.waveguide - 1);
    for (std::size_t p = 0; p < model.mode_pairs.size(); ++p)
    {
        const cplx mode = channel.direction == Direction::cw ? state.cw[p] : state.ccw[p];
        out -= std::sqrt(model.mode_pairs[p].external_coupling_ghz[w]) * mode;
    }
    return out;
}

cplx port_amplitude(const SystemModel &model, const StateAmplitudes &state, Port port)
{
    const CircuitTopology &t = model.topology;
    const cplx signal = channel_output(model, state, port_channel(t, port));
    if (port != Port::int1 && port != Port::int2)
    {
        return signal;
    }
    const cplx reference = t.reference_amplitude * std::polar(1.0, t.reference_phase_rad) * state.input_amplitude;
    const double sign = port == Port::int1 ? 1.0 : -1.0;
    return (reference + sign * signal) / std::numbers::sqrt2;
}

std::vector<double> PortSpectra::intensities(Port port) const
{
    const std::size_t s = slot(port);
    std::vector<double> out(detuning_ghz.size());
    for (std::size_t i = 0; i < out.size(); ++i)
    {
        out[i] = intensity(s, i);
    }
    return out;
}

std::size_t PortSpectra::slot(Port port) const
{
    const auto it = std::find(ports.begin(), ports.end(), port);
    if (it == ports.end())
    {
        throw InterfaceError("port \"" + std::string(to_string(port)) + "\" not in spectra");
    }
    return std::size_t(it - ports.begin());
}

PortSpectra port_spectrum(const SystemModel &model, std::span<const Port> ports, std::size_t workers)
{
    if (ports.empty())
    {
        throw ValidationError("port_spectrum: at least one port is required");
    }
    if (model.drive.detuning_ghz.empty())
    {
        throw ValidationError("port_spectrum: drive grid is empty");
    }
    PortSpectra spectra;
    spectra.origin_thz = model.drive.origin_thz;
    spectra.detuning_ghz = model.drive.detuning_ghz;
    spectra.ports.assign(ports.begin(), ports.end());
    const std::size_t n = spectra.detuning_ghz.size();
    spectra.amplitude.assign(ports.size(), std::vector<cplx>(n));
    parallel_for(
        n,
        [&](std::size_t i) {
            const StateAmplitudes state = solve_at(model, model.drive.laser_frequency_thz(i));
            for (std::size_t k = 0; k < ports.size(); ++k)
            {
                spectra.amplitude[k][i] = port_amplitude(model, state, ports[k]);
            }
        },
        workers);
    return spectra;
}

void write_port_spectra_csv(const PortSpectra &spectra, std::ostream &out)
{
    out << "frequency_THz,detuning_GHz,port,re_amplitude,im_amplitude,intensity\n";
    for (std::size_t i = 0; i < spectra.detuning_ghz.size(); ++i)
    {
        const double detuning = spectra.detuning_ghz[i];
        const double frequency = spectra.origin_thz + units::ghz_to_thz(detuning);
        for (std::size_t k = 0; k < spectra.ports.size(); ++k)
        {
            const cplx a = spectra.amplitude[k][i];
            out << format_number(frequency) << ',' << format_number(detuning) << ',' << to_string(spectra.ports[k])
                << ',' << format_number(a.real()) << ',' << format_number(a.imag()) << ','
                << format_number(std::norm(a)) << '\n';
        }
    }
}

PowerBalance power_balance(const SystemModel &model, const StateAmplitudes &state)
{
    const CircuitTopology &t = model.topology;
    const Direction forward = t.input.direction;
    PowerBalance b;
    b.input = std::norm(state.input_amplitude);
    b.transmission = std::norm(channel_output(model, state, {1, forward}));
    b.reflection = std::norm(channel_output(model, state, {1, opposite(forward)}));
    b.drop = std::norm(channel_output(model, state, {2, forward}));
    b.add = std::norm(channel_output(model, state, {2, opposite(forward)}));
    for (std::size_t p = 0; p < model.mode_pairs.size(); ++p)
    {
        b.intrinsic += model.mode_pairs[p].intrinsic_loss_ghz * (std::norm(state.cw[p]) + std::norm(state.ccw[p]));
    }
    for (std::size_t j = 0; j < model.emitters.size(); ++j)
    {
        const Emitter &e = model.emitters[j];
        const double population = std::norm(state.emitters[j]);
        b.emitter_zpl += units::mhz_to_ghz(e.zpl_linewidth_mhz()) * population;
        b.emitter_red += units::mhz_to_ghz(e.red_linewidth_mhz()) * population;
        b.dephasing += units::mhz_to_ghz(2.0 * e.dephasing_mhz) * population;
    }
    return b;
}

double standing_wave_visibility(cplx cw, cplx ccw)
{
    const double total = std::norm(cw) + std::norm(ccw);
    return total > 0.0 ? 2.0 * std::abs(cw) * std::abs(ccw) / total : 0.0;
}

IntracavityField intracavity_field(const SystemModel &model, const StateAmplitudes &state, std::size_t pair,
                                   std::span<const double> azimuth_grid)
{
    if (pair >= model.mode_pairs.size())
    {
        throw InterfaceError("intracavity_field: no such mode pair");
    }
    const double m = model.mode_pairs[pair].azimuthal_order;
    IntracavityField result;
    result.azimuth_rad.assign(azimuth_grid.begin(), azimuth_grid.end());
    result.visibility = standing_wave_visibility(state.cw[pair], state.ccw[pair]);
    double smallest = std::numeric_limits<double>::infinity();
    for (double phi : azimuth_grid)
    {
        const cplx value = state.cw[pair] * std::polar(1.0, m * phi) + state.ccw[pair] * std::polar(1.0, -m * phi);
        result.field.push_back(value);
        if (std::abs(value) < smallest)
        {
            smallest = std::abs(value);
            result.node_azimuth_rad = phi;
        }
    }
    return result;
}

SystemModel with_cavity_detuning(const SystemModel &model, std::size_t emitter, double detuning_ghz)
{
    SystemModel moved = model;
    const double target = model.emitters.at(emitter).transition_frequency_thz - units::ghz_to_thz(detuning_ghz);
    const double shift = target - model.fundamental().center_frequency_thz;
    for (ModePair &p : moved.mode_pairs)
    {
        p.center_frequency_thz += shift;
    }
    return moved;
}

Eigen::MatrixXcd effective_emitter_matrix(const SystemModel &model, double laser_frequency_thz)
{
    const StateIndex idx = index_for(model);
    const Eigen::MatrixXcd e = evolution_matrix(model, laser_frequency_thz);
    const Eigen::Index c = Eigen::Index(2 * idx.pairs);
    const Eigen::Index n = Eigen::Index(idx.emitters);
    const Eigen::MatrixXcd cavity = e.topLeftCorner(c, c);
    const Eigen::MatrixXcd to_cavity = e.topRightCorner(c, n);
    const Eigen::MatrixXcd from_cavity = e.bottomLeftCorner(n, c);
    const Eigen::MatrixXcd emitters = e.bottomRightCorner(n, n);
    Eigen::PartialPivLU<Eigen::MatrixXcd> lu(cavity);
    return emitters - from_cavity * lu.solve(to_cavity);
}

cplx emitter_self_energy(const SystemModel &model, std::size_t emitter, double laser_frequency_thz)
{
    SystemModel single = model;
    single.emitters = {model.emitters.at(emitter)};
    const Eigen::MatrixXcd h = effective_emitter_matrix(single, laser_frequency_thz);
    const Emitter &e = single.emitters.front();
    const cplx bare =
        kI * detuning_ghz(laser_frequency_thz, e.transition_frequency_thz) - 0.5 * units::mhz_to_ghz(e.coherence_linewidth_mhz());
    return bare - h(0, 0);
}

EmitterResponse effective_emitter_response(const SystemModel &model, std::size_t emitter, double detuning_ghz)
{
    if (emitter >= model.emitters.size())
    {
        throw InterfaceError("effective_emitter_response: no such emitter");
    }
    const SystemModel moved = with_cavity_detuning(model, emitter, detuning_ghz);
    const Emitter &e = model.emitters[emitter];
    const cplx sigma = emitter_self_energy(moved, emitter, e.transition_frequency_thz);
    EmitterResponse r;
    r.self_energy_ghz = sigma;
    r.linewidth_mhz = e.coherence_linewidth_mhz() + units::ghz_to_mhz(2.0 * sigma.real());
    r.lamb_shift_mhz = units::ghz_to_mhz(sigma.imag());
    return r;
}

} // namespace wgm
