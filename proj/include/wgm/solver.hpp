#ifndef WGM_SOLVER_HPP
#define WGM_SOLVER_HPP

#include "wgm/model.hpp"

#include <complex>
#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace wgm
{

using cplx = std::complex<double>;

// Row layout of the coupled-mode state: CW and CCW amplitude of every mode
// pair, then the coherence of every emitter.
struct StateIndex
{
    std::size_t pairs = 0;
    std::size_t emitters = 0;

    std::size_t cw(std::size_t p) const { return 2 * p; }
    std::size_t ccw(std::size_t p) const { return 2 * p + 1; }
    std::size_t mode(std::size_t p, Direction d) const { return d == Direction::cw ? cw(p) : ccw(p); }
    std::size_t emitter(std::size_t j) const { return 2 * pairs + j; }
    std::size_t size() const { return 2 * pairs + emitters; }

    bool operator==(const StateIndex &) const = default;
};

// Steady state of dx/dt = evolution * x + drive, i.e. evolution * x = rhs with
// rhs = -drive. Rates are in GHz, the frame rotates at the laser frequency.
struct LinearSystem
{
    Eigen::MatrixXcd evolution;
    Eigen::VectorXcd rhs;
    StateIndex index;
    double laser_frequency_thz = 0.0;
    cplx input_amplitude{1.0, 0.0};
};

struct StateAmplitudes
{
    std::vector<cplx> cw;
    std::vector<cplx> ccw;
    std::vector<cplx> emitters;
    double laser_frequency_thz = 0.0;
    cplx input_amplitude{1.0, 0.0};

    // Standing-wave combinations (a +- b) / sqrt(2).
    cplx standing_plus(std::size_t p) const;
    cplx standing_minus(std::size_t p) const;

    Eigen::VectorXcd flatten() const;
    static StateAmplitudes unflatten(const Eigen::VectorXcd &x, const StateIndex &index, double laser_thz,
                                     cplx input);
};

LinearSystem assemble_linear_system(const SystemModel &model, double laser_frequency_thz,
                                    cplx input_amplitude = 1.0);

// Largest real part among the eigenvalues of the evolution matrix.
double spectral_abscissa(const Eigen::MatrixXcd &evolution);

// Smallest eigenvalue of the dissipative part -(E + E^H)/2: a lower bound on
// the decay rate of every deviation from the steady state.
double dissipation_floor(const Eigen::MatrixXcd &evolution);

StateAmplitudes solve_steady_state(const LinearSystem &system);

// Convenience: assemble and solve at one laser frequency.
StateAmplitudes solve_at(const SystemModel &model, double laser_frequency_thz, cplx input_amplitude = 1.0);

enum class Port
{
    transmission,
    drop,
    add,
    reflection, // CCW light leaving through the input waveguide
    int1,
    int2,
};

Port parse_port(std::string_view name);
std::string_view to_string(Port port);
std::vector<Port> parse_port_list(std::string_view comma_separated);

// Outgoing amplitude of one waveguide channel, input-output relation included.
cplx channel_output(const SystemModel &model, const StateAmplitudes &state, const Channel &channel);
cplx port_amplitude(const SystemModel &model, const StateAmplitudes &state, Port port);

struct PortSpectra
{
    double origin_thz = 0.0;
    std::vector<double> detuning_ghz;
    std::vector<Port> ports;
    std::vector<std::vector<cplx>> amplitude; // [port][grid point]

    double intensity(std::size_t port_slot, std::size_t point) const { return std::norm(amplitude[port_slot][point]); }
    std::vector<double> intensities(Port port) const;
    std::size_t slot(Port port) const;
};

// Port amplitudes over the model's drive grid. Grid points are solved in
// parallel; the result does not depend on the worker count.
PortSpectra port_spectrum(const SystemModel &model, std::span<const Port> ports, std::size_t workers = 0);

void write_port_spectra_csv(const PortSpectra &spectra, std::ostream &out);

// Power leaving through every real and virtual channel, normalized to the
// input power |s_in|^2.
struct PowerBalance
{
    double input = 0.0;
    double transmission = 0.0;
    double reflection = 0.0;
    double drop = 0.0;
    double add = 0.0;
    double intrinsic = 0.0;
    double emitter_zpl = 0.0;
    double emitter_red = 0.0;
    double dephasing = 0.0;

    double total_out() const
    {
        return transmission + reflection + drop + add + intrinsic + emitter_zpl + emitter_red + dephasing;
    }
};

PowerBalance power_balance(const SystemModel &model, const StateAmplitudes &state);

struct IntracavityField
{
    std::vector<double> azimuth_rad;
    std::vector<cplx> field;
    double visibility = 0.0;
    double node_azimuth_rad = 0.0;
};

IntracavityField intracavity_field(const SystemModel &model, const StateAmplitudes &state, std::size_t pair,
                                   std::span<const double> azimuth_grid);

double standing_wave_visibility(cplx cw, cplx ccw);

// Same model with every mode pair moved so that the named emitter sits at
// detuning (omega_m - omega_r) from the fundamental resonance.
SystemModel with_cavity_detuning(const SystemModel &model, std::size_t emitter, double detuning_ghz);

// Self-energy of one emitter after eliminating all cavity rows (other
// emitters removed), evaluated at the laser frequency.
cplx emitter_self_energy(const SystemModel &model, std::size_t emitter, double laser_frequency_thz);

struct EmitterResponse
{
    double linewidth_mhz = 0.0;    // gamma0 + 2 gamma* + 2 Re Sigma
    double lamb_shift_mhz = 0.0;   // shift of the dressed resonance
    cplx self_energy_ghz{};
};

// Response of one emitter at cavity detuning (omega_m - omega_r), with the
// cavity moved and the emitter held fixed.
EmitterResponse effective_emitter_response(const SystemModel &model, std::size_t emitter, double detuning_ghz);

// Effective non-Hermitian evolution of the emitter coherences after the
// cavity is eliminated, at the given laser frequency.
Eigen::MatrixXcd effective_emitter_matrix(const SystemModel &model, double laser_frequency_thz);

} // namespace wgm

#endif
