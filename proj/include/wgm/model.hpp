#ifndef WGM_MODEL_HPP
#define WGM_MODEL_HPP

#include <array>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace wgm
{

enum class ModeLabel
{
    fundamental,
    second_order,
};

// A degenerate CW/CCW pair of whispering-gallery modes.
struct ModePair
{
    ModeLabel label = ModeLabel::fundamental;
    double center_frequency_thz = 0.0;
    double linewidth_ghz = 0.0;     // total FWHM kappa
    double intrinsic_loss_ghz = 0.0;
    std::array<double, 2> external_coupling_ghz{0.0, 0.0}; // waveguide 1, waveguide 2
    double backscatter_ghz = 0.0;   // real CW<->CCW coupling h
    int azimuthal_order = 1;
    double free_spectral_range_thz = 0.0; // 0 when unknown

    double total_external_ghz() const { return external_coupling_ghz[0] + external_coupling_ghz[1]; }

    bool operator==(const ModePair &) const = default;
};

struct Emitter
{
    std::string name;
    double transition_frequency_thz = 0.0;
    double linewidth_mhz = 0.0;     // free-space gamma0
    double branching_ratio = 1.0;   // free-space ZPL fraction alpha0
    double dephasing_mhz = 0.0;     // pure dephasing gamma*
    std::vector<double> coupling_mhz; // g per mode pair
    double azimuth_rad = 0.0;
    // Direct per-pair coupling phase; when empty the phase is m_p * azimuth.
    std::vector<double> coupling_phase_rad;
    double stark_mhz_per_volt = 0.0;

    double zpl_linewidth_mhz() const { return branching_ratio * linewidth_mhz; }
    double red_linewidth_mhz() const { return (1.0 - branching_ratio) * linewidth_mhz; }
    // Decay rate (FWHM) of the optical coherence without the cavity.
    double coherence_linewidth_mhz() const { return linewidth_mhz + 2.0 * dephasing_mhz; }

    bool operator==(const Emitter &) const = default;
};

enum class Direction
{
    cw,
    ccw,
};

inline Direction opposite(Direction d) { return d == Direction::cw ? Direction::ccw : Direction::cw; }

// An outgoing (or, for the input, incoming) wave in one bus waveguide that
// couples to the modes circulating in one direction.
struct Channel
{
    int waveguide = 1;
    Direction direction = Direction::cw;

    bool operator==(const Channel &) const = default;
};

struct CircuitTopology
{
    Channel input{1, Direction::cw};
    Channel transmission{1, Direction::cw};
    Channel drop{2, Direction::cw};
    Channel add{2, Direction::ccw};
    // The interferometer combines this channel with the reference arm.
    Channel interferometer{1, Direction::ccw};
    double reference_amplitude = 1.0;
    double reference_phase_rad = 0.0;

    // The same circuit seen in a mirror: every direction flipped.
    static CircuitTopology mirrored();

    bool operator==(const CircuitTopology &) const = default;
};

struct DriveSpec
{
    double origin_thz = 0.0;
    std::vector<double> detuning_ghz; // strictly increasing, relative to origin

    double laser_frequency_thz(std::size_t i) const;

    bool operator==(const DriveSpec &) const = default;
};

struct SystemModel
{
    std::vector<ModePair> mode_pairs;
    std::vector<Emitter> emitters;
    CircuitTopology topology;
    DriveSpec drive;

    const ModePair &fundamental() const;
    std::size_t fundamental_index() const;

    // Coupling phase theta_{j,p} entering g * exp(+-i theta).
    double coupling_phase(std::size_t emitter, std::size_t pair) const;

    bool operator==(const SystemModel &) const = default;
};

// Checks every invariant; throws ValidationError naming the failed constraint.
void validate(const SystemModel &model);

SystemModel load_model(const nlohmann::json &document);
SystemModel load_model_text(std::string_view text);
SystemModel load_model_file(const std::filesystem::path &path);

nlohmann::json save_model(const SystemModel &model);
void save_model_file(const SystemModel &model, const std::filesystem::path &path);

// Shifts every emitter by its Stark coefficient times the voltage.
SystemModel apply_stark(const SystemModel &model, double voltage);

// Linear Stark coefficient (MHz/V) through two calibration points.
double calibrate_stark(double frequency0_thz, double voltage0, double frequency1_thz, double voltage1);

struct ResonatorFigures
{
    double finesse = 0.0;
    double quality_factor = 0.0;
};

ResonatorFigures resonator_figures(double center_frequency_thz, double linewidth_ghz, double fsr_thz);

// Coupling g (MHz) that gives the requested on-resonance linewidth in a single
// mode pair without backscattering: gamma' = gamma_coh + 8 g^2 / kappa.
double coupling_for_enhanced_linewidth(double enhanced_linewidth_mhz, double coherence_linewidth_mhz, double kappa_ghz);

// Coupling g (MHz) that gives coupling efficiency beta on resonance in the same limit.
double coupling_for_efficiency(double beta, double coherence_linewidth_mhz, double kappa_ghz);

std::string_view to_string(ModeLabel label);
std::string_view to_string(Direction direction);

} // namespace wgm

#endif
