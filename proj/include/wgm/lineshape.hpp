#ifndef WGM_LINESHAPE_HPP
#define WGM_LINESHAPE_HPP

#include "wgm/lm.hpp"
#include "wgm/spectrum.hpp"

#include <array>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

namespace wgm
{

// One Lorentzian resonance of the resonator background. A negative height
// is a dip.
struct Lorentzian
{
    double center_ghz = 0.0;
    double width_ghz = 1.0; // FWHM
    double height = 0.0;

    double operator()(double x) const;
};

// Resonator profile without the molecule: affine baseline plus up to two
// Lorentzian responses, on the detuning axis of a spectrum.
struct BackgroundModel
{
    double offset = 0.0;
    double slope = 0.0;           // per GHz, about `pivot_ghz`
    double pivot_ghz = 0.0;
    std::vector<Lorentzian> resonances;

    double operator()(double x) const;
    std::size_t parameter_count() const { return 2 + 3 * resonances.size(); }
    std::vector<double> parameters() const;
    void set_parameters(const double *values);
    // d f_r / d parameter, in parameters() order.
    void gradient(double x, double *out) const;
};

struct BackgroundFitOptions
{
    bool windowed = false;                          // skip the coverage precondition
    std::optional<std::pair<double, double>> mask;  // detuning interval excluded from the fit
    bool fit_slope = true;
    LmOptions lm{};
};

struct BackgroundFit
{
    BackgroundModel model;
    double residual_norm = 0.0;
    int iterations = 0;
    bool converged = false;
};

BackgroundFit fit_background(const Spectrum &spectrum, const BackgroundModel &init,
                             const BackgroundFitOptions &options = {});

// Molecular line of the complex Fano form
//   f(w) = f_r(w) |1 - A e^{i phi} / (1 + 2i (w - w_m) / gamma)|^2.
struct FanoLine
{
    double center_ghz = 0.0;
    double linewidth_ghz = 0.1;
    double amplitude = 0.0;
    double phase = 0.0;

    double factor(double x) const;
    // d factor / d(center, linewidth, amplitude, phase).
    std::array<double, 4> factor_gradient(double x) const;
    // Maps onto A >= 0, gamma > 0, phase in (-pi, pi] without changing the line.
    FanoLine normalized() const;
};

double wrap_phase(double phase);

struct FanoInit
{
    std::optional<double> center_ghz;
    std::optional<double> linewidth_ghz;
    std::optional<double> amplitude;
    std::optional<double> phase;
};

struct FanoFitOptions
{
    bool co_fit_background = false;
    // When the phase is not given, also start from 0, pi and -pi/2 after the
    // default pi/2 and keep the lowest cost.
    bool multi_start_phase = true;
    LmOptions lm{};
};

struct FanoFitResult
{
    double origin_thz = 0.0;
    FanoLine line;               // detuning axis, GHz
    double center_thz = 0.0;
    double linewidth_mhz = 0.0;
    // Standard errors: center (MHz), linewidth (MHz), amplitude, phase (rad).
    std::array<double, 4> errors{};
    Eigen::MatrixXd covariance;  // on (center GHz, linewidth GHz, A, phase[, background...])
    bool covariance_singular = false;
    double residual_norm = 0.0;
    int iterations = 0;
    bool converged = false;
    BackgroundModel background;
    std::vector<std::string> warnings;
};

// Starting values derived from the data: extremum of data/background - 1,
// width from the second moment of the residual peak, amplitude from its depth.
FanoLine initial_fano_guess(const Spectrum &spectrum, const BackgroundModel &background, const FanoInit &init);

FanoFitResult fit_fano(const Spectrum &spectrum, const BackgroundModel &background, const FanoInit &init = {},
                       const FanoFitOptions &options = {});

// Model and analytic Jacobian on a grid, (center, linewidth, A, phase) columns.
std::vector<double> fano_model(const Spectrum &grid, const BackgroundModel &background, const FanoLine &line);
Eigen::MatrixXd fano_jacobian(const Spectrum &grid, const BackgroundModel &background, const FanoLine &line);

nlohmann::json to_json(const BackgroundModel &model);
BackgroundModel background_from_json(const nlohmann::json &node);
nlohmann::json to_json(const FanoFitResult &result);

} // namespace wgm

#endif
