#include "wgm/lineshape.hpp"

#include "wgm/errors.hpp"
#include "wgm/units.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <numeric>

namespace wgm
{
namespace
{

using cplx = std::complex<double>;
constexpr double kPi = std::numbers::pi;

// FWHM of a Lorentzian over the standard deviation of its part above half
// maximum. With v = 2x / FWHM the second moment of 1/(1+v^2) on |v| <= 1 is
// (1 - pi/4)/(pi/4).
const double kFwhmPerHalfMaxSigma = 2.0 / std::sqrt((1.0 - kPi / 4.0) / (kPi / 4.0));

double weight(const Spectrum &s, std::size_t i) { return s.sigma.empty() ? 1.0 : 1.0 / s.sigma[i]; }

Eigen::VectorXd to_vector(const std::vector<double> &v) { return Eigen::Map<const Eigen::VectorXd>(v.data(), Eigen::Index(v.size())); }

} // namespace

double Lorentzian::operator()(double x) const
{
    const double v = 2.0 * (x - center_ghz) / width_ghz;
    return height / (1.0 + v * v);
}

double BackgroundModel::operator()(double x) const
{
    double value = offset + slope * (x - pivot_ghz);
    for (const Lorentzian &r : resonances)
    {
        value += r(x);
    }
    return value;
}

std::vector<double> BackgroundModel::parameters() const
{
    std::vector<double> p{offset, slope};
    for (const Lorentzian &r : resonances)
    {
        p.insert(p.end(), {r.center_ghz, r.width_ghz, r.height});
    }
    return p;
}

void BackgroundModel::set_parameters(const double *values)
{
    offset = values[0];
    slope = values[1];
    for (std::size_t k = 0; k < resonances.size(); ++k)
    {
        resonances[k].center_ghz = values[2 + 3 * k];
        resonances[k].width_ghz = values[3 + 3 * k];
        resonances[k].height = values[4 + 3 * k];
    }
}

void BackgroundModel::gradient(double x, double *out) const
{
    out[0] = 1.0;
    out[1] = x - pivot_ghz;
    for (std::size_t k = 0; k < resonances.size(); ++k)
    {
        const Lorentzian &r = resonances[k];
        const double v = 2.0 * (x - r.center_ghz) / r.width_ghz;
        const double denom = 1.0 + v * v;
        out[2 + 3 * k] = r.height * 4.0 * v / (r.width_ghz * denom * denom);
        out[3 + 3 * k] = r.height * 2.0 * v * v / (r.width_ghz * denom * denom);
        out[4 + 3 * k] = 1.0 / denom;
    }
}

BackgroundFit fit_background(const Spectrum &spectrum, const BackgroundModel &init, const BackgroundFitOptions &options)
{
    spectrum.check();
    if (spectrum.size() < init.parameter_count() + 1)
    {
        throw ValidationError("fit_background: not enough points for the requested model");
    }
    if (init.resonances.size() > 2)
    {
        throw ValidationError("fit_background: at most two resonances");
    }
    const double span = spectrum.detuning_ghz.back() - spectrum.detuning_ghz.front();
    double widest = 0.0;
    for (const Lorentzian &r : init.resonances)
    {
        widest = std::max(widest, std::abs(r.width_ghz));
    }
    if (!options.windowed && span < 3.0 * widest)
    {
        throw ValidationError("fit_background: spectrum must cover three widths of the widest resonance "
                              "(or be declared windowed)");
    }

    Spectrum data;
    data.origin_thz = spectrum.origin_thz;
    for (std::size_t i = 0; i < spectrum.size(); ++i)
    {
        const double x = spectrum.detuning_ghz[i];
        if (options.mask && x >= options.mask->first && x <= options.mask->second)
        {
            continue;
        }
        data.detuning_ghz.push_back(x);
        data.intensity.push_back(spectrum.intensity[i]);
        if (!spectrum.sigma.empty())
        {
            data.sigma.push_back(spectrum.sigma[i]);
        }
    }

    BackgroundModel shape = init;
    if (init.pivot_ghz == 0.0 && init.slope == 0.0)
    {
        shape.pivot_ghz = 0.5 * (spectrum.detuning_ghz.front() + spectrum.detuning_ghz.back());
    }
    const std::size_t count = shape.parameter_count();
    // Parameter vector excludes the slope when it is frozen.
    const auto expand = [&](const Eigen::VectorXd &p) {
        std::vector<double> full(count);
        std::size_t k = 0;
        for (std::size_t i = 0; i < count; ++i)
        {
            full[i] = (i == 1 && !options.fit_slope) ? shape.slope : p(Eigen::Index(k++));
        }
        BackgroundModel m = shape;
        m.set_parameters(full.data());
        return m;
    };
    std::vector<double> start = shape.parameters();
    if (!options.fit_slope)
    {
        start.erase(start.begin() + 1);
    }

    LmProblem problem;
    problem.residual = [&](const Eigen::VectorXd &p) {
        const BackgroundModel m = expand(p);
        Eigen::VectorXd r(Eigen::Index(data.size()));
        for (std::size_t i = 0; i < data.size(); ++i)
        {
            r(Eigen::Index(i)) = (m(data.detuning_ghz[i]) - data.intensity[i]) * weight(data, i);
        }
        return r;
    };
    problem.jacobian = [&](const Eigen::VectorXd &p) {
        const BackgroundModel m = expand(p);
        Eigen::MatrixXd j(Eigen::Index(data.size()), p.size());
        std::vector<double> g(count);
        for (std::size_t i = 0; i < data.size(); ++i)
        {
            m.gradient(data.detuning_ghz[i], g.data());
            Eigen::Index k = 0;
            for (std::size_t c = 0; c < count; ++c)
            {
                if (c == 1 && !options.fit_slope)
                {
                    continue;
                }
                j(Eigen::Index(i), k++) = g[c] * weight(data, i);
            }
        }
        return j;
    };

    LmOptions lm = options.lm;
    lm.absolute_sigma = !data.sigma.empty();
    const LmResult result = lm_minimize(problem, to_vector(start), lm);
    if (!result.converged())
    {
        throw FitError("fit_background: no convergence after " + std::to_string(result.iterations) + " iterations",
                       result.residual_norm());
    }

    BackgroundFit fit;
    fit.model = expand(result.params);
    for (Lorentzian &r : fit.model.resonances)
    {
        r.width_ghz = std::abs(r.width_ghz);
    }
    fit.residual_norm = result.residual_norm();
    fit.iterations = result.iterations;
    fit.converged = true;
    for (double x : spectrum.detuning_ghz)
    {
        if (!(fit.model(x) > 0.0))
        {
            throw FitError("fit_background: fitted profile is not positive on the window", fit.residual_norm);
        }
    }
    return fit;
}

double wrap_phase(double phase)
{
    double wrapped = std::remainder(phase, 2.0 * kPi);
    if (wrapped <= -kPi)
    {
        wrapped += 2.0 * kPi;
    }
    return wrapped;
}

double FanoLine::factor(double x) const
{
    const cplx z{1.0, 2.0 * (x - center_ghz) / linewidth_ghz};
    return std::norm(1.0 - amplitude * std::polar(1.0, phase) / z);
}

std::array<double, 4> FanoLine::factor_gradient(double x) const
{
    const double u = 2.0 * (x - center_ghz) / linewidth_ghz;
    const cplx z{1.0, u};
    const cplx rotor = std::polar(1.0, phase);
    const cplx q = amplitude * rotor / z;
    const cplx l = 1.0 - q;
    const cplx dl_du = cplx{0.0, 1.0} * q / z;
    const auto d = [&l](cplx dl) { return 2.0 * (std::conj(l) * dl).real(); };
    return {
        d(dl_du * (-2.0 / linewidth_ghz)),
        d(dl_du * (-u / linewidth_ghz)),
        d(-rotor / z),
        d(cplx{0.0, -1.0} * q),
    };
}

FanoLine FanoLine::normalized() const
{
    FanoLine out = *this;
    if (out.linewidth_ghz < 0.0)
    {
        out.linewidth_ghz = -out.linewidth_ghz;
        out.phase = -out.phase;
    }
    if (out.amplitude < 0.0)
    {
        out.amplitude = -out.amplitude;
        out.phase += kPi;
    }
    // a and 2 - conj(a) give the same lineshape; keep the smaller amplitude.
    const cplx a = std::polar(out.amplitude, out.phase);
    if (a.real() > 1.0)
    {
        const cplx dual{2.0 - a.real(), a.imag()};
        out.amplitude = std::abs(dual);
        out.phase = std::arg(dual);
    }
    out.phase = wrap_phase(out.phase);
    return out;
}

std::vector<double> fano_model(const Spectrum &grid, const BackgroundModel &background, const FanoLine &line)
{
    std::vector<double> out(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i)
    {
        const double x = grid.detuning_ghz[i];
        out[i] = background(x) * line.factor(x);
    }
    return out;
}

Eigen::MatrixXd fano_jacobian(const Spectrum &grid, const BackgroundModel &background, const FanoLine &line)
{
    Eigen::MatrixXd j(Eigen::Index(grid.size()), 4);
    for (std::size_t i = 0; i < grid.size(); ++i)
    {
        const double x = grid.detuning_ghz[i];
        const double b = background(x);
        const auto g = line.factor_gradient(x);
        for (int k = 0; k < 4; ++k)
        {
            j(Eigen::Index(i), k) = b * g[std::size_t(k)];
        }
    }
    return j;
}

FanoLine initial_fano_guess(const Spectrum &spectrum, const BackgroundModel &background, const FanoInit &init)
{
    const std::size_t n = spectrum.size();
    std::vector<double> relative(n);
    for (std::size_t i = 0; i < n; ++i)
    {
        relative[i] = spectrum.intensity[i] / background(spectrum.detuning_ghz[i]) - 1.0;
    }
    std::size_t peak = 0;
    if (init.center_ghz)
    {
        const auto nearest = std::lower_bound(spectrum.detuning_ghz.begin(), spectrum.detuning_ghz.end(), *init.center_ghz);
        peak = std::min<std::size_t>(std::size_t(nearest - spectrum.detuning_ghz.begin()), n - 1);
    }
    else
    {
        for (std::size_t i = 1; i < n; ++i)
        {
            if (std::abs(relative[i]) > std::abs(relative[peak]))
            {
                peak = i;
            }
        }
    }

    FanoLine line;
    line.center_ghz = init.center_ghz.value_or(spectrum.detuning_ghz[peak]);

    const double extremum = relative[peak];
    const double half = 0.5 * std::abs(extremum);
    std::size_t lo = peak;
    std::size_t hi = peak;
    while (lo > 0 && std::abs(relative[lo - 1]) >= half)
    {
        --lo;
    }
    while (hi + 1 < n && std::abs(relative[hi + 1]) >= half)
    {
        ++hi;
    }
    double width = 3.0 * spectrum.grid_spacing_ghz();
    if (hi - lo >= 2)
    {
        double total = 0.0;
        double mean = 0.0;
        for (std::size_t i = lo; i <= hi; ++i)
        {
            total += std::abs(relative[i]);
            mean += std::abs(relative[i]) * spectrum.detuning_ghz[i];
        }
        mean /= total;
        double second = 0.0;
        for (std::size_t i = lo; i <= hi; ++i)
        {
            const double dx = spectrum.detuning_ghz[i] - mean;
            second += std::abs(relative[i]) * dx * dx;
        }
        width = std::max(width, kFwhmPerHalfMaxSigma * std::sqrt(second / total));
    }
    line.linewidth_ghz = init.linewidth_ghz.value_or(width);
    line.amplitude =
        init.amplitude.value_or(std::clamp(std::abs(1.0 - std::sqrt(std::max(0.0, 1.0 + extremum))), 1e-3, 2.0));
    line.phase = init.phase.value_or(kPi / 2.0);
    return line;
}

FanoFitResult fit_fano(const Spectrum &spectrum, const BackgroundModel &background, const FanoInit &init,
                       const FanoFitOptions &options)
{
    spectrum.check();
    if (spectrum.size() < 8)
    {
        throw ValidationError("fit_fano: at least 8 points are required");
    }
    for (double x : spectrum.detuning_ghz)
    {
        if (!(background(x) > 0.0))
        {
            throw ValidationError("fit_fano: background must be positive on the fit window");
        }
    }
    const FanoLine guess = initial_fano_guess(spectrum, background, init);
    const std::size_t n_bg = options.co_fit_background ? background.parameter_count() : 0;

    const auto unpack = [&](const Eigen::VectorXd &p, FanoLine &line, BackgroundModel &bg) {
        line.center_ghz = p(0);
        line.linewidth_ghz = p(1);
        line.amplitude = p(2);
        line.phase = p(3);
        bg = background;
        if (n_bg > 0)
        {
            bg.set_parameters(p.data() + 4);
        }
    };

    LmProblem problem;
    problem.residual = [&](const Eigen::VectorXd &p) {
        FanoLine line;
        BackgroundModel bg;
        unpack(p, line, bg);
        Eigen::VectorXd r(Eigen::Index(spectrum.size()));
        for (std::size_t i = 0; i < spectrum.size(); ++i)
        {
            const double x = spectrum.detuning_ghz[i];
            r(Eigen::Index(i)) = (bg(x) * line.factor(x) - spectrum.intensity[i]) * weight(spectrum, i);
        }
        return r;
    };
    problem.jacobian = [&](const Eigen::VectorXd &p) {
        FanoLine line;
        BackgroundModel bg;
        unpack(p, line, bg);
        Eigen::MatrixXd j(Eigen::Index(spectrum.size()), p.size());
        std::vector<double> g_bg(n_bg);
        for (std::size_t i = 0; i < spectrum.size(); ++i)
        {
            const double x = spectrum.detuning_ghz[i];
            const double w = weight(spectrum, i);
            const double b = bg(x);
            const auto g = line.factor_gradient(x);
            for (int k = 0; k < 4; ++k)
            {
                j(Eigen::Index(i), k) = b * g[std::size_t(k)] * w;
            }
            if (n_bg > 0)
            {
                bg.gradient(x, g_bg.data());
                const double f = line.factor(x);
                for (std::size_t k = 0; k < n_bg; ++k)
                {
                    j(Eigen::Index(i), Eigen::Index(4 + k)) = g_bg[k] * f * w;
                }
            }
        }
        return j;
    };

    std::vector<double> phases{guess.phase};
    if (!init.phase && options.multi_start_phase)
    {
        phases.insert(phases.end(), {0.0, kPi, -kPi / 2.0});
    }

    LmOptions lm = options.lm;
    lm.absolute_sigma = !spectrum.sigma.empty();
    std::optional<LmResult> best;
    std::string last_failure;
    for (double phase : phases)
    {
        Eigen::VectorXd start(Eigen::Index(4 + n_bg));
        start << guess.center_ghz, guess.linewidth_ghz, guess.amplitude, phase;
        if (n_bg > 0)
        {
            const auto bg = background.parameters();
            for (std::size_t k = 0; k < n_bg; ++k)
            {
                start(Eigen::Index(4 + k)) = bg[k];
            }
        }
        try
        {
            LmResult result = lm_minimize(problem, start, lm);
            if (result.converged() && (!best || result.cost < best->cost))
            {
                best = std::move(result);
            }
            else if (!result.converged())
            {
                last_failure = "no convergence after " + std::to_string(result.iterations) + " iterations";
            }
        }
        catch (const NumericalError &e)
        {
            last_failure = e.what();
        }
    }
    if (!best)
    {
        throw FitError("fit_fano: " + (last_failure.empty() ? std::string("no convergence") : last_failure),
                       std::numeric_limits<double>::quiet_NaN());
    }

    FanoFitResult fit;
    fit.origin_thz = spectrum.origin_thz;
    FanoLine raw;
    unpack(best->params, raw, fit.background);
    fit.line = raw.normalized();
    fit.center_thz = spectrum.origin_thz + units::ghz_to_thz(fit.line.center_ghz);
    fit.linewidth_mhz = units::ghz_to_mhz(fit.line.linewidth_ghz);
    fit.residual_norm = best->residual_norm();
    fit.iterations = best->iterations;
    fit.converged = true;
    fit.covariance_singular = best->covariance_singular;

    // Carry the covariance through the sign flips and the dual branch of normalized().
    Eigen::MatrixXd transform = Eigen::MatrixXd::Identity(best->params.size(), best->params.size());
    if (raw.linewidth_ghz < 0.0)
    {
        transform(1, 1) = -1.0;
        transform(3, 3) = -1.0;
    }
    if (raw.amplitude < 0.0)
    {
        transform(2, 2) = -1.0;
    }
    const double a_abs = std::abs(raw.amplitude);
    const double a_phase = raw.phase * (raw.linewidth_ghz < 0.0 ? -1.0 : 1.0) + (raw.amplitude < 0.0 ? kPi : 0.0);
    if (a_abs * std::cos(a_phase) > 1.0)
    {
        // d(A', phi') / d(A, phi) for a' = 2 - conj(a).
        const double c = std::cos(a_phase);
        const double s = std::sin(a_phase);
        const double c2 = std::cos(fit.line.phase);
        const double s2 = std::sin(fit.line.phase);
        const double a2 = fit.line.amplitude;
        Eigen::Matrix2d to_cartesian;
        to_cartesian << -c, a_abs * s, s, a_abs * c;
        Eigen::Matrix2d to_polar;
        to_polar << c2, s2, -s2 / a2, c2 / a2;
        Eigen::MatrixXd dual = Eigen::MatrixXd::Identity(transform.rows(), transform.cols());
        dual.block<2, 2>(2, 2) = to_polar * to_cartesian;
        transform = dual * transform;
    }
    fit.covariance = transform * best->covariance * transform.transpose();
    const auto sd = [&](int k) { return std::sqrt(std::max(0.0, fit.covariance(k, k))); };
    fit.errors = {units::ghz_to_mhz(sd(0)), units::ghz_to_mhz(sd(1)), sd(2), sd(3)};

    if (fit.line.linewidth_ghz < 2.0 * spectrum.grid_spacing_ghz())
    {
        fit.warnings.push_back("under-resolved: linewidth below two grid spacings");
    }
    if (fit.covariance_singular)
    {
        fit.warnings.push_back("singular covariance: some parameters are not identifiable");
    }
    return fit;
}

nlohmann::json to_json(const BackgroundModel &model)
{
    nlohmann::json resonances = nlohmann::json::array();
    for (const Lorentzian &r : model.resonances)
    {
        resonances.push_back({{"center_GHz", r.center_ghz}, {"width_GHz", r.width_ghz}, {"height", r.height}});
    }
    return {{"offset", model.offset}, {"slope_per_GHz", model.slope}, {"pivot_GHz", model.pivot_ghz},
            {"resonances", resonances}};
}

BackgroundModel background_from_json(const nlohmann::json &node)
{
    if (!node.is_object())
    {
        throw ParseError("background", "expected an object");
    }
    BackgroundModel model;
    for (const auto &item : node.items())
    {
        const std::string &key = item.key();
        if (key == "offset")
            model.offset = item.value().get<double>();
        else if (key == "slope_per_GHz")
            model.slope = item.value().get<double>();
        else if (key == "pivot_GHz")
            model.pivot_ghz = item.value().get<double>();
        else if (key == "resonances")
        {
            for (const auto &r : item.value())
            {
                Lorentzian l;
                for (const auto &field : r.items())
                {
                    if (field.key() == "center_GHz")
                        l.center_ghz = field.value().get<double>();
                    else if (field.key() == "width_GHz")
                        l.width_ghz = field.value().get<double>();
                    else if (field.key() == "height")
                        l.height = field.value().get<double>();
                    else
                        throw ParseError("background.resonances." + field.key(), "unknown key");
                }
                model.resonances.push_back(l);
            }
        }
        else
        {
            throw ParseError("background." + key, "unknown key");
        }
    }
    return model;
}

nlohmann::json to_json(const FanoFitResult &r)
{
    return {
        {"parameters",
         {{"center_THz", r.center_thz},
          {"center_detuning_GHz", r.line.center_ghz},
          {"origin_THz", r.origin_thz},
          {"linewidth_MHz", r.linewidth_mhz},
          {"amplitude", r.line.amplitude},
          {"phase_rad", r.line.phase}}},
        {"errors",
         {{"center_MHz", r.errors[0]},
          {"linewidth_MHz", r.errors[1]},
          {"amplitude", r.errors[2]},
          {"phase_rad", r.errors[3]}}},
        {"residual_norm", r.residual_norm},
        {"iterations", r.iterations},
        {"converged", r.converged},
        {"covariance_singular", r.covariance_singular},
        {"background", to_json(r.background)},
        {"warnings", r.warnings},
    };
}

} // namespace wgm
