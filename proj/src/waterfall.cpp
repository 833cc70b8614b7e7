#include "wgm/waterfall.hpp"

#include "wgm/errors.hpp"
#include "wgm/lm.hpp"
#include "wgm/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <tuple>

namespace wgm
{
namespace
{

// Joint fit of all candidate lines as a product of Fano factors over the
// fixed background. Returns nothing when the fit fails or moves a line by
// more than a linewidth.
std::optional<std::vector<FanoLine>> refine_jointly(const Spectrum &spectrum, const BackgroundModel &background,
                                                    const std::vector<FanoLine> &lines, double linewidth_ghz)
{
    const std::size_t count = lines.size();
    const auto unpack = [count](const Eigen::VectorXd &p) {
        std::vector<FanoLine> out(count);
        for (std::size_t k = 0; k < count; ++k)
        {
            const Eigen::Index o = Eigen::Index(4 * k);
            out[k] = FanoLine{p(o), p(o + 1), p(o + 2), p(o + 3)};
        }
        return out;
    };
    LmProblem problem;
    problem.residual = [&](const Eigen::VectorXd &p) {
        const std::vector<FanoLine> current = unpack(p);
        Eigen::VectorXd r(Eigen::Index(spectrum.size()));
        for (std::size_t i = 0; i < spectrum.size(); ++i)
        {
            const double x = spectrum.detuning_ghz[i];
            double model = background(x);
            for (const FanoLine &line : current)
            {
                model *= line.factor(x);
            }
            r(Eigen::Index(i)) = model - spectrum.intensity[i];
        }
        return r;
    };
    problem.jacobian = [&](const Eigen::VectorXd &p) {
        const std::vector<FanoLine> current = unpack(p);
        Eigen::MatrixXd j(Eigen::Index(spectrum.size()), p.size());
        std::vector<double> factors(count);
        for (std::size_t i = 0; i < spectrum.size(); ++i)
        {
            const double x = spectrum.detuning_ghz[i];
            for (std::size_t k = 0; k < count; ++k)
            {
                factors[k] = current[k].factor(x);
            }
            for (std::size_t k = 0; k < count; ++k)
            {
                double others = background(x);
                for (std::size_t l = 0; l < count; ++l)
                {
                    others *= l == k ? 1.0 : factors[l];
                }
                const auto g = current[k].factor_gradient(x);
                for (std::size_t q = 0; q < 4; ++q)
                {
                    j(Eigen::Index(i), Eigen::Index(4 * k + q)) = others * g[q];
                }
            }
        }
        return j;
    };
    Eigen::VectorXd start(Eigen::Index(4 * count));
    for (std::size_t k = 0; k < count; ++k)
    {
        start.segment<4>(Eigen::Index(4 * k)) << lines[k].center_ghz, lines[k].linewidth_ghz, lines[k].amplitude,
            lines[k].phase;
    }
    try
    {
        const LmResult fit = lm_minimize(problem, start);
        if (!fit.converged())
        {
            return std::nullopt;
        }
        std::vector<FanoLine> out = unpack(fit.params);
        for (std::size_t k = 0; k < count; ++k)
        {
            out[k] = out[k].normalized();
            if (std::abs(out[k].center_ghz - lines[k].center_ghz) > linewidth_ghz)
            {
                return std::nullopt;
            }
        }
        return out;
    }
    catch (const NumericalError &)
    {
        return std::nullopt;
    }
}

} // namespace

std::vector<double> find_line_candidates(const Spectrum &spectrum, const BackgroundModel &background,
                                         double threshold, double linewidth_ghz)
{
    const std::size_t n = spectrum.size();
    std::vector<double> relative(n);
    for (std::size_t i = 0; i < n; ++i)
    {
        relative[i] = spectrum.intensity[i] / background(spectrum.detuning_ghz[i]) - 1.0;
    }

    std::vector<std::size_t> peaks;
    for (std::size_t i = 0; i < n; ++i)
    {
        const double here = std::abs(relative[i]);
        const bool left = i == 0 || here >= std::abs(relative[i - 1]);
        const bool right = i + 1 == n || here > std::abs(relative[i + 1]);
        if (left && right && here >= threshold)
        {
            peaks.push_back(i);
        }
    }
    std::sort(peaks.begin(), peaks.end(),
              [&](std::size_t a, std::size_t b) { return std::abs(relative[a]) > std::abs(relative[b]); });

    // Strongest first. An extremum that the lines found so far already
    // explain (the side lobe of an asymmetric line) is not a new line.
    std::vector<FanoLine> lines;
    std::vector<FanoLine> found;
    for (std::size_t k : peaks)
    {
        const double x = spectrum.detuning_ghz[k];
        double explained = 0.0;
        for (const FanoLine &line : lines)
        {
            explained += line.factor(x) - 1.0;
        }
        if (std::abs(relative[k] - explained) < threshold)
        {
            continue;
        }

        // A line is confirmed by a local fit that stays near the extremum.
        // Extrema that the fit walks away from belong to a broad baseline or
        // to a neighbouring line.
        const double half_window = 2.5 * linewidth_ghz;
        FanoLine line;
        line.center_ghz = x;
        line.linewidth_ghz = linewidth_ghz;
        line.amplitude = std::clamp(std::abs(1.0 - std::sqrt(std::max(0.0, 1.0 + relative[k]))), 1e-3, 2.0);
        line.phase = relative[k] < 0.0 ? 0.0 : std::numbers::pi;
        bool fitted = false;
        const Spectrum local = spectrum.window(x - half_window, x + half_window);
        if (local.size() >= 8)
        {
            try
            {
                FanoInit init;
                init.center_ghz = x;
                init.linewidth_ghz = linewidth_ghz;
                const FanoFitResult fit = fit_fano(local, background, init);
                if (std::abs(fit.line.center_ghz - x) > 2.0 * linewidth_ghz)
                {
                    continue;
                }
                line = fit.line;
                fitted = true;
            }
            catch (const FitError &)
            {
            }
        }
        const bool duplicate = std::any_of(found.begin(), found.end(), [&](const FanoLine &f) {
            return std::abs(f.center_ghz - line.center_ghz) < 0.5 * linewidth_ghz;
        });
        if (!duplicate)
        {
            found.push_back(line);
            if (fitted && line.amplitude > 0.0)
            {
                lines.push_back(line);
            }
        }
    }

    // Joint refinement of all candidates.
    if (found.size() > 1)
    {
        if (const auto joint = refine_jointly(spectrum, background, found, linewidth_ghz))
        {
            found = *joint;
        }
    }
    std::vector<double> out;
    for (const FanoLine &line : found)
    {
        out.push_back(line.center_ghz);
    }
    return out;
}

namespace
{

// Linear extrapolation from the last two resolved points of a track.
std::optional<double> predict(const std::vector<WaterfallStep> &history, const std::vector<double> &axis,
                              std::size_t molecule, std::size_t step)
{
    std::vector<std::size_t> known;
    for (std::size_t s = history.size(); s-- > 0 && known.size() < 2;)
    {
        if (history[s].center_ghz[molecule] && !history[s].merged[molecule])
        {
            known.push_back(s);
        }
    }
    if (known.empty())
    {
        for (std::size_t s = history.size(); s-- > 0;)
        {
            if (history[s].center_ghz[molecule])
            {
                return history[s].center_ghz[molecule];
            }
        }
        return std::nullopt;
    }
    const double x2 = *history[known[0]].center_ghz[molecule];
    if (known.size() == 1)
    {
        return x2;
    }
    const double x1 = *history[known[1]].center_ghz[molecule];
    const double rate = (x2 - x1) / (axis[known[0]] - axis[known[1]]);
    return x2 + rate * (axis[step] - axis[known[0]]);
}

} // namespace

WaterfallResult track_waterfall(const std::vector<Spectrum> &steps, const std::vector<double> &axis,
                                const BackgroundModel &background, const WaterfallInit &init)
{
    if (steps.empty())
    {
        throw ValidationError("track_waterfall: no spectra");
    }
    if (init.molecules == 0)
    {
        throw ValidationError("track_waterfall: molecule count must be positive");
    }
    if (!init.centers_ghz.empty() && init.centers_ghz.size() != init.molecules)
    {
        throw ValidationError("track_waterfall: one starting center per molecule");
    }
    if (!axis.empty() && axis.size() != steps.size())
    {
        throw ValidationError("track_waterfall: axis length differs from the number of spectra");
    }
    for (const Spectrum &s : steps)
    {
        if (s.detuning_ghz != steps.front().detuning_ghz || s.origin_thz != steps.front().origin_thz)
        {
            throw InterfaceError("track_waterfall: spectra do not share a frequency grid");
        }
    }

    WaterfallResult result;
    result.origin_thz = steps.front().origin_thz;
    result.axis = axis;
    if (result.axis.empty())
    {
        for (std::size_t s = 0; s < steps.size(); ++s)
        {
            result.axis.push_back(double(s));
        }
    }

    std::vector<std::vector<double>> candidates(steps.size());
    parallel_for(
        steps.size(),
        [&](std::size_t s) {
            candidates[s] = find_line_candidates(steps[s], background, init.threshold, init.linewidth_ghz);
        },
        init.workers);

    const std::size_t m = init.molecules;
    const double radius = init.max_jump_linewidths * init.linewidth_ghz;
    for (std::size_t s = 0; s < steps.size(); ++s)
    {
        WaterfallStep step;
        step.center_ghz.assign(m, std::nullopt);
        step.merged.assign(m, false);
        step.candidates_ghz = candidates[s];
        const std::vector<double> &cand = candidates[s];

        std::vector<std::optional<double>> prediction(m);
        for (std::size_t k = 0; k < m; ++k)
        {
            prediction[k] = predict(result.steps, result.axis, k, s);
            if (!prediction[k] && s == 0 && !init.centers_ghz.empty())
            {
                prediction[k] = init.centers_ghz[k];
            }
        }

        std::vector<std::tuple<double, std::size_t, std::size_t>> pairs;
        for (std::size_t k = 0; k < m; ++k)
        {
            if (!prediction[k])
            {
                continue;
            }
            for (std::size_t c = 0; c < cand.size(); ++c)
            {
                const double d = std::abs(cand[c] - *prediction[k]);
                if (d <= radius)
                {
                    pairs.emplace_back(d, k, c);
                }
            }
        }
        std::sort(pairs.begin(), pairs.end());
        std::vector<std::optional<std::size_t>> assigned(m);
        std::vector<bool> used(cand.size(), false);
        for (const auto &[d, k, c] : pairs)
        {
            if (!assigned[k] && !used[c])
            {
                assigned[k] = c;
                used[c] = true;
            }
        }

        // Near-degenerate tracks that found only one line share it.
        for (std::size_t k = 0; k < m; ++k)
        {
            if (assigned[k] || !prediction[k])
            {
                continue;
            }
            for (std::size_t other = 0; other < m; ++other)
            {
                if (other == k || !assigned[other] || !prediction[other])
                {
                    continue;
                }
                const double c = cand[*assigned[other]];
                if (std::abs(*prediction[other] - *prediction[k]) < init.linewidth_ghz &&
                    std::abs(c - *prediction[k]) <= radius)
                {
                    assigned[k] = assigned[other];
                    step.merged[k] = true;
                    step.merged[other] = true;
                    break;
                }
            }
        }

        // Tracks without any history adopt the strongest unused candidate.
        for (std::size_t k = 0; k < m; ++k)
        {
            if (prediction[k])
            {
                continue;
            }
            for (std::size_t c = 0; c < cand.size(); ++c)
            {
                if (!used[c])
                {
                    assigned[k] = c;
                    used[c] = true;
                    break;
                }
            }
        }
        // At the first step without starting centers, order tracks by frequency.
        if (s == 0 && init.centers_ghz.empty())
        {
            std::vector<double> first;
            for (const auto &a : assigned)
            {
                if (a)
                {
                    first.push_back(cand[*a]);
                }
            }
            std::sort(first.begin(), first.end());
            for (std::size_t k = 0; k < m; ++k)
            {
                step.center_ghz[k] = k < first.size() ? std::optional<double>(first[k]) : std::nullopt;
            }
        }
        else
        {
            for (std::size_t k = 0; k < m; ++k)
            {
                if (assigned[k])
                {
                    step.center_ghz[k] = cand[*assigned[k]];
                }
            }
        }
        result.steps.push_back(std::move(step));
    }
    return result;
}

TrackLine fit_track_line(const WaterfallResult &result, std::size_t molecule)
{
    std::vector<double> xs;
    std::vector<double> ys;
    for (std::size_t s = 0; s < result.steps.size(); ++s)
    {
        const WaterfallStep &step = result.steps[s];
        if (step.center_ghz.at(molecule) && !step.merged[molecule])
        {
            xs.push_back(result.axis[s]);
            ys.push_back(*step.center_ghz[molecule]);
        }
    }
    if (xs.size() < 2)
    {
        throw DomainError("fit_track_line: fewer than two resolved points");
    }
    const double n = double(xs.size());
    double mx = 0.0;
    double my = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i)
    {
        mx += xs[i] / n;
        my += ys[i] / n;
    }
    double sxx = 0.0;
    double sxy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i)
    {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
    }
    if (sxx == 0.0)
    {
        throw DomainError("fit_track_line: all resolved points share one axis value");
    }
    TrackLine line;
    line.slope = sxy / sxx;
    line.intercept = my - line.slope * mx;
    line.points = xs.size();
    double ss = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i)
    {
        const double r = ys[i] - line(xs[i]);
        ss += r * r;
    }
    line.rms_ghz = std::sqrt(ss / n);
    return line;
}

double track_crossing(const TrackLine &a, const TrackLine &b)
{
    if (a.slope == b.slope)
    {
        throw DomainError("track_crossing: parallel tracks never cross");
    }
    return (b.intercept - a.intercept) / (a.slope - b.slope);
}

} // namespace wgm
