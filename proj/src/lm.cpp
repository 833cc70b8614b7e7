#include "wgm/lm.hpp"

#include "wgm/errors.hpp"
#include "wgm/format.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/Eigenvalues>

namespace wgm
{
namespace
{

std::string describe(const Eigen::VectorXd &x)
{
    std::ostringstream out;
    out << '[';
    for (Eigen::Index i = 0; i < x.size(); ++i)
    {
        out << (i ? ", " : "") << format_number(x(i));
    }
    out << ']';
    return out.str();
}

Eigen::VectorXd checked(const Eigen::VectorXd &r, const Eigen::VectorXd &x)
{
    if (!r.allFinite())
    {
        throw NumericalError("non-finite residual at parameters " + describe(x));
    }
    return r;
}

// Pseudo-inverse of a symmetric positive semi-definite matrix, reporting
// whether any direction was dropped.
Eigen::MatrixXd psd_inverse(const Eigen::MatrixXd &a, bool &singular)
{
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(a);
    const Eigen::VectorXd values = eig.eigenvalues();
    const double largest = values.cwiseAbs().maxCoeff();
    const double cutoff = largest * double(a.rows()) * 1e-14;
    singular = largest == 0.0;
    Eigen::VectorXd inverse(values.size());
    for (Eigen::Index i = 0; i < values.size(); ++i)
    {
        if (values(i) > cutoff && largest > 0.0)
        {
            inverse(i) = 1.0 / values(i);
        }
        else
        {
            inverse(i) = 0.0;
            singular = true;
        }
    }
    return eig.eigenvectors() * inverse.asDiagonal() * eig.eigenvectors().transpose();
}

} // namespace

double LmResult::residual_norm() const { return std::sqrt(cost); }

Eigen::MatrixXd finite_difference_jacobian(const std::function<Eigen::VectorXd(const Eigen::VectorXd &)> &residual,
                                           const Eigen::VectorXd &x, double relative_step)
{
    const Eigen::VectorXd r0 = residual(x);
    Eigen::MatrixXd j(r0.size(), x.size());
    for (Eigen::Index k = 0; k < x.size(); ++k)
    {
        const double h = relative_step * std::max(1.0, std::abs(x(k)));
        Eigen::VectorXd up = x;
        Eigen::VectorXd down = x;
        up(k) += h;
        down(k) -= h;
        j.col(k) = (residual(up) - residual(down)) / (up(k) - down(k));
    }
    return j;
}

LmResult lm_minimize(const LmProblem &problem, const Eigen::VectorXd &initial, const LmOptions &options)
{
    const auto jacobian_at = [&](const Eigen::VectorXd &x) {
        return problem.jacobian ? problem.jacobian(x) : finite_difference_jacobian(problem.residual, x);
    };

    LmResult result;
    Eigen::VectorXd x = initial;
    Eigen::VectorXd r = checked(problem.residual(x), x);
    ++result.evaluations;
    double cost = r.squaredNorm();
    Eigen::MatrixXd j = jacobian_at(x);
    Eigen::MatrixXd normal = j.transpose() * j;
    Eigen::VectorXd gradient = j.transpose() * r;

    // Marquardt scaling: the damping is relative to diag(J^T J).
    double mu = options.initial_damping;
    double nu = 2.0;
    result.termination = LmTermination::max_iterations;

    const int n = int(x.size());
    while (result.iterations < options.max_iterations)
    {
        if (cost == 0.0)
        {
            result.termination = LmTermination::zero_residual;
            break;
        }
        // Scale-free stationarity test: cosine between r and each column of J.
        double cosine = 0.0;
        const double r_norm = std::sqrt(cost);
        for (int k = 0; k < n; ++k)
        {
            const double column = j.col(k).norm();
            if (column > 0.0)
            {
                cosine = std::max(cosine, std::abs(gradient(k)) / (column * r_norm));
            }
        }
        if (cosine <= options.gradient_tolerance)
        {
            result.termination = LmTermination::gradient;
            break;
        }

        Eigen::VectorXd scale = normal.diagonal();
        const double largest = scale.maxCoeff();
        const double scale_floor = largest > 0.0 ? largest * 1e-12 : 1.0;
        for (int k = 0; k < n; ++k)
        {
            scale(k) = std::max(scale(k), scale_floor);
        }

        bool accepted = false;
        bool stop = false;
        while (!accepted && !stop)
        {
            Eigen::MatrixXd damped = normal;
            damped.diagonal() += mu * scale;
            const Eigen::VectorXd step = damped.ldlt().solve(-gradient);
            const Eigen::VectorXd scaled_step = step.cwiseProduct(scale.cwiseSqrt());
            const Eigen::VectorXd scaled_x = x.cwiseProduct(scale.cwiseSqrt());
            if (!step.allFinite() ||
                scaled_step.norm() <= options.step_tolerance * (scaled_x.norm() + options.step_tolerance))
            {
                result.termination = LmTermination::step;
                stop = true;
                break;
            }
            // Predicted reduction of |r|^2 under the linear model.
            const double predicted = step.dot(mu * scale.cwiseProduct(step) - gradient);
            if (predicted <= options.cost_tolerance * cost)
            {
                result.termination = LmTermination::cost;
                stop = true;
                break;
            }
            const Eigen::VectorXd candidate = x + step;
            const Eigen::VectorXd r_new = checked(problem.residual(candidate), candidate);
            ++result.evaluations;
            const double cost_new = r_new.squaredNorm();
            const double rho = predicted > 0.0 ? (cost - cost_new) / predicted : -1.0;
            if (rho > 0.0 && cost_new <= cost)
            {
                accepted = true;
                x = candidate;
                r = r_new;
                cost = cost_new;
                j = jacobian_at(x);
                normal = j.transpose() * j;
                gradient = j.transpose() * r;
                ++result.iterations;
                mu *= std::max(1.0 / 3.0, 1.0 - std::pow(2.0 * rho - 1.0, 3));
                nu = 2.0;
            }
            else
            {
                mu *= nu;
                nu *= 2.0;
                if (!std::isfinite(mu) || nu > 1e300)
                {
                    result.termination = LmTermination::step;
                    stop = true;
                }
            }
        }
        if (stop)
        {
            break;
        }
    }

    // Undamped Gauss-Newton polish while the steps keep halving.
    if (result.converged() && cost > 0.0 && options.polish_steps > 0)
    {
        const auto scaled_norm = [&](const Eigen::VectorXd &h) {
            return h.cwiseProduct(normal.diagonal().cwiseSqrt()).norm();
        };
        double last = std::numeric_limits<double>::infinity();
        for (int k = 0; k < options.polish_steps; ++k)
        {
            const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(j);
            if (qr.rank() < n)
            {
                break;
            }
            const Eigen::VectorXd step = -qr.solve(r);
            const double size = scaled_norm(step);
            if (!step.allFinite() || !(size < 0.5 * last))
            {
                break;
            }
            const Eigen::VectorXd candidate = x + step;
            const Eigen::VectorXd r_new = problem.residual(candidate);
            ++result.evaluations;
            const double cost_new = r_new.squaredNorm();
            if (!r_new.allFinite() || cost_new > cost * (1.0 + 1e-9))
            {
                break;
            }
            x = candidate;
            r = r_new;
            cost = cost_new;
            j = jacobian_at(x);
            normal = j.transpose() * j;
            last = size;
        }
    }

    result.params = x;
    result.cost = cost;
    bool singular = false;
    result.covariance = psd_inverse(normal, singular);
    result.covariance_singular = singular;
    if (!options.absolute_sigma)
    {
        const Eigen::Index dof = r.size() - x.size();
        result.covariance *= dof > 0 ? cost / double(dof) : 0.0;
    }
    return result;
}

std::string to_string(LmTermination termination)
{
    switch (termination)
    {
    case LmTermination::gradient:
        return "gradient";
    case LmTermination::step:
        return "step";
    case LmTermination::cost:
        return "cost";
    case LmTermination::zero_residual:
        return "zero-residual";
    case LmTermination::max_iterations:
        return "max-iterations";
    }
    return "?";
}

} // namespace wgm
