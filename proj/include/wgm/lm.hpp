#ifndef WGM_LM_HPP
#define WGM_LM_HPP

#include <cstddef>
#include <functional>
#include <string>

#include <Eigen/Dense>

namespace wgm
{

// Nonlinear least-squares problem: minimize |r(x)|^2.
struct LmProblem
{
    std::function<Eigen::VectorXd(const Eigen::VectorXd &)> residual;
    // Optional analytic Jacobian dr/dx; central differences are used when empty.
    std::function<Eigen::MatrixXd(const Eigen::VectorXd &)> jacobian;
};

struct LmOptions
{
    int max_iterations = 500;
    double initial_damping = 1e-10; // relative to diag(J^T J)
    double gradient_tolerance = 1e-12; // max cosine between r and a Jacobian column
    double step_tolerance = 1e-14;     // |D h| <= tol * (|D x| + tol)
    double cost_tolerance = 1e-20;     // predicted relative cost decrease of the next step
    int polish_steps = 3;              // undamped Gauss-Newton steps after convergence
    // Residuals are already divided by absolute standard deviations; the
    // covariance is then (J^T J)^-1 without rescaling by the reduced chi^2.
    bool absolute_sigma = false;
};

enum class LmTermination
{
    gradient,
    step,
    cost,
    zero_residual,
    max_iterations,
};

struct LmResult
{
    Eigen::VectorXd params;
    Eigen::MatrixXd covariance;
    bool covariance_singular = false;
    double cost = 0.0; // |r|^2
    int iterations = 0; // accepted steps
    int evaluations = 0;
    LmTermination termination = LmTermination::max_iterations;

    bool converged() const { return termination != LmTermination::max_iterations; }
    double residual_norm() const;
};

// Damped Gauss-Newton with Marquardt diagonal scaling and Nielsen's damping
// update. The cost never increases across accepted steps. Throws
// NumericalError when the residual is not finite.
LmResult lm_minimize(const LmProblem &problem, const Eigen::VectorXd &initial, const LmOptions &options = {});

// Central-difference Jacobian with per-parameter relative steps.
Eigen::MatrixXd finite_difference_jacobian(const std::function<Eigen::VectorXd(const Eigen::VectorXd &)> &residual,
                                           const Eigen::VectorXd &x, double relative_step = 1e-6);

std::string to_string(LmTermination termination);

} // namespace wgm

#endif
