#include "wgm/errors.hpp"
#include "wgm/lm.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

using namespace wgm;

TEST_CASE("quadratic bowl is solved in at most two iterations")
{
    LmProblem p;
    p.residual = [](const Eigen::VectorXd &x) {
        Eigen::VectorXd r(3);
        r << x(0) - 3.0, 2.0 * (x(1) + 1.0), x(0) + x(1) - 2.0;
        return r;
    };
    const LmResult r = lm_minimize(p, Eigen::Vector2d(10.0, 10.0));
    CHECK(r.converged());
    CHECK(r.iterations <= 2);
    const Eigen::Vector2d exact = [] {
        Eigen::Matrix<double, 3, 2> a;
        a << 1, 0, 0, 2, 1, 1;
        return Eigen::Vector2d((a.transpose() * a).ldlt().solve(a.transpose() * Eigen::Vector3d(3.0, -2.0, 2.0)));
    }();
    CHECK((r.params - exact).norm() < 1e-10);
}

TEST_CASE("Rosenbrock valley converges to (1, 1)")
{
    LmProblem p;
    p.residual = [](const Eigen::VectorXd &x) {
        Eigen::VectorXd r(2);
        r << 10.0 * (x(1) - x(0) * x(0)), 1.0 - x(0);
        return r;
    };
    p.jacobian = [](const Eigen::VectorXd &x) {
        Eigen::MatrixXd j(2, 2);
        j << -20.0 * x(0), 10.0, -1.0, 0.0;
        return j;
    };
    const LmResult r = lm_minimize(p, Eigen::Vector2d(-1.2, 1.0));
    CHECK(r.converged());
    CHECK(std::abs(r.params(0) - 1.0) < 1e-8);
    CHECK(std::abs(r.params(1) - 1.0) < 1e-8);

    LmProblem numeric = p;
    numeric.jacobian = nullptr;
    const LmResult n = lm_minimize(numeric, Eigen::Vector2d(-1.2, 1.0));
    CHECK((n.params - Eigen::Vector2d(1.0, 1.0)).norm() < 1e-8);
}

TEST_CASE("cost never increases across accepted steps")
{
    LmProblem p;
    p.residual = [&](const Eigen::VectorXd &x) {
        Eigen::VectorXd r(4);
        for (int i = 0; i < 4; ++i)
        {
            const double t = 0.5 * i;
            r(i) = x(0) * std::exp(-x(1) * t) - 2.0 * std::exp(-0.7 * t) - 0.01 * (i % 2);
        }
        return r;
    };
    LmOptions options;
    options.max_iterations = 1;
    Eigen::VectorXd x = Eigen::Vector2d(0.1, 3.0);
    double last = p.residual(x).squaredNorm();
    for (int step = 0; step < 40; ++step)
    {
        const LmResult r = lm_minimize(p, x, options);
        CHECK(r.cost <= last);
        last = r.cost;
        x = r.params;
    }
}

TEST_CASE("rank-deficient Jacobian keeps steps finite and flags the covariance")
{
    LmProblem p;
    p.residual = [](const Eigen::VectorXd &x) {
        Eigen::VectorXd r(3);
        r << x(0) + x(1) - 1.0, 2.0 * (x(0) + x(1)) - 2.5, x(0) + x(1);
        return r;
    };
    const LmResult r = lm_minimize(p, Eigen::Vector2d(4.0, -7.0));
    CHECK(r.params.allFinite());
    CHECK(r.covariance_singular);
    CHECK(std::abs(r.params(0) + r.params(1) - 1.0) < 1e-8);
}

TEST_CASE("non-finite residual is a numerical error naming the parameters")
{
    LmProblem p;
    p.residual = [](const Eigen::VectorXd &x) {
        Eigen::VectorXd r(1);
        r << std::sqrt(x(0));
        return r;
    };
    try
    {
        lm_minimize(p, Eigen::VectorXd::Constant(1, -1.0));
        FAIL("expected a numerical error");
    }
    catch (const NumericalError &e)
    {
        CHECK(std::string(e.what()).find("-1") != std::string::npos);
    }
}

TEST_CASE("zero residual terminates immediately")
{
    LmProblem p;
    p.residual = [](const Eigen::VectorXd &x) { return Eigen::VectorXd(x - Eigen::Vector2d(1.0, 2.0)); };
    const LmResult r = lm_minimize(p, Eigen::Vector2d(1.0, 2.0));
    CHECK(r.termination == LmTermination::zero_residual);
    CHECK(r.cost == 0.0);
}

TEST_CASE("iteration limit is reported as non-convergence")
{
    LmProblem p;
    p.residual = [](const Eigen::VectorXd &x) {
        Eigen::VectorXd r(2);
        r << 10.0 * (x(1) - x(0) * x(0)), 1.0 - x(0);
        return r;
    };
    LmOptions options;
    options.max_iterations = 2;
    const LmResult r = lm_minimize(p, Eigen::Vector2d(-1.2, 1.0), options);
    CHECK_FALSE(r.converged());
    CHECK(to_string(r.termination) == "max-iterations");
}

TEST_CASE("covariance of a linear fit matches the normal equations")
{
    const std::vector<double> t{0.0, 1.0, 2.0, 3.0, 4.0};
    const std::vector<double> y{0.1, 0.9, 2.2, 2.8, 4.1};
    LmProblem p;
    p.residual = [&](const Eigen::VectorXd &x) {
        Eigen::VectorXd r(5);
        for (int i = 0; i < 5; ++i)
        {
            r(i) = x(0) + x(1) * t[i] - y[i];
        }
        return r;
    };
    const LmResult r = lm_minimize(p, Eigen::Vector2d(0.0, 0.0));
    Eigen::MatrixXd a(5, 2);
    for (int i = 0; i < 5; ++i)
    {
        a(i, 0) = 1.0;
        a(i, 1) = t[i];
    }
    const Eigen::MatrixXd expected = (a.transpose() * a).inverse() * (r.cost / 3.0);
    CHECK((r.covariance - expected).norm() < 1e-10 * expected.norm());

    LmOptions absolute;
    absolute.absolute_sigma = true;
    const LmResult s = lm_minimize(p, Eigen::Vector2d(0.0, 0.0), absolute);
    CHECK((s.covariance - (a.transpose() * a).inverse()).norm() < 1e-10);
}

TEST_CASE("finite-difference Jacobian")
{
    const auto f = [](const Eigen::VectorXd &x) {
        Eigen::VectorXd r(2);
        r << std::sin(x(0)) * x(1), std::exp(x(1));
        return r;
    };
    const Eigen::MatrixXd j = finite_difference_jacobian(f, Eigen::Vector2d(0.3, 1.5));
    Eigen::Matrix2d exact;
    exact << std::cos(0.3) * 1.5, std::sin(0.3), 0.0, std::exp(1.5);
    CHECK((j - exact).norm() < 1e-8);
}
