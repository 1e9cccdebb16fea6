#include "doctest.h"

#include <cmath>
#include <numbers>

#include "isospec/model.hpp"
#include "isospec/ode.hpp"

using namespace isospec;

namespace {

constexpr double pi = std::numbers::pi;

Matrix scalar(double v) { return Matrix::Constant(1, 1, v); }

/// Max error of Y against diag(-sin 2x / 2, -sin x) for the diag(-3, 0) problem at
/// lambda = 1.
double paper_error(int n) {
    const auto path = integrate_ivp(builtin_potential("paper-example-2x2"), 1.0, Matrix::Zero(2, 2),
                                    -Matrix::Identity(2, 2), Grid(n));
    double worst = 0;
    for (int i = 0; i < n; ++i) {
        const double x = path.grid.node(i);
        Matrix exact = Matrix::Zero(2, 2);
        exact(0, 0) = -std::sin(2 * x) / 2;
        exact(1, 1) = -std::sin(x);
        worst = std::max(worst, (path.y[static_cast<std::size_t>(i)] - exact).cwiseAbs().maxCoeff());
    }
    return worst;
}

/// Same for a potential that varies in x: P = cos x (scalar) has no elementary
/// solution, so compare against a much finer run at the shared nodes.
double varying_error(int n) {
    const auto pot = MatrixPotential::closed_form(1, "cos", [](double x) { return scalar(std::cos(x)); });
    const int fine_n = 8 * (n - 1) + 1;
    const auto fine = integrate_ivp(pot, 2.5, scalar(0), scalar(1), Grid(fine_n));
    const auto coarse = integrate_ivp(pot, 2.5, scalar(0), scalar(1), Grid(n));
    double worst = 0;
    for (int i = 0; i < n; ++i) {
        const double d = coarse.y[static_cast<std::size_t>(i)](0, 0) - fine.y[static_cast<std::size_t>(8 * i)](0, 0);
        worst = std::max(worst, std::abs(d));
    }
    return worst;
}

}  // namespace

TEST_CASE("scalar free solutions") {
    const auto pot = builtin_potential("scalar-zero");
    SUBCASE("lambda = 1 with Dirichlet data gives -sin x") {
        const auto path = integrate_ivp(pot, 1.0, scalar(0), scalar(-1), Grid(401));
        for (int i = 0; i < 401; i += 20) CHECK(std::abs(path.y[static_cast<std::size_t>(i)](0, 0) - (-std::sin(path.grid.node(i)))) <= 1e-8);
        CHECK(std::abs(path.y.back()(0, 0)) <= 1e-8);
    }
    SUBCASE("lambda = 0 with constant data stays constant") {
        const auto path = integrate_ivp(pot, 0.0, scalar(1), scalar(0), Grid(101));
        for (const auto& y : path.y) CHECK(y(0, 0) == 1.0);
        for (const auto& yp : path.yp) CHECK(yp(0, 0) == 0.0);
    }
}

TEST_CASE("diag(-3, 0) problem at lambda = 1 separates into two sine channels") {
    const auto path = integrate_ivp(builtin_potential("paper-example-2x2"), 1.0, Matrix::Zero(2, 2),
                                    -Matrix::Identity(2, 2), Grid(401));
    CHECK(path.y.back().cwiseAbs().maxCoeff() <= 1e-8);
    CHECK(paper_error(401) <= 1e-8);
    // Y'' = (P - lambda) Y is stored alongside.
    const Matrix p = builtin_potential("paper-example-2x2")(1.0);
    CHECK((path.ypp[123] - (p - Matrix::Identity(2, 2)) * path.y[123]).norm() <= 1e-14);
}

TEST_CASE("integrate_to_end agrees with the full path") {
    const auto pot = builtin_potential("robin-coupled-2x2");
    const Grid g(201);
    const auto path = integrate_ivp(pot, 3.3, Matrix::Identity(2, 2), Matrix::Zero(2, 2), g);
    const auto [y, yp] = integrate_to_end(pot, 3.3, Matrix::Identity(2, 2), Matrix::Zero(2, 2), g);
    CHECK((y - path.y.back()).norm() == 0.0);
    CHECK((yp - path.yp.back()).norm() == 0.0);
}

TEST_CASE("dense evaluation") {
    const Grid g(401);
    SUBCASE("nodes return stored samples exactly") {
        const auto path = integrate_ivp(builtin_potential("robin-coupled-2x2"), 2.0, Matrix::Identity(2, 2),
                                        Matrix::Zero(2, 2), g);
        const auto [y, yp] = evaluate_path(path, g.node(77));
        CHECK(y == path.y[77]);
        CHECK(yp == path.yp[77]);
    }
    SUBCASE("scalar midpoint") {
        const auto path = integrate_ivp(builtin_potential("scalar-zero"), 1.0, scalar(0), scalar(-1), g);
        CHECK(std::abs(evaluate_path(path, pi / 2).first(0, 0) + 1) <= 1e-8);
        CHECK(std::abs(evaluate_path(path, 1.0001).first(0, 0) - (-std::sin(1.0001))) <= 1e-8);
    }
    SUBCASE("diag(-3, 0) problem at pi") {
        const auto path = integrate_ivp(builtin_potential("paper-example-2x2"), 1.0, Matrix::Zero(2, 2),
                                        -Matrix::Identity(2, 2), g);
        const auto [y, yp] = evaluate_path(path, pi);
        CHECK(y.cwiseAbs().maxCoeff() <= 1e-7);
        Matrix expected = Matrix::Zero(2, 2);
        expected(0, 0) = -std::cos(2 * pi);  // d/dx(-sin 2x / 2)
        expected(1, 1) = -std::cos(pi);
        CHECK((yp - expected).cwiseAbs().maxCoeff() <= 1e-7);
    }
    SUBCASE("outside the interval throws") {
        const auto path = integrate_ivp(builtin_potential("scalar-zero"), 1.0, scalar(0), scalar(-1), g);
        CHECK_THROWS_AS(evaluate_path(path, -0.1), Error);
        CHECK_THROWS_AS(evaluate_path(path, 3.2), Error);
    }
}

TEST_CASE("Wronskian is conserved") {
    const Grid g(401);
    for (const char* name : {"robin-coupled-2x2", "paper-example-2x2"}) {
        CAPTURE(name);
        const auto pot = builtin_potential(name);
        // Two solutions with self-adjoint data: Dirichlet-type and a Robin-type start.
        Matrix a(2, 2);
        a << 1.0, 0.5, 0.5, 2.0;
        const auto p1 = integrate_ivp(pot, 4.2, Matrix::Zero(2, 2), -Matrix::Identity(2, 2), g);
        const auto p2 = integrate_ivp(pot, 4.2, Matrix::Identity(2, 2), -a, g);
        auto wronskian = [&](std::size_t i) {
            return Matrix(p1.y[i].transpose() * p2.yp[i] - p1.yp[i].transpose() * p2.y[i]);
        };
        const Matrix w0 = wronskian(0);
        double drift = 0;
        for (std::size_t i = 0; i < p1.y.size(); ++i) drift = std::max(drift, (wronskian(i) - w0).cwiseAbs().maxCoeff());
        CHECK(drift / pi <= 1e-8);
    }
}

TEST_CASE("fourth-order convergence") {
    SUBCASE("constant potential against the analytic solution") {
        const double e1 = paper_error(101);
        const double e2 = paper_error(201);
        CHECK(e1 / e2 >= 12.0);
    }
    SUBCASE("varying potential against a fine reference") {
        const double e1 = varying_error(51);
        const double e2 = varying_error(101);
        CHECK(e1 / e2 >= 12.0);
    }
    SUBCASE("coupled builtin against a fine reference") {
        const auto pot = builtin_potential("robin-coupled-2x2");
        auto err = [&](int n) {
            const auto fine = integrate_ivp(pot, 5.0, Matrix::Zero(2, 2), Matrix::Identity(2, 2), Grid(8 * (n - 1) + 1));
            const auto coarse = integrate_ivp(pot, 5.0, Matrix::Zero(2, 2), Matrix::Identity(2, 2), Grid(n));
            return (coarse.y.back() - fine.y.back()).cwiseAbs().maxCoeff();
        };
        CHECK(err(51) / err(101) >= 12.0);
    }
}

TEST_CASE("solutions depend linearly on the initial data") {
    const auto pot = builtin_potential("robin-coupled-2x2");
    const Grid g(201);
    Matrix m(2, 2);
    m << 0.3, -1.2, 2.0, 0.7;
    const Matrix y0 = Matrix::Identity(2, 2);
    Matrix yp0(2, 2);
    yp0 << -1.0, 0.5, 0.5, 0.25;
    const auto base = integrate_ivp(pot, 7.5, y0, yp0, g);
    const auto scaled = integrate_ivp(pot, 7.5, y0 * m, yp0 * m, g);
    double worst = 0;
    for (std::size_t i = 0; i < base.y.size(); ++i) {
        worst = std::max(worst, (scaled.y[i] - base.y[i] * m).cwiseAbs().maxCoeff());
        worst = std::max(worst, (scaled.yp[i] - base.yp[i] * m).cwiseAbs().maxCoeff());
    }
    CHECK(worst <= 1e-12);
}

TEST_CASE("initial data must have N rows") {
    CHECK_THROWS_AS(integrate_ivp(builtin_potential("free-2x2"), 1.0, Matrix::Zero(3, 3), Matrix::Zero(3, 3), Grid(11)),
                    Error);
    // Fewer columns than N is allowed (a single vector solution).
    const auto path = integrate_ivp(builtin_potential("free-2x2"), 1.0, Matrix::Zero(2, 1), Matrix::Ones(2, 1), Grid(11));
    CHECK(path.y.back().cols() == 1);
}
