#include "doctest.h"

#include <cmath>
#include <numbers>
#include <vector>

#include "isospec/quadrature.hpp"
#include "isospec/transform.hpp"

using namespace isospec;

namespace {

constexpr double pi = std::numbers::pi;

ScanOptions options(int n = 401) {
    ScanOptions o;
    o.grid_size = n;
    o.tol = 1e-12;
    return o;
}

Vector vec2(double a, double b) {
    Vector v(2);
    v << a, b;
    return v;
}

struct Setup {
    Problem p;
    SpectrumReport report;
    Perturbation pert;
};

/// Paper example with one explicit null vector at lambda = 1 (k = 1).
Setup paper_rank_one(const Vector& theta, double c, int n = 401) {
    Problem p = builtin_problem("paper-example-2x2");
    SpectrumReport r = scan_spectrum(p, -5, 20, options(n));
    std::vector<PerturbationEntry> e{{1, 0, c, theta}};
    Perturbation pert = build_perturbation(r, e);
    return {std::move(p), std::move(r), std::move(pert)};
}

/// Closed-form rank-one kernel -c phi(x) phi(y)^T / (1 + c int_0^x |phi|^2)
/// from the same samples and the same quadrature.
double rank_one_difference(const Perturbation& pert, const KernelField& k) {
    const auto& m = pert.modes.front();
    std::vector<double> sq;
    for (const auto& v : m.phi.value) sq.push_back(v.squaredNorm());
    const auto g = running_integral(sq, pert.grid.spacing());
    double worst = 0;
    for (int i = 0; i < pert.grid.size(); ++i) {
        const auto iu = static_cast<std::size_t>(i);
        for (int j = 0; j <= i; ++j) {
            const auto ju = static_cast<std::size_t>(j);
            const Matrix closed = -m.c * m.phi.value[iu] * m.phi.value[ju].transpose() / (1 + m.c * g[iu]);
            worst = std::max(worst, (k.kernel(i, j) - closed).cwiseAbs().maxCoeff());
        }
    }
    return worst;
}

}  // namespace

TEST_CASE("admissibility of perturbations") {
    const Problem p = builtin_problem("paper-example-2x2");
    const SpectrumReport r = scan_spectrum(p, -5, 20, options());
    const Vector theta = vec2(-2, -1);

    SUBCASE("c = 1 on the mixed eigenfunction is accepted with ||phi||^2 = pi") {
        std::vector<PerturbationEntry> e{{1, 0, 1.0, theta}};
        const Perturbation pert = build_perturbation(r, e);
        REQUIRE(pert.modes.size() == 1);
        CHECK(std::abs(pert.modes[0].norm2 - pi) <= 1e-7);
        CHECK(1 + pert.modes[0].c * pert.modes[0].norm2 > 0);
    }
    SUBCASE("c = -2/pi violates 1 + c ||phi||^2 > 0") {
        std::vector<PerturbationEntry> e{{1, 0, -2 / pi, theta}};
        try {
            build_perturbation(r, e);
            FAIL("expected a violated condition");
        } catch (const Error& err) {
            CHECK(err.code() == ErrorCode::ConditionViolated);
            CHECK(std::string(err.what()).find("1 + c ||phi||^2 > 0") != std::string::npos);
        }
    }
    SUBCASE("empty list is the identity") {
        const Perturbation pert = build_perturbation(r, {});
        CHECK(pert.empty());
        const auto [q, res] = transform_problem(p, pert);
        CHECK(res.kernel.rank() == 0);
        for (int i = 0; i < r.grid.size(); i += 50) CHECK(q.potential(r.grid.node(i)) == p.potential(r.grid.node(i)));
        CHECK(q.left.A == p.left.A);
        CHECK(q.right.A == p.right.A);
    }
    SUBCASE("index errors") {
        std::vector<PerturbationEntry> bad_k{{42, 1, 1.0, std::nullopt}};
        std::vector<PerturbationEntry> bad_i{{0, 2, 1.0, std::nullopt}};
        CHECK_THROWS_AS(build_perturbation(r, bad_k), Error);
        CHECK_THROWS_AS(build_perturbation(r, bad_i), Error);
    }
    SUBCASE("duplicates, non-null vectors and non-orthogonal selections are rejected") {
        std::vector<PerturbationEntry> dup{{0, 1, 1.0, std::nullopt}, {0, 1, 0.5, std::nullopt}};
        CHECK_THROWS_AS(build_perturbation(r, dup), Error);
        std::vector<PerturbationEntry> not_null{{0, 0, 1.0, vec2(0, 1)}};  // lambda = -2 lives in channel 1
        CHECK_THROWS_AS(build_perturbation(r, not_null), Error);
        std::vector<PerturbationEntry> skew{{1, 0, 1.0, theta}, {1, 0, 1.0, vec2(1, 0)}};
        CHECK_THROWS_AS(build_perturbation(r, skew), Error);
    }
}

TEST_CASE("rank-one kernel equals the closed form") {
    SUBCASE("mixed eigenfunction") {
        const Setup s = paper_rank_one(vec2(-2, -1), 1.0);
        CHECK(rank_one_difference(s.pert, solve_kernel(s.pert)) <= 1e-10);
    }
    SUBCASE("second channel only") {
        const Setup s = paper_rank_one(vec2(0, -1), 1.0);
        CHECK(rank_one_difference(s.pert, solve_kernel(s.pert)) <= 1e-10);
    }
    SUBCASE("scalar") {
        const SpectrumReport r = scan_spectrum(builtin_problem("scalar-zero"), 0.5, 10, options());
        std::vector<PerturbationEntry> e{{0, 1, 1.0, std::nullopt}};
        const Perturbation pert = build_perturbation(r, e);
        CHECK(rank_one_difference(pert, solve_kernel(pert)) <= 1e-10);
    }
}

TEST_CASE("kernel basics") {
    const Setup s = paper_rank_one(vec2(-2, -1), 1.0);
    const KernelField k = solve_kernel(s.pert, s.report.grid);
    const int last = k.grid.size() - 1;
    CHECK(k.diagonal(last).cwiseAbs().maxCoeff() <= 1e-9);  // phi(pi) = 0
    CHECK(k.kernel(3, 10).norm() == 0.0);                    // above the diagonal
    CHECK(k.min_rcond > 0.1);
    CHECK_THROWS_AS(solve_kernel(s.pert, Grid(201)), Error);

    const Perturbation none = build_perturbation(s.report, {});
    const KernelField zero = solve_kernel(none);
    CHECK(zero.rank() == 0);
    CHECK(zero.kernel(100, 50).norm() == 0.0);
}

TEST_CASE("diag(-3, 0) problem Q matches the analytic non-commuting potential") {
    const Setup s = paper_rank_one(vec2(-2, -1), 1.0);
    const auto [q, res] = transform_problem(s.p, s.pert);
    CHECK(res.q_symmetry_defect <= 1e-9);
    double worst = 0;
    for (int i = 0; i < s.report.grid.size(); ++i) {
        const double x = s.report.grid.node(i);
        const Vector phi = vec2(std::sin(2 * x), std::sin(x));
        const Vector dphi = vec2(2 * std::cos(2 * x), std::cos(x));
        const double d = 1 + x - std::sin(2 * x) / 4 - std::sin(4 * x) / 8;
        const double dd = phi.squaredNorm();
        const Matrix deriv = (dphi * phi.transpose() + phi * dphi.transpose()) / d - phi * phi.transpose() * dd / (d * d);
        Matrix expected = Matrix::Zero(2, 2);
        expected(0, 0) = -3;
        expected -= 2 * deriv;
        worst = std::max(worst, (q.potential(x) - expected).cwiseAbs().maxCoeff());
    }
    CHECK(worst <= 1e-8);
    // Dirichlet data is unchanged.
    CHECK(q.left.A == Matrix::Identity(2, 2));
    CHECK(q.right.A == Matrix::Identity(2, 2));
    CHECK(q.left.B.norm() == 0.0);
    CHECK(q.right.B.norm() == 0.0);
}

TEST_CASE("second-channel eigenfunction gives a diagonal Q") {
    const Setup s = paper_rank_one(vec2(0, -1), 1.0);
    const auto [q, res] = transform_problem(s.p, s.pert);
    for (int i = 0; i < s.report.grid.size(); ++i) {
        const double x = s.report.grid.node(i);
        const Matrix v = q.potential(x);
        CHECK(std::abs(v(0, 0) + 3) <= 1e-9);
        CHECK(std::abs(v(0, 1)) <= 1e-9);
        const double d = 1 + x / 2 - std::sin(2 * x) / 4;
        const double s2 = std::sin(x) * std::sin(x);
        const double q22 = -2 * (std::sin(2 * x) / d - s2 * s2 / (d * d));
        CHECK(std::abs(v(1, 1) - q22) <= 1e-8);
    }
}

TEST_CASE("boundary matrices") {
    SUBCASE("Dirichlet stays Dirichlet") {
        const Setup s = paper_rank_one(vec2(-2, -1), 1.0);
        const auto b = boundary_matrices(solve_kernel(s.pert), s.p);
        CHECK(b.a_left == Matrix::Identity(2, 2));
        CHECK(b.a_right == Matrix::Identity(2, 2));
    }
    SUBCASE("Neumann left end: A~ = -K(0,0) = c phi(0)^2") {
        const Problem p = builtin_problem("neumann-scalar");
        const SpectrumReport r = scan_spectrum(p, -1, 13, options());
        std::vector<PerturbationEntry> e{{0, 1, 0.8, std::nullopt}};
        const Perturbation pert = build_perturbation(r, e);
        const KernelField k = solve_kernel(pert);
        const auto b = boundary_matrices(k, p);
        const double phi0 = pert.modes[0].phi.value.front()(0);
        CHECK(std::abs(k.diagonal(0)(0, 0) + 0.8 * phi0 * phi0) <= 1e-14);
        CHECK(std::abs(b.a_left(0, 0) - 0.8 * phi0 * phi0) <= 1e-14);
        CHECK(b.a_left(0, 0) > 0);
    }
    SUBCASE("coupled Robin end stays self-adjoint") {
        const Problem p = builtin_problem("robin-coupled-2x2");
        const SpectrumReport r = scan_spectrum(p, -5, 20, options());
        std::vector<PerturbationEntry> e{{0, 1, 0.7, std::nullopt}, {2, 1, -0.05, std::nullopt}};
        const Perturbation pert = build_perturbation(r, e);
        const auto [q, res] = transform_problem(p, pert);
        const Matrix l = q.left.B * q.left.A.transpose() - q.left.A * q.left.B.transpose();
        const Matrix rr = q.right.B * q.right.A.transpose() - q.right.A * q.right.B.transpose();
        CHECK(l.cwiseAbs().maxCoeff() <= 1e-10);
        CHECK(rr.cwiseAbs().maxCoeff() <= 1e-10);
        CHECK(res.q_symmetry_defect <= 1e-9);
    }
    SUBCASE("empty perturbation leaves the pairs alone") {
        const Problem p = builtin_problem("robin-coupled-2x2");
        const SpectrumReport r = scan_spectrum(p, -5, 20, options());
        const auto b = boundary_matrices(solve_kernel(build_perturbation(r, {})), p);
        CHECK(b.a_left == p.left.A);
        CHECK(b.a_right == p.right.A);
    }
}

TEST_CASE("transformed eigenfunctions") {
    SUBCASE("endpoint value vanishes for the diag(-3, 0) problem") {
        const Setup s = paper_rank_one(vec2(-2, -1), 1.0);
        const auto [q, res] = transform_problem(s.p, s.pert);
        CHECK(res.psis[0].value.back().cwiseAbs().maxCoeff() <= 1e-8);  // phi(pi) itself is zero only to integrator accuracy
        // psi (1 + c ||phi||^2) = phi at pi.
        const auto& m = s.pert.modes[0];
        CHECK((res.psis[0].value.back() * (1 + m.c * m.norm2) - m.phi.value.back()).cwiseAbs().maxCoeff() <= 1e-9);
    }
    SUBCASE("empty kernel maps phi to itself") {
        const Setup s = paper_rank_one(vec2(-2, -1), 1.0);
        const KernelField zero = solve_kernel(build_perturbation(s.report, {}));
        const auto& phi = s.report.pairs[2].phis[0];
        const SampledField psi = transform_eigenfunction(zero, phi, s.report.pairs[2].lambda);
        for (std::size_t i = 0; i < phi.value.size(); ++i) {
            CHECK(psi.value[i] == phi.value[i]);
            CHECK(psi.derivative[i] == phi.derivative[i]);
        }
    }
    SUBCASE("psi solves the transformed equation (fine grid)") {
        const Setup s = paper_rank_one(vec2(-2, -1), 1.0, 801);
        const auto [q, res] = transform_problem(s.p, s.pert);
        const Grid& g = s.report.grid;
        const auto& psi = res.psis[0];
        const double h = g.spacing();
        double worst = 0;
        for (int i = 2; i + 2 < g.size(); ++i) {
            const auto u = static_cast<std::size_t>(i);
            const Vector d2 = (-psi.value[u + 2] + 16.0 * psi.value[u + 1] - 30.0 * psi.value[u] +
                               16.0 * psi.value[u - 1] - psi.value[u - 2]) /
                              (12 * h * h);
            const Vector r = -d2 + q.potential(g.node(i)) * psi.value[u] - psi.value[u];
            worst = std::max(worst, r.cwiseAbs().maxCoeff());
        }
        CHECK(worst <= 1e-6);
    }
    SUBCASE("grid mismatch is reported") {
        const Setup s = paper_rank_one(vec2(-2, -1), 1.0);
        const SpectrumReport other = scan_spectrum(s.p, -5, 3, options(201));
        CHECK_THROWS_AS(transform_eigenfunction(solve_kernel(s.pert), other.pairs[0].phis[0], other.pairs[0].lambda),
                        Error);
    }
}

TEST_CASE("representation a_j = -c_j psi_j holds for coupled rank-two kernels") {
    const Problem p = builtin_problem("paper-example-2x2");
    const SpectrumReport r = scan_spectrum(p, -5, 20, options());
    std::vector<PerturbationEntry> e{{0, 1, 0.5, std::nullopt}, {1, 2, -0.2, std::nullopt}};
    const Perturbation pert = build_perturbation(r, e);
    const auto [q, res] = transform_problem(p, pert);
    double worst = 0;
    for (std::size_t j = 0; j < 2; ++j) {
        for (std::size_t i = 0; i < res.kernel.a.size(); ++i) {
            const Vector d = res.kernel.a[i].col(static_cast<Eigen::Index>(j)) + pert.modes[j].c * res.psis[j].value[i];
            worst = std::max(worst, d.cwiseAbs().maxCoeff());
        }
    }
    CHECK(worst <= 1e-9);
}

TEST_CASE("scalar rank-one transform keeps the spectrum") {
    const Problem p = builtin_problem("scalar-zero");
    const SpectrumReport r = scan_spectrum(p, 0.5, 10, options());
    std::vector<PerturbationEntry> e{{0, 1, 1.0, std::nullopt}};
    const Perturbation pert = build_perturbation(r, e);
    const auto [q, res] = transform_problem(p, pert);
    // Q = -2 d/dx [sin^2 x / (1 + x/2 - sin 2x / 4)]
    double worst = 0;
    for (int i = 0; i < r.grid.size(); ++i) {
        const double x = r.grid.node(i);
        const double d = 1 + x / 2 - std::sin(2 * x) / 4;
        const double s2 = std::sin(x) * std::sin(x);
        worst = std::max(worst, std::abs(q.potential(x)(0, 0) + 2 * (std::sin(2 * x) / d - s2 * s2 / (d * d))));
    }
    CHECK(worst <= 1e-8);
    const auto again = scan_spectrum(q, 0.5, 10, options());
    REQUIRE(again.pairs.size() == 3);
    for (int k = 0; k < 3; ++k) CHECK(std::abs(again.pairs[static_cast<std::size_t>(k)].lambda - (k + 1) * (k + 1)) <= 1e-6);
}
