#include "isospec/transform.hpp"

#include <cmath>
#include <set>
#include <string>

#include "isospec/ode.hpp"
#include "isospec/quadrature.hpp"

namespace isospec {

namespace {

constexpr double kOrthogonalityTol = 1e-6;
constexpr double kResolventRcondTol = 1e-12;

double inner_product(const SampledField& a, const SampledField& b, double h) {
    std::vector<double> f(a.value.size());
    for (std::size_t i = 0; i < f.size(); ++i) f[i] = a.value[i].dot(b.value[i]);
    return integral(f, h);
}

PerturbationMode mode_from_theta(const SpectrumReport& report, int k, const Vector& theta, double c) {
    const Problem& p = report.problem;
    const Eigenpair& pair = report.pairs[static_cast<std::size_t>(k)];
    if (theta.size() != p.dim()) {
        throw Error(ErrorCode::DimensionMismatch, "theta for k=" + std::to_string(k) + " has " +
                                                      std::to_string(theta.size()) + " entries, expected " +
                                                      std::to_string(p.dim()));
    }
    const Characteristic w = characteristic(p, pair.lambda, report.grid);
    const double defect = (w.w * theta).norm() / (w.scale * theta.norm());
    if (!(defect <= report.options.rank_tol)) {
        throw Error(ErrorCode::ConditionViolated, "theta for k=" + std::to_string(k) +
                                                      " is not a null vector of W(lambda_k): relative residual " +
                                                      std::to_string(defect));
    }
    const auto path = integrate_ivp(p.potential, pair.lambda, p.left.B.transpose(), -p.left.A.transpose(), report.grid);
    PerturbationMode mode{k, -1, pair.lambda, c, theta, {}, 0.0};
    std::vector<double> sq;
    for (std::size_t i = 0; i < path.y.size(); ++i) {
        mode.phi.value.push_back(path.y[i] * theta);
        mode.phi.derivative.push_back(path.yp[i] * theta);
        sq.push_back(mode.phi.value.back().squaredNorm());
    }
    mode.norm2 = integral(sq, report.grid.spacing());
    return mode;
}

}  // namespace

Perturbation build_perturbation(const SpectrumReport& report, std::span<const PerturbationEntry> entries) {
    Perturbation pert{report.grid, report.problem.dim(), {}};
    std::set<std::pair<int, int>> seen;
    for (const auto& e : entries) {
        if (e.k < 0 || e.k >= static_cast<int>(report.pairs.size())) {
            throw Error(ErrorCode::IndexOutOfRange, "eigenvalue index k=" + std::to_string(e.k) + " outside 0.." +
                                                        std::to_string(static_cast<int>(report.pairs.size()) - 1));
        }
        const Eigenpair& pair = report.pairs[static_cast<std::size_t>(e.k)];
        if (e.theta) {
            pert.modes.push_back(mode_from_theta(report, e.k, *e.theta, e.c));
        } else {
            if (e.i < 1 || e.i > pair.multiplicity) {
                throw Error(ErrorCode::IndexOutOfRange, "branch index i=" + std::to_string(e.i) + " outside 1.." +
                                                            std::to_string(pair.multiplicity) + " for k=" +
                                                            std::to_string(e.k));
            }
            if (!seen.insert({e.k, e.i}).second) {
                throw Error(ErrorCode::ConditionViolated,
                            "duplicate entry (k=" + std::to_string(e.k) + ", i=" + std::to_string(e.i) + ")");
            }
            const auto l = static_cast<std::size_t>(e.i - 1);
            pert.modes.push_back({e.k, e.i, pair.lambda, e.c, pair.thetas[l], pair.phis[l], pair.norms[l]});
        }
        const PerturbationMode& m = pert.modes.back();
        const double margin = 1 + m.c * m.norm2;
        if (!(margin > 0)) {
            throw Error(ErrorCode::ConditionViolated,
                        "1 + c ||phi||^2 > 0 fails for (k=" + std::to_string(e.k) + ", c=" + std::to_string(e.c) +
                            "): ||phi||^2 = " + std::to_string(m.norm2) + ", margin = " + std::to_string(margin));
        }
    }
    const double h = report.grid.spacing();
    for (std::size_t a = 0; a < pert.modes.size(); ++a) {
        for (std::size_t b = a + 1; b < pert.modes.size(); ++b) {
            const auto& ma = pert.modes[a];
            const auto& mb = pert.modes[b];
            const double ip = inner_product(ma.phi, mb.phi, h);
            if (std::abs(ip) > kOrthogonalityTol * std::sqrt(ma.norm2 * mb.norm2)) {
                throw Error(ErrorCode::ConditionViolated,
                            "selected eigenfunctions " + std::to_string(a) + " and " + std::to_string(b) +
                                " are not orthogonal (inner product " + std::to_string(ip) + ")");
            }
        }
    }
    return pert;
}

Matrix KernelField::phi_matrix(int i) const {
    Matrix m(dim, rank());
    for (int j = 0; j < rank(); ++j) m.col(j) = basis[static_cast<std::size_t>(j)].value[static_cast<std::size_t>(i)];
    return m;
}

Matrix KernelField::phi_derivative_matrix(int i) const {
    Matrix m(dim, rank());
    for (int j = 0; j < rank(); ++j) {
        m.col(j) = basis[static_cast<std::size_t>(j)].derivative[static_cast<std::size_t>(i)];
    }
    return m;
}

Matrix KernelField::a_derivative(int i) const {
    if (rank() == 0) return Matrix::Zero(dim, 0);
    const auto iu = static_cast<std::size_t>(i);
    const Matrix phi = phi_matrix(i);
    const Matrix dphi = phi_derivative_matrix(i);
    const auto c = coeffs.asDiagonal();
    const Matrix& r = resolvent[iu];
    const Matrix dgram = phi.transpose() * phi;
    return -dphi * c * r + phi * c * r * dgram * c * r;
}

Matrix KernelField::kernel(int i, int j) const {
    if (j > i || rank() == 0) return Matrix::Zero(dim, dim);
    return a[static_cast<std::size_t>(i)] * phi_matrix(j).transpose();
}

Matrix KernelField::diagonal(int i) const { return kernel(i, i); }

Matrix KernelField::diagonal_derivative(int i) const {
    if (rank() == 0) return Matrix::Zero(dim, dim);
    return a_derivative(i) * phi_matrix(i).transpose() +
           a[static_cast<std::size_t>(i)] * phi_derivative_matrix(i).transpose();
}

Matrix KernelField::source(int i, int j) const {
    if (rank() == 0) return Matrix::Zero(dim, dim);
    return phi_matrix(i) * coeffs.asDiagonal() * phi_matrix(j).transpose();
}

KernelField solve_kernel(const Perturbation& pert) {
    const int m = static_cast<int>(pert.modes.size());
    const Grid& grid = pert.grid;
    const auto nodes = static_cast<std::size_t>(grid.size());
    KernelField kf{grid, pert.dim, {}, Vector(m), {}, {}, {}, 1.0};
    for (int j = 0; j < m; ++j) {
        kf.basis.push_back(pert.modes[static_cast<std::size_t>(j)].phi);
        kf.coeffs(j) = pert.modes[static_cast<std::size_t>(j)].c;
    }
    if (m == 0) {
        kf.a.assign(nodes, Matrix::Zero(pert.dim, 0));
        kf.gram.assign(nodes, Matrix::Zero(0, 0));
        kf.resolvent.assign(nodes, Matrix::Zero(0, 0));
        return kf;
    }

    std::vector<Matrix> pointwise(nodes);
    for (std::size_t i = 0; i < nodes; ++i) {
        const Matrix phi = kf.phi_matrix(static_cast<int>(i));
        pointwise[i] = phi.transpose() * phi;
    }
    kf.gram = running_integral(pointwise, grid.spacing());

    const auto c = kf.coeffs.asDiagonal();
    const Matrix id = Matrix::Identity(m, m);
    kf.a.resize(nodes);
    kf.resolvent.resize(nodes);
    for (std::size_t i = 0; i < nodes; ++i) {
        kf.gram[i] = symmetrized(kf.gram[i]);
        const Matrix system = id + kf.gram[i] * c;
        Eigen::PartialPivLU<Matrix> lu(system);
        const double rcond = lu.rcond();
        kf.min_rcond = std::min(kf.min_rcond, rcond);
        if (!(rcond > kResolventRcondTol)) {
            throw Error(ErrorCode::SingularResolvent,
                        "I + G(x) C is singular at x=" + std::to_string(grid.node(static_cast<int>(i))) +
                            " (rcond " + std::to_string(rcond) + ")");
        }
        kf.resolvent[i] = lu.inverse();
        kf.a[i] = -kf.phi_matrix(static_cast<int>(i)) * c * kf.resolvent[i];
    }
    return kf;
}

KernelField solve_kernel(const Perturbation& pert, const Grid& grid) {
    if (!(pert.grid == grid)) {
        throw Error(ErrorCode::GridMismatch, "perturbation sampled on " + std::to_string(pert.grid.size()) +
                                                 " nodes, requested " + std::to_string(grid.size()));
    }
    return solve_kernel(pert);
}

PotentialResult potential_q(const KernelField& kernel, const MatrixPotential& base) {
    const Grid& grid = kernel.grid;
    std::vector<Matrix> samples(static_cast<std::size_t>(grid.size()));
    double defect = 0;
    for (int i = 0; i < grid.size(); ++i) {
        const Matrix q = base(grid.node(i)) + 2 * kernel.diagonal_derivative(i);
        defect = std::max(defect, (q - q.transpose()).lpNorm<Eigen::Infinity>());
        samples[static_cast<std::size_t>(i)] = symmetrized(q);
    }
    return {MatrixPotential::sampled(grid, std::move(samples)), defect};
}

BoundaryMatrices boundary_matrices(const KernelField& kernel, const Problem& p) {
    const Matrix k00 = kernel.diagonal(0);
    const Matrix kpipi = kernel.diagonal(kernel.grid.size() - 1);
    return {p.left.A - p.left.B * k00, p.right.A - p.right.B * kpipi, k00, kpipi};
}

SampledField transform_eigenfunction(const KernelField& kernel, const SampledField& phi, double /*lambda*/) {
    const auto nodes = static_cast<std::size_t>(kernel.grid.size());
    if (phi.value.size() != nodes || phi.derivative.size() != nodes) {
        throw Error(ErrorCode::GridMismatch, "eigenfunction has " + std::to_string(phi.value.size()) +
                                                 " samples, kernel grid has " + std::to_string(nodes));
    }
    if (kernel.rank() == 0) return phi;

    std::vector<Vector> overlap(nodes);
    for (std::size_t i = 0; i < nodes; ++i) overlap[i] = kernel.phi_matrix(static_cast<int>(i)).transpose() * phi.value[i];
    const std::vector<Vector> moments = running_integral(overlap, kernel.grid.spacing());

    SampledField psi;
    psi.value.resize(nodes);
    psi.derivative.resize(nodes);
    for (std::size_t i = 0; i < nodes; ++i) {
        const int ii = static_cast<int>(i);
        psi.value[i] = phi.value[i] + kernel.a[i] * moments[i];
        psi.derivative[i] = phi.derivative[i] + kernel.a_derivative(ii) * moments[i] + kernel.a[i] * overlap[i];
    }
    return psi;
}

std::pair<Problem, TransformResult> transform_problem(const Problem& p, const Perturbation& pert) {
    if (pert.dim != p.dim()) {
        throw Error(ErrorCode::DimensionMismatch, "perturbation dimension differs from problem dimension");
    }
    KernelField kernel = solve_kernel(pert);
    const int n = p.dim();
    Matrix f00 = Matrix::Zero(n, n);
    for (const auto& m : pert.modes) f00 += m.c * m.phi.value.front() * m.phi.value.front().transpose();

    if (pert.empty()) {
        const Matrix zero = Matrix::Zero(n, n);
        TransformResult result{std::move(kernel), p.potential, 0.0, p.left.A, p.right.A, zero, zero, f00, {}};
        return {p, std::move(result)};
    }

    PotentialResult q = potential_q(kernel, p.potential);
    const BoundaryMatrices bm = boundary_matrices(kernel, p);
    std::vector<SampledField> psis;
    psis.reserve(pert.modes.size());
    for (const auto& m : pert.modes) psis.push_back(transform_eigenfunction(kernel, m.phi, m.lambda));

    Problem out{q.q, {bm.a_left, p.left.B}, {bm.a_right, p.right.B}};
    TransformResult result{std::move(kernel), q.q,     q.symmetry_defect, bm.a_left, bm.a_right,
                           bm.k00,            bm.kpipi, f00,              std::move(psis)};
    return {std::move(out), std::move(result)};
}

std::pair<Problem, TransformResult> transform_problem(const Problem& p, const Perturbation& pert, const Grid& grid) {
    if (!(pert.grid == grid)) {
        throw Error(ErrorCode::GridMismatch, "perturbation sampled on " + std::to_string(pert.grid.size()) +
                                                 " nodes, requested " + std::to_string(grid.size()));
    }
    return transform_problem(p, pert);
}

}  // namespace isospec
