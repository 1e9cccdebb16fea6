#include "isospec/spectrum.hpp"

#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "isospec/ode.hpp"
#include "isospec/parallel.hpp"
#include "isospec/quadrature.hpp"

namespace isospec {

int Characteristic::nullity(double rank_tol) const {
    int count = 0;
    for (Eigen::Index i = 0; i < singular_values.size(); ++i) {
        if (singular_values(i) <= rank_tol * scale) ++count;
    }
    return count;
}

namespace {

double largest_singular_value(const Matrix& m) { return Eigen::JacobiSVD<Matrix>(m).singularValues()(0); }

}  // namespace

Characteristic characteristic(const Problem& p, double lambda, const Grid& grid) {
    const auto [y, yp] = integrate_to_end(p.potential, lambda, p.left.B.transpose(), -p.left.A.transpose(), grid);
    const auto n = p.dim();
    Characteristic c;
    c.w = p.right.B * yp + p.right.A * y;

    Matrix bc(n, 2 * n);
    bc << p.right.A, p.right.B;
    Matrix state(2 * n, n);
    state << y, yp;
    c.scale = largest_singular_value(bc) * largest_singular_value(state);

    Eigen::JacobiSVD<Matrix> svd(c.w, Eigen::ComputeFullV);
    c.singular_values = svd.singularValues();
    c.right_vectors = svd.matrixV();
    return c;
}

Matrix characteristic_matrix(const Problem& p, double lambda, const Grid& grid) {
    const auto [y, yp] = integrate_to_end(p.potential, lambda, p.left.B.transpose(), -p.left.A.transpose(), grid);
    return p.right.B * yp + p.right.A * y;
}

std::vector<double> SpectrumReport::sigma_sequence() const {
    std::vector<double> seq;
    for (const auto& pair : pairs) seq.insert(seq.end(), static_cast<std::size_t>(pair.multiplicity), pair.lambda);
    return seq;
}

Eigenpair eigenbasis(const Problem& p, double lambda, const Grid& grid, double rank_tol) {
    const Characteristic c = characteristic(p, lambda, grid);
    const int m = c.nullity(rank_tol);
    if (m == 0) {
        throw Error(ErrorCode::NotAnEigenvalue, "sigma_min(W)/scale = " + std::to_string(c.relative_min()) +
                                                    " at lambda=" + std::to_string(lambda));
    }
    const Matrix null_basis = c.right_vectors.rightCols(m);

    const auto path = integrate_ivp(p.potential, lambda, p.left.B.transpose(), -p.left.A.transpose(), grid);
    std::vector<Matrix> integrand;
    integrand.reserve(path.y.size());
    for (const auto& y : path.y) {
        const Matrix yv = y * null_basis;
        integrand.push_back(yv.transpose() * yv);
    }
    const Matrix gram = symmetrized(integral(integrand, grid.spacing()));
    Eigen::SelfAdjointEigenSolver<Matrix> eig(gram);
    Matrix thetas = null_basis * eig.eigenvectors();

    Eigenpair pair{lambda, m, c.relative_min(), {}, {}, {}};
    for (int l = 0; l < m; ++l) {
        Vector theta = thetas.col(l);
        Eigen::Index big = 0;
        theta.cwiseAbs().maxCoeff(&big);
        if (theta(big) < 0) theta = -theta;

        SampledField phi;
        phi.value.reserve(path.y.size());
        phi.derivative.reserve(path.y.size());
        std::vector<double> sq;
        sq.reserve(path.y.size());
        for (std::size_t i = 0; i < path.y.size(); ++i) {
            phi.value.push_back(path.y[i] * theta);
            phi.derivative.push_back(path.yp[i] * theta);
            sq.push_back(phi.value.back().squaredNorm());
        }
        pair.norms.push_back(integral(sq, grid.spacing()));
        pair.thetas.push_back(std::move(theta));
        pair.phis.push_back(std::move(phi));
    }
    return pair;
}

namespace {

/// Self-adjoint boundary data split into a Dirichlet part and a Robin part:
/// phi(end) lies in range(U) and U^T phi'(end) = -lambda_robin U^T phi(end).
struct BoundarySplit {
    Matrix u;
    Matrix robin;
};

BoundarySplit split_boundary(const BoundaryPair& pair) {
    Eigen::JacobiSVD<Matrix> svd(pair.B.transpose(), Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Vector& s = svd.singularValues();
    int r = 0;
    while (r < s.size() && s(r) > kRankTol * std::max(s(0), 1e-300)) ++r;
    BoundarySplit split;
    split.u = svd.matrixU().leftCols(r);
    const Matrix v = svd.matrixV().leftCols(r);
    const Vector inv_s = s.head(r).cwiseInverse();
    split.robin = symmetrized(split.u.transpose() * pair.A.transpose() * v * inv_s.asDiagonal());
    return split;
}

/// Symmetric banded matrix in LAPACK upper band storage (column major).
class BandMatrix {
public:
    BandMatrix(int size, int kd) : size_(size), kd_(kd), ab_(static_cast<std::size_t>((kd + 1) * size), 0.0) {}

    void add(int i, int j, double v) {
        if (i > j) std::swap(i, j);
        if (j - i > kd_) throw std::logic_error("band overflow in finite-difference assembly");
        ab_[static_cast<std::size_t>(kd_ + i - j + j * (kd_ + 1))] += v;
    }

    int size() const { return size_; }
    int kd() const { return kd_; }
    double* data() { return ab_.data(); }

private:
    int size_;
    int kd_;
    std::vector<double> ab_;
};

BandMatrix assemble_fd(const Problem& p, const Grid& grid) {
    const int n = p.dim();
    const int nodes = grid.size();
    const double h = grid.spacing();
    const double inv_h2 = 1.0 / (h * h);
    const BoundarySplit left = split_boundary(p.left);
    const BoundarySplit right = split_boundary(p.right);
    const int rl = static_cast<int>(left.u.cols());
    const int rr = static_cast<int>(right.u.cols());
    const int interior = nodes - 2;
    const int size = rl + n * interior + rr;
    BandMatrix band(size, 2 * n - 1 > 0 ? 2 * n - 1 : 1);

    auto node_index = [&](int node, int comp) { return rl + (node - 1) * n + comp; };

    for (int node = 1; node <= interior; ++node) {
        const Matrix pot = p.potential(grid.node(node));
        for (int a = 0; a < n; ++a) {
            for (int b = a; b < n; ++b) {
                const double v = pot(a, b) + (a == b ? 2 * inv_h2 : 0.0);
                band.add(node_index(node, a), node_index(node, b), v);
            }
            if (node + 1 <= interior) band.add(node_index(node, a), node_index(node + 1, a), -inv_h2);
        }
    }
    // Boundary rows are halved for symmetry, then rescaled by sqrt(2) so the
    // generalized problem becomes a standard one.
    const double root2 = std::sqrt(2.0);
    if (rl > 0) {
        const Matrix block = 2 * (Matrix::Identity(rl, rl) - h * left.robin) * inv_h2 +
                             left.u.transpose() * p.potential(0.0) * left.u;
        for (int a = 0; a < rl; ++a) {
            for (int b = a; b < rl; ++b) band.add(a, b, 0.5 * (block(a, b) + block(b, a)));
            if (interior > 0) {
                for (int c = 0; c < n; ++c) band.add(a, node_index(1, c), -root2 * left.u(c, a) * inv_h2);
            }
        }
    }
    if (rr > 0) {
        const int base = rl + n * interior;
        const Matrix block = 2 * (Matrix::Identity(rr, rr) + h * right.robin) * inv_h2 +
                             right.u.transpose() * p.potential(grid.node(nodes - 1)) * right.u;
        for (int a = 0; a < rr; ++a) {
            for (int b = a; b < rr; ++b) band.add(base + a, base + b, 0.5 * (block(a, b) + block(b, a)));
            if (interior > 0) {
                for (int c = 0; c < n; ++c) {
                    band.add(base + a, node_index(interior, c), -root2 * right.u(c, a) * inv_h2);
                }
            }
        }
    }
    return band;
}

std::vector<double> banded_eigenvalues(BandMatrix band, char range, double vl, double vu, int il, int iu) {
    const int size = band.size();
    std::vector<double> w(static_cast<std::size_t>(size));
    std::vector<double> q(1);
    std::vector<int> ifail(static_cast<std::size_t>(size));
    int found = 0;
    const int info = LAPACKE_dsbevx(LAPACK_COL_MAJOR, 'N', range, 'U', size, band.kd(), band.data(), band.kd() + 1,
                                    q.data(), 1, vl, vu, il, iu, 0.0, &found, w.data(), q.data(), 1, ifail.data());
    if (info != 0) throw std::runtime_error("dsbevx failed with info=" + std::to_string(info));
    w.resize(static_cast<std::size_t>(found));
    return w;
}

}  // namespace

std::vector<double> finite_difference_eigenvalues(const Problem& p, const Grid& grid, double lambda_min,
                                                  double lambda_max) {
    return banded_eigenvalues(assemble_fd(p, grid), 'V', lambda_min, lambda_max, 0, 0);
}

double finite_difference_ground_state(const Problem& p, const Grid& grid) {
    const auto w = banded_eigenvalues(assemble_fd(p, grid), 'I', 0.0, 0.0, 1, 1);
    return w.front();
}

namespace {

double golden_section(const auto& f, double a, double b, double tol) {
    const double ratio = (std::sqrt(5.0) - 1) / 2;
    double c = b - ratio * (b - a);
    double d = a + ratio * (b - a);
    double fc = f(c);
    double fd = f(d);
    while (b - a > tol) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - ratio * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + ratio * (b - a);
            fd = f(d);
        }
    }
    return 0.5 * (a + b);
}

/// Rough a-priori error of a finite-difference eigenvalue; used only to tell
/// whether two estimates belong to the same exact eigenvalue.
double fd_error_bound(double mu, double h, double pot_scale) {
    const double k = 1 + std::abs(mu) + pot_scale;
    return h * h * k * k / 3 + 1e-9;
}

void check_resolution(const std::vector<double>& fd, double h, double pot_scale, double step) {
    for (std::size_t i = 1; i < fd.size(); ++i) {
        const double gap = fd[i] - fd[i - 1];
        const double same = fd_error_bound(fd[i], h, pot_scale) + fd_error_bound(fd[i - 1], h, pot_scale);
        if (gap > same && gap < step) {
            throw Error(ErrorCode::WindowTooCoarse,
                        "eigenvalue estimates " + std::to_string(fd[i - 1]) + " and " + std::to_string(fd[i]) +
                            " are closer than the scan step " + std::to_string(step));
        }
    }
}

}  // namespace

SpectrumReport scan_spectrum(const Problem& p, double lambda_min, double lambda_max, const ScanOptions& opts) {
    if (!(lambda_min < lambda_max)) {
        throw Error(ErrorCode::OutOfDomain, "scan window needs lambda_min < lambda_max");
    }
    if (!(opts.step > 0) || !(opts.tol > 0) || !(opts.rank_tol > 0)) {
        throw Error(ErrorCode::OutOfDomain, "scan step and tolerances must be positive");
    }
    const Grid grid(opts.grid_size);
    SpectrumReport report{p, grid, lambda_min, lambda_max, opts, {}, {}};

    if (opts.fd_check) {
        const double margin = opts.step;
        report.fd_estimates = finite_difference_eigenvalues(p, grid, lambda_min - margin, lambda_max + margin);
        double pot_scale = 0;
        for (int i = 0; i < grid.size(); i += std::max(1, grid.size() / 32)) {
            pot_scale = std::max(pot_scale, p.potential(grid.node(i)).cwiseAbs().maxCoeff());
        }
        check_resolution(report.fd_estimates, grid.spacing(), pot_scale, opts.step);
    }

    const auto samples = static_cast<std::size_t>(std::ceil((lambda_max - lambda_min) / opts.step)) + 1;
    std::vector<double> lambdas(samples);
    for (std::size_t j = 0; j < samples; ++j) {
        lambdas[j] = std::min(lambda_max, lambda_min + static_cast<double>(j) * opts.step);
    }
    std::vector<double> values(samples);
    parallel_for(samples, opts.threads,
                 [&](std::size_t j) { values[j] = characteristic(p, lambdas[j], grid).relative_min(); });

    std::vector<std::pair<double, double>> brackets;
    for (std::size_t j = 0; j < samples; ++j) {
        const bool left_ok = j == 0 || values[j] <= values[j - 1];
        const bool right_ok = j + 1 == samples || values[j] <= values[j + 1];
        if (left_ok && right_ok) {
            brackets.emplace_back(lambdas[j == 0 ? 0 : j - 1], lambdas[std::min(j + 1, samples - 1)]);
        }
    }

    struct Candidate {
        double lambda;
        double residual;
    };
    std::vector<Candidate> candidates(brackets.size());
    parallel_for(brackets.size(), opts.threads, [&](std::size_t b) {
        auto f = [&](double lam) { return characteristic(p, lam, grid).relative_min(); };
        const double root = golden_section(f, brackets[b].first, brackets[b].second, opts.tol);
        candidates[b] = {root, f(root)};
    });

    std::sort(candidates.begin(), candidates.end(),
              [](const Candidate& a, const Candidate& b) { return a.lambda < b.lambda; });
    std::vector<Candidate> roots;
    for (const auto& c : candidates) {
        if (c.residual > opts.rank_tol || c.lambda < lambda_min || c.lambda > lambda_max) continue;
        if (!roots.empty() && c.lambda - roots.back().lambda < opts.step) {
            if (c.residual < roots.back().residual) roots.back() = c;
            continue;
        }
        roots.push_back(c);
    }

    report.pairs.resize(roots.size());
    parallel_for(roots.size(), opts.threads,
                 [&](std::size_t r) { report.pairs[r] = eigenbasis(p, roots[r].lambda, grid, opts.rank_tol); });
    for (const auto& pair : report.pairs) {
        if (pair.multiplicity > p.dim()) throw std::logic_error("multiplicity exceeds N");
    }
    return report;
}

}  // namespace isospec
