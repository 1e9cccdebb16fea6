#include "isospec/verify.hpp"

#include <cmath>
#include <limits>

#include "isospec/quadrature.hpp"

namespace isospec {

namespace {

std::vector<SpectralLine> lines(const SpectrumReport& r) {
    std::vector<SpectralLine> out;
    for (const auto& p : r.pairs) out.push_back({p.lambda, p.multiplicity});
    return out;
}

double inf_norm(const Vector& v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }

template <class T>
std::vector<T> second_difference(const std::vector<T>& f, double h) {
    const std::size_t n = f.size();
    if (n < 5) throw Error(ErrorCode::GridTooSmall, "second differences need at least 5 nodes");
    const double inv = 1.0 / (h * h);
    std::vector<T> d(n);
    d[0] = T((2.0 * f[0] - 5.0 * f[1] + 4.0 * f[2] - f[3]) * inv);
    d[n - 1] = T((2.0 * f[n - 1] - 5.0 * f[n - 2] + 4.0 * f[n - 3] - f[n - 4]) * inv);
    for (std::size_t i = 1; i + 1 < n; ++i) d[i] = T((f[i + 1] - 2.0 * f[i] + f[i - 1]) * inv);
    return d;
}

/// Fourth-order second derivative: five-point central stencil, six-point
/// one-sided stencils on the two outermost nodes at each end.
std::vector<Vector> second_difference_fourth_order(const std::vector<Vector>& f, double h) {
    const std::size_t n = f.size();
    if (n < 6) throw Error(ErrorCode::GridTooSmall, "fourth-order differences need at least 6 nodes");
    const double inv = 1.0 / (12 * h * h);
    std::vector<Vector> d(n);
    auto edge = [&](std::size_t i0, int dir, const double (&c)[6]) {
        Vector acc = Vector::Zero(f[0].size());
        for (int k = 0; k < 6; ++k) acc += c[k] * f[static_cast<std::size_t>(static_cast<long>(i0) + dir * k)];
        return Vector(acc * inv);
    };
    constexpr double outer[6] = {45, -154, 214, -156, 61, -10};
    constexpr double inner[6] = {10, -15, -4, 14, -6, 1};
    d[0] = edge(0, 1, outer);
    d[1] = edge(0, 1, inner);
    d[n - 1] = edge(n - 1, -1, outer);
    d[n - 2] = edge(n - 1, -1, inner);
    for (std::size_t i = 2; i + 2 < n; ++i) {
        d[i] = (-f[i + 2] + 16.0 * f[i + 1] - 30.0 * f[i] + 16.0 * f[i - 1] - f[i - 2]) * inv;
    }
    return d;
}

template <class T>
std::vector<T> first_difference(const std::vector<T>& f, double h) {
    const std::size_t n = f.size();
    if (n < 5) throw Error(ErrorCode::GridTooSmall, "differences need at least 5 nodes");
    const double inv = 1.0 / (2 * h);
    std::vector<T> d(n);
    d[0] = T((-3.0 * f[0] + 4.0 * f[1] - f[2]) * inv);
    d[n - 1] = T((3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) * inv);
    for (std::size_t i = 1; i + 1 < n; ++i) d[i] = T((f[i + 1] - f[i - 1]) * inv);
    return d;
}

std::vector<Matrix> samples_on(const MatrixPotential& pot, const Grid& grid) {
    std::vector<Matrix> out(static_cast<std::size_t>(grid.size()));
    for (int i = 0; i < grid.size(); ++i) out[static_cast<std::size_t>(i)] = pot(grid.node(i));
    return out;
}

}  // namespace

IsospectralReport check_isospectral(const Problem& a, const Problem& b, double lambda_min, double lambda_max,
                                    double tol, const ScanOptions& opts) {
    if (a.dim() != b.dim()) throw Error(ErrorCode::DimensionMismatch, "problems have different dimensions");
    const SpectrumReport ra = scan_spectrum(a, lambda_min, lambda_max, opts);
    const SpectrumReport rb = scan_spectrum(b, lambda_min, lambda_max, opts);
    IsospectralReport rep{lambda_min, lambda_max, tol, lines(ra), lines(rb), 0.0, true, false};

    rep.multiplicity_match = rep.pairs_a.size() == rep.pairs_b.size();
    for (std::size_t i = 0; rep.multiplicity_match && i < rep.pairs_a.size(); ++i) {
        rep.multiplicity_match = rep.pairs_a[i].multiplicity == rep.pairs_b[i].multiplicity;
    }
    const auto sa = ra.sigma_sequence();
    const auto sb = rb.sigma_sequence();
    if (sa.size() != sb.size()) {
        rep.max_shift = std::numeric_limits<double>::infinity();
    } else {
        for (std::size_t i = 0; i < sa.size(); ++i) rep.max_shift = std::max(rep.max_shift, std::abs(sa[i] - sb[i]));
    }
    rep.pass = rep.multiplicity_match && rep.max_shift <= tol;
    return rep;
}

ResidualReport residual_wave_equation(const KernelField& kernel, const MatrixPotential& p, const MatrixPotential& q,
                                      double tol) {
    const Grid& grid = kernel.grid;
    const int n = grid.size();
    if (n < 5) throw Error(ErrorCode::GridTooSmall, "wave-equation residual needs at least 5 nodes");
    ResidualReport rep{"wave-eq", 0.0, 0.0, tol};
    if (kernel.rank() == 0) {
        // K vanishes identically; the identity reduces to 0 = 0 whatever Q is.
        return rep;
    }
    const double h = grid.spacing();
    std::vector<Matrix> phi(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) phi[static_cast<std::size_t>(i)] = kernel.phi_matrix(i);
    const auto a_xx = second_difference(kernel.a, h);
    const auto phi_yy = second_difference(phi, h);
    const auto pv = samples_on(p, grid);
    const auto qv = samples_on(q, grid);

    for (int i = 1; i + 1 < n; ++i) {
        const auto iu = static_cast<std::size_t>(i);
        const Matrix& ai = kernel.a[iu];
        const Matrix left = a_xx[iu] - qv[iu] * ai;
        for (int j = 1; j < i; ++j) {
            const auto ju = static_cast<std::size_t>(j);
            const Matrix r = left * phi[ju].transpose() - ai * phi_yy[ju].transpose() +
                             ai * phi[ju].transpose() * pv[ju];
            const double v = r.cwiseAbs().maxCoeff();
            if (v > rep.max_residual) {
                rep.max_residual = v;
                rep.location = grid.node(i);
            }
        }
    }
    return rep;
}

std::vector<ResidualReport> residual_goursat(const KernelField& kernel, const Problem& p, const MatrixPotential& q,
                                             double tol) {
    const Grid& grid = kernel.grid;
    const auto n = static_cast<std::size_t>(grid.size());
    ResidualReport goursat{"goursat", 0.0, 0.0, tol};
    ResidualReport trace{"trace", 0.0, 0.0, tol};
    if (kernel.rank() == 0) return {goursat, trace};

    const Matrix phi0 = kernel.phi_matrix(0);
    const Matrix dphi0 = kernel.phi_derivative_matrix(0);
    const Matrix f00 = phi0 * kernel.coeffs.asDiagonal() * phi0.transpose();

    std::vector<Matrix> diff(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double x = grid.node(static_cast<int>(i));
        diff[i] = q(x) - p.potential(x);
    }
    const auto integral = running_integral(diff, grid.spacing());

    for (std::size_t i = 0; i < n; ++i) {
        const double x = grid.node(static_cast<int>(i));
        const Matrix& a = kernel.a[i];
        const Matrix g = a * phi0.transpose() * p.left.A.transpose() + a * dphi0.transpose() * p.left.B.transpose();
        const double gv = g.cwiseAbs().maxCoeff();
        if (gv > goursat.max_residual) {
            goursat.max_residual = gv;
            goursat.location = x;
        }
        const Matrix t = kernel.diagonal(static_cast<int>(i)) - (0.5 * integral[i] - f00);
        const double tv = t.cwiseAbs().maxCoeff();
        if (tv > trace.max_residual) {
            trace.max_residual = tv;
            trace.location = x;
        }
    }
    return {goursat, trace};
}

std::vector<ResidualReport> residual_transformed_eigen(const Problem& transformed, double lambda,
                                                       const SampledField& psi, const Grid& grid, double ode_tol,
                                                       double boundary_tol) {
    const auto n = static_cast<std::size_t>(grid.size());
    if (psi.value.size() != n) throw Error(ErrorCode::GridMismatch, "psi is not sampled on the given grid");
    const auto d2 = second_difference_fourth_order(psi.value, grid.spacing());
    ResidualReport ode{"eigen-ode", 0.0, 0.0, ode_tol};
    for (std::size_t i = 0; i < n; ++i) {
        const double x = grid.node(static_cast<int>(i));
        const Vector r = -d2[i] + transformed.potential(x) * psi.value[i] - lambda * psi.value[i];
        const double v = inf_norm(r);
        if (v > ode.max_residual) {
            ode.max_residual = v;
            ode.location = x;
        }
    }
    const Vector left = transformed.left.B * psi.derivative.front() + transformed.left.A * psi.value.front();
    const Vector right = transformed.right.B * psi.derivative.back() + transformed.right.A * psi.value.back();
    ResidualReport bl{"boundary-left", inf_norm(left), 0.0, boundary_tol};
    ResidualReport br{"boundary-right", inf_norm(right), grid.node(grid.size() - 1), boundary_tol};
    return {ode, bl, br};
}

ResidualReport residual_endpoint(const Perturbation& pert, const TransformResult& result, double tol) {
    ResidualReport rep{"endpoint", 0.0, pert.grid.node(pert.grid.size() - 1), tol};
    for (std::size_t l = 0; l < pert.modes.size(); ++l) {
        const auto& m = pert.modes[l];
        double scale = 0;
        for (const auto& v : m.phi.value) scale = std::max(scale, inf_norm(v));
        const Vector r = result.psis[l].value.back() * (1 + m.c * m.norm2) - m.phi.value.back();
        rep.max_residual = std::max(rep.max_residual, inf_norm(r) / std::max(scale, 1e-300));
    }
    return rep;
}

ResidualReport residual_representation(const Perturbation& pert, const TransformResult& result, double tol) {
    ResidualReport rep{"representation", 0.0, 0.0, tol};
    const KernelField& k = result.kernel;
    for (std::size_t j = 0; j < pert.modes.size(); ++j) {
        const double c = pert.modes[j].c;
        for (std::size_t i = 0; i < k.a.size(); ++i) {
            const Vector r = k.a[i].col(static_cast<Eigen::Index>(j)) + c * result.psis[j].value[i];
            const double v = inf_norm(r);
            if (v > rep.max_residual) {
                rep.max_residual = v;
                rep.location = k.grid.node(static_cast<int>(i));
            }
        }
    }
    return rep;
}

CommutatorReport commutator_diagnostic(const MatrixPotential& q, const Grid& grid) {
    if (grid.size() < 5) throw Error(ErrorCode::GridTooSmall, "commutator diagnostic needs at least 5 nodes");
    const auto qv = samples_on(q, grid);
    const auto dq = first_difference(qv, grid.spacing());
    CommutatorReport rep{0.0, 0.0};
    for (std::size_t i = 0; i < qv.size(); ++i) {
        const double v = (qv[i] * dq[i] - dq[i] * qv[i]).norm();
        if (v > rep.max_norm) {
            rep.max_norm = v;
            rep.location = grid.node(static_cast<int>(i));
        }
    }
    return rep;
}

}  // namespace isospec
