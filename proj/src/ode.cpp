#include "isospec/ode.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace isospec {

namespace {

void check_inputs(const MatrixPotential& pot, const Matrix& y0, const Matrix& yp0) {
    const int n = pot.dim();
    if (y0.rows() != n || yp0.rows() != n || y0.cols() != yp0.cols()) {
        throw Error(ErrorCode::DimensionMismatch, "initial data must be " + std::to_string(n) +
                                                      "-row matrices of equal shape");
    }
}

/// One RK4 step over [x0, x1]; x1 is passed in so full steps land exactly on
/// grid nodes.
void rk4_step(const MatrixPotential& pot, double lambda, double x0, double x1, Matrix& y, Matrix& yp) {
    const double h = x1 - x0;
    const double xm = x0 + 0.5 * h;
    const auto n = pot.dim();
    const Matrix shift = lambda * Matrix::Identity(n, n);
    const Matrix p0 = pot(x0) - shift;
    const Matrix pm = pot(xm) - shift;
    const Matrix p1 = pot(x1) - shift;

    // Y'' = (P - lambda) Y
    const Matrix k1y = yp;
    const Matrix k1p = p0 * y;
    const Matrix k2y = yp + 0.5 * h * k1p;
    const Matrix k2p = pm * (y + 0.5 * h * k1y);
    const Matrix k3y = yp + 0.5 * h * k2p;
    const Matrix k3p = pm * (y + 0.5 * h * k2y);
    const Matrix k4y = yp + h * k3p;
    const Matrix k4p = p1 * (y + h * k3y);
    y += (h / 6) * (k1y + 2 * k2y + 2 * k3y + k4y);
    yp += (h / 6) * (k1p + 2 * k2p + 2 * k3p + k4p);
}

void require_finite(const Matrix& y, const Matrix& yp, double x, double lambda) {
    if (!y.allFinite() || !yp.allFinite()) {
        throw Error(ErrorCode::NonFiniteState,
                    "solution overflowed at x=" + std::to_string(x) + " for lambda=" + std::to_string(lambda));
    }
}

}  // namespace

MatrixSolutionPath integrate_ivp(const MatrixPotential& pot, double lambda, const Matrix& y0, const Matrix& yp0,
                                 const Grid& grid) {
    check_inputs(pot, y0, yp0);
    const auto n = static_cast<std::size_t>(grid.size());
    const auto dim = pot.dim();
    MatrixSolutionPath path{grid, lambda, {}, {}, {}};
    path.y.reserve(n);
    path.yp.reserve(n);
    path.ypp.reserve(n);

    Matrix y = y0;
    Matrix yp = yp0;
    const Matrix shift = lambda * Matrix::Identity(dim, dim);
    path.y.push_back(y);
    path.yp.push_back(yp);
    path.ypp.push_back((pot(0.0) - shift) * y);
    for (int i = 0; i + 1 < grid.size(); ++i) {
        rk4_step(pot, lambda, grid.node(i), grid.node(i + 1), y, yp);
        require_finite(y, yp, grid.node(i + 1), lambda);
        path.y.push_back(y);
        path.yp.push_back(yp);
        path.ypp.push_back((pot(grid.node(i + 1)) - shift) * y);
    }
    return path;
}

std::pair<Matrix, Matrix> integrate_to_end(const MatrixPotential& pot, double lambda, const Matrix& y0,
                                           const Matrix& yp0, const Grid& grid) {
    check_inputs(pot, y0, yp0);
    Matrix y = y0;
    Matrix yp = yp0;
    for (int i = 0; i + 1 < grid.size(); ++i) {
        rk4_step(pot, lambda, grid.node(i), grid.node(i + 1), y, yp);
    }
    require_finite(y, yp, std::numbers::pi, lambda);
    return {y, yp};
}

std::pair<Matrix, Matrix> evaluate_path(const MatrixSolutionPath& path, double x) {
    const Grid& g = path.grid;
    if (!(x >= 0.0 && x <= std::numbers::pi)) {
        throw Error(ErrorCode::OutOfDomain, "x=" + std::to_string(x) + " outside [0, pi]");
    }
    if (const int k = g.node_index(x); k >= 0) {
        const auto ku = static_cast<std::size_t>(k);
        return {path.y[ku], path.yp[ku]};
    }
    const double h = g.spacing();
    const int i = std::clamp(static_cast<int>(std::floor(x / h)), 0, g.size() - 2);
    const auto iu = static_cast<std::size_t>(i);
    const double s = (x - g.node(i)) / h;
    const double h00 = (1 + 2 * s) * (1 - s) * (1 - s);
    const double h10 = s * (1 - s) * (1 - s);
    const double h01 = s * s * (3 - 2 * s);
    const double h11 = s * s * (s - 1);
    Matrix y = h00 * path.y[iu] + h10 * h * path.yp[iu] + h01 * path.y[iu + 1] + h11 * h * path.yp[iu + 1];
    Matrix yp = h00 * path.yp[iu] + h10 * h * path.ypp[iu] + h01 * path.yp[iu + 1] + h11 * h * path.ypp[iu + 1];
    return {std::move(y), std::move(yp)};
}

}  // namespace isospec
