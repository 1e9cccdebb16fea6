#pragma once

#include <utility>
#include <vector>

#include "isospec/model.hpp"

namespace isospec {

/// Solution of -Y'' + P(x) Y = lambda Y sampled at every grid node. `ypp`
/// holds Y'' = (P - lambda) Y at the nodes and feeds the dense interpolant.
struct MatrixSolutionPath {
    Grid grid;
    double lambda;
    std::vector<Matrix> y;
    std::vector<Matrix> yp;
    std::vector<Matrix> ypp;
};

/// Classical RK4 on the first-order system (Y, Y') with the grid spacing as
/// fixed step. The initial data may have any number of columns.
MatrixSolutionPath integrate_ivp(const MatrixPotential& pot, double lambda, const Matrix& y0, const Matrix& yp0,
                                 const Grid& grid);

/// Same integration, keeping only (Y(pi), Y'(pi)).
std::pair<Matrix, Matrix> integrate_to_end(const MatrixPotential& pot, double lambda, const Matrix& y0,
                                           const Matrix& yp0, const Grid& grid);

/// (Y(x), Y'(x)) by cubic Hermite interpolation; exact at nodes.
std::pair<Matrix, Matrix> evaluate_path(const MatrixSolutionPath& path, double x);

}  // namespace isospec
