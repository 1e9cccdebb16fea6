#pragma once

#include <vector>

#include "isospec/model.hpp"

namespace isospec {

struct ScanOptions {
    int grid_size = 401;
    /// Spacing of the lambda samples of sigma_min(W).
    double step = 0.01;
    /// Width of the final refinement bracket.
    double tol = 1e-10;
    /// Singular values below rank_tol * scale count as zero (see Characteristic).
    double rank_tol = 1e-6;
    int threads = 1;
    /// Cross-check the scan resolution against finite-difference eigenvalues.
    bool fd_check = true;
};

/// W(lambda) = cB Y'(pi) + cA Y(pi) with its SVD. `scale` is
/// sigma_1([cA, cB]) * sigma_1([Y(pi); Y'(pi)]), an upper bound for sigma_1(W)
/// that stays bounded away from zero even where every singular value of W
/// vanishes (a multiplicity-N eigenvalue).
struct Characteristic {
    Matrix w;
    double scale;
    Vector singular_values;  // descending
    Matrix right_vectors;

    double relative_min() const { return singular_values(singular_values.size() - 1) / scale; }
    int nullity(double rank_tol) const;
};

Characteristic characteristic(const Problem& p, double lambda, const Grid& grid);

/// W(lambda) alone.
Matrix characteristic_matrix(const Problem& p, double lambda, const Grid& grid);

struct Eigenpair {
    double lambda;
    int multiplicity;
    /// sigma_min(W) / scale at lambda.
    double residual;
    /// Columns of the null basis times the Gram diagonalizer.
    std::vector<Vector> thetas;
    /// phi_l = Y(x; lambda) theta_l, sampled with derivatives.
    std::vector<SampledField> phis;
    /// ||phi_l||^2 by fourth-order quadrature.
    std::vector<double> norms;
};

struct SpectrumReport {
    Problem problem;
    Grid grid;
    double lambda_min;
    double lambda_max;
    ScanOptions options;
    std::vector<Eigenpair> pairs;
    /// Finite-difference eigenvalue estimates inside the window (empty when
    /// the check is disabled).
    std::vector<double> fd_estimates;

    /// Eigenvalues repeated by multiplicity.
    std::vector<double> sigma_sequence() const;
};

/// All eigenvalues in [lambda_min, lambda_max]: sample sigma_min(W)/scale on a
/// lambda grid, refine each local minimum by golden-section search, keep the
/// ones where W is numerically singular.
SpectrumReport scan_spectrum(const Problem& p, double lambda_min, double lambda_max, const ScanOptions& opts);

/// Orthogonal eigenbasis (columns of the null basis times the Gram
/// diagonalizer) at a refined eigenvalue.
Eigenpair eigenbasis(const Problem& p, double lambda, const Grid& grid, double rank_tol);

/// Eigenvalues of the second-order finite-difference discretization that fall
/// in [lambda_min, lambda_max]. Boundary conditions enter through ghost nodes
/// on the Robin part of each pair; the Dirichlet part pins the boundary node.
std::vector<double> finite_difference_eigenvalues(const Problem& p, const Grid& grid, double lambda_min,
                                                  double lambda_max);

/// Smallest finite-difference eigenvalue.
double finite_difference_ground_state(const Problem& p, const Grid& grid);

}  // namespace isospec
