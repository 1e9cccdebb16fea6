#pragma once

#include <string>
#include <utility>
#include <vector>

#include "isospec/spectrum.hpp"
#include "isospec/transform.hpp"

namespace isospec {

struct SpectralLine {
    double lambda;
    int multiplicity;
};

struct IsospectralReport {
    double lambda_min;
    double lambda_max;
    double tolerance;
    std::vector<SpectralLine> pairs_a;
    std::vector<SpectralLine> pairs_b;
    /// max |lambda_A - lambda_B| over positions of the two sigma sequences;
    /// infinity when the sequences differ in length.
    double max_shift;
    bool multiplicity_match;
    bool pass;
};

/// Scans both problems on the same window and compares their sigma sequences
/// position by position.
IsospectralReport check_isospectral(const Problem& a, const Problem& b, double lambda_min, double lambda_max,
                                    double tol, const ScanOptions& opts = {});

struct ResidualReport {
    std::string name;
    double max_residual;
    /// x of the worst node (for two-variable identities, the x coordinate).
    double location;
    double tolerance;

    bool pass() const noexcept { return max_residual <= tolerance; }
};

/// K_xx - Q(x) K - K_yy + K P(y) on interior nodes with y < x, by central
/// differences of the degenerate representation.
ResidualReport residual_wave_equation(const KernelField& kernel, const MatrixPotential& p, const MatrixPotential& q,
                                      double tol = 5e-4);

/// {goursat, trace}: K(x,0) A^T + K_y(x,0) B^T = 0 and
/// K(x,x) = 1/2 int_0^x (Q - P) dt - F(0,0).
std::vector<ResidualReport> residual_goursat(const KernelField& kernel, const Problem& p, const MatrixPotential& q,
                                             double tol = 1e-6);

/// {eigen-ode, boundary-left, boundary-right} for a transformed
/// eigenfunction of the new problem at the given lambda.
std::vector<ResidualReport> residual_transformed_eigen(const Problem& transformed, double lambda,
                                                       const SampledField& psi, const Grid& grid,
                                                       double ode_tol = 5e-4, double boundary_tol = 1e-8);

/// psi_l(pi) (1 + c ||phi_l||^2) - phi_l(pi), relative to max |phi_l|, worst over modes.
ResidualReport residual_endpoint(const Perturbation& pert, const TransformResult& result, double tol = 1e-8);

/// a_j(x) + c_j psi_j(x), worst entry over nodes and modes.
ResidualReport residual_representation(const Perturbation& pert, const TransformResult& result, double tol = 1e-9);

struct CommutatorReport {
    double max_norm;
    double location;
};

/// max_x ||Q Q' - Q' Q||_F with Q' by second-order differences. The
/// Frobenius norm makes the value invariant under constant orthogonal
/// conjugation of Q.
CommutatorReport commutator_diagnostic(const MatrixPotential& q, const Grid& grid);

}  // namespace isospec
