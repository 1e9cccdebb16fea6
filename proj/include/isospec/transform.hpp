#pragma once

#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "isospec/model.hpp"
#include "isospec/spectrum.hpp"

namespace isospec {

/// One requested term c * phi(x) phi(y)^T of the finite-rank kernel. `k`
/// indexes the report's eigenpairs. Either `i` picks a basis function of that
/// eigenspace, or `theta` gives an explicit null vector (phi = Y(x; lambda_k) theta).
struct PerturbationEntry {
    int k = 0;
    int i = 0;
    double c = 0;
    std::optional<Vector> theta;
};

/// A selected eigenfunction with its weight.
struct PerturbationMode {
    int k;
    int i;  // -1 when theta was given explicitly
    double lambda;
    double c;
    Vector theta;
    SampledField phi;
    double norm2;
};

struct Perturbation {
    Grid grid;
    int dim;
    std::vector<PerturbationMode> modes;

    bool empty() const noexcept { return modes.empty(); }
};

/// Validates indices, uniqueness, mutual orthogonality of the selected
/// eigenfunctions and 1 + c ||phi||^2 > 0 for every entry.
Perturbation build_perturbation(const SpectrumReport& report, std::span<const PerturbationEntry> entries);

/// Degenerate-kernel solution K(x, y) = A(x) Phi(y)^T (y <= x) of
/// K + F + int_0^x K F = 0 with F(x, y) = Phi(x) C Phi(y)^T.
struct KernelField {
    Grid grid;
    int dim;
    std::vector<SampledField> basis;
    Vector coeffs;
    /// A(x) = -Phi(x) C (I + G(x) C)^{-1}, N x M per node.
    std::vector<Matrix> a;
    /// G_rj(x) = int_0^x <phi_r, phi_j> dt, M x M per node.
    std::vector<Matrix> gram;
    /// (I + G(x) C)^{-1} per node.
    std::vector<Matrix> resolvent;
    /// Smallest reciprocal condition number of I + G(x) C over the grid.
    double min_rcond = 1.0;

    int rank() const noexcept { return static_cast<int>(coeffs.size()); }
    /// Phi(x_i), N x M.
    Matrix phi_matrix(int i) const;
    /// Phi'(x_i), N x M.
    Matrix phi_derivative_matrix(int i) const;
    /// A'(x_i) from the analytic derivative of the resolvent.
    Matrix a_derivative(int i) const;
    /// K(x_i, y_j); zero above the diagonal.
    Matrix kernel(int i, int j) const;
    /// K(x_i, x_i).
    Matrix diagonal(int i) const;
    /// d/dx K(x, x) at x_i.
    Matrix diagonal_derivative(int i) const;
    /// F(x_i, y_j).
    Matrix source(int i, int j) const;
};

KernelField solve_kernel(const Perturbation& pert);
/// Same, asserting the perturbation was sampled on `grid`.
KernelField solve_kernel(const Perturbation& pert, const Grid& grid);

struct PotentialResult {
    MatrixPotential q;
    /// max ||Q - Q^T||_inf over nodes before symmetrization.
    double symmetry_defect;
};

/// Q = P + 2 d/dx K(x, x), sampled on the kernel grid.
PotentialResult potential_q(const KernelField& kernel, const MatrixPotential& base);

struct BoundaryMatrices {
    Matrix a_left;   // A - B K(0, 0)
    Matrix a_right;  // cA - cB K(pi, pi)
    Matrix k00;
    Matrix kpipi;
};

BoundaryMatrices boundary_matrices(const KernelField& kernel, const Problem& p);

/// psi = phi + int_0^x K(x, t) phi(t) dt, with psi' from the same representation.
SampledField transform_eigenfunction(const KernelField& kernel, const SampledField& phi, double lambda);

struct TransformResult {
    KernelField kernel;
    MatrixPotential q;
    double q_symmetry_defect;
    Matrix a_left;
    Matrix a_right;
    Matrix k00;
    Matrix kpipi;
    /// F(0, 0) = sum c phi(0) phi(0)^T.
    Matrix f00;
    /// One transformed eigenfunction per perturbation mode, same order.
    std::vector<SampledField> psis;
};

/// Kernel, Q, boundary matrices and transformed eigenfunctions; returns the
/// new problem (Q, A - B K(0,0), B, cA - cB K(pi,pi), cB).
std::pair<Problem, TransformResult> transform_problem(const Problem& p, const Perturbation& pert);
std::pair<Problem, TransformResult> transform_problem(const Problem& p, const Perturbation& pert, const Grid& grid);

}  // namespace isospec
