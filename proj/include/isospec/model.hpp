#pragma once

#include <Eigen/Dense>

#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "isospec/error.hpp"

namespace isospec {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Uniform grid on [0, pi] with n >= 3 nodes.
class Grid {
public:
    explicit Grid(int n);

    int size() const noexcept { return static_cast<int>(nodes_.size()); }
    double spacing() const noexcept { return h_; }
    double node(int i) const { return nodes_[static_cast<std::size_t>(i)]; }
    std::span<const double> nodes() const noexcept { return nodes_; }

    /// Index of the node equal to x, or -1 when x is not a node.
    int node_index(double x) const noexcept;

    bool operator==(const Grid& other) const noexcept { return size() == other.size(); }

private:
    double h_;
    std::vector<double> nodes_;
};

/// Vector-valued function sampled on a grid together with its x-derivative.
struct SampledField {
    std::vector<Vector> value;
    std::vector<Vector> derivative;
};

/// Continuous N x N symmetric potential. Three representations: constant
/// diagonal, closed-form function (builtins), or samples on a uniform grid
/// joined by a C^2 cubic spline per entry.
class MatrixPotential {
public:
    enum class Kind { ConstantDiagonal, Closed, Sampled };

    static MatrixPotential constant_diagonal(const Vector& values);
    static MatrixPotential closed_form(int dim, std::string name, std::function<Matrix(double)> fn);
    static MatrixPotential sampled(const Grid& grid, std::vector<Matrix> samples);

    int dim() const noexcept;
    Kind kind() const noexcept;
    const std::string& name() const noexcept;

    /// Symmetric value at x in [0, pi]. Sampled potentials return the stored
    /// sample exactly at nodes.
    Matrix operator()(double x) const;

    /// Only for Kind::ConstantDiagonal.
    const Vector& diagonal_values() const;
    /// Only for Kind::Sampled.
    const Grid& grid() const;
    const std::vector<Matrix>& samples() const;

    /// Largest relative entrywise asymmetry of the raw data (samples, or
    /// closed-form values probed on a fixed grid).
    double symmetry_defect() const;

private:
    struct Impl;
    explicit MatrixPotential(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}
    std::shared_ptr<const Impl> impl_;
};

/// Boundary condition B phi' + A phi = 0 at one endpoint.
struct BoundaryPair {
    Matrix A;
    Matrix B;
};

struct Problem {
    MatrixPotential potential;
    BoundaryPair left;
    BoundaryPair right;

    int dim() const noexcept { return potential.dim(); }
};

struct ValidationCheck {
    std::string name;
    bool passed;
    double defect;
};

struct ValidationReport {
    std::vector<ValidationCheck> checks;

    bool all_passed() const noexcept;
};

/// Checks potential symmetry, self-adjointness B A* = A B* and rank [A, B] = N
/// at both ends. Violations are reported; only inconsistent dimensions throw.
ValidationReport validate_problem(const Problem& p);

/// Relative thresholds used by validate_problem.
inline constexpr double kSelfAdjointTol = 1e-12;
inline constexpr double kRankTol = 1e-10;
inline constexpr double kSymmetryTol = 1e-12;

Problem builtin_problem(const std::string& name);
/// Potential of the named builtin problem.
MatrixPotential builtin_potential(const std::string& name);
std::vector<std::string> builtin_names();

/// (M + M^T) / 2
Matrix symmetrized(const Matrix& m);

}  // namespace isospec
