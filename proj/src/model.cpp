#include "isospec/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>

namespace isospec {

std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::DimensionMismatch: return "DimensionMismatch";
        case ErrorCode::UnknownName: return "UnknownName";
        case ErrorCode::NonFiniteState: return "NonFiniteState";
        case ErrorCode::OutOfDomain: return "OutOfDomain";
        case ErrorCode::WindowTooCoarse: return "WindowTooCoarse";
        case ErrorCode::NotAnEigenvalue: return "NotAnEigenvalue";
        case ErrorCode::ConditionViolated: return "ConditionViolated";
        case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
        case ErrorCode::SingularResolvent: return "SingularResolvent";
        case ErrorCode::GridMismatch: return "GridMismatch";
        case ErrorCode::GridTooSmall: return "GridTooSmall";
        case ErrorCode::ParseError: return "ParseError";
    }
    return "Unknown";
}

Grid::Grid(int n) {
    if (n < 3) {
        throw Error(ErrorCode::GridTooSmall, "grid needs at least 3 nodes, got " + std::to_string(n));
    }
    h_ = std::numbers::pi / (n - 1);
    nodes_.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) nodes_[static_cast<std::size_t>(i)] = i * h_;
    nodes_.back() = std::numbers::pi;
}

int Grid::node_index(double x) const noexcept {
    const double r = std::round(x / h_);
    if (r < 0 || r >= size()) return -1;
    const int i = static_cast<int>(r);
    return std::abs(x - nodes_[static_cast<std::size_t>(i)]) <= 8 * std::numeric_limits<double>::epsilon()
               ? i
               : -1;
}

Matrix symmetrized(const Matrix& m) { return 0.5 * (m + m.transpose()); }

namespace {

/// Second derivatives of a clamped cubic spline through matrix samples. End
/// slopes come from one-sided fourth-order differences so interpolation stays
/// O(h^4) up to the boundary.
std::vector<Matrix> spline_moments(const std::vector<Matrix>& y, double h) {
    const std::size_t n = y.size();
    std::vector<Matrix> m(n, Matrix::Zero(y[0].rows(), y[0].cols()));
    Matrix s0, s1;
    if (n >= 5) {
        s0 = (-25.0 * y[0] + 48.0 * y[1] - 36.0 * y[2] + 16.0 * y[3] - 3.0 * y[4]) / (12 * h);
        s1 = (25.0 * y[n - 1] - 48.0 * y[n - 2] + 36.0 * y[n - 3] - 16.0 * y[n - 4] + 3.0 * y[n - 5]) / (12 * h);
    } else {
        s0 = (-3.0 * y[0] + 4.0 * y[1] - y[2]) / (2 * h);
        s1 = (3.0 * y[n - 1] - 4.0 * y[n - 2] + y[n - 3]) / (2 * h);
    }
    // Tridiagonal system with scalar coefficients and matrix right-hand sides.
    std::vector<double> diag(n), upper(n), lower(n);
    std::vector<Matrix> rhs(n);
    diag[0] = h / 3;
    upper[0] = h / 6;
    rhs[0] = (y[1] - y[0]) / h - s0;
    for (std::size_t i = 1; i + 1 < n; ++i) {
        lower[i] = h / 6;
        diag[i] = 2 * h / 3;
        upper[i] = h / 6;
        rhs[i] = (y[i + 1] - 2.0 * y[i] + y[i - 1]) / h;
    }
    lower[n - 1] = h / 6;
    diag[n - 1] = h / 3;
    rhs[n - 1] = s1 - (y[n - 1] - y[n - 2]) / h;
    for (std::size_t i = 1; i < n; ++i) {
        const double w = lower[i] / diag[i - 1];
        diag[i] -= w * upper[i - 1];
        rhs[i] -= w * rhs[i - 1];
    }
    m[n - 1] = rhs[n - 1] / diag[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) m[i] = (rhs[i] - upper[i] * m[i + 1]) / diag[i];
    return m;
}

double relative_asymmetry(const Matrix& m) {
    const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
    return (m - m.transpose()).cwiseAbs().maxCoeff() / scale;
}

}  // namespace

struct MatrixPotential::Impl {
    Kind kind;
    int dim;
    std::string name;
    Vector diagonal;
    std::function<Matrix(double)> fn;
    std::optional<Grid> grid;
    std::vector<Matrix> samples;
    std::vector<Matrix> moments;
};

MatrixPotential MatrixPotential::constant_diagonal(const Vector& values) {
    if (values.size() < 1) throw Error(ErrorCode::DimensionMismatch, "constant-diagonal potential needs N >= 1");
    auto impl = std::make_shared<Impl>();
    impl->kind = Kind::ConstantDiagonal;
    impl->dim = static_cast<int>(values.size());
    impl->name = "constant-diagonal";
    impl->diagonal = values;
    return MatrixPotential(std::move(impl));
}

MatrixPotential MatrixPotential::closed_form(int dim, std::string name, std::function<Matrix(double)> fn) {
    if (dim < 1) throw Error(ErrorCode::DimensionMismatch, "potential dimension must be >= 1");
    auto impl = std::make_shared<Impl>();
    impl->kind = Kind::Closed;
    impl->dim = dim;
    impl->name = std::move(name);
    impl->fn = std::move(fn);
    return MatrixPotential(std::move(impl));
}

MatrixPotential MatrixPotential::sampled(const Grid& grid, std::vector<Matrix> samples) {
    if (static_cast<int>(samples.size()) != grid.size()) {
        throw Error(ErrorCode::GridMismatch, "potential has " + std::to_string(samples.size()) +
                                                 " samples for a grid of " + std::to_string(grid.size()));
    }
    const auto dim = samples.front().rows();
    for (const auto& s : samples) {
        if (s.rows() != dim || s.cols() != dim) {
            throw Error(ErrorCode::DimensionMismatch, "potential samples must all be square of the same size");
        }
    }
    auto impl = std::make_shared<Impl>();
    impl->kind = Kind::Sampled;
    impl->dim = static_cast<int>(dim);
    impl->name = "grid";
    impl->grid = grid;
    impl->moments = spline_moments(samples, grid.spacing());
    impl->samples = std::move(samples);
    return MatrixPotential(std::move(impl));
}

int MatrixPotential::dim() const noexcept { return impl_->dim; }
MatrixPotential::Kind MatrixPotential::kind() const noexcept { return impl_->kind; }
const std::string& MatrixPotential::name() const noexcept { return impl_->name; }

const Vector& MatrixPotential::diagonal_values() const {
    if (impl_->kind != Kind::ConstantDiagonal) throw std::logic_error("potential is not constant-diagonal");
    return impl_->diagonal;
}

const Grid& MatrixPotential::grid() const {
    if (impl_->kind != Kind::Sampled) throw std::logic_error("potential is not sampled");
    return *impl_->grid;
}

const std::vector<Matrix>& MatrixPotential::samples() const {
    if (impl_->kind != Kind::Sampled) throw std::logic_error("potential is not sampled");
    return impl_->samples;
}

Matrix MatrixPotential::operator()(double x) const {
    const Impl& p = *impl_;
    switch (p.kind) {
        case Kind::ConstantDiagonal: return p.diagonal.asDiagonal();
        case Kind::Closed: return symmetrized(p.fn(x));
        case Kind::Sampled: break;
    }
    const Grid& g = *p.grid;
    if (const int k = g.node_index(x); k >= 0) return p.samples[static_cast<std::size_t>(k)];
    const double h = g.spacing();
    const int last = g.size() - 2;
    const int i = std::clamp(static_cast<int>(std::floor(x / h)), 0, last);
    const auto iu = static_cast<std::size_t>(i);
    const double t = x - g.node(i);
    const double u = g.node(i + 1) - x;
    const Matrix v = p.moments[iu] * (u * u * u / (6 * h)) + p.moments[iu + 1] * (t * t * t / (6 * h)) +
                     (p.samples[iu] / h - p.moments[iu] * (h / 6)) * u +
                     (p.samples[iu + 1] / h - p.moments[iu + 1] * (h / 6)) * t;
    return symmetrized(v);
}

double MatrixPotential::symmetry_defect() const {
    const Impl& p = *impl_;
    double worst = 0;
    switch (p.kind) {
        case Kind::ConstantDiagonal: return 0;
        case Kind::Closed:
            for (int i = 0; i <= 64; ++i) worst = std::max(worst, relative_asymmetry(p.fn(i * std::numbers::pi / 64)));
            return worst;
        case Kind::Sampled:
            for (const auto& s : p.samples) worst = std::max(worst, relative_asymmetry(s));
            return worst;
    }
    return worst;
}

bool ValidationReport::all_passed() const noexcept {
    return std::all_of(checks.begin(), checks.end(), [](const ValidationCheck& c) { return c.passed; });
}

namespace {

void check_pair(const BoundaryPair& pair, const std::string& side, int n, ValidationReport& report) {
    const Matrix& a = pair.A;
    const Matrix& b = pair.B;
    const Matrix defect = b * a.transpose() - a * b.transpose();
    const double bound = kSelfAdjointTol * (1 + a.norm() * b.norm());
    const double d = defect.cwiseAbs().maxCoeff();
    report.checks.push_back({side + ": B A* = A B*", d <= bound, d});

    Matrix block(n, 2 * n);
    block << a, b;
    const Vector sv = Eigen::JacobiSVD<Matrix>(block).singularValues();
    const double ratio = sv(0) > 0 ? sv(n - 1) / sv(0) : 0.0;
    report.checks.push_back({side + ": rank [A, B] = N", ratio > kRankTol, ratio});
}

void require_square(const Matrix& m, int n, const std::string& what) {
    if (m.rows() != n || m.cols() != n) {
        throw Error(ErrorCode::DimensionMismatch, what + " is " + std::to_string(m.rows()) + "x" +
                                                      std::to_string(m.cols()) + ", expected " +
                                                      std::to_string(n) + "x" + std::to_string(n));
    }
}

}  // namespace

ValidationReport validate_problem(const Problem& p) {
    const int n = p.dim();
    require_square(p.left.A, n, "left A");
    require_square(p.left.B, n, "left B");
    require_square(p.right.A, n, "right A");
    require_square(p.right.B, n, "right B");

    ValidationReport report;
    const double sym = p.potential.symmetry_defect();
    report.checks.push_back({"potential symmetric", sym <= kSymmetryTol, sym});
    check_pair(p.left, "left", n, report);
    check_pair(p.right, "right", n, report);
    return report;
}

namespace {

Problem dirichlet(MatrixPotential pot) {
    const int n = pot.dim();
    const Matrix id = Matrix::Identity(n, n);
    const Matrix zero = Matrix::Zero(n, n);
    return Problem{std::move(pot), {id, zero}, {id, zero}};
}

}  // namespace

std::vector<std::string> builtin_names() {
    return {"paper-example-2x2", "scalar-zero", "free-2x2", "neumann-scalar", "robin-coupled-2x2"};
}

MatrixPotential builtin_potential(const std::string& name) {
    if (name == "paper-example-2x2") return MatrixPotential::constant_diagonal(Vector{{-3.0, 0.0}});
    if (name == "scalar-zero" || name == "neumann-scalar") return MatrixPotential::constant_diagonal(Vector{{0.0}});
    if (name == "free-2x2") return MatrixPotential::constant_diagonal(Vector{{0.0, 0.0}});
    if (name == "robin-coupled-2x2") {
        return MatrixPotential::closed_form(2, name, [](double x) {
            Matrix m(2, 2);
            m << std::cos(x), 0.5 * std::sin(x), 0.5 * std::sin(x), 1 - std::cos(x);
            return m;
        });
    }
    throw Error(ErrorCode::UnknownName, "no builtin named '" + name + "'");
}

Problem builtin_problem(const std::string& name) {
    MatrixPotential pot = builtin_potential(name);
    if (name == "neumann-scalar") {
        // phi'(0) = 0, phi(pi) = 0: eigenvalues (n + 1/2)^2.
        Problem p = dirichlet(std::move(pot));
        p.left = {Matrix::Zero(1, 1), Matrix::Identity(1, 1)};
        return p;
    }
    if (name == "robin-coupled-2x2") {
        Problem p = dirichlet(std::move(pot));
        Matrix a(2, 2);
        a << 1.0, 0.5, 0.5, 2.0;
        p.right = {a, Matrix::Identity(2, 2)};
        return p;
    }
    return dirichlet(std::move(pot));
}

}  // namespace isospec
