#include "isospec/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>

namespace isospec::io {

std::string format_double(double v) {
    if (!std::isfinite(v)) return std::isnan(v) ? "NaN" : (v > 0 ? "Infinity" : "-Infinity");
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

namespace {

void emit(const Json& j, std::string& out, int indent) {
    const std::string pad(static_cast<std::size_t>(indent + 2), ' ');
    const std::string close(static_cast<std::size_t>(indent), ' ');
    switch (j.type()) {
        case Json::value_t::object: {
            if (j.empty()) {
                out += "{}";
                return;
            }
            out += "{\n";
            bool first = true;
            for (auto it = j.begin(); it != j.end(); ++it) {
                if (!first) out += ",\n";
                first = false;
                out += pad + Json(it.key()).dump() + ": ";
                emit(it.value(), out, indent + 2);
            }
            out += "\n" + close + "}";
            return;
        }
        case Json::value_t::array: {
            if (j.empty()) {
                out += "[]";
                return;
            }
            const bool flat = std::all_of(j.begin(), j.end(), [](const Json& e) { return e.is_primitive(); });
            if (flat) {
                out += "[";
                for (std::size_t i = 0; i < j.size(); ++i) {
                    if (i) out += ", ";
                    emit(j[i], out, indent + 2);
                }
                out += "]";
                return;
            }
            out += "[\n";
            for (std::size_t i = 0; i < j.size(); ++i) {
                if (i) out += ",\n";
                out += pad;
                emit(j[i], out, indent + 2);
            }
            out += "\n" + close + "]";
            return;
        }
        case Json::value_t::number_float: out += format_double(j.get<double>()); return;
        default: out += j.dump(); return;
    }
}

[[noreturn]] void parse_error(const std::string& what) { throw Error(ErrorCode::ParseError, what); }

}  // namespace

std::string dump(const Json& j) {
    std::string out;
    emit(j, out, 0);
    out += "\n";
    return out;
}

Json matrix_to_json(const Matrix& m) {
    Json rows = Json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        Json row = Json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        rows.push_back(std::move(row));
    }
    return rows;
}

Matrix matrix_from_json(const Json& j, const std::string& what) {
    if (!j.is_array() || j.empty()) parse_error(what + " must be a non-empty array of rows");
    const auto rows = j.size();
    if (!j[0].is_array()) parse_error(what + " must be an array of arrays");
    const auto cols = j[0].size();
    Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (std::size_t r = 0; r < rows; ++r) {
        if (!j[r].is_array() || j[r].size() != cols) parse_error(what + " has ragged rows");
        for (std::size_t c = 0; c < cols; ++c) {
            if (!j[r][c].is_number()) parse_error(what + " has a non-numeric entry");
            m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = j[r][c].get<double>();
        }
    }
    return m;
}

namespace {

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;
};

CsvTable parse_csv(std::istream& in) {
    CsvTable t;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (first) {
            first = false;
            char* end = nullptr;
            std::strtod(cells[0].c_str(), &end);
            if (end == cells[0].c_str()) {
                t.header = cells;
                continue;
            }
        }
        std::vector<double> row;
        for (const auto& c : cells) {
            char* end = nullptr;
            const double v = std::strtod(c.c_str(), &end);
            if (end == c.c_str()) parse_error("non-numeric CSV cell '" + c + "'");
            row.push_back(v);
        }
        t.rows.push_back(std::move(row));
    }
    return t;
}

MatrixPotential potential_from_rows(const std::vector<std::vector<double>>& rows, bool full_layout) {
    if (rows.size() < 3) parse_error("grid potential needs at least 3 rows");
    const std::size_t cols = rows[0].size();
    if (cols < 2) parse_error("grid potential rows need x and at least one entry");
    const std::size_t entries = cols - 1;
    int n = 0;
    if (full_layout) {
        n = static_cast<int>(std::lround(std::sqrt(static_cast<double>(entries))));
        if (static_cast<std::size_t>(n * n) != entries) parse_error("full layout needs N*N entry columns");
    } else {
        n = static_cast<int>(std::lround((std::sqrt(8.0 * static_cast<double>(entries) + 1) - 1) / 2));
        if (static_cast<std::size_t>(n * (n + 1) / 2) != entries) {
            parse_error("expected N(N+1)/2 upper-triangle columns, got " + std::to_string(entries));
        }
    }
    const Grid grid(static_cast<int>(rows.size()));
    std::vector<Matrix> samples;
    samples.reserve(rows.size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        const auto& row = rows[r];
        if (row.size() != cols) parse_error("ragged CSV row " + std::to_string(r));
        if (std::abs(row[0] - grid.node(static_cast<int>(r))) > 1e-9) {
            parse_error("x column must be the uniform grid on [0, pi]; row " + std::to_string(r) + " has x=" +
                        format_double(row[0]));
        }
        Matrix m(n, n);
        std::size_t k = 1;
        for (int a = 0; a < n; ++a) {
            for (int b = full_layout ? 0 : a; b < n; ++b) {
                m(a, b) = row[k++];
                if (!full_layout) m(b, a) = m(a, b);
            }
        }
        samples.push_back(std::move(m));
    }
    return MatrixPotential::sampled(grid, std::move(samples));
}

}  // namespace

MatrixPotential read_potential_csv(std::istream& in) {
    const CsvTable t = parse_csv(in);
    const bool full = std::find(t.header.begin(), t.header.end(), "p21") != t.header.end();
    return potential_from_rows(t.rows, full);
}

MatrixPotential read_potential_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) parse_error("cannot open " + path.string());
    return read_potential_csv(in);
}

void write_potential_csv(std::ostream& out, const MatrixPotential& pot, const Grid& grid) {
    const int n = pot.dim();
    out << "x";
    for (int a = 0; a < n; ++a) {
        for (int b = a; b < n; ++b) out << ",p" << (a + 1) << (b + 1);
    }
    out << "\n";
    for (int i = 0; i < grid.size(); ++i) {
        const double x = grid.node(i);
        const Matrix m = pot(x);
        out << format_double(x);
        for (int a = 0; a < n; ++a) {
            for (int b = a; b < n; ++b) out << "," << format_double(m(a, b));
        }
        out << "\n";
    }
}

namespace {

BoundaryPair pair_from_json(const Json& j, const std::string& side) {
    if (!j.is_object() || !j.contains("A") || !j.contains("B")) parse_error(side + " needs \"A\" and \"B\"");
    return {matrix_from_json(j["A"], side + ".A"), matrix_from_json(j["B"], side + ".B")};
}

MatrixPotential potential_from_json(const Json& j, const std::filesystem::path& base_dir) {
    if (!j.is_object() || !j.contains("kind")) parse_error("potential needs a \"kind\"");
    const auto kind = j["kind"].get<std::string>();
    if (kind == "constant-diagonal") {
        const auto& v = j.at("values");
        Vector d(static_cast<Eigen::Index>(v.size()));
        for (std::size_t i = 0; i < v.size(); ++i) d(static_cast<Eigen::Index>(i)) = v[i].get<double>();
        return MatrixPotential::constant_diagonal(d);
    }
    if (kind == "builtin") return builtin_potential(j.at("name").get<std::string>());
    if (kind == "grid") {
        if (j.contains("csv")) return read_potential_csv(base_dir / j["csv"].get<std::string>());
        if (j.contains("rows")) {
            return potential_from_rows(j["rows"].get<std::vector<std::vector<double>>>(),
                                       j.value("layout", std::string("upper")) == "full");
        }
        parse_error("grid potential needs \"csv\" or \"rows\"");
    }
    parse_error("unknown potential kind '" + kind + "'");
}

}  // namespace

Problem problem_from_json(const Json& j, const std::filesystem::path& base_dir) {
    try {
        if (!j.is_object()) parse_error("problem must be a JSON object");
        Problem p{potential_from_json(j.at("potential"), base_dir), pair_from_json(j.at("left"), "left"),
                  pair_from_json(j.at("right"), "right")};
        if (j.contains("n") && j["n"].get<int>() != p.dim()) {
            throw Error(ErrorCode::DimensionMismatch, "\"n\" is " + std::to_string(j["n"].get<int>()) +
                                                          " but the potential is " + std::to_string(p.dim()) +
                                                          "-dimensional");
        }
        return p;
    } catch (const Json::exception& e) {
        parse_error(std::string("problem JSON: ") + e.what());
    }
}

Json problem_to_json(const Problem& p, const std::string& csv_name) {
    Json pot;
    switch (p.potential.kind()) {
        case MatrixPotential::Kind::ConstantDiagonal: {
            pot["kind"] = "constant-diagonal";
            const Vector& d = p.potential.diagonal_values();
            pot["values"] = std::vector<double>(d.data(), d.data() + d.size());
            break;
        }
        case MatrixPotential::Kind::Closed:
            pot["kind"] = "builtin";
            pot["name"] = p.potential.name();
            break;
        case MatrixPotential::Kind::Sampled: {
            pot["kind"] = "grid";
            if (!csv_name.empty()) {
                pot["csv"] = csv_name;
                break;
            }
            const Grid& g = p.potential.grid();
            Json rows = Json::array();
            for (int i = 0; i < g.size(); ++i) {
                const Matrix& m = p.potential.samples()[static_cast<std::size_t>(i)];
                Json row = Json::array({g.node(i)});
                for (int a = 0; a < p.dim(); ++a) {
                    for (int b = a; b < p.dim(); ++b) row.push_back(m(a, b));
                }
                rows.push_back(std::move(row));
            }
            pot["rows"] = std::move(rows);
            break;
        }
    }
    Json j;
    j["n"] = p.dim();
    j["potential"] = std::move(pot);
    j["left"] = {{"A", matrix_to_json(p.left.A)}, {"B", matrix_to_json(p.left.B)}};
    j["right"] = {{"A", matrix_to_json(p.right.A)}, {"B", matrix_to_json(p.right.B)}};
    return j;
}

Json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) parse_error("cannot open " + path.string());
    try {
        return Json::parse(in);
    } catch (const Json::exception& e) {
        parse_error(path.string() + ": " + e.what());
    }
}

Problem load_problem(const std::filesystem::path& path) {
    return problem_from_json(read_json_file(path), path.parent_path());
}

std::vector<PerturbationEntry> perturbation_from_json(const Json& j) {
    try {
        if (!j.is_array()) parse_error("perturbation must be a JSON array");
        std::vector<PerturbationEntry> out;
        for (const auto& e : j) {
            PerturbationEntry entry;
            entry.k = e.at("k").get<int>();
            entry.c = e.at("c").get<double>();
            if (e.contains("theta")) {
                const auto v = e["theta"].get<std::vector<double>>();
                entry.theta = Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
            } else {
                entry.i = e.at("i").get<int>();
            }
            out.push_back(std::move(entry));
        }
        return out;
    } catch (const Json::exception& e) {
        parse_error(std::string("perturbation JSON: ") + e.what());
    }
}

Json spectrum_to_json(const SpectrumReport& report) {
    Json out = Json::array();
    for (const auto& p : report.pairs) {
        out.push_back({{"lambda", p.lambda}, {"multiplicity", p.multiplicity}, {"residual", p.residual}});
    }
    return out;
}

Json validation_to_json(const ValidationReport& report) {
    Json checks = Json::array();
    for (const auto& c : report.checks) checks.push_back({{"name", c.name}, {"passed", c.passed}, {"defect", c.defect}});
    return {{"passed", report.all_passed()}, {"checks", std::move(checks)}};
}

Json isospectral_to_json(const IsospectralReport& report) {
    auto lines = [](const std::vector<SpectralLine>& ls) {
        Json a = Json::array();
        for (const auto& l : ls) a.push_back({{"lambda", l.lambda}, {"multiplicity", l.multiplicity}});
        return a;
    };
    return {{"window", {report.lambda_min, report.lambda_max}},
            {"tolerance", report.tolerance},
            {"spectrum_a", lines(report.pairs_a)},
            {"spectrum_b", lines(report.pairs_b)},
            {"max_shift", report.max_shift},
            {"multiplicity_match", report.multiplicity_match},
            {"pass", report.pass}};
}

Json residual_to_json(const ResidualReport& report) {
    return {{"name", report.name},
            {"max_residual", report.max_residual},
            {"location", report.location},
            {"tolerance", report.tolerance},
            {"pass", report.pass()}};
}

void write_fields_csv(std::ostream& out, const Grid& grid, const std::vector<SampledField>& fields) {
    out << "x";
    for (std::size_t l = 0; l < fields.size(); ++l) {
        for (Eigen::Index c = 0; c < fields[l].value.front().size(); ++c) out << ",f" << (l + 1) << "_" << (c + 1);
    }
    out << "\n";
    for (int i = 0; i < grid.size(); ++i) {
        out << format_double(grid.node(i));
        for (const auto& f : fields) {
            const Vector& v = f.value[static_cast<std::size_t>(i)];
            for (Eigen::Index c = 0; c < v.size(); ++c) out << "," << format_double(v(c));
        }
        out << "\n";
    }
}

Json fields_to_json(const Grid& grid, const std::vector<SampledField>& fields) {
    Json x = Json::array();
    for (int i = 0; i < grid.size(); ++i) x.push_back(grid.node(i));
    Json fs = Json::array();
    for (const auto& f : fields) {
        Json rows = Json::array();
        for (const auto& v : f.value) rows.push_back(std::vector<double>(v.data(), v.data() + v.size()));
        fs.push_back(std::move(rows));
    }
    return {{"x", std::move(x)}, {"fields", std::move(fs)}};
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::ParseError, "cannot write " + path.string());
    out << text;
}

}  // namespace isospec::io
