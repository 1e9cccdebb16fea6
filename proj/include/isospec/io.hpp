#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"

#include "isospec/model.hpp"
#include "isospec/spectrum.hpp"
#include "isospec/transform.hpp"
#include "isospec/verify.hpp"

namespace isospec::io {

using Json = nlohmann::json;

/// "%.17g": fixed 17 significant digits, so outputs are byte-stable and
/// round-trip exactly.
std::string format_double(double v);

/// Pretty JSON with every number written by format_double.
std::string dump(const Json& j);

Json matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const Json& j, const std::string& what);

/// Problem file. Grid potentials may reference a CSV relative to `base_dir`
/// ({"kind": "grid", "csv": "file.csv"}) or carry rows inline.
Problem problem_from_json(const Json& j, const std::filesystem::path& base_dir = {});
/// Grid potentials are written with inline rows unless `csv_name` is given.
Json problem_to_json(const Problem& p, const std::string& csv_name = {});

Problem load_problem(const std::filesystem::path& path);

/// Grid potential CSV: header `x,p11,p12,...,pNN` over the upper triangle in
/// row-major order (the lower triangle mirrors it). Full N*N layouts are
/// accepted on input when the header names p21.
MatrixPotential read_potential_csv(std::istream& in);
MatrixPotential read_potential_csv(const std::filesystem::path& path);
void write_potential_csv(std::ostream& out, const MatrixPotential& pot, const Grid& grid);

/// [{"k": int, "i": int, "c": real}] with optional "theta": [...] instead of "i".
std::vector<PerturbationEntry> perturbation_from_json(const Json& j);

Json spectrum_to_json(const SpectrumReport& report);
Json validation_to_json(const ValidationReport& report);
Json isospectral_to_json(const IsospectralReport& report);
Json residual_to_json(const ResidualReport& report);

/// Columns x, f1_1..f1_N, f2_1..f2_N, ... (values only).
void write_fields_csv(std::ostream& out, const Grid& grid, const std::vector<SampledField>& fields);
Json fields_to_json(const Grid& grid, const std::vector<SampledField>& fields);

Json read_json_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace isospec::io
