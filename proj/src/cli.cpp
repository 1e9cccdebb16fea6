#include "isospec/cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "isospec/io.hpp"
#include "isospec/parallel.hpp"
#include "isospec/spectrum.hpp"
#include "isospec/transform.hpp"
#include "isospec/verify.hpp"

namespace isospec {

namespace {

namespace fs = std::filesystem;
using io::Json;

constexpr double kDefaultLambdaMax = 20.0;

struct RunConfig {
    int grid = 401;
    std::optional<double> lambda_min;
    double lambda_max = kDefaultLambdaMax;
    double tol = 1e-10;
    double rank_tol = 1e-6;
    double verify_tol = 1e-4;
    std::string out_dir;
    std::string format = "csv";

    ScanOptions scan_options() const {
        ScanOptions o;
        o.grid_size = grid;
        o.tol = tol;
        o.rank_tol = rank_tol;
        o.threads = default_thread_count();
        return o;
    }
};

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void check_config(const RunConfig& cfg) {
    if (cfg.grid < 5 || cfg.grid % 2 == 0) throw UsageError("--grid must be odd and at least 5");
    if (cfg.lambda_min && !std::isfinite(*cfg.lambda_min)) throw UsageError("--min must be finite");
    if (!std::isfinite(cfg.lambda_max)) throw UsageError("--max must be finite");
    if (cfg.lambda_min && *cfg.lambda_min >= cfg.lambda_max) throw UsageError("--min must be below --max");
    if (!(cfg.tol > 0) || !(cfg.rank_tol > 0) || !(cfg.verify_tol > 0)) {
        throw UsageError("tolerances must be positive");
    }
}

/// Lower window end: one below the smallest finite-difference eigenvalue of
/// any of the problems, so the ground state is always inside.
double window_min(const RunConfig& cfg, std::initializer_list<const Problem*> problems) {
    if (cfg.lambda_min) return *cfg.lambda_min;
    const Grid grid(cfg.grid);
    double lo = cfg.lambda_max;
    for (const Problem* p : problems) lo = std::min(lo, finite_difference_ground_state(*p, grid));
    return std::floor(lo) - 1.0;
}

void add_common(CLI::App& cmd, RunConfig& cfg, bool with_files) {
    cmd.add_option("--grid", cfg.grid, "Number of grid nodes on [0, pi] (odd, >= 5)")->capture_default_str();
    cmd.add_option("--min", cfg.lambda_min, "Lower end of the lambda window (default: ground state - 1)");
    cmd.add_option("--max", cfg.lambda_max, "Upper end of the lambda window")->capture_default_str();
    cmd.add_option("--tol", cfg.tol, "Eigenvalue refinement tolerance")->capture_default_str();
    cmd.add_option("--rank-tol", cfg.rank_tol, "Relative singular-value threshold for null vectors")
        ->capture_default_str();
    if (with_files) {
        cmd.add_option("--out", cfg.out_dir, "Directory for output files");
        cmd.add_option("--format", cfg.format, "Format of sampled-function files")
            ->check(CLI::IsMember({"csv", "json"}))
            ->capture_default_str();
    }
}

void require_valid(const Problem& p, const std::string& what) {
    const ValidationReport rep = validate_problem(p);
    if (rep.all_passed()) return;
    std::string failed;
    for (const auto& c : rep.checks) {
        if (!c.passed) failed += (failed.empty() ? "" : ", ") + c.name;
    }
    throw Error(ErrorCode::ConditionViolated, what + " is not a valid self-adjoint problem: " + failed);
}

fs::path prepare_out(const RunConfig& cfg) {
    const fs::path dir(cfg.out_dir);
    fs::create_directories(dir);
    return dir;
}

void write_fields(const fs::path& dir, const std::string& stem, const RunConfig& cfg, const Grid& grid,
                  const std::vector<SampledField>& fields) {
    if (cfg.format == "json") {
        io::write_text_file(dir / (stem + ".json"), io::dump(io::fields_to_json(grid, fields)));
    } else {
        std::ostringstream s;
        io::write_fields_csv(s, grid, fields);
        io::write_text_file(dir / (stem + ".csv"), s.str());
    }
}

Json vector_json(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

int cmd_validate(const std::string& file, std::ostream& out) {
    const ValidationReport rep = validate_problem(io::load_problem(file));
    out << io::dump(io::validation_to_json(rep));
    return rep.all_passed() ? 0 : 1;
}

int cmd_spectrum(const std::string& file, const RunConfig& cfg, std::ostream& out) {
    const Problem p = io::load_problem(file);
    require_valid(p, file);
    const double lo = window_min(cfg, {&p});
    const SpectrumReport rep = scan_spectrum(p, lo, cfg.lambda_max, cfg.scan_options());

    Json pairs = io::spectrum_to_json(rep);
    std::vector<SampledField> fields;
    for (std::size_t k = 0; k < rep.pairs.size(); ++k) {
        Json thetas = Json::array();
        Json columns = Json::array();
        for (std::size_t i = 0; i < rep.pairs[k].thetas.size(); ++i) {
            thetas.push_back(vector_json(rep.pairs[k].thetas[i]));
            fields.push_back(rep.pairs[k].phis[i]);
            columns.push_back("f" + std::to_string(fields.size()));
        }
        pairs[k]["thetas"] = std::move(thetas);
        pairs[k]["norms"] = rep.pairs[k].norms;
        pairs[k]["columns"] = std::move(columns);
    }
    const Json j = {{"window", {lo, cfg.lambda_max}},
                    {"grid", cfg.grid},
                    {"eigenvalues", std::move(pairs)},
                    {"sigma", rep.sigma_sequence()}};
    const std::string text = io::dump(j);
    out << text;
    if (!cfg.out_dir.empty()) {
        const fs::path dir = prepare_out(cfg);
        io::write_text_file(dir / "spectrum.json", text);
        if (!fields.empty()) write_fields(dir, "eigenfunctions", cfg, rep.grid, fields);
    }
    return 0;
}

struct Pipeline {
    Problem base;
    SpectrumReport report;
    Perturbation pert;
    Problem transformed;
    TransformResult result;
    double lambda_min;
};

Pipeline run_pipeline(const std::string& problem_file, const std::string& pert_file, const RunConfig& cfg) {
    Problem p = io::load_problem(problem_file);
    require_valid(p, problem_file);
    const auto entries = io::perturbation_from_json(io::read_json_file(pert_file));
    const double lo = window_min(cfg, {&p});
    SpectrumReport rep = scan_spectrum(p, lo, cfg.lambda_max, cfg.scan_options());
    Perturbation pert = build_perturbation(rep, entries);
    auto [q, result] = transform_problem(p, pert, rep.grid);
    return {std::move(p), std::move(rep), std::move(pert), std::move(q), std::move(result), lo};
}

Json diagnostics_json(const Pipeline& run) {
    Json modes = Json::array();
    for (const auto& m : run.pert.modes) {
        modes.push_back({{"k", m.k},
                         {"i", m.i},
                         {"lambda", m.lambda},
                         {"c", m.c},
                         {"theta", vector_json(m.theta)},
                         {"norm2", m.norm2},
                         {"margin", 1.0 + m.c * m.norm2}});
    }
    return {{"rank", run.result.kernel.rank()},
            {"min_rcond", run.result.kernel.min_rcond},
            {"q_symmetry_defect", run.result.q_symmetry_defect},
            {"modes", std::move(modes)}};
}

int cmd_transform(const std::string& problem_file, const std::string& pert_file, const RunConfig& cfg,
                  std::ostream& out) {
    const Pipeline run = run_pipeline(problem_file, pert_file, cfg);
    const Json boundary = {{"Atilde", io::matrix_to_json(run.result.a_left)},
                           {"B", io::matrix_to_json(run.transformed.left.B)},
                           {"cAtilde", io::matrix_to_json(run.result.a_right)},
                           {"cB", io::matrix_to_json(run.transformed.right.B)},
                           {"K00", io::matrix_to_json(run.result.k00)},
                           {"Kpipi", io::matrix_to_json(run.result.kpipi)},
                           {"F00", io::matrix_to_json(run.result.f00)},
                           {"diagnostics", diagnostics_json(run)}};
    const std::string text = io::dump(boundary);
    out << text;
    if (!cfg.out_dir.empty()) {
        const fs::path dir = prepare_out(cfg);
        std::ostringstream csv;
        io::write_potential_csv(csv, run.transformed.potential, run.report.grid);
        io::write_text_file(dir / "q_potential.csv", csv.str());
        io::write_text_file(dir / "boundary.json", text);
        // The new problem references the CSV so it can be fed back to any command.
        Problem reloadable = run.transformed;
        reloadable.potential = io::read_potential_csv(dir / "q_potential.csv");
        io::write_text_file(dir / "transformed_problem.json",
                            io::dump(io::problem_to_json(reloadable, "q_potential.csv")));
        if (!run.result.psis.empty()) write_fields(dir, "psi", cfg, run.report.grid, run.result.psis);
    }
    return 0;
}

int cmd_verify_pair(const std::string& file_a, const std::string& file_b, const RunConfig& cfg, std::ostream& out) {
    const Problem a = io::load_problem(file_a);
    const Problem b = io::load_problem(file_b);
    require_valid(a, file_a);
    require_valid(b, file_b);
    const double lo = window_min(cfg, {&a, &b});
    const IsospectralReport rep = check_isospectral(a, b, lo, cfg.lambda_max, cfg.verify_tol, cfg.scan_options());
    const Json j = {{"isospectral", io::isospectral_to_json(rep)}, {"pass", rep.pass}};
    const std::string text = io::dump(j);
    out << text;
    if (!cfg.out_dir.empty()) io::write_text_file(prepare_out(cfg) / "verify.json", text);
    return rep.pass ? 0 : 1;
}

int cmd_verify_pipeline(const std::string& problem_file, const std::string& pert_file, const std::string& q_file,
                        const RunConfig& cfg, std::ostream& out) {
    Pipeline run = run_pipeline(problem_file, pert_file, cfg);
    if (!q_file.empty()) {
        const MatrixPotential q = io::read_potential_csv(q_file);
        if (q.dim() != run.base.dim()) throw Error(ErrorCode::DimensionMismatch, "Q file has the wrong dimension");
        run.transformed.potential = q;
    }
    const Grid& grid = run.report.grid;
    const MatrixPotential& q = run.transformed.potential;

    std::vector<ResidualReport> residuals;
    residuals.push_back(residual_wave_equation(run.result.kernel, run.base.potential, q));
    for (auto& r : residual_goursat(run.result.kernel, run.base, q)) residuals.push_back(std::move(r));
    for (std::size_t l = 0; l < run.pert.modes.size(); ++l) {
        for (auto& r : residual_transformed_eigen(run.transformed, run.pert.modes[l].lambda, run.result.psis[l], grid)) {
            r.name += "[" + std::to_string(l + 1) + "]";
            residuals.push_back(std::move(r));
        }
    }
    residuals.push_back(residual_endpoint(run.pert, run.result));
    residuals.push_back(residual_representation(run.pert, run.result));

    const ValidationReport validity = validate_problem(run.transformed);
    const IsospectralReport iso =
        check_isospectral(run.base, run.transformed, run.lambda_min, cfg.lambda_max, cfg.verify_tol, cfg.scan_options());
    const CommutatorReport comm = commutator_diagnostic(q, grid);

    bool pass = iso.pass && validity.all_passed();
    Json rs = Json::array();
    for (const auto& r : residuals) {
        pass = pass && r.pass();
        rs.push_back(io::residual_to_json(r));
    }
    const Json j = {{"isospectral", io::isospectral_to_json(iso)},
                    {"transformed_validation", io::validation_to_json(validity)},
                    {"residuals", std::move(rs)},
                    {"commutator", {{"max_norm", comm.max_norm}, {"location", comm.location}}},
                    {"pass", pass}};
    const std::string text = io::dump(j);
    out << text;
    if (!cfg.out_dir.empty()) io::write_text_file(prepare_out(cfg) / "verify.json", text);
    return pass ? 0 : 1;
}

int cmd_example(const std::string& name, bool list, std::ostream& out) {
    if (list || name.empty()) {
        for (const auto& n : builtin_names()) out << n << "\n";
        return 0;
    }
    out << io::dump(io::problem_to_json(builtin_problem(name)));
    return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Vectorial Sturm-Liouville spectra and finite-rank isospectral transforms"};
    app.require_subcommand(1);
    RunConfig cfg;

    std::string validate_file;
    auto* validate = app.add_subcommand("validate", "Check symmetry, self-adjointness and rank conditions");
    validate->add_option("problem", validate_file, "Problem JSON")->required();

    std::string spectrum_file;
    auto* spectrum = app.add_subcommand("spectrum", "Eigenvalues, multiplicities and eigenfunctions in a window");
    spectrum->add_option("problem", spectrum_file, "Problem JSON")->required();
    add_common(*spectrum, cfg, true);

    std::string transform_problem_file, transform_pert_file;
    auto* transform = app.add_subcommand("transform", "Apply a finite-rank isospectral transform");
    transform->add_option("problem", transform_problem_file, "Problem JSON")->required();
    transform->add_option("perturbation", transform_pert_file, "Perturbation JSON")->required();
    add_common(*transform, cfg, true);

    std::vector<std::string> verify_files;
    bool pipeline = false;
    std::string q_file;
    auto* verify = app.add_subcommand("verify", "Compare two spectra, or run the full transform check suite");
    verify->add_option("files", verify_files, "Two problem files, or problem and perturbation with --pipeline")
        ->required()
        ->expected(2);
    verify->add_flag("--pipeline", pipeline, "Transform the problem and run every residual check");
    verify->add_option("--q", q_file, "Replace the computed Q by this grid CSV (pipeline mode)");
    verify->add_option("--verify-tol", cfg.verify_tol, "Largest admissible eigenvalue shift")->capture_default_str();
    add_common(*verify, cfg, true);

    std::string example_name;
    bool list = false;
    auto* example = app.add_subcommand("example", "Print a builtin problem as JSON");
    example->add_option("name", example_name, "Builtin name");
    example->add_flag("--list", list, "List builtin names");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 2;
    }

    try {
        check_config(cfg);
        if (*validate) return cmd_validate(validate_file, out);
        if (*spectrum) return cmd_spectrum(spectrum_file, cfg, out);
        if (*transform) return cmd_transform(transform_problem_file, transform_pert_file, cfg, out);
        if (*verify) {
            if (!q_file.empty() && !pipeline) throw UsageError("--q needs --pipeline");
            return pipeline ? cmd_verify_pipeline(verify_files[0], verify_files[1], q_file, cfg, out)
                            : cmd_verify_pair(verify_files[0], verify_files[1], cfg, out);
        }
        if (*example) return cmd_example(example_name, list, out);
    } catch (const UsageError& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        const bool input_error = e.code() == ErrorCode::ParseError || e.code() == ErrorCode::UnknownName;
        return input_error ? 2 : 1;
    } catch (const fs::filesystem_error& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}

}  // namespace isospec
