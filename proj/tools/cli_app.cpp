#include "cli_app.hpp"

#include <CLI11.hpp>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <utility>

#include "fmlab/gaussian.hpp"
#include "fmlab/json_io.hpp"
#include "fmlab/linalg.hpp"
#include "fmlab/onedim.hpp"
#include "fmlab/transport.hpp"
#include "fmlab/validate.hpp"

namespace fmlab::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

// Thrown when an input plan fails validation; carries the report for stderr.
struct ValidationFailure : Error {
    ValidationFailure(std::string what, ValidationReport report_)
        : Error(std::move(what)), report(std::move(report_)) {}
    ValidationReport report;
};

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open input file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// All numeric CSV output carries 17 significant digits so that reading the
// file back reproduces the doubles exactly.
std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

json finite_or_null(double v) {
    return std::isfinite(v) ? json(v) : json();
}

// Files are staged in memory and written only after the whole command
// succeeded, so failures leave no partial output behind.
class OutputStage {
public:
    void add(std::string name, std::string content) {
        files_.emplace_back(std::move(name), std::move(content));
    }
    void commit(const std::string& out_dir) const {
        fs::create_directories(out_dir);
        for (const auto& [name, content] : files_) {
            std::ofstream out(fs::path(out_dir) / name, std::ios::binary);
            if (!out) throw Error("cannot write output file '" + name + "'");
            out << content;
        }
    }

private:
    std::vector<std::pair<std::string, std::string>> files_;
};

std::vector<double> parse_times(const std::string& list) {
    std::vector<double> out;
    std::stringstream ss(list);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            out.push_back(std::stod(item));
        } catch (const std::exception&) {
            throw InvalidArgument("--times: cannot parse '" + item + "'");
        }
    }
    if (out.empty()) throw InvalidArgument("--times: empty list");
    return out;
}

std::vector<double> uniform_grid(int points) {
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(points));
    for (int k = 0; k < points; ++k)
        out.push_back(static_cast<double>(k) / (points - 1));
    return out;
}

json report_to_json(const ValidationReport& report) {
    json checks = json::array();
    for (const auto& c : report.checks)
        checks.push_back({{"name", c.name},
                          {"pass", c.pass},
                          {"margin", finite_or_null(c.margin)},
                          {"measured", finite_or_null(c.measured)},
                          {"detail", c.detail}});
    return {{"accepted", report.accepted()}, {"checks", std::move(checks)}};
}

json parse_object(const std::string& text) {
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded()) throw ParseError("malformed JSON input");
    if (!j.is_object()) throw ParseError("input must be a JSON object");
    return j;
}

std::vector<double> dvec_field(const json& j, const char* name) {
    if (!j.contains(name)) throw ParseError(std::string("missing field '") + name + "'");
    const json& arr = j.at(name);
    if (!arr.is_array()) throw ParseError(std::string("field '") + name + "' must be an array");
    std::vector<double> out;
    for (const auto& e : arr) {
        if (!e.is_number()) throw ParseError(std::string("field '") + name + "' must be numeric");
        out.push_back(e.get<double>());
    }
    return out;
}

Eigen::VectorXd vec_field(const json& j, const char* name) {
    const std::vector<double> v = dvec_field(j, name);
    return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

Eigen::MatrixXd mat_field(const json& j, const char* name) {
    if (!j.contains(name)) throw ParseError(std::string("missing field '") + name + "'");
    const json& rows = j.at(name);
    if (!rows.is_array() || rows.empty() || !rows.at(0).is_array())
        throw ParseError(std::string("field '") + name + "' must be a nested array");
    const auto r = static_cast<Eigen::Index>(rows.size());
    const auto c = static_cast<Eigen::Index>(rows.at(0).size());
    Eigen::MatrixXd m(r, c);
    for (Eigen::Index i = 0; i < r; ++i) {
        const auto& row = rows.at(static_cast<std::size_t>(i));
        if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != c)
            throw ParseError(std::string("field '") + name + "' has ragged rows");
        for (Eigen::Index k = 0; k < c; ++k) {
            const auto& e = row.at(static_cast<std::size_t>(k));
            if (!e.is_number())
                throw ParseError(std::string("field '") + name + "' must be numeric");
            m(i, k) = e.get<double>();
        }
    }
    return m;
}

std::string dump(const json& j) {
    return j.dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// forward
// ---------------------------------------------------------------------------

void cmd_forward(const RunConfig& cfg) {
    const std::string text = read_file(cfg.input_path);
    const json j = parse_object(text);
    const std::vector<double> times = cfg.times.empty() ? uniform_grid(101) : cfg.times;
    OutputStage stage;

    if (j.contains("x_atoms")) {
        const DiscretePlan1D plan = io::discrete_plan_from_json(text);
        std::vector<onedim::Snapshot> snaps;
        std::string csv = "t,atom,mass\n";
        for (double t : times) {
            AtomicMeasure1D measure = onedim::forward_snapshot(plan, t);
            for (std::size_t k = 0; k < measure.size(); ++k)
                csv += fmt(t) + "," + fmt(measure.atoms[k]) + "," + fmt(measure.masses[k]) + "\n";
            snaps.push_back({t, std::move(measure)});
        }
        stage.add("marginals.csv", csv);
        stage.add("snapshots.json", io::to_json(onedim::SnapshotSet(std::move(snaps))));
        stage.add("summary.json", dump({{"command", "forward"},
                                        {"family", "discrete"},
                                        {"source_atoms", plan.rows()},
                                        {"target_atoms", plan.cols()},
                                        {"num_times", times.size()},
                                        {"files", {"marginals.csv", "snapshots.json"}}}));
    } else {
        const GaussianPlan plan = io::gaussian_plan_from_json(text);
        const ValidationReport report = validate_gaussian_plan(plan);
        if (!report.accepted())
            throw ValidationFailure("forward: input plan failed validation", report);

        const auto curve = gaussian::MarginalCurveGaussian(plan, times).evaluate();
        const Eigen::Index d = plan.dim();
        std::string csv = "t";
        for (Eigen::Index i = 0; i < d; ++i) csv += ",mu_" + std::to_string(i + 1);
        for (Eigen::Index i = 0; i < d; ++i)
            for (Eigen::Index k = 0; k < d; ++k)
                csv += ",sigma_" + std::to_string(i + 1) + "_" + std::to_string(k + 1);
        csv += "\n";
        for (std::size_t row = 0; row < curve.size(); ++row) {
            csv += fmt(times[row]);
            for (Eigen::Index i = 0; i < d; ++i) csv += "," + fmt(curve[row].mean(i));
            for (Eigen::Index i = 0; i < d; ++i)
                for (Eigen::Index k = 0; k < d; ++k) csv += "," + fmt(curve[row].cov(i, k));
            csv += "\n";
        }
        stage.add("marginals.csv", csv);
        stage.add("summary.json", dump({{"command", "forward"},
                                        {"family", "gaussian"},
                                        {"dimension", d},
                                        {"num_times", times.size()},
                                        {"validation", report_to_json(report)},
                                        {"files", {"marginals.csv"}}}));
    }
    stage.commit(cfg.out_dir);
}

// ---------------------------------------------------------------------------
// invert-gaussian
// ---------------------------------------------------------------------------

void cmd_invert_gaussian(const RunConfig& cfg) {
    const json j = parse_object(read_file(cfg.input_path));
    if (!j.contains("v0")) throw ParseError("missing field 'v0'");
    const AffineMap v0 = io::affine_map_from_json(j.at("v0").dump());

    const GaussianPlan plan = gaussian::recover_plan_from_v0(
        vec_field(j, "mu0"), mat_field(j, "sigma0"), vec_field(j, "mu1"),
        mat_field(j, "sigma1"), v0);

    const AffineMap round_trip = gaussian::velocity_coefficients(plan, 0.0);
    const double linear_err = (round_trip.linear - v0.linear).cwiseAbs().maxCoeff();
    const double offset_err = (round_trip.offset - v0.offset).cwiseAbs().maxCoeff();
    const double tolerance = cfg.tol.value_or(1e-10);

    OutputStage stage;
    stage.add("plan.json", io::to_json(plan));
    stage.add("report.json",
              dump({{"command", "invert-gaussian"},
                    {"roundtrip", {{"linear_max_err", linear_err},
                                   {"offset_max_err", offset_err},
                                   {"tolerance", tolerance},
                                   {"ok", linear_err <= tolerance && offset_err <= tolerance}}},
                    {"validation", report_to_json(validate_gaussian_plan(plan))},
                    {"files", {"plan.json"}}}));
    stage.commit(cfg.out_dir);
}

// ---------------------------------------------------------------------------
// invert-1d
// ---------------------------------------------------------------------------

void cmd_invert_1d(const RunConfig& cfg) {
    const std::string text = read_file(cfg.input_path);
    const json j = parse_object(text);
    const std::vector<double> x = dvec_field(j, "x_atoms");
    const std::vector<double> y = dvec_field(j, "y_atoms");
    const std::vector<double> r = dvec_field(j, "source_masses");
    const std::vector<double> c = dvec_field(j, "target_masses");
    const onedim::SnapshotSet snapshots = io::snapshot_set_from_json(text);

    std::vector<double> times;
    for (const auto& s : snapshots.snapshots) times.push_back(s.t);
    const onedim::UniquenessCertificate cert = onedim::uniqueness_certificate(x, y, times);

    const DiscretePlan1D plan = onedim::invert_from_snapshots(x, y, r, c, snapshots);

    // Residual table: recovered forward snapshots against the inputs.
    std::string csv = "t,atom,observed_mass,recovered_mass,abs_err\n";
    double max_residual = 0.0;
    for (const auto& s : snapshots.snapshots) {
        const AtomicMeasure1D recovered = onedim::forward_snapshot(plan, s.t);
        std::size_t a = 0;
        std::size_t b = 0;
        while (a < s.measure.size() || b < recovered.size()) {
            double atom = 0.0;
            double obs = 0.0;
            double rec = 0.0;
            const bool take_obs =
                b >= recovered.size() ||
                (a < s.measure.size() &&
                 s.measure.atoms[a] < recovered.atoms[b] - 1e-7);
            const bool take_rec =
                a >= s.measure.size() ||
                (b < recovered.size() && recovered.atoms[b] < s.measure.atoms[a] - 1e-7);
            if (take_obs) {
                atom = s.measure.atoms[a];
                obs = s.measure.masses[a];
                ++a;
            } else if (take_rec) {
                atom = recovered.atoms[b];
                rec = recovered.masses[b];
                ++b;
            } else {
                atom = s.measure.atoms[a];
                obs = s.measure.masses[a];
                rec = recovered.masses[b];
                ++a;
                ++b;
            }
            const double err = std::abs(obs - rec);
            max_residual = std::max(max_residual, err);
            csv += fmt(s.t) + "," + fmt(atom) + "," + fmt(obs) + "," + fmt(rec) + "," +
                   fmt(err) + "\n";
        }
    }

    const double tolerance = cfg.tol.value_or(1e-8);
    OutputStage stage;
    stage.add("plan.json", io::to_json(plan));
    stage.add("residuals.csv", csv);
    stage.add("report.json",
              dump({{"command", "invert-1d"},
                    {"certificate",
                     {{"certified", cert.certified},
                      {"smallest_singular_value", finite_or_null(cert.smallest_singular_value)},
                      {"free_dimension", cert.free_dimension},
                      {"data_rows", cert.data_rows},
                      {"rank_gap", cert.rank_gap}}},
                    {"max_snapshot_residual", max_residual},
                    {"tolerance", tolerance},
                    {"ok", max_residual <= tolerance},
                    {"files", {"plan.json", "residuals.csv"}}}));
    stage.commit(cfg.out_dir);
}

// ---------------------------------------------------------------------------
// counterexample
// ---------------------------------------------------------------------------

void cmd_counterexample(const RunConfig& cfg) {
    const json j = parse_object(read_file(cfg.input_path));
    const auto [plan_plus, plan_minus] = gaussian::counterexample_pair(
        mat_field(j, "sigma0"), mat_field(j, "sigma1"), mat_field(j, "sym_part"),
        mat_field(j, "antisym_part"));

    const std::vector<double> times = cfg.times.empty() ? uniform_grid(101) : cfg.times;
    std::string csv = "t,max_mean_dev,max_cov_dev\n";
    double max_mean_dev = 0.0;
    double max_cov_dev = 0.0;
    for (double t : times) {
        const GaussianDistribution a = gaussian::marginal_at(plan_plus, t);
        const GaussianDistribution b = gaussian::marginal_at(plan_minus, t);
        const double mean_dev = (a.mean - b.mean).cwiseAbs().maxCoeff();
        const double cov_dev = (a.cov - b.cov).cwiseAbs().maxCoeff();
        max_mean_dev = std::max(max_mean_dev, mean_dev);
        max_cov_dev = std::max(max_cov_dev, cov_dev);
        csv += fmt(t) + "," + fmt(mean_dev) + "," + fmt(cov_dev) + "\n";
    }

    const double cross_gap_fro = (plan_plus.cross - plan_minus.cross).norm();
    const double tolerance = cfg.tol.value_or(1e-12);
    OutputStage stage;
    stage.add("plans.json", dump({{"plan_S", json::parse(io::to_json(plan_plus))},
                                  {"plan_S_prime", json::parse(io::to_json(plan_minus))}}));
    stage.add("agreement.csv", csv);
    stage.add("report.json",
              dump({{"command", "counterexample"},
                    {"cross_difference_frobenius", cross_gap_fro},
                    {"max_marginal_mean_dev", max_mean_dev},
                    {"max_marginal_cov_dev", max_cov_dev},
                    {"tolerance", tolerance},
                    {"ok", max_mean_dev <= tolerance && max_cov_dev <= tolerance},
                    {"num_times", times.size()},
                    {"files", {"plans.json", "agreement.csv"}}}));
    stage.commit(cfg.out_dir);
}

// ---------------------------------------------------------------------------
// transport-check
// ---------------------------------------------------------------------------

void cmd_transport_check(const RunConfig& cfg) {
    const std::string text = read_file(cfg.input_path);
    const GaussianPlan plan = io::gaussian_plan_from_json(text);
    const ValidationReport validation = validate_gaussian_plan(plan);
    if (!validation.accepted())
        throw ValidationFailure("transport-check: input plan failed validation", validation);

    const std::vector<double> times =
        cfg.times.empty() ? std::vector<double>{0.25, 0.5, 0.75, 1.0} : cfg.times;
    const AffineVelocityField field = gaussian::velocity_field(plan);
    const transport::MomentCheckReport report = transport::marginal_moment_check(
        plan, field, times, cfg.particles, cfg.steps, cfg.seed);

    // Particle cloud at the grid times; same initial cloud and marching as
    // the moment check.
    const Eigen::Index d = plan.dim();
    std::string cloud = "t,particle_id";
    for (Eigen::Index i = 0; i < d; ++i) cloud += ",x_" + std::to_string(i + 1);
    cloud += "\n";
    Eigen::MatrixXd states =
        transport::sample_gaussian(gaussian::marginal_at(plan, 0.0), cfg.particles, cfg.seed);
    auto append_states = [&](double t, const Eigen::MatrixXd& block) {
        for (Eigen::Index k = 0; k < block.cols(); ++k) {
            cloud += fmt(t) + "," + std::to_string(k);
            for (Eigen::Index i = 0; i < d; ++i) cloud += "," + fmt(block(i, k));
            cloud += "\n";
        }
    };
    double t_now = 0.0;
    for (double t : times) {
        if (t > t_now) {
            const int seg_steps =
                std::max(1, static_cast<int>(std::lround((t - t_now) * cfg.steps)));
            states = transport::integrate_particles(field, std::move(states), seg_steps, t_now, t);
            t_now = t;
        }
        append_states(t, states);
    }

    json rows = json::array();
    for (const auto& row : report.rows)
        rows.push_back({{"t", row.t},
                        {"max_mean_err", row.max_mean_err},
                        {"max_cov_err", row.max_cov_err},
                        {"mean_ratio", row.mean_ratio},
                        {"cov_ratio", row.cov_ratio},
                        {"pass", row.pass}});

    OutputStage stage;
    stage.add("cloud.csv", cloud);
    stage.add("report.json", dump({{"command", "transport-check"},
                                   {"particles", cfg.particles},
                                   {"steps", cfg.steps},
                                   {"seed", cfg.seed},
                                   {"rows", std::move(rows)},
                                   {"all_pass", report.all_pass()},
                                   {"files", {"cloud.csv"}}}));
    stage.commit(cfg.out_dir);
}

// ---------------------------------------------------------------------------
// driver
// ---------------------------------------------------------------------------

void emit_error(const std::string& type, const std::string& message, json extra = {}) {
    json err = {{"type", type}, {"message", message}};
    for (auto& [k, v] : extra.items()) err[k] = v;
    std::fprintf(stderr, "%s\n", json({{"error", err}}).dump(2).c_str());
}

int dispatch(const RunConfig& cfg) {
    try {
        if (cfg.command == "forward")
            cmd_forward(cfg);
        else if (cfg.command == "invert-gaussian")
            cmd_invert_gaussian(cfg);
        else if (cfg.command == "invert-1d")
            cmd_invert_1d(cfg);
        else if (cfg.command == "counterexample")
            cmd_counterexample(cfg);
        else if (cfg.command == "transport-check")
            cmd_transport_check(cfg);
        else
            throw InvalidArgument("unknown command '" + cfg.command + "'");
        return 0;
    } catch (const ValidationFailure& e) {
        emit_error("ValidationFailure", e.what(), {{"report", report_to_json(e.report)}});
        return 2;
    } catch (const ParseError& e) {
        emit_error("ParseError", e.what());
        return 2;
    } catch (const MarginalMismatch& e) {
        emit_error("MarginalMismatch", e.what());
        return 2;
    } catch (const NotApplicableInOneDimension& e) {
        emit_error("NotApplicableInOneDimension", e.what());
        return 2;
    } catch (const InconsistentField& e) {
        emit_error("InconsistentField", e.what());
        return 3;
    } catch (const PSDViolation& e) {
        emit_error("PSDViolation", e.what(), {{"min_eigenvalue", e.min_eigenvalue}});
        return cfg.command == "invert-gaussian" ? 3 : 2;
    } catch (const IllPosed& e) {
        emit_error("IllPosed", e.what(),
                   {{"rank_gap", e.rank_gap},
                    {"smallest_singular_value", finite_or_null(e.smallest_singular_value)}});
        return 4;
    } catch (const DimensionMismatch& e) {
        emit_error("DimensionMismatch", e.what());
        return 2;
    } catch (const InvalidArgument& e) {
        emit_error("InvalidArgument", e.what());
        return 2;
    } catch (const Error& e) {
        // SingularCovariance, SingularMarginal, Infeasible, NonFinite, ...
        emit_error("NumericalFailure", e.what());
        return 5;
    } catch (const std::exception& e) {
        emit_error("InternalError", e.what());
        return 5;
    }
}

}  // namespace

int run_main(int argc, const char* const* argv) {
    CLI::App app{"Forward and inverse flow matching for Gaussian and discrete 1D couplings"};
    app.require_subcommand(1);

    RunConfig cfg;
    std::string times_str;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--input", cfg.input_path, "Input JSON file")->required();
        sub->add_option("--out", cfg.out_dir, "Output directory")->required();
        sub->add_option("--seed", cfg.seed, "Master seed (default 0)");
        sub->add_option("--tol", cfg.tol, "Report acceptance threshold override");
        sub->add_option("--times", times_str, "Comma-separated list of times in [0,1]");
        sub->add_option("--particles", cfg.particles, "Particle count (default 10000)")
            ->check(CLI::PositiveNumber);
        sub->add_option("--steps", cfg.steps, "Total RK4 steps over [0,1] (default 100)")
            ->check(CLI::PositiveNumber);
    };

    add_common(app.add_subcommand(
        "forward", "Marginal snapshots of a plan over a time grid"));
    add_common(app.add_subcommand(
        "invert-gaussian", "Recover a Gaussian plan from its initial velocity"));
    add_common(app.add_subcommand(
        "invert-1d", "Recover a discrete 1D plan from marginal snapshots"));
    add_common(app.add_subcommand(
        "counterexample", "Two distinct plans with identical marginal curves (D >= 2)"));
    add_common(app.add_subcommand(
        "transport-check", "Verify particle transport against closed-form marginals"));

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    cfg.command = app.get_subcommands().front()->get_name();
    if (!times_str.empty()) {
        try {
            cfg.times = parse_times(times_str);
        } catch (const InvalidArgument& e) {
            emit_error("InvalidArgument", e.what());
            return 2;
        }
    }
    return dispatch(cfg);
}

int run(const std::vector<std::string>& args) {
    std::vector<std::string> full;
    full.reserve(args.size() + 1);
    full.emplace_back("fmlab");
    full.insert(full.end(), args.begin(), args.end());
    std::vector<const char*> argv;
    argv.reserve(full.size());
    for (const auto& s : full) argv.push_back(s.c_str());
    return run_main(static_cast<int>(argv.size()), argv.data());
}

}  // namespace fmlab::cli
