// Acceptance suite: runs every exit criterion at its stated tolerance and
// prints one pass/fail line per criterion. Exits nonzero if any fail.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <string>
#include <vector>

#include "fmlab/gaussian.hpp"
#include "fmlab/json_io.hpp"
#include "fmlab/linalg.hpp"
#include "fmlab/onedim.hpp"
#include "fmlab/transport.hpp"
#include "fmlab/validate.hpp"
#include "support/generators.hpp"

using namespace fmlab;
namespace fs = std::filesystem;

namespace {

struct Criterion {
    std::string name;
    bool pass = false;
    std::string detail;
    double seconds = 0.0;
    double limit_seconds = 0.0;  // 0 = no runtime budget
};

class Timer {
public:
    Timer() : start_(std::chrono::steady_clock::now()) {}
    [[nodiscard]] double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_;
};

std::string eng(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

// 1. Initial-velocity inversion: 200 random plans, D in 1..8,
//    max |S_rec - S|_inf <= 1e-10, under 5 s.
Criterion criterion_gaussian_inverse() {
    Timer timer;
    testgen::Rng rng(1001);
    double worst = 0.0;
    for (int trial = 0; trial < 200; ++trial) {
        const Eigen::Index d = 1 + static_cast<Eigen::Index>(trial % 8);
        const GaussianPlan plan = testgen::random_gaussian_plan(rng, d);
        const AffineMap v0 = gaussian::velocity_coefficients(plan, 0.0);
        const GaussianPlan rec =
            gaussian::recover_plan_from_v0(plan.mu0, plan.sigma0, plan.mu1, plan.sigma1, v0);
        worst = std::max(worst, (rec.cross - plan.cross).cwiseAbs().maxCoeff());
    }
    Criterion c;
    c.name = "gaussian plan recovery from the initial velocity (200 plans, D 1..8)";
    c.seconds = timer.seconds();
    c.limit_seconds = 5.0;
    c.pass = worst <= 1e-10 && c.seconds < c.limit_seconds;
    c.detail = "max |S_rec - S|_inf = " + eng(worst) + " (limit 1e-10)";
    return c;
}

// 2. Snapshot inversion: 100 random discrete plans (n, m <= 5) on certified
//    grids, entries within 1e-7, forward residuals within 1e-8, under 30 s.
Criterion criterion_discrete_inverse() {
    Timer timer;
    testgen::Rng rng(1002);
    double worst_entry = 0.0;
    double worst_residual = 0.0;
    int certified = 0;
    for (int trial = 0; trial < 100; ++trial) {
        const int n = 1 + static_cast<int>(rng() % 5);
        const int m = 1 + static_cast<int>(rng() % 5);
        const DiscretePlan1D truth = testgen::random_discrete_plan(rng, n, m);
        const std::vector<double> times =
            onedim::default_snapshot_times(truth.x_atoms, truth.y_atoms);
        if (!onedim::uniqueness_certificate(truth.x_atoms, truth.y_atoms, times).certified)
            continue;
        ++certified;

        std::vector<onedim::Snapshot> snaps;
        for (double t : times) snaps.push_back({t, onedim::forward_snapshot(truth, t)});
        const onedim::SnapshotSet data(std::move(snaps));

        const Eigen::VectorXd r = truth.source_masses();
        const Eigen::VectorXd col = truth.target_masses();
        const DiscretePlan1D rec = onedim::invert_from_snapshots(
            truth.x_atoms, truth.y_atoms, std::vector<double>(r.data(), r.data() + n),
            std::vector<double>(col.data(), col.data() + m), data);

        worst_entry =
            std::max(worst_entry, (rec.weights - truth.weights).cwiseAbs().maxCoeff());
        for (const auto& s : data.snapshots) {
            const AtomicMeasure1D fwd = onedim::forward_snapshot(rec, s.t);
            std::size_t k = 0;
            for (; k < fwd.size() && k < s.measure.size(); ++k)
                worst_residual = std::max(
                    worst_residual, std::abs(fwd.masses[k] - s.measure.masses[k]));
            if (fwd.size() != s.measure.size()) worst_residual = 1.0;
        }
    }
    Criterion c;
    c.name = "discrete 1D plan recovery from snapshots (" + std::to_string(certified) +
             "/100 certified grids)";
    c.seconds = timer.seconds();
    c.limit_seconds = 30.0;
    c.pass = certified == 100 && worst_entry <= 1e-7 && worst_residual <= 1e-8 &&
             c.seconds < c.limit_seconds;
    c.detail = "max entry err = " + eng(worst_entry) + " (limit 1e-7), max residual = " +
               eng(worst_residual) + " (limit 1e-8)";
    return c;
}

// 3. Two distinct plans, one marginal curve: antisymmetric entry 0.5 with
//    identity blocks; ||S - S'||_F = sqrt(2) (= sqrt(2) * 2 * 0.5 norm
//    structure), marginal deviation <= 1e-12 on a 101-point grid.
Criterion criterion_counterexample() {
    Timer timer;
    Eigen::MatrixXd anti(2, 2);
    anti << 0.0, 0.5, -0.5, 0.0;
    const auto [plus, minus] = gaussian::counterexample_pair(
        Eigen::MatrixXd::Identity(2, 2), Eigen::MatrixXd::Identity(2, 2),
        Eigen::MatrixXd::Zero(2, 2), anti);

    const bool valid = validate_gaussian_plan(plus).accepted() &&
                       validate_gaussian_plan(minus).accepted();
    const double fro = (plus.cross - minus.cross).norm();
    // Independent norm oracle: sqrt of the entrywise square sum of 2*anti.
    double sq = 0.0;
    for (Eigen::Index i = 0; i < 2; ++i)
        for (Eigen::Index j = 0; j < 2; ++j) sq += 4.0 * anti(i, j) * anti(i, j);
    const double fro_oracle = std::sqrt(sq);

    double dev = 0.0;
    for (int k = 0; k <= 100; ++k) {
        const double t = k / 100.0;
        const GaussianDistribution a = gaussian::marginal_at(plus, t);
        const GaussianDistribution b = gaussian::marginal_at(minus, t);
        dev = std::max(dev, (a.mean - b.mean).cwiseAbs().maxCoeff());
        dev = std::max(dev, (a.cov - b.cov).cwiseAbs().maxCoeff());
    }

    Criterion c;
    c.name = "non-uniqueness pair: equal marginal curves, S != S'";
    c.seconds = timer.seconds();
    c.pass = valid && std::abs(fro - fro_oracle) <= 1e-12 && fro > 0.5 && dev <= 1e-12;
    c.detail = "|S - S'|_F = " + eng(fro) + " (oracle " + eng(fro_oracle) +
               "), marginal dev = " + eng(dev) + " (limit 1e-12)";
    return c;
}

// 4. Continuity equation at moment level: 20 random plans (D <= 4), 1e5
//    particles, 100 RK4 steps, moments within 4 standard errors, under 60 s.
Criterion criterion_transport() {
    Timer timer;
    testgen::Rng rng(1004);
    bool all_pass = true;
    double worst_ratio = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        const Eigen::Index d = 1 + static_cast<Eigen::Index>(trial % 4);
        const GaussianPlan plan = testgen::random_gaussian_plan(rng, d);
        const transport::MomentCheckReport report = transport::marginal_moment_check(
            plan, gaussian::velocity_field(plan), {0.25, 0.5, 0.75, 1.0}, 100000, 100,
            9000 + static_cast<std::uint64_t>(trial));
        all_pass = all_pass && report.all_pass();
        for (const auto& row : report.rows)
            worst_ratio = std::max({worst_ratio, row.mean_ratio, row.cov_ratio});
    }
    Criterion c;
    c.name = "particle transport matches closed-form marginals (20 plans, 1e5 particles)";
    c.seconds = timer.seconds();
    c.limit_seconds = 60.0;
    c.pass = all_pass && c.seconds < c.limit_seconds;
    c.detail = "worst |err| / (4 SE) = " + eng(worst_ratio) + " (limit 1)";
    return c;
}

// 5. CF ray identity over 1000 random (plan, t, xi) triples, <= 1e-12.
Criterion criterion_ray_identity() {
    Timer timer;
    testgen::Rng rng(1005);
    double worst = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
        const DiscretePlan1D plan = testgen::random_discrete_plan(
            rng, 2 + static_cast<int>(rng() % 4), 2 + static_cast<int>(rng() % 4));
        const double t = static_cast<double>(rng() % 1001) / 1000.0;
        const double xi = static_cast<double>(rng() % 1000) / 100.0;
        worst = std::max(worst, onedim::ray_identity_residual(plan, t, xi));
    }
    Criterion c;
    c.name = "characteristic-function ray identity (1000 random triples)";
    c.seconds = timer.seconds();
    c.pass = worst <= 1e-12;
    c.detail = "max residual = " + eng(worst) + " (limit 1e-12)";
    return c;
}

// 6. Kernel regression vs closed form: D = 1, S = 0.5, t = 0.3, 1e5 samples,
//    bandwidth 0.1, sup error <= 0.05 within +-2 sigma of mu_t.
Criterion criterion_regression() {
    Timer timer;
    Eigen::VectorXd mu0(1), mu1(1);
    mu0 << 0.0;
    mu1 << 1.0;
    Eigen::MatrixXd one = Eigen::MatrixXd::Identity(1, 1);
    const GaussianPlan plan(mu0, one, mu1, one, 0.5 * one);
    const double t = 0.3;

    const transport::PairedSamples samples = transport::sample_plan(plan, 100000, 2024);
    const GaussianDistribution p_t = gaussian::marginal_at(plan, t);
    const double sd = std::sqrt(p_t.cov(0, 0));
    Eigen::MatrixXd queries(1, 41);
    for (int k = 0; k <= 40; ++k) queries(0, k) = p_t.mean(0) + sd * (-2.0 + 0.1 * k);

    const Eigen::MatrixXd est = transport::estimate_velocity(samples, t, queries, 0.1);
    const AffineMap f = gaussian::velocity_coefficients(plan, t);
    const double sup = (est - f.apply(queries)).cwiseAbs().maxCoeff();

    Criterion c;
    c.name = "kernel velocity regression vs closed form (1e5 samples)";
    c.seconds = timer.seconds();
    c.pass = sup <= 0.05;
    c.detail = "sup error on +-2 sigma = " + eng(sup) + " (limit 0.05)";
    return c;
}

// 7. CLI determinism: every command rerun with identical inputs and seed
//    produces byte-identical outputs.
std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

bool run_cli(const std::string& args) {
    const std::string cmd = std::string(FMLAB_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    const int ret = std::system(cmd.c_str());
    return ret != -1 && WIFEXITED(ret) && WEXITSTATUS(ret) == 0;
}

bool identical_trees(const fs::path& a, const fs::path& b, std::string& why) {
    std::vector<fs::path> names;
    for (const auto& e : fs::directory_iterator(a)) names.push_back(e.path().filename());
    std::size_t b_count = 0;
    for ([[maybe_unused]] const auto& e : fs::directory_iterator(b)) ++b_count;
    if (names.size() != b_count) {
        why = "file counts differ under " + a.string();
        return false;
    }
    for (const auto& name : names) {
        if (!fs::exists(b / name)) {
            why = "missing " + name.string();
            return false;
        }
        if (slurp(a / name) != slurp(b / name)) {
            why = name.string() + " differs between reruns";
            return false;
        }
    }
    return true;
}

Criterion criterion_cli_determinism() {
    Timer timer;
    Criterion c;
    c.name = "CLI determinism: byte-identical reruns for every command";

    const fs::path root = fs::temp_directory_path() / "fmlab_acceptance_cli";
    fs::remove_all(root);
    fs::create_directories(root);

    testgen::Rng rng(1007);
    const GaussianPlan gplan = testgen::random_gaussian_plan(rng, 2);
    const DiscretePlan1D dplan = testgen::random_discrete_plan(rng, 3, 3);
    const AffineMap v0 = gaussian::velocity_coefficients(gplan, 0.0);

    std::ofstream(root / "gplan.json") << io::to_json(gplan);
    std::ofstream(root / "dplan.json") << io::to_json(dplan);
    {
        // Plan endpoints plus the affine initial velocity.
        nlohmann::json problem = nlohmann::json::parse(io::to_json(gplan));
        problem.erase("cross");
        problem["v0"] = nlohmann::json::parse(io::to_json(v0));
        std::ofstream(root / "v0problem.json") << problem.dump(2) << "\n";
    }
    {
        std::vector<onedim::Snapshot> snaps;
        for (double t : {0.25, 0.5, 0.75})
            snaps.push_back({t, onedim::forward_snapshot(dplan, t)});
        nlohmann::json problem =
            nlohmann::json::parse(io::to_json(onedim::SnapshotSet(std::move(snaps))));
        const Eigen::VectorXd r = dplan.source_masses();
        const Eigen::VectorXd col = dplan.target_masses();
        problem["x_atoms"] = dplan.x_atoms;
        problem["y_atoms"] = dplan.y_atoms;
        problem["source_masses"] = std::vector<double>(r.data(), r.data() + r.size());
        problem["target_masses"] = std::vector<double>(col.data(), col.data() + col.size());
        std::ofstream(root / "problem1d.json") << problem.dump(2) << "\n";
    }
    std::ofstream(root / "cx.json")
        << R"({"sigma0": [[1.0, 0.0], [0.0, 1.0]], "sigma1": [[1.0, 0.0], [0.0, 1.0]],
               "sym_part": [[0.0, 0.0], [0.0, 0.0]],
               "antisym_part": [[0.0, 0.5], [-0.5, 0.0]]})";

    const std::vector<std::pair<std::string, std::string>> commands = {
        {"forward_g", "forward --input " + (root / "gplan.json").string() +
                          " --times 0,0.25,0.5,0.75,1"},
        {"forward_d", "forward --input " + (root / "dplan.json").string() +
                          " --times 0,0.25,0.5,0.75,1"},
        {"invg", "invert-gaussian --input " + (root / "v0problem.json").string()},
        {"inv1d", "invert-1d --input " + (root / "problem1d.json").string()},
        {"cx", "counterexample --input " + (root / "cx.json").string()},
        {"tc", "transport-check --input " + (root / "gplan.json").string() +
                   " --particles 2000 --steps 50 --seed 42"},
    };

    c.pass = true;
    for (const auto& [tag, args] : commands) {
        const fs::path out_a = root / (tag + "_a");
        const fs::path out_b = root / (tag + "_b");
        if (!run_cli(args + " --out " + out_a.string()) ||
            !run_cli(args + " --out " + out_b.string())) {
            c.pass = false;
            c.detail = tag + ": command failed";
            break;
        }
        std::string why;
        if (!identical_trees(out_a, out_b, why)) {
            c.pass = false;
            c.detail = tag + ": " + why;
            break;
        }
    }
    if (c.pass) c.detail = std::to_string(commands.size()) + " commands, all reruns identical";
    c.seconds = timer.seconds();
    return c;
}

}  // namespace

int main() {
    std::vector<Criterion> results;
    results.push_back(criterion_gaussian_inverse());
    results.push_back(criterion_discrete_inverse());
    results.push_back(criterion_counterexample());
    results.push_back(criterion_transport());
    results.push_back(criterion_ray_identity());
    results.push_back(criterion_regression());
    results.push_back(criterion_cli_determinism());

    int failed = 0;
    for (std::size_t i = 0; i < results.size(); ++i) {
        const Criterion& c = results[i];
        if (!c.pass) ++failed;
        std::string timing = " [" + eng(c.seconds) + "s";
        if (c.limit_seconds > 0.0) timing += " < " + eng(c.limit_seconds) + "s";
        timing += "]";
        std::printf("[%s] %zu/7 %s: %s%s\n", c.pass ? "PASS" : "FAIL", i + 1, c.name.c_str(),
                     c.detail.c_str(), timing.c_str());
    }
    std::printf("acceptance: %zu/7 criteria passed\n", results.size() - failed);
    return failed == 0 ? 0 : 1;
}
