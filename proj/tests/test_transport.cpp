#include <doctest.h>

#include <cmath>
#include <unsupported/Eigen/MatrixFunctions>

#include "fmlab/gaussian.hpp"
#include "fmlab/transport.hpp"
#include "fmlab/validate.hpp"
#include "support/generators.hpp"

using namespace fmlab;
using namespace fmlab::transport;

namespace {

Eigen::VectorXd vec1(double a) {
    Eigen::VectorXd v(1);
    v << a;
    return v;
}

Eigen::MatrixXd scalar(double a) {
    Eigen::MatrixXd m(1, 1);
    m << a;
    return m;
}

// Closed-form endpoint of dx/dt = A x + b via the augmented matrix
// exponential; the reference for RK4 order checks.
Eigen::MatrixXd affine_flow_exact(const Eigen::MatrixXd& a, const Eigen::VectorXd& b,
                                  const Eigen::MatrixXd& x0, double t) {
    const Eigen::Index d = b.size();
    Eigen::MatrixXd aug = Eigen::MatrixXd::Zero(d + 1, d + 1);
    aug.topLeftCorner(d, d) = a;
    aug.topRightCorner(d, 1) = b;
    const Eigen::MatrixXd phi = (t * aug).exp();
    return phi.topLeftCorner(d, d) * x0 +
           phi.topRightCorner(d, 1) * Eigen::RowVectorXd::Ones(x0.cols());
}

}  // namespace

TEST_SUITE("transport") {

TEST_CASE("sampling a point-mass coupling is constant") {
    const DiscretePlan1D plan({0.7}, {-0.2}, Eigen::MatrixXd::Constant(1, 1, 1.0));
    const PairedSamples s = sample_plan(plan, 50, 5);
    CHECK((s.x0.array() == 0.7).all());
    CHECK((s.x1.array() == -0.2).all());
}

TEST_CASE("translation coupling pairs differ by exactly mu1 - mu0") {
    testgen::Rng rng(31);
    const Eigen::MatrixXd sigma = testgen::random_spd(rng, 2);
    const Eigen::VectorXd mu0 = testgen::random_vector(rng, 2);
    const Eigen::VectorXd mu1 = testgen::random_vector(rng, 2);
    const GaussianPlan plan(mu0, sigma, mu1, sigma, sigma);
    const PairedSamples s = sample_plan(plan, 2000, 17);
    const Eigen::MatrixXd shift = (s.x1 - s.x0).colwise() - (mu1 - mu0);
    CHECK(shift.cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("empirical cross-covariance approaches the cross block") {
    testgen::Rng rng(32);
    const GaussianPlan plan = testgen::random_gaussian_plan(rng, 2, 0.8);
    const Eigen::Index n = 100000;
    const PairedSamples s = sample_plan(plan, n, 23);

    const Eigen::VectorXd m0 = s.x0.rowwise().mean();
    const Eigen::VectorXd m1 = s.x1.rowwise().mean();
    const Eigen::MatrixXd cross = (s.x0.colwise() - m0) * (s.x1.colwise() - m1).transpose() /
                                  static_cast<double>(n - 1);
    for (Eigen::Index i = 0; i < 2; ++i)
        for (Eigen::Index j = 0; j < 2; ++j) {
            const double var = plan.sigma0(i, i) * plan.sigma1(j, j) +
                               plan.cross(i, j) * plan.cross(i, j);
            const double se = std::sqrt(var / static_cast<double>(n));
            CHECK(std::abs(cross(i, j) - plan.cross(i, j)) <= 4.0 * se);
        }
}

TEST_CASE("discrete sampling reproduces the pair frequencies") {
    testgen::Rng rng(33);
    const DiscretePlan1D plan = testgen::random_discrete_plan(rng, 3, 2);
    const Eigen::Index n = 100000;
    const PairedSamples s = sample_plan(plan, n, 29);

    Eigen::MatrixXd freq = Eigen::MatrixXd::Zero(3, 2);
    for (Eigen::Index k = 0; k < n; ++k) {
        Eigen::Index i = 0;
        Eigen::Index j = 0;
        while (plan.x_atoms[static_cast<std::size_t>(i)] != s.x0(0, k)) ++i;
        while (plan.y_atoms[static_cast<std::size_t>(j)] != s.x1(0, k)) ++j;
        freq(i, j) += 1.0;
    }
    freq /= static_cast<double>(n);
    for (Eigen::Index i = 0; i < 3; ++i)
        for (Eigen::Index j = 0; j < 2; ++j) {
            const double p = plan.weights(i, j);
            const double se = std::sqrt(p * (1.0 - p) / static_cast<double>(n));
            CHECK(std::abs(freq(i, j) - p) <= 4.0 * se);
        }
}

TEST_CASE("identical seeds give bit-identical samples, different seeds differ") {
    testgen::Rng rng(34);
    const GaussianPlan plan = testgen::random_gaussian_plan(rng, 3);
    const PairedSamples a = sample_plan(plan, 500, 77);
    const PairedSamples b = sample_plan(plan, 500, 77);
    const PairedSamples c = sample_plan(plan, 500, 78);
    CHECK((a.x0.array() == b.x0.array()).all());
    CHECK((a.x1.array() == b.x1.array()).all());
    CHECK_FALSE((a.x0.array() == c.x0.array()).all());
}

TEST_CASE("zero field leaves particles in place") {
    const AffineVelocityField field = AffineVelocityField::constant(
        {Eigen::MatrixXd::Zero(2, 2), Eigen::VectorXd::Zero(2)});
    testgen::Rng rng(35);
    const Eigen::MatrixXd x0 = testgen::random_matrix(rng, 2, 40);
    const Eigen::MatrixXd x1 = integrate_particles(field, x0, 13);
    CHECK((x1 - x0).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("constant field translates every particle exactly") {
    Eigen::VectorXd b(2);
    b << 1.5, -0.5;
    const AffineVelocityField field =
        AffineVelocityField::constant({Eigen::MatrixXd::Zero(2, 2), b});
    testgen::Rng rng(36);
    const Eigen::MatrixXd x0 = testgen::random_matrix(rng, 2, 40);
    const Eigen::MatrixXd x1 = integrate_particles(field, x0, 7);
    CHECK(((x1 - x0).colwise() - b).cwiseAbs().maxCoeff() <= 1e-14);
}

TEST_CASE("rk4 shows fourth-order convergence against the matrix exponential") {
    testgen::Rng rng(37);
    Eigen::MatrixXd a = testgen::random_matrix(rng, 2, 2);
    a /= a.norm();
    const Eigen::VectorXd b = testgen::random_vector(rng, 2);
    const AffineVelocityField field = AffineVelocityField::constant({a, b});
    const Eigen::MatrixXd x0 = testgen::random_matrix(rng, 2, 10);
    const Eigen::MatrixXd exact = affine_flow_exact(a, b, x0, 1.0);

    std::vector<double> errors;
    for (int steps : {4, 8, 16, 32, 64, 128})
        errors.push_back(
            (integrate_particles(field, x0, steps) - exact).cwiseAbs().maxCoeff());
    for (std::size_t k = 0; k + 1 < errors.size(); ++k) {
        const double ratio = errors[k] / errors[k + 1];
        CHECK(ratio >= 12.0);
        CHECK(ratio <= 20.0);
    }
}

TEST_CASE("independent-coupling transport reaches the target moments") {
    Eigen::VectorXd mu1(2);
    mu1 << 2.0, -1.0;
    const GaussianPlan plan(Eigen::VectorXd::Zero(2), Eigen::MatrixXd::Identity(2, 2), mu1,
                            Eigen::MatrixXd::Identity(2, 2), Eigen::MatrixXd::Zero(2, 2));
    const Eigen::Index n = 20000;
    const Eigen::MatrixXd x0 =
        sample_gaussian(gaussian::marginal_at(plan, 0.0), n, 41);
    const Eigen::MatrixXd x1 =
        integrate_particles(gaussian::velocity_field(plan), x0, 50);

    const GaussianDistribution target = gaussian::marginal_at(plan, 1.0);
    const Eigen::VectorXd mean = x1.rowwise().mean();
    const Eigen::MatrixXd centered = x1.colwise() - mean;
    const Eigen::MatrixXd cov = centered * centered.transpose() / static_cast<double>(n - 1);
    for (Eigen::Index i = 0; i < 2; ++i) {
        const double se = std::sqrt(target.cov(i, i) / static_cast<double>(n));
        CHECK(std::abs(mean(i) - target.mean(i)) <= 4.0 * se);
        for (Eigen::Index j = 0; j < 2; ++j) {
            const double var = target.cov(i, i) * target.cov(j, j) +
                               target.cov(i, j) * target.cov(i, j);
            CHECK(std::abs(cov(i, j) - target.cov(i, j)) <=
                  4.0 * std::sqrt(var / static_cast<double>(n)));
        }
    }
}

TEST_CASE("non-finite states and singular marginals surface as errors") {
    SUBCASE("nan offset") {
        Eigen::VectorXd bad(1);
        bad << std::nan("");
        const AffineVelocityField field =
            AffineVelocityField::constant({Eigen::MatrixXd::Zero(1, 1), bad});
        CHECK_THROWS_AS(integrate_particles(field, Eigen::MatrixXd::Zero(1, 4), 3), NonFinite);
    }
    SUBCASE("degenerate interior marginal") {
        const GaussianPlan plan(vec1(0.0), scalar(1.0), vec1(0.0), scalar(1.0), scalar(-1.0));
        const AffineVelocityField field = gaussian::velocity_field(plan);
        CHECK_THROWS_AS(integrate_particles(field, Eigen::MatrixXd::Ones(1, 4), 2),
                        SingularMarginal);
    }
}

TEST_CASE("moment check on the translation coupling is exact") {
    testgen::Rng rng(38);
    const Eigen::MatrixXd sigma = testgen::random_spd(rng, 2);
    const Eigen::VectorXd mu0 = testgen::random_vector(rng, 2);
    const Eigen::VectorXd mu1 = testgen::random_vector(rng, 2);
    const GaussianPlan plan(mu0, sigma, mu1, sigma, sigma);
    const AffineVelocityField field = gaussian::velocity_field(plan);

    // The flow itself is deterministic: every particle moves by t(mu1-mu0).
    const Eigen::MatrixXd x0 =
        sample_gaussian(gaussian::marginal_at(plan, 0.0), 500, 3);
    const Eigen::MatrixXd x1 = integrate_particles(field, x0, 20);
    CHECK(((x1 - x0).colwise() - (mu1 - mu0)).cwiseAbs().maxCoeff() <= 1e-12);

    const MomentCheckReport report =
        marginal_moment_check(plan, field, {0.25, 0.5, 0.75, 1.0}, 5000, 40, 3);
    CHECK(report.all_pass());
}

TEST_CASE("moment check passes for the independent 1D coupling") {
    const GaussianPlan plan(vec1(0.0), scalar(1.0), vec1(2.0), scalar(1.5), scalar(0.0));
    const MomentCheckReport report = marginal_moment_check(
        plan, gaussian::velocity_field(plan), {0.25, 0.5, 0.75, 1.0}, 100000, 100, 11);
    CHECK(report.all_pass());
    REQUIRE(report.rows.size() == 4);
    for (const auto& row : report.rows) {
        CHECK(row.mean_ratio <= 1.0);
        CHECK(row.cov_ratio <= 1.0);
    }
}

TEST_CASE("counterexample plans share one marginal curve under transport") {
    Eigen::MatrixXd anti(2, 2);
    anti << 0.0, 0.4, -0.4, 0.0;
    const auto [plus, minus] = gaussian::counterexample_pair(
        Eigen::MatrixXd::Identity(2, 2), Eigen::MatrixXd::Identity(2, 2),
        Eigen::MatrixXd::Zero(2, 2), anti);

    const std::vector<double> grid{0.25, 0.5, 0.75, 1.0};
    const MomentCheckReport a =
        marginal_moment_check(plus, gaussian::velocity_field(plus), grid, 20000, 50, 19);
    const MomentCheckReport b =
        marginal_moment_check(minus, gaussian::velocity_field(minus), grid, 20000, 50, 19);
    CHECK(a.all_pass());
    CHECK(b.all_pass());

    // The t = 0 fields differ whenever S != S'; reported, not asserted
    // beyond nonequality (the marginals still coincide).
    const AffineMap f_plus = gaussian::velocity_coefficients(plus, 0.0);
    const AffineMap f_minus = gaussian::velocity_coefficients(minus, 0.0);
    const double field_gap = (f_plus.linear - f_minus.linear).cwiseAbs().maxCoeff();
    INFO("initial-velocity linear gap between the pair: ", field_gap);
    CHECK(field_gap > 0.1);
}

TEST_CASE("velocity estimation basics") {
    SUBCASE("constant regressand is reproduced exactly") {
        testgen::Rng rng(39);
        const Eigen::MatrixXd sigma = testgen::random_spd(rng, 2);
        const Eigen::VectorXd mu0 = testgen::random_vector(rng, 2);
        const Eigen::VectorXd mu1 = testgen::random_vector(rng, 2);
        const GaussianPlan plan(mu0, sigma, mu1, sigma, sigma);
        const PairedSamples s = sample_plan(plan, 500, 4);
        const Eigen::MatrixXd queries = testgen::random_matrix(rng, 2, 7);
        for (double bw : {0.05, 0.5, 5.0}) {
            const Eigen::MatrixXd est = estimate_velocity(s, 0.4, queries, bw);
            CHECK((est.colwise() - (mu1 - mu0)).cwiseAbs().maxCoeff() <= 1e-12);
        }
    }
    SUBCASE("a single sample dominates every query") {
        PairedSamples s;
        s.x0 = Eigen::MatrixXd::Constant(1, 1, 0.3);
        s.x1 = Eigen::MatrixXd::Constant(1, 1, 1.1);
        Eigen::MatrixXd queries(1, 3);
        queries << -5.0, 0.0, 5.0;
        const Eigen::MatrixXd est = estimate_velocity(s, 0.5, queries, 1.0);
        CHECK((est.array() - 0.8).abs().maxCoeff() <= 1e-12);
    }
    SUBCASE("kernel weight underflow raises EmptyNeighborhood") {
        PairedSamples s;
        s.x0 = Eigen::MatrixXd::Zero(1, 10);
        s.x1 = Eigen::MatrixXd::Ones(1, 10);
        Eigen::MatrixXd far(1, 1);
        far << 1e6;
        CHECK_THROWS_AS(estimate_velocity(s, 0.5, far, 0.01), EmptyNeighborhood);
    }
}

TEST_CASE("kernel estimate tracks the closed-form interior velocity") {
    // 1D plan with S = 0.5: the regression-consistency instance.
    const GaussianPlan plan(vec1(0.0), scalar(1.0), vec1(1.0), scalar(1.0), scalar(0.5));
    const double t = 0.3;
    const PairedSamples s = sample_plan(plan, 100000, 2024);

    const GaussianDistribution p_t = gaussian::marginal_at(plan, t);
    const double sd = std::sqrt(p_t.cov(0, 0));
    Eigen::MatrixXd queries(1, 41);
    for (int k = 0; k <= 40; ++k)
        queries(0, k) = p_t.mean(0) + sd * (-2.0 + 0.1 * k);

    const Eigen::MatrixXd est = estimate_velocity(s, t, queries, 0.1);
    const AffineMap f = gaussian::velocity_coefficients(plan, t);
    CHECK((est - f.apply(queries)).cwiseAbs().maxCoeff() <= 0.05);
}

TEST_CASE("kernel estimate improves with sample size") {
    const GaussianPlan plan(vec1(0.0), scalar(1.0), vec1(1.0), scalar(1.0), scalar(0.5));
    const double t = 0.3;
    const GaussianDistribution p_t = gaussian::marginal_at(plan, t);
    Eigen::MatrixXd queries(1, 9);
    for (int k = 0; k < 9; ++k)
        queries(0, k) = p_t.mean(0) + std::sqrt(p_t.cov(0, 0)) * (-1.0 + 0.25 * k);
    const AffineMap f = gaussian::velocity_coefficients(plan, t);

    std::vector<double> errs;
    for (Eigen::Index n : {1000, 10000, 100000}) {
        const PairedSamples s = sample_plan(plan, n, 555);
        const Eigen::MatrixXd x_t = (1.0 - t) * s.x0 + t * s.x1;
        const double bw = silverman_bandwidth(x_t);
        errs.push_back(
            (estimate_velocity(s, t, queries, bw) - f.apply(queries)).cwiseAbs().maxCoeff());
    }
    CHECK(errs.back() < errs.front());
}

}  // TEST_SUITE
