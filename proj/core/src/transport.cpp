#include "fmlab/transport.hpp"

#include <algorithm>
#include <cmath>

#include "fmlab/gaussian.hpp"
#include "fmlab/linalg.hpp"
#include "fmlab/rng.hpp"
#include "fmlab/validate.hpp"

namespace fmlab::transport {

PairedSamples sample_plan(const GaussianPlan& plan, Eigen::Index n, std::uint64_t seed) {
    if (n < 1) throw InvalidArgument("sample_plan: need n >= 1");
    require_valid(plan);
    const Eigen::Index d = plan.dim();
    const Eigen::VectorXd mean = plan.joint_mean();
    const Eigen::MatrixXd factor = psd_sqrt_factor(plan.joint_cov());

    PairedSamples out;
    out.x0.resize(d, n);
    out.x1.resize(d, n);
    Eigen::VectorXd z(2 * d);
    for (Eigen::Index k = 0; k < n; ++k) {
        rng::Substream stream(seed, static_cast<std::uint64_t>(k));
        for (Eigen::Index i = 0; i < 2 * d; ++i) z(i) = stream.normal();
        const Eigen::VectorXd sample = mean + factor * z;
        out.x0.col(k) = sample.head(d);
        out.x1.col(k) = sample.tail(d);
    }
    return out;
}

Eigen::MatrixXd sample_gaussian(const GaussianDistribution& dist, Eigen::Index n,
                                std::uint64_t seed) {
    if (n < 1) throw InvalidArgument("sample_gaussian: need n >= 1");
    const Eigen::Index d = dist.dim();
    const Eigen::MatrixXd factor = psd_sqrt_factor(dist.cov);
    Eigen::MatrixXd out(d, n);
    Eigen::VectorXd z(d);
    for (Eigen::Index k = 0; k < n; ++k) {
        rng::Substream stream(seed, static_cast<std::uint64_t>(k));
        for (Eigen::Index i = 0; i < d; ++i) z(i) = stream.normal();
        out.col(k) = dist.mean + factor * z;
    }
    return out;
}

PairedSamples sample_plan(const DiscretePlan1D& plan, Eigen::Index n, std::uint64_t seed) {
    if (n < 1) throw InvalidArgument("sample_plan: need n >= 1");
    const Eigen::Index rows = plan.rows();
    const Eigen::Index cols = plan.cols();
    std::vector<double> cumulative;
    cumulative.reserve(static_cast<std::size_t>(rows * cols));
    double acc = 0.0;
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j) {
            acc += plan.weights(i, j);
            cumulative.push_back(acc);
        }
    cumulative.back() = 1.0;

    PairedSamples out;
    out.x0.resize(1, n);
    out.x1.resize(1, n);
    for (Eigen::Index k = 0; k < n; ++k) {
        rng::Substream stream(seed, static_cast<std::uint64_t>(k));
        const double u = stream.uniform01();
        const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
        const auto q = static_cast<Eigen::Index>(it - cumulative.begin());
        out.x0(0, k) = plan.x_atoms[static_cast<std::size_t>(q / cols)];
        out.x1(0, k) = plan.y_atoms[static_cast<std::size_t>(q % cols)];
    }
    return out;
}

Eigen::MatrixXd integrate_particles(const AffineVelocityField& field, Eigen::MatrixXd states,
                                    int steps, double t_begin, double t_end,
                                    const StepObserver& observer) {
    if (steps < 1) throw InvalidArgument("integrate_particles: need steps >= 1");
    if (!(t_end > t_begin)) throw InvalidArgument("integrate_particles: need t_end > t_begin");

    const double span = t_end - t_begin;
    const double h = span / steps;
    // Node times through the lerp so the last node lands exactly on t_end.
    auto node = [&](double s) { return t_begin + span * (s / steps); };

    for (int step = 0; step < steps; ++step) {
        const double t0 = node(step);
        const double t_mid = node(step + 0.5);
        const double t1 = node(step + 1.0);

        const AffineMap f0 = field.at(t0);
        const AffineMap fm = field.at(t_mid);
        const AffineMap f1 = field.at(t1);

        const Eigen::MatrixXd k1 = f0.apply(states);
        const Eigen::MatrixXd k2 = fm.apply(states + (0.5 * h) * k1);
        const Eigen::MatrixXd k3 = fm.apply(states + (0.5 * h) * k2);
        const Eigen::MatrixXd k4 = f1.apply(states + h * k3);

        states += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if (!states.allFinite())
            throw NonFinite("integrate_particles: particle state became non-finite at t = " +
                            std::to_string(t1));
        if (observer) observer(t1, states);
    }
    return states;
}

MomentCheckReport marginal_moment_check(const GaussianPlan& plan,
                                        const AffineVelocityField& field,
                                        const std::vector<double>& t_grid,
                                        Eigen::Index particles, int steps, std::uint64_t seed) {
    if (particles < 2) throw InvalidArgument("marginal_moment_check: need >= 2 particles");
    if (!std::is_sorted(t_grid.begin(), t_grid.end()))
        throw InvalidArgument("marginal_moment_check: t_grid must be sorted");
    for (double t : t_grid)
        if (!(t >= 0.0 && t <= 1.0))
            throw InvalidArgument("marginal_moment_check: grid time outside [0, 1]");
    require_valid(plan);

    const Eigen::Index d = plan.dim();
    Eigen::MatrixXd states = sample_gaussian(gaussian::marginal_at(plan, 0.0), particles, seed);

    MomentCheckReport report;
    report.particles = particles;
    report.steps = steps;
    report.seed = seed;

    const auto n = static_cast<double>(particles);
    double t_now = 0.0;
    for (double t : t_grid) {
        if (t > t_now) {
            const int seg_steps =
                std::max(1, static_cast<int>(std::lround((t - t_now) * steps)));
            states = integrate_particles(field, std::move(states), seg_steps, t_now, t);
            t_now = t;
        }

        const GaussianDistribution expected = gaussian::marginal_at(plan, t);
        const Eigen::VectorXd mean = states.rowwise().mean();
        const Eigen::MatrixXd centered = states.colwise() - mean;
        const Eigen::MatrixXd cov = centered * centered.transpose() / (n - 1.0);

        MomentCheckRow row;
        row.t = t;
        for (Eigen::Index i = 0; i < d; ++i) {
            const double err = std::abs(mean(i) - expected.mean(i));
            const double se = std::sqrt(std::max(expected.cov(i, i), 0.0) / n);
            row.max_mean_err = std::max(row.max_mean_err, err);
            row.mean_ratio = std::max(row.mean_ratio, err / std::max(4.0 * se, 1e-300));
        }
        for (Eigen::Index i = 0; i < d; ++i)
            for (Eigen::Index j = 0; j < d; ++j) {
                const double err = std::abs(cov(i, j) - expected.cov(i, j));
                const double var = expected.cov(i, i) * expected.cov(j, j) +
                                   expected.cov(i, j) * expected.cov(i, j);
                const double se = std::sqrt(std::max(var, 0.0) / n);
                row.max_cov_err = std::max(row.max_cov_err, err);
                row.cov_ratio = std::max(row.cov_ratio, err / std::max(4.0 * se, 1e-300));
            }
        row.pass = row.mean_ratio <= 1.0 && row.cov_ratio <= 1.0;
        report.rows.push_back(row);
    }
    return report;
}

Eigen::MatrixXd estimate_velocity(const PairedSamples& samples, double t,
                                  const Eigen::MatrixXd& query_points, double bandwidth) {
    if (samples.count() < 1) throw InvalidArgument("estimate_velocity: need >= 1 sample");
    if (!(bandwidth > 0.0)) throw InvalidArgument("estimate_velocity: bandwidth must be > 0");
    if (query_points.rows() != samples.dim())
        throw DimensionMismatch("estimate_velocity: query dimension disagrees with samples");

    const Eigen::MatrixXd x_t = (1.0 - t) * samples.x0 + t * samples.x1;
    const Eigen::MatrixXd diff = samples.x1 - samples.x0;
    const double inv_two_h2 = 1.0 / (2.0 * bandwidth * bandwidth);

    Eigen::MatrixXd out(samples.dim(), query_points.cols());
    for (Eigen::Index q = 0; q < query_points.cols(); ++q) {
        const Eigen::VectorXd sq =
            (x_t.colwise() - query_points.col(q)).colwise().squaredNorm().transpose();
        const Eigen::VectorXd w = (-sq.array() * inv_two_h2).exp();
        const double total = w.sum();
        if (total < 1e-300)
            throw EmptyNeighborhood("estimate_velocity: kernel weight underflowed at query " +
                                    std::to_string(q));
        out.col(q) = (diff * w) / total;
    }
    return out;
}

double silverman_bandwidth(const Eigen::MatrixXd& points) {
    const auto n = static_cast<double>(points.cols());
    const auto d = static_cast<double>(points.rows());
    if (points.cols() < 2) throw InvalidArgument("silverman_bandwidth: need >= 2 points");
    const Eigen::VectorXd mean = points.rowwise().mean();
    const Eigen::MatrixXd centered = points.colwise() - mean;
    const double sigma =
        std::sqrt(centered.array().square().rowwise().mean().mean() * n / (n - 1.0));
    return sigma * std::pow(4.0 / ((d + 2.0) * n), 1.0 / (d + 4.0));
}

}  // namespace fmlab::transport
