#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "fmlab/types.hpp"

namespace fmlab::transport {

/// Paired draws (x0, x1) from a coupling; column k of each matrix is one
/// sample pair.
struct PairedSamples {
    Eigen::MatrixXd x0;  // D x n
    Eigen::MatrixXd x1;  // D x n

    [[nodiscard]] Eigen::Index dim() const { return x0.rows(); }
    [[nodiscard]] Eigen::Index count() const { return x0.cols(); }
};

/// i.i.d. pairs from a Gaussian plan. Each particle consumes its own
/// counter-based substream of the master seed, so results are reproducible
/// under any execution order.
PairedSamples sample_plan(const GaussianPlan& plan, Eigen::Index n, std::uint64_t seed);

/// i.i.d. draws from a single Gaussian (one column per sample). Particle k
/// draws dim() normals from substream (seed, k); marginal_moment_check
/// builds its initial cloud exactly this way.
Eigen::MatrixXd sample_gaussian(const GaussianDistribution& dist, Eigen::Index n,
                                std::uint64_t seed);

/// i.i.d. pairs from a discrete 1D plan (D = 1).
PairedSamples sample_plan(const DiscretePlan1D& plan, Eigen::Index n, std::uint64_t seed);

/// Called after every accepted step with the current time and the D x N
/// block of particle states.
using StepObserver = std::function<void(double t, const Eigen::MatrixXd& states)>;

/// Classic fourth-order Runge-Kutta transport of a particle block along a
/// time-indexed affine field, uniform steps from t_begin to t_end.
/// Deterministic per particle. Throws NonFinite when any state stops being
/// finite; errors from field evaluation (e.g. SingularMarginal) propagate.
Eigen::MatrixXd integrate_particles(const AffineVelocityField& field, Eigen::MatrixXd states,
                                    int steps, double t_begin = 0.0, double t_end = 1.0,
                                    const StepObserver& observer = {});

struct MomentCheckRow {
    double t = 0.0;
    double max_mean_err = 0.0;
    double max_cov_err = 0.0;
    /// Largest |error| / (4 * standard error) over mean / covariance
    /// entries; the row passes when both ratios are <= 1.
    double mean_ratio = 0.0;
    double cov_ratio = 0.0;
    bool pass = false;
};

struct MomentCheckReport {
    std::vector<MomentCheckRow> rows;
    Eigen::Index particles = 0;
    int steps = 0;
    std::uint64_t seed = 0;

    [[nodiscard]] bool all_pass() const {
        for (const auto& row : rows)
            if (!row.pass) return false;
        return true;
    }
};

/// Moment-level verification of the continuity equation: particles sampled
/// from p_0 and transported along `field` must reproduce the closed-form
/// mean and covariance of p_t at every grid time within 4 Monte Carlo
/// standard errors.
MomentCheckReport marginal_moment_check(const GaussianPlan& plan,
                                        const AffineVelocityField& field,
                                        const std::vector<double>& t_grid,
                                        Eigen::Index particles, int steps, std::uint64_t seed);

/// Nadaraya-Watson estimate of E[X1 - X0 | X_t = x] from sample pairs:
/// Gaussian kernel in x_t = (1-t) x0 + t x1, one estimate per query column.
/// Throws EmptyNeighborhood when the total kernel weight at a query point
/// underflows (< 1e-300).
Eigen::MatrixXd estimate_velocity(const PairedSamples& samples, double t,
                                  const Eigen::MatrixXd& query_points, double bandwidth);

/// Rule-of-thumb bandwidth for estimate_velocity: mean per-coordinate
/// standard deviation scaled by (4 / ((D+2) n))^(1/(D+4)).
double silverman_bandwidth(const Eigen::MatrixXd& points);

}  // namespace fmlab::transport
