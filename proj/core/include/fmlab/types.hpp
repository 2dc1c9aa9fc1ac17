#pragma once

#include <Eigen/Dense>
#include <functional>
#include <utility>
#include <vector>

#include "fmlab/errors.hpp"

namespace fmlab {

/// Numerical tolerances shared across the library. The mathematical
/// conditions are exact; these budgets absorb double-precision noise from
/// eigenvalue routines and mass bookkeeping so that checks stay
/// deterministic.
namespace tol {
/// Max absolute asymmetry allowed in a covariance block.
inline constexpr double sym = 1e-10;
/// Smallest eigenvalue of a joint covariance may not fall below -psd_slack.
inline constexpr double psd_slack = 1e-10;
/// Marginal covariances must have smallest eigenvalue >= strict_pd.
inline constexpr double strict_pd = 1e-12;
/// Probability masses must balance within this budget.
inline constexpr double mass = 1e-12;
/// 1D atoms closer than this collide and are merged (absolute units).
inline constexpr double atom_collision = 1e-9;
}  // namespace tol

// ---------------------------------------------------------------------------
// Gaussian family
// ---------------------------------------------------------------------------

/// A Gaussian N(mean, cov) on R^D. Plain data; invariants (symmetry, PSD)
/// are enforced by the validation routines where required.
struct GaussianDistribution {
    Eigen::VectorXd mean;
    Eigen::MatrixXd cov;

    GaussianDistribution() = default;
    GaussianDistribution(Eigen::VectorXd mean_, Eigen::MatrixXd cov_);

    [[nodiscard]] Eigen::Index dim() const { return mean.size(); }
};

/// A Gaussian coupling of two D-dimensional Gaussians: block mean
/// (mu0; mu1) and block covariance [[sigma0, cross], [cross^T, sigma1]].
/// The cross block is a free D x D matrix, not required symmetric.
struct GaussianPlan {
    Eigen::VectorXd mu0;
    Eigen::VectorXd mu1;
    Eigen::MatrixXd sigma0;
    Eigen::MatrixXd sigma1;
    Eigen::MatrixXd cross;

    GaussianPlan() = default;
    GaussianPlan(Eigen::VectorXd mu0_, Eigen::MatrixXd sigma0_,
                 Eigen::VectorXd mu1_, Eigen::MatrixXd sigma1_,
                 Eigen::MatrixXd cross_);

    [[nodiscard]] Eigen::Index dim() const { return mu0.size(); }

    /// Stacked mean (mu0; mu1) of the joint law.
    [[nodiscard]] Eigen::VectorXd joint_mean() const;
    /// Assembled 2D x 2D block covariance.
    [[nodiscard]] Eigen::MatrixXd joint_cov() const;
};

// ---------------------------------------------------------------------------
// Discrete 1D family
// ---------------------------------------------------------------------------

/// A finitely supported probability measure on R. Atoms are kept strictly
/// increasing; atoms closer than tol::atom_collision are merged at
/// construction (summed mass, mass-weighted location) and zero-mass atoms
/// are dropped. Masses must sum to 1 within tol::mass.
struct AtomicMeasure1D {
    std::vector<double> atoms;
    std::vector<double> masses;

    AtomicMeasure1D() = default;
    AtomicMeasure1D(std::vector<double> atoms_, std::vector<double> masses_);

    [[nodiscard]] std::size_t size() const { return atoms.size(); }
    [[nodiscard]] double total_mass() const;
};

/// A coupling of two finitely supported 1D measures: source atoms x_i,
/// target atoms y_j and nonnegative weights pi_ij with total mass 1.
/// Row sums are the source marginal masses, column sums the target ones.
struct DiscretePlan1D {
    std::vector<double> x_atoms;
    std::vector<double> y_atoms;
    Eigen::MatrixXd weights;  // n x m

    DiscretePlan1D() = default;
    DiscretePlan1D(std::vector<double> x_atoms_, std::vector<double> y_atoms_,
                   Eigen::MatrixXd weights_);

    [[nodiscard]] Eigen::Index rows() const { return weights.rows(); }
    [[nodiscard]] Eigen::Index cols() const { return weights.cols(); }

    [[nodiscard]] Eigen::VectorXd source_masses() const { return weights.rowwise().sum(); }
    [[nodiscard]] Eigen::VectorXd target_masses() const { return weights.colwise().sum().transpose(); }

    /// Marginals as measures (zero-mass atoms dropped).
    [[nodiscard]] AtomicMeasure1D source_marginal() const;
    [[nodiscard]] AtomicMeasure1D target_marginal() const;
};

// ---------------------------------------------------------------------------
// Velocity fields
// ---------------------------------------------------------------------------

/// An affine map x -> linear * x + offset.
struct AffineMap {
    Eigen::MatrixXd linear;
    Eigen::VectorXd offset;

    [[nodiscard]] Eigen::Index dim() const { return offset.size(); }

    [[nodiscard]] Eigen::VectorXd operator()(const Eigen::VectorXd& x) const {
        return linear * x + offset;
    }
    /// Apply to a D x N block of points (columns are points).
    [[nodiscard]] Eigen::MatrixXd apply(const Eigen::MatrixXd& points) const {
        return (linear * points).colwise() + offset;
    }
};

/// Time-indexed affine velocity field: for each t in [0,1] it yields the
/// exact coefficients (A_t, b_t) of v_t(x) = A_t x + b_t. Evaluation is
/// deterministic, no stochastic component.
class AffineVelocityField {
public:
    using Coefficients = std::function<AffineMap(double)>;

    AffineVelocityField() = default;
    explicit AffineVelocityField(Coefficients coefficients)
        : coefficients_(std::move(coefficients)) {}

    /// A field with time-constant coefficients.
    static AffineVelocityField constant(AffineMap map) {
        return AffineVelocityField([map = std::move(map)](double) { return map; });
    }

    [[nodiscard]] AffineMap at(double t) const { return coefficients_(t); }
    [[nodiscard]] Eigen::VectorXd operator()(double t, const Eigen::VectorXd& x) const {
        return at(t)(x);
    }

private:
    Coefficients coefficients_;
};

}  // namespace fmlab
