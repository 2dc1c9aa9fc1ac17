#pragma once

#include <utility>
#include <vector>

#include "fmlab/types.hpp"

namespace fmlab::gaussian {

/// How to treat a numerically singular interpolated covariance when
/// conditioning. The default is a hard error; PseudoInverse evaluates the
/// conditional coefficients on the support via the Moore-Penrose inverse,
/// which is outside the strictly-positive-definite setting the closed
/// forms assume.
enum class SingularPolicy { Error, PseudoInverse };

/// Marginal law of X_t = (1-t) X0 + t X1 under a Gaussian plan:
///   mu_t    = (1-t) mu0 + t mu1
///   Sigma_t = (1-t)^2 Sigma0 + t^2 Sigma1 + t(1-t) (S + S^T)
/// Endpoints reproduce (mu0, Sigma0) and (mu1, Sigma1) exactly.
GaussianDistribution marginal_at(const GaussianPlan& plan, double t);

/// A plan together with the evaluation grid for its marginal curve.
/// Times must be sorted and lie in [0, 1].
struct MarginalCurveGaussian {
    GaussianPlan plan;
    std::vector<double> times;

    MarginalCurveGaussian(GaussianPlan plan_, std::vector<double> times_);
    [[nodiscard]] std::vector<GaussianDistribution> evaluate() const;
};

/// Initial velocity v_0(x0) = mu1 + S^T Sigma0^{-1} (x0 - mu0) - x0.
/// Throws SingularCovariance unless Sigma0 is strictly positive definite.
Eigen::VectorXd velocity_at_zero(const GaussianPlan& plan, const Eigen::VectorXd& x0);

/// Coefficients (A_t, b_t) of the conditional-expectation velocity
/// v_t(x) = E[X1 - X0 | X_t = x] = A_t x + b_t, obtained by Gaussian
/// conditioning of X1 - X0 on X_t:
///   A_t = C_t^T Sigma_t^{-1},  C_t = (1-t)(S - Sigma0) + t(Sigma1 - S^T)
///   b_t = (mu1 - mu0) - A_t mu_t.
/// At t = 0 this reduces exactly to velocity_at_zero. Throws
/// SingularMarginal when lambda_min(Sigma_t) < tol::strict_pd and the
/// policy is Error.
AffineMap velocity_coefficients(const GaussianPlan& plan, double t,
                                SingularPolicy policy = SingularPolicy::Error);

/// The full time-indexed field t -> (A_t, b_t) for the plan.
AffineVelocityField velocity_field(const GaussianPlan& plan,
                                   SingularPolicy policy = SingularPolicy::Error);

/// Recovers the unique Gaussian plan whose initial velocity equals the
/// supplied affine map v0(x) = A x + b for the given endpoints: equating
/// affine functions of x0 gives S^T = (A + I) Sigma0, i.e.
/// cross = Sigma0 (A + I)^T. Throws InconsistentField when b deviates from
/// mu1 - (A + I) mu0 by more than 1e-8 (sup norm), PSDViolation when the
/// implied joint covariance is not PSD.
GaussianPlan recover_plan_from_v0(const Eigen::VectorXd& mu0, const Eigen::MatrixXd& sigma0,
                                  const Eigen::VectorXd& mu1, const Eigen::MatrixXd& sigma1,
                                  const AffineMap& v0);

/// Builds two distinct plans sharing every marginal: S = sym + anti and
/// S' = sym - anti have the same symmetric part, so their marginal curves
/// coincide for all t while S != S'. Means are zero. Throws
/// NotApplicableInOneDimension when D = 1 (a nonzero antisymmetric 1x1
/// matrix does not exist) and PSDViolation, naming the failing plan and
/// its eigenvalue margin, when a joint covariance is not PSD.
std::pair<GaussianPlan, GaussianPlan> counterexample_pair(const Eigen::MatrixXd& sigma0,
                                                          const Eigen::MatrixXd& sigma1,
                                                          const Eigen::MatrixXd& sym_part,
                                                          const Eigen::MatrixXd& antisym_part);

}  // namespace fmlab::gaussian
