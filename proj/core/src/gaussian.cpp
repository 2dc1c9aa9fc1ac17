#include "fmlab/gaussian.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

#include "fmlab/linalg.hpp"
#include "fmlab/validate.hpp"

namespace fmlab::gaussian {

namespace {

void require_unit_interval(double t) {
    if (!(t >= 0.0 && t <= 1.0))
        throw InvalidArgument("time t = " + std::to_string(t) + " outside [0, 1]");
}

// Solves M x = rhs for symmetric M, either strictly (error below the PD
// floor) or through the pseudo-inverse.
Eigen::MatrixXd solve_spd(const Eigen::MatrixXd& m, const Eigen::MatrixXd& rhs,
                          SingularPolicy policy, const char* what) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (m + m.transpose()));
    const Eigen::VectorXd& lambda = es.eigenvalues();
    if (lambda.minCoeff() < tol::strict_pd) {
        if (policy == SingularPolicy::Error)
            throw SingularMarginal(std::string(what) + ": covariance is numerically singular, "
                                   "lambda_min = " + std::to_string(lambda.minCoeff()));
        Eigen::VectorXd inv = lambda;
        const double cut = 1e-12 * std::max(lambda.cwiseAbs().maxCoeff(), 1e-300);
        for (Eigen::Index i = 0; i < inv.size(); ++i)
            inv(i) = lambda(i) > cut ? 1.0 / lambda(i) : 0.0;
        return es.eigenvectors() * inv.asDiagonal() * es.eigenvectors().transpose() * rhs;
    }
    return es.eigenvectors() *
           lambda.cwiseInverse().asDiagonal() * es.eigenvectors().transpose() * rhs;
}

}  // namespace

GaussianDistribution marginal_at(const GaussianPlan& plan, double t) {
    require_unit_interval(t);
    const double u = 1.0 - t;
    const Eigen::VectorXd mean = u * plan.mu0 + t * plan.mu1;
    const Eigen::MatrixXd cov = (u * u) * plan.sigma0 + (t * t) * plan.sigma1 +
                                (t * u) * (plan.cross + plan.cross.transpose());
    return {mean, cov};
}

MarginalCurveGaussian::MarginalCurveGaussian(GaussianPlan plan_, std::vector<double> times_)
    : plan(std::move(plan_)), times(std::move(times_)) {
    if (!std::is_sorted(times.begin(), times.end()))
        throw InvalidArgument("MarginalCurveGaussian: times must be sorted");
    for (double t : times) require_unit_interval(t);
}

std::vector<GaussianDistribution> MarginalCurveGaussian::evaluate() const {
    std::vector<GaussianDistribution> out;
    out.reserve(times.size());
    for (double t : times) out.push_back(marginal_at(plan, t));
    return out;
}

Eigen::VectorXd velocity_at_zero(const GaussianPlan& plan, const Eigen::VectorXd& x0) {
    if (x0.size() != plan.dim())
        throw DimensionMismatch("velocity_at_zero: point dimension disagrees with plan");
    const double lmin = min_eigenvalue(plan.sigma0);
    if (lmin < tol::strict_pd)
        throw SingularCovariance("velocity_at_zero: sigma0 is not strictly positive definite, "
                                 "lambda_min = " + std::to_string(lmin));
    const Eigen::VectorXd w = plan.sigma0.ldlt().solve(x0 - plan.mu0);
    return plan.mu1 + plan.cross.transpose() * w - x0;
}

AffineMap velocity_coefficients(const GaussianPlan& plan, double t, SingularPolicy policy) {
    require_unit_interval(t);
    const double u = 1.0 - t;
    const GaussianDistribution p_t = marginal_at(plan, t);
    // Cov(X_t, X1 - X0) under the joint Gaussian law.
    const Eigen::MatrixXd c_t =
        u * (plan.cross - plan.sigma0) + t * (plan.sigma1 - plan.cross.transpose());
    // A_t^T = Sigma_t^{-1} C_t
    const Eigen::MatrixXd a_t =
        solve_spd(p_t.cov, c_t, policy, "velocity_coefficients").transpose();
    const Eigen::VectorXd b_t = (plan.mu1 - plan.mu0) - a_t * p_t.mean;
    return {a_t, b_t};
}

AffineVelocityField velocity_field(const GaussianPlan& plan, SingularPolicy policy) {
    return AffineVelocityField(
        [plan, policy](double t) { return velocity_coefficients(plan, t, policy); });
}

GaussianPlan recover_plan_from_v0(const Eigen::VectorXd& mu0, const Eigen::MatrixXd& sigma0,
                                  const Eigen::VectorXd& mu1, const Eigen::MatrixXd& sigma1,
                                  const AffineMap& v0) {
    const Eigen::Index d = mu0.size();
    if (mu1.size() != d || sigma0.rows() != d || sigma0.cols() != d || sigma1.rows() != d ||
        sigma1.cols() != d || v0.linear.rows() != d || v0.linear.cols() != d ||
        v0.offset.size() != d)
        throw DimensionMismatch("recover_plan_from_v0: block shapes disagree");

    const double lmin = min_eigenvalue(sigma0);
    if (lmin < tol::strict_pd)
        throw SingularCovariance("recover_plan_from_v0: sigma0 is not strictly positive "
                                 "definite, lambda_min = " + std::to_string(lmin));

    const Eigen::MatrixXd a_plus_i = v0.linear + Eigen::MatrixXd::Identity(d, d);

    // The constant term of a genuine initial velocity is pinned by the
    // endpoints; both parts of the affine map must agree.
    const Eigen::VectorXd expected_offset = mu1 - a_plus_i * mu0;
    const double offset_err = (v0.offset - expected_offset).cwiseAbs().maxCoeff();
    if (offset_err > 1e-8)
        throw InconsistentField("recover_plan_from_v0: offset deviates from mu1 - (A+I) mu0 "
                                "by " + std::to_string(offset_err));

    GaussianPlan plan(mu0, sigma0, mu1, sigma1, sigma0 * a_plus_i.transpose());

    const double joint_lmin = min_eigenvalue(plan.joint_cov());
    if (joint_lmin < -tol::psd_slack)
        throw PSDViolation("recover_plan_from_v0: implied joint covariance fails PSD, "
                           "lambda_min = " + std::to_string(joint_lmin), joint_lmin);
    return plan;
}

std::pair<GaussianPlan, GaussianPlan> counterexample_pair(const Eigen::MatrixXd& sigma0,
                                                          const Eigen::MatrixXd& sigma1,
                                                          const Eigen::MatrixXd& sym_part,
                                                          const Eigen::MatrixXd& antisym_part) {
    const Eigen::Index d = sigma0.rows();
    if (d == 1)
        throw NotApplicableInOneDimension(
            "counterexample_pair: in one dimension S + S^T = 2S, so the marginal curve "
            "determines S; no nonzero antisymmetric 1x1 matrix exists");
    if (sigma0.cols() != d || sigma1.rows() != d || sigma1.cols() != d || sym_part.rows() != d ||
        sym_part.cols() != d || antisym_part.rows() != d || antisym_part.cols() != d)
        throw DimensionMismatch("counterexample_pair: block shapes disagree");
    if (max_abs_asymmetry(sym_part) > tol::sym)
        throw InvalidArgument("counterexample_pair: sym_part is not symmetric");
    if ((antisym_part + antisym_part.transpose()).cwiseAbs().maxCoeff() > tol::sym)
        throw InvalidArgument("counterexample_pair: antisym_part is not antisymmetric");
    if (antisym_part.cwiseAbs().maxCoeff() == 0.0)
        throw InvalidArgument("counterexample_pair: antisym_part must be nonzero");

    const Eigen::VectorXd zero = Eigen::VectorXd::Zero(d);
    GaussianPlan with_plus(zero, sigma0, zero, sigma1, sym_part + antisym_part);
    GaussianPlan with_minus(zero, sigma0, zero, sigma1, sym_part - antisym_part);

    auto check = [](const GaussianPlan& plan, const char* which) {
        const double lmin = min_eigenvalue(plan.joint_cov());
        if (lmin < -tol::psd_slack)
            throw PSDViolation(std::string("counterexample_pair: joint covariance of the ") +
                                   which + " plan fails PSD, lambda_min = " +
                                   std::to_string(lmin),
                               lmin);
    };
    check(with_plus, "S = sym + antisym");
    check(with_minus, "S' = sym - antisym");
    require_valid(with_plus);
    require_valid(with_minus);

    return {std::move(with_plus), std::move(with_minus)};
}

}  // namespace fmlab::gaussian
