#include "fmlab/validate.hpp"

#include <cmath>

#include "fmlab/linalg.hpp"

namespace fmlab {

ValidationReport validate_gaussian_plan(const GaussianPlan& plan) {
    // Shape disagreement is already rejected by the GaussianPlan constructor;
    // re-check here so reports can be produced for hand-assembled plans too.
    const Eigen::Index d = plan.dim();
    if (plan.mu1.size() != d || plan.sigma0.rows() != d || plan.sigma0.cols() != d ||
        plan.sigma1.rows() != d || plan.sigma1.cols() != d || plan.cross.rows() != d ||
        plan.cross.cols() != d)
        throw DimensionMismatch("validate_gaussian_plan: block shapes disagree");

    ValidationReport report;

    auto symmetry_check = [&](const Eigen::MatrixXd& m, const std::string& name) {
        const double asym = max_abs_asymmetry(m);
        report.checks.push_back({name + " symmetric", asym <= tol::sym, tol::sym - asym, asym,
                                 "max |m - m^T| = " + std::to_string(asym)});
    };
    symmetry_check(plan.sigma0, "sigma0");
    symmetry_check(plan.sigma1, "sigma1");

    auto pd_check = [&](const Eigen::MatrixXd& m, const std::string& name) {
        const double lmin = min_eigenvalue(m);
        report.checks.push_back({name + " strictly positive definite", lmin >= tol::strict_pd,
                                 lmin - tol::strict_pd, lmin,
                                 "lambda_min = " + std::to_string(lmin)});
    };
    pd_check(plan.sigma0, "sigma0");
    pd_check(plan.sigma1, "sigma1");

    const double joint_lmin = min_eigenvalue(plan.joint_cov());
    report.checks.push_back({"joint covariance PSD", joint_lmin >= -tol::psd_slack,
                             joint_lmin + tol::psd_slack, joint_lmin,
                             "lambda_min = " + std::to_string(joint_lmin)});
    return report;
}

void require_valid(const GaussianPlan& plan) {
    const ValidationReport report = validate_gaussian_plan(plan);
    if (report.accepted()) return;
    for (const auto& c : report.checks) {
        if (c.pass) continue;
        if (c.name == "joint covariance PSD")
            throw PSDViolation("GaussianPlan: joint covariance fails PSD, " + c.detail,
                               c.measured);
        if (c.name.find("strictly positive definite") != std::string::npos)
            throw SingularCovariance("GaussianPlan: " + c.name + " fails, " + c.detail);
        throw InvalidArgument("GaussianPlan: " + c.name + " fails, " + c.detail);
    }
}

}  // namespace fmlab
