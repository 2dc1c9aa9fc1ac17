#pragma once

#include <string>
#include <vector>

#include "fmlab/types.hpp"

namespace fmlab {

struct ValidationCheck {
    std::string name;
    bool pass = false;
    /// Signed margin of the check: how far the measured quantity clears
    /// (positive) or violates (negative) its bound. For eigenvalue checks
    /// this is the distance of the smallest eigenvalue from the bound.
    double margin = 0.0;
    double measured = 0.0;
    std::string detail;
};

struct ValidationReport {
    std::vector<ValidationCheck> checks;
    [[nodiscard]] bool accepted() const {
        for (const auto& c : checks)
            if (!c.pass) return false;
        return true;
    }
};

/// Checks every invariant of a Gaussian plan and reports each with its
/// measured eigenvalue margin:
///   - sigma0 / sigma1 symmetric within tol::sym,
///   - sigma0 / sigma1 strictly positive definite (lambda_min >= tol::strict_pd),
///   - joint block covariance PSD (lambda_min >= -tol::psd_slack).
/// Throws DimensionMismatch when block shapes disagree.
ValidationReport validate_gaussian_plan(const GaussianPlan& plan);

/// Throws (PSDViolation / SingularCovariance) unless the plan passes
/// validate_gaussian_plan.
void require_valid(const GaussianPlan& plan);

}  // namespace fmlab
