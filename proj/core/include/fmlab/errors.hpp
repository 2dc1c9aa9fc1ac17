#pragma once

#include <stdexcept>
#include <string>

namespace fmlab {

/// Base class for every error raised by the library.
struct Error : std::runtime_error {
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Block shapes or vector lengths disagree.
struct DimensionMismatch : Error {
    using Error::Error;
};

/// Generic precondition violation (bad tolerance, unsorted atoms, ...).
struct InvalidArgument : Error {
    using Error::Error;
};

/// Input JSON is malformed or missing required fields.
struct ParseError : Error {
    using Error::Error;
};

/// A covariance matrix required to be strictly positive definite is not.
struct SingularCovariance : Error {
    using Error::Error;
};

/// The interpolated marginal covariance is numerically singular at the
/// requested time (possible for degenerate couplings in the interior).
struct SingularMarginal : Error {
    using Error::Error;
};

/// A supplied affine initial velocity is not consistent with the declared
/// endpoint means, so no plan can reproduce it.
struct InconsistentField : Error {
    using Error::Error;
};

/// A (joint) covariance fails the positive-semidefinite requirement.
struct PSDViolation : Error {
    PSDViolation(const std::string& what, double min_eigenvalue)
        : Error(what), min_eigenvalue(min_eigenvalue) {}
    double min_eigenvalue;
};

/// Antisymmetric cross-covariance splits do not exist in one dimension.
struct NotApplicableInOneDimension : Error {
    using Error::Error;
};

/// The snapshot design operator is rank deficient on the feasible affine
/// subspace: the provided times cannot determine the plan.
struct IllPosed : Error {
    IllPosed(const std::string& what, int rank_gap, double smallest_singular_value)
        : Error(what), rank_gap(rank_gap), smallest_singular_value(smallest_singular_value) {}
    int rank_gap;
    double smallest_singular_value;
};

/// An endpoint snapshot disagrees with the declared marginals.
struct MarginalMismatch : Error {
    using Error::Error;
};

/// No nonnegative solution fits the data within the residual budget.
struct Infeasible : Error {
    using Error::Error;
};

/// Total kernel weight underflowed at a query point.
struct EmptyNeighborhood : Error {
    using Error::Error;
};

/// A particle state became non-finite during integration.
struct NonFinite : Error {
    using Error::Error;
};

}  // namespace fmlab
