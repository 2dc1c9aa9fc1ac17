#pragma once

#include <Eigen/Dense>

namespace fmlab {

/// Smallest eigenvalue of a symmetric matrix (the input is symmetrized
/// internally so tiny asymmetries do not confuse the solver).
double min_eigenvalue(const Eigen::MatrixXd& m);

/// Largest absolute entry of m - m^T.
double max_abs_asymmetry(const Eigen::MatrixXd& m);

/// Factor L of a symmetric PSD matrix with M = L L^T, built from the
/// eigendecomposition. Eigenvalues below rel_tol * max|lambda| are treated
/// as exact zeros, which keeps degenerate (deterministic) couplings exact.
Eigen::MatrixXd psd_sqrt_factor(const Eigen::MatrixXd& m, double rel_tol = 1e-12);

/// 1/2 (S + S^T). Throws DimensionMismatch unless S is square.
Eigen::MatrixXd symmetric_part(const Eigen::MatrixXd& s);

/// 1/2 (S - S^T). Throws DimensionMismatch unless S is square.
Eigen::MatrixXd antisymmetric_part(const Eigen::MatrixXd& s);

/// Orthonormal basis of the null space of a (possibly rank-deficient)
/// matrix, via SVD with a relative singular-value threshold.
Eigen::MatrixXd null_space_basis(const Eigen::MatrixXd& m, double rel_tol = 1e-12);

}  // namespace fmlab
