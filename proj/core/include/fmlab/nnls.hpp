#pragma once

#include <Eigen/Dense>

namespace fmlab::solve {

struct NnlsResult {
    Eigen::VectorXd x;
    double residual_norm = 0.0;
    int iterations = 0;
    bool converged = false;
};

/// Nonnegative least squares min ||A x - b||_2 s.t. x >= 0, solved with the
/// Lawson-Hanson active-set method (column-pivoted QR subproblems).
/// tol < 0 picks a machine-scaled dual tolerance.
NnlsResult nnls(const Eigen::MatrixXd& a, const Eigen::VectorXd& b, double tol = -1.0,
                int max_iter = -1);

/// Least distance programming: min ||w||_2 s.t. G w >= h, via the dual
/// NNLS formulation. Throws Infeasible when the constraint set is empty.
Eigen::VectorXd ldp(const Eigen::MatrixXd& g, const Eigen::VectorXd& h);

/// Inequality-constrained least squares min ||A z - c||_2 s.t. G z >= h.
/// Requires A with full column rank (throws IllPosed otherwise); reduces to
/// LDP through the SVD of A.
Eigen::VectorXd lsi(const Eigen::MatrixXd& a, const Eigen::VectorXd& c,
                    const Eigen::MatrixXd& g, const Eigen::VectorXd& h);

/// min ||A x - b||_2  s.t.  C x = d,  x >= 0.
/// The equality constraints are eliminated through an orthonormal null-space
/// basis of C (C may be rank deficient as long as C x = d is consistent);
/// the reduced problem is solved with lsi. Throws Infeasible when C x = d is
/// inconsistent or the nonnegativity constraints cannot be met, IllPosed when
/// the reduced least-squares operator is rank deficient.
Eigen::VectorXd equality_constrained_nnls(const Eigen::MatrixXd& a, const Eigen::VectorXd& b,
                                          const Eigen::MatrixXd& c, const Eigen::VectorXd& d);

}  // namespace fmlab::solve
