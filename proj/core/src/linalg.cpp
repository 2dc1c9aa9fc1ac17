#include "fmlab/linalg.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <cmath>

#include "fmlab/errors.hpp"

namespace fmlab {

double min_eigenvalue(const Eigen::MatrixXd& m) {
    if (m.rows() != m.cols()) throw DimensionMismatch("min_eigenvalue: matrix must be square");
    const Eigen::MatrixXd sym = 0.5 * (m + m.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

double max_abs_asymmetry(const Eigen::MatrixXd& m) {
    if (m.rows() != m.cols()) throw DimensionMismatch("max_abs_asymmetry: matrix must be square");
    return (m - m.transpose()).cwiseAbs().maxCoeff();
}

Eigen::MatrixXd psd_sqrt_factor(const Eigen::MatrixXd& m, double rel_tol) {
    if (m.rows() != m.cols()) throw DimensionMismatch("psd_sqrt_factor: matrix must be square");
    const Eigen::MatrixXd sym = 0.5 * (m + m.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym);
    Eigen::VectorXd lambda = es.eigenvalues();
    const double cut = rel_tol * std::max(lambda.cwiseAbs().maxCoeff(), 1e-300);
    for (Eigen::Index i = 0; i < lambda.size(); ++i)
        lambda(i) = lambda(i) > cut ? std::sqrt(lambda(i)) : 0.0;
    return es.eigenvectors() * lambda.asDiagonal();
}

Eigen::MatrixXd symmetric_part(const Eigen::MatrixXd& s) {
    if (s.rows() != s.cols()) throw DimensionMismatch("symmetric_part: matrix must be square");
    return 0.5 * (s + s.transpose());
}

Eigen::MatrixXd antisymmetric_part(const Eigen::MatrixXd& s) {
    if (s.rows() != s.cols()) throw DimensionMismatch("antisymmetric_part: matrix must be square");
    return 0.5 * (s - s.transpose());
}

Eigen::MatrixXd null_space_basis(const Eigen::MatrixXd& m, double rel_tol) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeFullV);
    const Eigen::VectorXd sv = svd.singularValues();
    const double cut = sv.size() > 0 ? rel_tol * std::max(sv(0), 1e-300) : 0.0;
    Eigen::Index rank = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i)
        if (sv(i) > cut) ++rank;
    return svd.matrixV().rightCols(m.cols() - rank);
}

}  // namespace fmlab
