#include "fmlab/nnls.hpp"

#include <Eigen/QR>
#include <Eigen/SVD>
#include <cmath>
#include <limits>
#include <vector>

#include "fmlab/errors.hpp"
#include "fmlab/linalg.hpp"

namespace fmlab::solve {

namespace {

// Least-squares solve restricted to the passive columns.
Eigen::VectorXd passive_solve(const Eigen::MatrixXd& a, const Eigen::VectorXd& b,
                              const std::vector<Eigen::Index>& passive) {
    Eigen::MatrixXd ap(a.rows(), static_cast<Eigen::Index>(passive.size()));
    for (std::size_t k = 0; k < passive.size(); ++k) ap.col(static_cast<Eigen::Index>(k)) = a.col(passive[k]);
    return ap.colPivHouseholderQr().solve(b);
}

}  // namespace

NnlsResult nnls(const Eigen::MatrixXd& a, const Eigen::VectorXd& b, double tol, int max_iter) {
    if (a.rows() != b.size()) throw DimensionMismatch("nnls: A rows and b length disagree");
    const Eigen::Index n = a.cols();
    if (max_iter < 0) max_iter = 10 * static_cast<int>(std::max<Eigen::Index>(n, 10));
    if (tol < 0.0) tol = 1e-13 * std::max(1.0, a.norm() * b.norm());

    NnlsResult res;
    res.x = Eigen::VectorXd::Zero(n);
    std::vector<bool> in_passive(static_cast<std::size_t>(n), false);
    std::vector<Eigen::Index> passive;

    Eigen::VectorXd w = a.transpose() * b;  // dual at x = 0

    while (res.iterations < max_iter) {
        // Pick the most violated dual coordinate among active (zero) ones.
        Eigen::Index best = -1;
        double best_w = tol;
        for (Eigen::Index j = 0; j < n; ++j) {
            if (!in_passive[static_cast<std::size_t>(j)] && w(j) > best_w) {
                best_w = w(j);
                best = j;
            }
        }
        if (best < 0) break;  // KKT satisfied

        in_passive[static_cast<std::size_t>(best)] = true;
        passive.push_back(best);

        while (true) {
            ++res.iterations;
            Eigen::VectorXd z = passive_solve(a, b, passive);

            // Guard: a freshly added column whose solution is nonpositive is
            // rejected and its dual zeroed, as in the reference method.
            if (passive.back() == best && z(z.size() - 1) <= 0.0) {
                in_passive[static_cast<std::size_t>(best)] = false;
                passive.pop_back();
                w(best) = 0.0;
                break;
            }

            bool all_positive = true;
            double alpha = std::numeric_limits<double>::infinity();
            for (Eigen::Index k = 0; k < z.size(); ++k) {
                if (z(k) <= 0.0) {
                    all_positive = false;
                    const Eigen::Index j = passive[static_cast<std::size_t>(k)];
                    const double step = res.x(j) / (res.x(j) - z(k));
                    alpha = std::min(alpha, step);
                }
            }

            if (all_positive) {
                res.x.setZero();
                for (Eigen::Index k = 0; k < z.size(); ++k)
                    res.x(passive[static_cast<std::size_t>(k)]) = z(k);
                break;
            }

            // Move toward z until the first passive coordinate hits zero,
            // then retire every coordinate at zero from the passive set.
            for (Eigen::Index k = 0; k < z.size(); ++k) {
                const Eigen::Index j = passive[static_cast<std::size_t>(k)];
                res.x(j) += alpha * (z(k) - res.x(j));
            }
            std::vector<Eigen::Index> still;
            for (Eigen::Index j : passive) {
                if (res.x(j) > 1e-14 * std::max(1.0, res.x.cwiseAbs().maxCoeff())) {
                    still.push_back(j);
                } else {
                    res.x(j) = 0.0;
                    in_passive[static_cast<std::size_t>(j)] = false;
                }
            }
            passive.swap(still);
            if (passive.empty()) break;
        }

        w = a.transpose() * (b - a * res.x);
        for (Eigen::Index j : passive) w(j) = 0.0;
    }

    res.residual_norm = (a * res.x - b).norm();
    res.converged = res.iterations < max_iter;
    return res;
}

Eigen::VectorXd ldp(const Eigen::MatrixXd& g, const Eigen::VectorXd& h) {
    if (g.rows() != h.size()) throw DimensionMismatch("ldp: G rows and h length disagree");
    const Eigen::Index q = g.cols();
    const Eigen::Index m = g.rows();
    if (m == 0) return Eigen::VectorXd::Zero(q);

    // Dual formulation: solve NNLS on E = [G^T; h^T], f = e_{q+1}.
    Eigen::MatrixXd e(q + 1, m);
    e.topRows(q) = g.transpose();
    e.bottomRows(1) = h.transpose();
    Eigen::VectorXd f = Eigen::VectorXd::Zero(q + 1);
    f(q) = 1.0;

    const NnlsResult dual = nnls(e, f);
    const Eigen::VectorXd r = e * dual.x - f;
    const double denom = r(q);
    if (r.norm() < 1e-10 || denom >= -1e-12)
        throw Infeasible("ldp: constraint set G w >= h is empty");

    Eigen::VectorXd w(q);
    for (Eigen::Index i = 0; i < q; ++i) w(i) = -r(i) / denom;
    return w;
}

Eigen::VectorXd lsi(const Eigen::MatrixXd& a, const Eigen::VectorXd& c,
                    const Eigen::MatrixXd& g, const Eigen::VectorXd& h) {
    if (a.rows() != c.size()) throw DimensionMismatch("lsi: A rows and c length disagree");
    if (g.cols() != a.cols()) throw DimensionMismatch("lsi: G and A column counts disagree");
    const Eigen::Index q = a.cols();
    if (q == 0) return Eigen::VectorXd::Zero(0);

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Eigen::VectorXd& sv = svd.singularValues();
    const double cut =
        static_cast<double>(std::max(a.rows(), a.cols())) *
        std::numeric_limits<double>::epsilon() * (sv.size() > 0 ? sv(0) : 0.0);
    Eigen::Index rank = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i)
        if (sv(i) > cut) ++rank;
    if (rank < q)
        throw IllPosed("lsi: least-squares operator is rank deficient (rank " +
                           std::to_string(rank) + " of " + std::to_string(q) + ")",
                       static_cast<int>(q - rank), sv(sv.size() - 1));

    // Substitute y = S V^T z, shift by the unconstrained optimum, solve LDP.
    const Eigen::VectorXd c1 = svd.matrixU().transpose() * c;
    const Eigen::MatrixXd g_tilde = g * svd.matrixV() * sv.cwiseInverse().asDiagonal();
    const Eigen::VectorXd h_tilde = h - g_tilde * c1;
    const Eigen::VectorXd w = ldp(g_tilde, h_tilde);
    return svd.matrixV() * sv.cwiseInverse().asDiagonal() * (w + c1);
}

Eigen::VectorXd equality_constrained_nnls(const Eigen::MatrixXd& a, const Eigen::VectorXd& b,
                                          const Eigen::MatrixXd& c, const Eigen::VectorXd& d) {
    const Eigen::Index n = a.cols();
    if (c.cols() != n) throw DimensionMismatch("equality_constrained_nnls: A and C disagree");
    if (c.rows() != d.size())
        throw DimensionMismatch("equality_constrained_nnls: C rows and d length disagree");

    // Minimum-norm particular solution of C x = d.
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(c);
    const Eigen::VectorXd x0 = cod.solve(d);
    const double eq_scale = std::max(1.0, d.cwiseAbs().maxCoeff());
    if ((c * x0 - d).cwiseAbs().maxCoeff() > 1e-9 * eq_scale)
        throw Infeasible("equality_constrained_nnls: equality constraints are inconsistent");

    const Eigen::MatrixXd nullb = null_space_basis(c);
    if (nullb.cols() == 0) {
        if (x0.minCoeff() < -1e-9)
            throw Infeasible("equality_constrained_nnls: unique equality solution is negative");
        return x0.cwiseMax(0.0);
    }

    // x = x0 + N z,  N z >= -x0.
    const Eigen::VectorXd z =
        lsi(a * nullb, b - a * x0, nullb, -x0);
    Eigen::VectorXd x = x0 + nullb * z;
    if (x.minCoeff() < -1e-9)
        throw Infeasible("equality_constrained_nnls: no nonnegative solution found");
    return x.cwiseMax(0.0);
}

}  // namespace fmlab::solve
