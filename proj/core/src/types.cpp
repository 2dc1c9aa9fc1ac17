#include "fmlab/types.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace fmlab {

GaussianDistribution::GaussianDistribution(Eigen::VectorXd mean_, Eigen::MatrixXd cov_)
    : mean(std::move(mean_)), cov(std::move(cov_)) {
    if (cov.rows() != cov.cols() || cov.rows() != mean.size())
        throw DimensionMismatch("GaussianDistribution: cov must be D x D with D = mean length");
}

GaussianPlan::GaussianPlan(Eigen::VectorXd mu0_, Eigen::MatrixXd sigma0_,
                           Eigen::VectorXd mu1_, Eigen::MatrixXd sigma1_,
                           Eigen::MatrixXd cross_)
    : mu0(std::move(mu0_)),
      mu1(std::move(mu1_)),
      sigma0(std::move(sigma0_)),
      sigma1(std::move(sigma1_)),
      cross(std::move(cross_)) {
    const Eigen::Index d = mu0.size();
    if (d < 1) throw DimensionMismatch("GaussianPlan: dimension must be >= 1");
    if (mu1.size() != d || sigma0.rows() != d || sigma0.cols() != d || sigma1.rows() != d ||
        sigma1.cols() != d || cross.rows() != d || cross.cols() != d)
        throw DimensionMismatch("GaussianPlan: block shapes disagree");
}

Eigen::VectorXd GaussianPlan::joint_mean() const {
    Eigen::VectorXd m(2 * dim());
    m << mu0, mu1;
    return m;
}

Eigen::MatrixXd GaussianPlan::joint_cov() const {
    const Eigen::Index d = dim();
    Eigen::MatrixXd j(2 * d, 2 * d);
    j.topLeftCorner(d, d) = sigma0;
    j.topRightCorner(d, d) = cross;
    j.bottomLeftCorner(d, d) = cross.transpose();
    j.bottomRightCorner(d, d) = sigma1;
    return j;
}

namespace {

// Sorts (atom, mass) pairs, drops zero masses, and merges runs of atoms
// whose consecutive gap is <= tol::atom_collision. Merged atoms sit at the
// mass-weighted mean of their members. Repeats until gaps are stable.
void normalize_atoms(std::vector<double>& atoms, std::vector<double>& masses) {
    const std::size_t n = atoms.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return atoms[a] < atoms[b]; });

    std::vector<double> a;
    std::vector<double> m;
    a.reserve(n);
    m.reserve(n);
    for (std::size_t k : order) {
        if (masses[k] == 0.0) continue;
        a.push_back(atoms[k]);
        m.push_back(masses[k]);
    }

    bool merged = true;
    while (merged) {
        merged = false;
        std::vector<double> na;
        std::vector<double> nm;
        na.reserve(a.size());
        nm.reserve(a.size());
        for (std::size_t i = 0; i < a.size(); ++i) {
            if (!na.empty() && a[i] - na.back() <= tol::atom_collision) {
                const double w = nm.back() + m[i];
                na.back() = (na.back() * nm.back() + a[i] * m[i]) / w;
                nm.back() = w;
                merged = true;
            } else {
                na.push_back(a[i]);
                nm.push_back(m[i]);
            }
        }
        a.swap(na);
        m.swap(nm);
    }
    atoms.swap(a);
    masses.swap(m);
}

}  // namespace

AtomicMeasure1D::AtomicMeasure1D(std::vector<double> atoms_, std::vector<double> masses_)
    : atoms(std::move(atoms_)), masses(std::move(masses_)) {
    if (atoms.size() != masses.size())
        throw DimensionMismatch("AtomicMeasure1D: atoms and masses differ in length");
    if (atoms.empty()) throw InvalidArgument("AtomicMeasure1D: measure needs at least one atom");
    for (double x : atoms)
        if (!std::isfinite(x)) throw InvalidArgument("AtomicMeasure1D: non-finite atom");
    for (double w : masses)
        if (!(w >= 0.0)) throw InvalidArgument("AtomicMeasure1D: masses must be nonnegative");

    normalize_atoms(atoms, masses);
    if (atoms.empty()) throw InvalidArgument("AtomicMeasure1D: all atoms had zero mass");

    const double total = total_mass();
    if (std::abs(total - 1.0) > tol::mass)
        throw InvalidArgument("AtomicMeasure1D: masses sum to " + std::to_string(total) +
                              ", expected 1");
}

double AtomicMeasure1D::total_mass() const {
    double s = 0.0;
    for (double w : masses) s += w;
    return s;
}

DiscretePlan1D::DiscretePlan1D(std::vector<double> x_atoms_, std::vector<double> y_atoms_,
                               Eigen::MatrixXd weights_)
    : x_atoms(std::move(x_atoms_)), y_atoms(std::move(y_atoms_)), weights(std::move(weights_)) {
    const auto n = static_cast<Eigen::Index>(x_atoms.size());
    const auto m = static_cast<Eigen::Index>(y_atoms.size());
    if (n < 1 || m < 1) throw InvalidArgument("DiscretePlan1D: empty support");
    if (weights.rows() != n || weights.cols() != m)
        throw DimensionMismatch("DiscretePlan1D: weights must be n x m");

    auto check_sorted = [](const std::vector<double>& v, const char* which) {
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (!std::isfinite(v[i]))
                throw InvalidArgument(std::string("DiscretePlan1D: non-finite ") + which);
            if (i > 0 && v[i] - v[i - 1] <= tol::atom_collision)
                throw InvalidArgument(std::string("DiscretePlan1D: ") + which +
                                      " must be strictly increasing with gaps above the "
                                      "collision tolerance");
        }
    };
    check_sorted(x_atoms, "x_atoms");
    check_sorted(y_atoms, "y_atoms");

    if ((weights.array() < 0.0).any())
        throw InvalidArgument("DiscretePlan1D: weights must be nonnegative");
    const double total = weights.sum();
    if (std::abs(total - 1.0) > tol::mass)
        throw InvalidArgument("DiscretePlan1D: total mass is " + std::to_string(total) +
                              ", expected 1");
}

AtomicMeasure1D DiscretePlan1D::source_marginal() const {
    const Eigen::VectorXd r = source_masses();
    return AtomicMeasure1D(x_atoms, std::vector<double>(r.data(), r.data() + r.size()));
}

AtomicMeasure1D DiscretePlan1D::target_marginal() const {
    const Eigen::VectorXd c = target_masses();
    return AtomicMeasure1D(y_atoms, std::vector<double>(c.data(), c.data() + c.size()));
}

}  // namespace fmlab
