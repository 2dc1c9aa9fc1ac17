#include "fmlab/onedim.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "fmlab/linalg.hpp"
#include "fmlab/nnls.hpp"

namespace fmlab::onedim {

namespace {

constexpr double kCertificateFloor = 1e-10;
constexpr double kDataResidualBudget = 1e-6;
constexpr double kEndpointMassBudget = 1e-10;
// An observed atom must sit this close to an enumerated pair location.
// Well above the collision tolerance (merged clusters can shift their
// mass-weighted center by up to the cluster diameter), far below any
// legitimate atom separation at desk scale.
constexpr double kAtomMatchTol = 1e-7;

void require_unit_interval(double t) {
    if (!(t >= 0.0 && t <= 1.0))
        throw InvalidArgument("time t = " + std::to_string(t) + " outside [0, 1]");
}

void require_support(const std::vector<double>& v, const char* which) {
    if (v.empty()) throw InvalidArgument(std::string(which) + ": empty support");
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (!std::isfinite(v[i]))
            throw InvalidArgument(std::string(which) + ": non-finite atom");
        if (i > 0 && v[i] - v[i - 1] <= tol::atom_collision)
            throw InvalidArgument(std::string(which) +
                                  ": atoms must be strictly increasing with gaps above the "
                                  "collision tolerance");
    }
}

// Pair positions (1-t) x_i + t y_j grouped by collision. Members hold
// row-major pair indices q = i*m + j; centers are plain means (masses are
// unknown at design time).
struct ClusterSet {
    std::vector<double> centers;
    std::vector<std::vector<Eigen::Index>> members;
};

ClusterSet cluster_pair_positions(const std::vector<double>& x, const std::vector<double>& y,
                                  double t) {
    const auto n = static_cast<Eigen::Index>(x.size());
    const auto m = static_cast<Eigen::Index>(y.size());
    std::vector<std::pair<double, Eigen::Index>> pos;
    pos.reserve(static_cast<std::size_t>(n * m));
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < m; ++j)
            pos.emplace_back((1.0 - t) * x[static_cast<std::size_t>(i)] +
                                 t * y[static_cast<std::size_t>(j)],
                             i * m + j);
    std::sort(pos.begin(), pos.end());

    ClusterSet cs;
    std::vector<double> sums;
    for (const auto& [z, q] : pos) {
        if (!cs.centers.empty() && z - cs.centers.back() <= tol::atom_collision) {
            auto& mem = cs.members.back();
            mem.push_back(q);
            sums.back() += z;
            cs.centers.back() = sums.back() / static_cast<double>(mem.size());
        } else {
            cs.centers.push_back(z);
            cs.members.push_back({q});
            sums.push_back(z);
        }
    }
    return cs;
}

Eigen::MatrixXd marginal_constraint_matrix(Eigen::Index n, Eigen::Index m) {
    Eigen::MatrixXd c = Eigen::MatrixXd::Zero(n + m, n * m);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < m; ++j) {
            c(i, i * m + j) = 1.0;
            c(n + j, i * m + j) = 1.0;
        }
    return c;
}

struct Design {
    Eigen::MatrixXd data;                 // stacked cluster-sum rows
    std::vector<ClusterSet> clusters;     // one per time, same order
};

Design build_design(const std::vector<double>& x, const std::vector<double>& y,
                    const std::vector<double>& times) {
    const auto n = static_cast<Eigen::Index>(x.size());
    const auto m = static_cast<Eigen::Index>(y.size());
    Design design;
    Eigen::Index rows = 0;
    for (double t : times) {
        require_unit_interval(t);
        design.clusters.push_back(cluster_pair_positions(x, y, t));
        rows += static_cast<Eigen::Index>(design.clusters.back().centers.size());
    }
    design.data = Eigen::MatrixXd::Zero(rows, n * m);
    Eigen::Index r = 0;
    for (const auto& cs : design.clusters)
        for (const auto& members : cs.members) {
            for (Eigen::Index q : members) design.data(r, q) = 1.0;
            ++r;
        }
    return design;
}

struct RestrictedOperator {
    Eigen::MatrixXd null_basis;
    double smallest_singular_value = 0.0;
    int rank = 0;
};

RestrictedOperator restrict_to_feasible(const Eigen::MatrixXd& constraints,
                                        const Eigen::MatrixXd& data) {
    RestrictedOperator out;
    out.null_basis = null_space_basis(constraints);
    const Eigen::Index q = out.null_basis.cols();
    if (q == 0) {
        out.smallest_singular_value = std::numeric_limits<double>::infinity();
        return out;
    }
    if (data.rows() == 0) {
        out.smallest_singular_value = 0.0;
        return out;
    }
    const Eigen::MatrixXd restricted = data * out.null_basis;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(restricted);
    const Eigen::VectorXd& sv = svd.singularValues();
    for (Eigen::Index i = 0; i < sv.size(); ++i)
        if (sv(i) > kCertificateFloor) ++out.rank;
    out.smallest_singular_value =
        restricted.rows() >= q ? sv(q - 1) : 0.0;
    return out;
}

}  // namespace

SnapshotSet::SnapshotSet(std::vector<Snapshot> snapshots_) : snapshots(std::move(snapshots_)) {
    for (std::size_t k = 0; k < snapshots.size(); ++k) {
        require_unit_interval(snapshots[k].t);
        if (k > 0 && !(snapshots[k].t > snapshots[k - 1].t))
            throw InvalidArgument("SnapshotSet: times must be distinct and sorted");
    }
}

CFQuery CFQuery::quadrant(double xi0, double xi1) {
    if (!(xi0 >= 0.0) || !(xi1 >= 0.0))
        throw InvalidArgument("CFQuery: quadrant frequencies must be nonnegative");
    return {xi0, xi1};
}

CFQuery CFQuery::ray(double t, double xi_t) {
    require_unit_interval(t);
    if (!(xi_t >= 0.0)) throw InvalidArgument("CFQuery: ray frequency must be nonnegative");
    return {(1.0 - t) * xi_t, t * xi_t};
}

AtomicMeasure1D forward_snapshot(const DiscretePlan1D& plan, double t) {
    require_unit_interval(t);
    const Eigen::Index n = plan.rows();
    const Eigen::Index m = plan.cols();
    std::vector<double> atoms;
    std::vector<double> masses;
    atoms.reserve(static_cast<std::size_t>(n * m));
    masses.reserve(static_cast<std::size_t>(n * m));
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < m; ++j) {
            atoms.push_back((1.0 - t) * plan.x_atoms[static_cast<std::size_t>(i)] +
                            t * plan.y_atoms[static_cast<std::size_t>(j)]);
            masses.push_back(plan.weights(i, j));
        }
    return AtomicMeasure1D(std::move(atoms), std::move(masses));
}

std::complex<double> char_fn(const DiscretePlan1D& plan, double xi0, double xi1) {
    std::complex<double> acc{0.0, 0.0};
    for (Eigen::Index i = 0; i < plan.rows(); ++i)
        for (Eigen::Index j = 0; j < plan.cols(); ++j)
            acc += plan.weights(i, j) *
                   std::polar(1.0, xi0 * plan.x_atoms[static_cast<std::size_t>(i)] +
                                       xi1 * plan.y_atoms[static_cast<std::size_t>(j)]);
    return acc;
}

std::complex<double> char_fn(const DiscretePlan1D& plan, const CFQuery& query) {
    return char_fn(plan, query.xi0, query.xi1);
}

std::complex<double> marginal_cf(const AtomicMeasure1D& snapshot, double xi) {
    std::complex<double> acc{0.0, 0.0};
    for (std::size_t k = 0; k < snapshot.size(); ++k)
        acc += snapshot.masses[k] * std::polar(1.0, xi * snapshot.atoms[k]);
    return acc;
}

double ray_identity_residual(const DiscretePlan1D& plan, double t, double xi_t) {
    const std::complex<double> via_snapshot = marginal_cf(forward_snapshot(plan, t), xi_t);
    const std::complex<double> via_plan = char_fn(plan, (1.0 - t) * xi_t, t * xi_t);
    return std::abs(via_snapshot - via_plan);
}

UniquenessCertificate uniqueness_certificate(const std::vector<double>& x_atoms,
                                             const std::vector<double>& y_atoms,
                                             const std::vector<double>& times) {
    require_support(x_atoms, "x_atoms");
    require_support(y_atoms, "y_atoms");

    const auto n = static_cast<Eigen::Index>(x_atoms.size());
    const auto m = static_cast<Eigen::Index>(y_atoms.size());
    const Design design = build_design(x_atoms, y_atoms, times);
    const RestrictedOperator op =
        restrict_to_feasible(marginal_constraint_matrix(n, m), design.data);

    UniquenessCertificate cert;
    cert.free_dimension = static_cast<int>(op.null_basis.cols());
    cert.data_rows = static_cast<int>(design.data.rows());
    cert.smallest_singular_value = op.smallest_singular_value;
    cert.rank_gap = cert.free_dimension - op.rank;
    cert.certified = cert.free_dimension == 0 ||
                     op.smallest_singular_value > kCertificateFloor;
    return cert;
}

std::vector<double> default_snapshot_times(const std::vector<double>& x_atoms,
                                           const std::vector<double>& y_atoms) {
    constexpr int k_max = 16;
    std::vector<double> times;
    for (int k_count = 2; k_count <= k_max; ++k_count) {
        times.clear();
        for (int k = 1; k <= k_count; ++k)
            times.push_back(static_cast<double>(k) / (k_count + 1));
        if (uniqueness_certificate(x_atoms, y_atoms, times).certified) return times;
    }
    return times;
}

DiscretePlan1D invert_from_snapshots(const std::vector<double>& x_atoms,
                                     const std::vector<double>& y_atoms,
                                     const std::vector<double>& source_masses,
                                     const std::vector<double>& target_masses,
                                     const SnapshotSet& snapshots) {
    require_support(x_atoms, "x_atoms");
    require_support(y_atoms, "y_atoms");
    if (source_masses.size() != x_atoms.size() || target_masses.size() != y_atoms.size())
        throw DimensionMismatch("invert_from_snapshots: marginal lengths disagree with supports");

    double source_total = 0.0;
    double target_total = 0.0;
    for (double w : source_masses) {
        if (!(w >= 0.0)) throw InvalidArgument("invert_from_snapshots: negative source mass");
        source_total += w;
    }
    for (double w : target_masses) {
        if (!(w >= 0.0)) throw InvalidArgument("invert_from_snapshots: negative target mass");
        target_total += w;
    }
    if (std::abs(source_total - 1.0) > tol::mass || std::abs(target_total - 1.0) > tol::mass)
        throw InvalidArgument("invert_from_snapshots: marginal masses must each sum to 1");

    // Zero-mass rows/columns carry no coupling; strip them from the solve.
    std::vector<std::size_t> rows_kept;
    std::vector<std::size_t> cols_kept;
    for (std::size_t i = 0; i < source_masses.size(); ++i)
        if (source_masses[i] > 0.0) rows_kept.push_back(i);
    for (std::size_t j = 0; j < target_masses.size(); ++j)
        if (target_masses[j] > 0.0) cols_kept.push_back(j);

    std::vector<double> x;
    std::vector<double> y;
    Eigen::VectorXd r(static_cast<Eigen::Index>(rows_kept.size()));
    Eigen::VectorXd c(static_cast<Eigen::Index>(cols_kept.size()));
    for (std::size_t k = 0; k < rows_kept.size(); ++k) {
        x.push_back(x_atoms[rows_kept[k]]);
        r(static_cast<Eigen::Index>(k)) = source_masses[rows_kept[k]];
    }
    for (std::size_t k = 0; k < cols_kept.size(); ++k) {
        y.push_back(y_atoms[cols_kept[k]]);
        c(static_cast<Eigen::Index>(k)) = target_masses[cols_kept[k]];
    }
    const auto n = static_cast<Eigen::Index>(x.size());
    const auto m = static_cast<Eigen::Index>(y.size());

    // Endpoint snapshots must reproduce the declared marginals.
    auto check_endpoint = [&](const AtomicMeasure1D& observed, const std::vector<double>& atoms,
                              const Eigen::VectorXd& masses, const char* which) {
        if (observed.size() != atoms.size())
            throw MarginalMismatch(std::string("invert_from_snapshots: ") + which +
                                   " snapshot atom count disagrees with declared marginal");
        for (std::size_t k = 0; k < atoms.size(); ++k) {
            if (std::abs(observed.atoms[k] - atoms[k]) > kAtomMatchTol)
                throw MarginalMismatch(std::string("invert_from_snapshots: ") + which +
                                       " snapshot atom locations disagree with declared "
                                       "marginal");
            if (std::abs(observed.masses[k] - masses(static_cast<Eigen::Index>(k))) >
                kEndpointMassBudget)
                throw MarginalMismatch(std::string("invert_from_snapshots: ") + which +
                                       " snapshot masses disagree with declared marginal");
        }
    };
    for (const Snapshot& s : snapshots.snapshots) {
        if (s.t == 0.0) check_endpoint(s.measure, x, r, "t=0");
        if (s.t == 1.0) check_endpoint(s.measure, y, c, "t=1");
    }

    std::vector<double> times;
    times.reserve(snapshots.size());
    for (const Snapshot& s : snapshots.snapshots) times.push_back(s.t);

    const Eigen::MatrixXd constraints = marginal_constraint_matrix(n, m);
    Eigen::VectorXd d(n + m);
    d << r, c;

    const Design design = build_design(x, y, times);

    // Observed masses per design row; clusters the data does not mention
    // carry mass zero (their pairs were dropped from the snapshot).
    Eigen::VectorXd s_obs = Eigen::VectorXd::Zero(design.data.rows());
    Eigen::Index row0 = 0;
    for (std::size_t k = 0; k < times.size(); ++k) {
        const ClusterSet& cs = design.clusters[k];
        const AtomicMeasure1D& measure = snapshots.snapshots[k].measure;
        std::vector<bool> claimed(cs.centers.size(), false);
        for (std::size_t a = 0; a < measure.size(); ++a) {
            std::size_t best = 0;
            double best_dist = std::numeric_limits<double>::infinity();
            for (std::size_t g = 0; g < cs.centers.size(); ++g) {
                const double dist = std::abs(measure.atoms[a] - cs.centers[g]);
                if (dist < best_dist) {
                    best_dist = dist;
                    best = g;
                }
            }
            if (best_dist > kAtomMatchTol)
                throw Infeasible("invert_from_snapshots: snapshot at t = " +
                                 std::to_string(times[k]) + " has an atom at " +
                                 std::to_string(measure.atoms[a]) +
                                 " matching no pair position on the given supports");
            if (claimed[best])
                throw Infeasible("invert_from_snapshots: two snapshot atoms map to one pair "
                                 "position cluster at t = " + std::to_string(times[k]));
            claimed[best] = true;
            s_obs(row0 + static_cast<Eigen::Index>(best)) = measure.masses[a];
        }
        row0 += static_cast<Eigen::Index>(cs.centers.size());
    }

    // Well-posedness gate: the design operator restricted to the
    // marginal-preserving subspace must have full rank.
    const RestrictedOperator op = restrict_to_feasible(constraints, design.data);
    const int free_dim = static_cast<int>(op.null_basis.cols());
    if (free_dim > 0 && op.smallest_singular_value <= kCertificateFloor) {
        const int gap = free_dim - op.rank;
        throw IllPosed("invert_from_snapshots: snapshot times cannot determine the plan "
                       "(rank gap " + std::to_string(gap) + " on a " +
                       std::to_string(free_dim) + "-dimensional feasible subspace); add or "
                       "diversify snapshot times",
                       gap, op.smallest_singular_value);
    }

    Eigen::VectorXd weights_flat =
        solve::equality_constrained_nnls(design.data, s_obs, constraints, d);

    const double data_residual =
        design.data.rows() > 0
            ? (design.data * weights_flat - s_obs).cwiseAbs().maxCoeff()
            : 0.0;
    if (data_residual > kDataResidualBudget)
        throw Infeasible("invert_from_snapshots: best nonnegative fit misses the snapshot "
                         "data by " + std::to_string(data_residual));

    // Tiny clamping offsets from the solver are redistributed so the total
    // mass is exactly 1 again.
    const double total = weights_flat.sum();
    if (std::abs(total - 1.0) > 1e-6)
        throw Infeasible("invert_from_snapshots: recovered mass " + std::to_string(total) +
                         " is not a probability");
    weights_flat /= total;

    Eigen::MatrixXd full = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(x_atoms.size()),
                                                 static_cast<Eigen::Index>(y_atoms.size()));
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < m; ++j)
            full(static_cast<Eigen::Index>(rows_kept[static_cast<std::size_t>(i)]),
                 static_cast<Eigen::Index>(cols_kept[static_cast<std::size_t>(j)])) =
                weights_flat(i * m + j);

    return DiscretePlan1D(x_atoms, y_atoms, std::move(full));
}

}  // namespace fmlab::onedim
