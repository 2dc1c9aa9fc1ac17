#pragma once

#include <complex>
#include <vector>

#include "fmlab/types.hpp"

namespace fmlab::onedim {

/// One observed marginal: the law of X_t = (1-t) X0 + t X1 at a fixed time.
struct Snapshot {
    double t = 0.0;
    AtomicMeasure1D measure;
};

/// A set of snapshots with distinct, sorted times in [0, 1].
struct SnapshotSet {
    std::vector<Snapshot> snapshots;

    SnapshotSet() = default;
    explicit SnapshotSet(std::vector<Snapshot> snapshots_);

    [[nodiscard]] std::size_t size() const { return snapshots.size(); }
};

/// A characteristic-function query, either directly as a nonnegative
/// frequency pair (xi0, xi1) or in ray form (t, xi_t), which maps to
/// ((1-t) xi_t, t xi_t). The proof of the 1D uniqueness result recovers
/// the plan's CF exactly on this quadrant.
struct CFQuery {
    double xi0 = 0.0;
    double xi1 = 0.0;

    static CFQuery quadrant(double xi0, double xi1);
    static CFQuery ray(double t, double xi_t);
};

/// Pushes the plan forward to time t: atoms (1-t) x_i + t y_j carrying
/// masses pi_ij, with colliding atoms merged and zero masses dropped.
AtomicMeasure1D forward_snapshot(const DiscretePlan1D& plan, double t);

/// Characteristic function of the plan:
/// phi(xi0, xi1) = sum_ij pi_ij exp(i (xi0 x_i + xi1 y_j)).  |phi| <= 1.
std::complex<double> char_fn(const DiscretePlan1D& plan, double xi0, double xi1);
std::complex<double> char_fn(const DiscretePlan1D& plan, const CFQuery& query);

/// CF of a marginal snapshot: sum_k m_k exp(i xi a_k).
std::complex<double> marginal_cf(const AtomicMeasure1D& snapshot, double xi);

/// | CF of forward_snapshot(plan, t) at xi_t  -  phi((1-t) xi_t, t xi_t) |.
/// Both sides are computed independently; the identity makes this <= 1e-12
/// for every plan, t in [0,1] and frequency.
double ray_identity_residual(const DiscretePlan1D& plan, double t, double xi_t);

/// Numerical certificate that a finite set of snapshot times determines the
/// plan on the given supports: the snapshot design operator, restricted to
/// the marginal-preserving affine subspace, must have smallest singular
/// value above 1e-10.
struct UniquenessCertificate {
    bool certified = false;
    /// Smallest singular value of the restricted design operator
    /// (+infinity when the feasible subspace is a single point).
    double smallest_singular_value = 0.0;
    /// Dimension of the marginal-preserving subspace (n*m - rank of the
    /// marginal-sum constraints).
    int free_dimension = 0;
    int data_rows = 0;
    /// Number of unresolved directions: free_dimension - rank of the
    /// restricted operator.
    int rank_gap = 0;
};

UniquenessCertificate uniqueness_certificate(const std::vector<double>& x_atoms,
                                             const std::vector<double>& y_atoms,
                                             const std::vector<double>& times);

/// Uniform interior grid t_k = k / (K+1), smallest K >= 2 that the
/// certificate accepts (capped at K = 16; callers should re-check the
/// certificate when the cap is hit).
std::vector<double> default_snapshot_times(const std::vector<double>& x_atoms,
                                           const std::vector<double>& y_atoms);

/// Recovers the plan from marginal snapshots. Unknowns pi_ij, equality
/// constraints = declared row/column sums, one data equation per merged
/// atom location per snapshot time; solved as linearly constrained
/// nonnegative least squares.
///
/// Throws IllPosed (with the rank gap) when the assembled system cannot
/// determine the plan, MarginalMismatch when an endpoint snapshot
/// disagrees with the declared marginals beyond 1e-10, Infeasible when no
/// nonnegative solution fits the data within residual 1e-6.
DiscretePlan1D invert_from_snapshots(const std::vector<double>& x_atoms,
                                     const std::vector<double>& y_atoms,
                                     const std::vector<double>& source_masses,
                                     const std::vector<double>& target_masses,
                                     const SnapshotSet& snapshots);

}  // namespace fmlab::onedim
