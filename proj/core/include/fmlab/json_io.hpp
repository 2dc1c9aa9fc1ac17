#pragma once

#include <string>

#include "fmlab/onedim.hpp"
#include "fmlab/types.hpp"

namespace fmlab::io {

// JSON schemas (vectors as arrays, matrices as row-major nested arrays):
//   GaussianDistribution  {"mean": [...], "cov": [[...], ...]}
//   GaussianPlan          {"mu0":..., "mu1":..., "sigma0":..., "sigma1":..., "cross":...}
//   AtomicMeasure1D       {"atoms": [...], "masses": [...]}
//   DiscretePlan1D        {"x_atoms": [...], "y_atoms": [...], "weights": [[...], ...]}
//   SnapshotSet           {"snapshots": [{"t": 0.5, "atoms": [...], "masses": [...]}, ...]}
//   AffineMap             {"A": [[...], ...], "b": [...]}
// Serialization is deterministic (sorted keys, round-trip-exact numbers).

std::string to_json(const GaussianDistribution& dist);
std::string to_json(const GaussianPlan& plan);
std::string to_json(const AtomicMeasure1D& measure);
std::string to_json(const DiscretePlan1D& plan);
std::string to_json(const onedim::SnapshotSet& set);
std::string to_json(const AffineMap& map);

// Parsers throw ParseError on malformed input or missing fields; the type
// constructors still enforce their own invariants.
GaussianDistribution gaussian_distribution_from_json(const std::string& text);
GaussianPlan gaussian_plan_from_json(const std::string& text);
AtomicMeasure1D atomic_measure_from_json(const std::string& text);
DiscretePlan1D discrete_plan_from_json(const std::string& text);
onedim::SnapshotSet snapshot_set_from_json(const std::string& text);
AffineMap affine_map_from_json(const std::string& text);

}  // namespace fmlab::io
