#include "fmlab/json_io.hpp"

#include <json.hpp>
#include <utility>

namespace fmlab::io {

namespace {

using nlohmann::json;

json vec_to_json(const Eigen::VectorXd& v) {
    json arr = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v(i));
    return arr;
}

json vec_to_json(const std::vector<double>& v) {
    return json(v);
}

json mat_to_json(const Eigen::MatrixXd& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

json parse(const std::string& text) {
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded()) throw ParseError("malformed JSON");
    return j;
}

const json& field(const json& j, const char* name) {
    if (!j.is_object() || !j.contains(name))
        throw ParseError(std::string("missing field '") + name + "'");
    return j.at(name);
}

double number_from(const json& j, const char* name) {
    if (!j.is_number()) throw ParseError(std::string("field '") + name + "' must be a number");
    return j.get<double>();
}

std::vector<double> dvec_from(const json& j, const char* name) {
    if (!j.is_array()) throw ParseError(std::string("field '") + name + "' must be an array");
    std::vector<double> out;
    out.reserve(j.size());
    for (const auto& e : j) out.push_back(number_from(e, name));
    return out;
}

Eigen::VectorXd vec_from(const json& j, const char* name) {
    const std::vector<double> v = dvec_from(j, name);
    return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

Eigen::MatrixXd mat_from(const json& j, const char* name) {
    if (!j.is_array() || j.empty())
        throw ParseError(std::string("field '") + name + "' must be a non-empty nested array");
    const auto rows = static_cast<Eigen::Index>(j.size());
    const auto cols = static_cast<Eigen::Index>(j.at(0).is_array() ? j.at(0).size() : 0);
    if (cols == 0)
        throw ParseError(std::string("field '") + name + "' must be a nested array of rows");
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
        const auto& row = j.at(static_cast<std::size_t>(i));
        if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols)
            throw ParseError(std::string("field '") + name + "' has ragged rows");
        for (Eigen::Index k = 0; k < cols; ++k)
            m(i, k) = number_from(row.at(static_cast<std::size_t>(k)), name);
    }
    return m;
}

std::string dump(const json& j) {
    return j.dump(2) + "\n";
}

}  // namespace

std::string to_json(const GaussianDistribution& dist) {
    return dump({{"mean", vec_to_json(dist.mean)}, {"cov", mat_to_json(dist.cov)}});
}

std::string to_json(const GaussianPlan& plan) {
    return dump({{"mu0", vec_to_json(plan.mu0)},
                 {"mu1", vec_to_json(plan.mu1)},
                 {"sigma0", mat_to_json(plan.sigma0)},
                 {"sigma1", mat_to_json(plan.sigma1)},
                 {"cross", mat_to_json(plan.cross)}});
}

std::string to_json(const AtomicMeasure1D& measure) {
    return dump({{"atoms", vec_to_json(measure.atoms)}, {"masses", vec_to_json(measure.masses)}});
}

std::string to_json(const DiscretePlan1D& plan) {
    return dump({{"x_atoms", vec_to_json(plan.x_atoms)},
                 {"y_atoms", vec_to_json(plan.y_atoms)},
                 {"weights", mat_to_json(plan.weights)}});
}

std::string to_json(const onedim::SnapshotSet& set) {
    json arr = json::array();
    for (const auto& s : set.snapshots)
        arr.push_back({{"t", s.t},
                       {"atoms", vec_to_json(s.measure.atoms)},
                       {"masses", vec_to_json(s.measure.masses)}});
    return dump({{"snapshots", std::move(arr)}});
}

std::string to_json(const AffineMap& map) {
    return dump({{"A", mat_to_json(map.linear)}, {"b", vec_to_json(map.offset)}});
}

GaussianDistribution gaussian_distribution_from_json(const std::string& text) {
    const json j = parse(text);
    return {vec_from(field(j, "mean"), "mean"), mat_from(field(j, "cov"), "cov")};
}

GaussianPlan gaussian_plan_from_json(const std::string& text) {
    const json j = parse(text);
    return {vec_from(field(j, "mu0"), "mu0"), mat_from(field(j, "sigma0"), "sigma0"),
            vec_from(field(j, "mu1"), "mu1"), mat_from(field(j, "sigma1"), "sigma1"),
            mat_from(field(j, "cross"), "cross")};
}

AtomicMeasure1D atomic_measure_from_json(const std::string& text) {
    const json j = parse(text);
    return {dvec_from(field(j, "atoms"), "atoms"), dvec_from(field(j, "masses"), "masses")};
}

DiscretePlan1D discrete_plan_from_json(const std::string& text) {
    const json j = parse(text);
    return {dvec_from(field(j, "x_atoms"), "x_atoms"), dvec_from(field(j, "y_atoms"), "y_atoms"),
            mat_from(field(j, "weights"), "weights")};
}

onedim::SnapshotSet snapshot_set_from_json(const std::string& text) {
    const json j = parse(text);
    const json& arr = field(j, "snapshots");
    if (!arr.is_array()) throw ParseError("field 'snapshots' must be an array");
    std::vector<onedim::Snapshot> snaps;
    snaps.reserve(arr.size());
    for (const auto& e : arr)
        snaps.push_back({number_from(field(e, "t"), "t"),
                         AtomicMeasure1D(dvec_from(field(e, "atoms"), "atoms"),
                                         dvec_from(field(e, "masses"), "masses"))});
    return onedim::SnapshotSet(std::move(snaps));
}

AffineMap affine_map_from_json(const std::string& text) {
    const json j = parse(text);
    return {mat_from(field(j, "A"), "A"), vec_from(field(j, "b"), "b")};
}

}  // namespace fmlab::io
