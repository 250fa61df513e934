#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

#include <json.hpp>

#include "igkls/applications.hpp"

namespace igkls {

using json = nlohmann::json;

enum class BundleKind { Algebra, CpMap, Gkls, NormalForm, KoashiImoto };

const char* bundle_kind_name(BundleKind kind);
BundleKind parse_bundle_kind(const std::string& name);

struct BundleMeta {
    std::uint64_t seed = 0;
    Tolerances tol;
    json params = json::object();
};

struct InstanceBundle {
    BundleKind kind = BundleKind::Algebra;
    json payload = json::object();
    BundleMeta meta;
};

json to_json(const CMatrix& m);
CMatrix cmatrix_from_json(const json& j, const std::string& field);
json to_json(const CVector& v);
CVector cvector_from_json(const json& j, const std::string& field);

json to_json(const AlgebraBasis& a);
AlgebraBasis algebra_from_json(const json& j, const std::string& field, double tol);
json to_json(const AtomicDecomposition& d);
AtomicDecomposition decomposition_from_json(const json& j, const std::string& field, double tol);
json to_json(const StinespringRep& s);
StinespringRep stinespring_from_json(const json& j, const std::string& field);
json to_json(const KrausSet& k);
// require_picture: the "picture" tag must be present.
KrausSet kraus_from_json(const json& j, const std::string& field, bool require_picture);
json to_json(const PairBlock& p);
json to_json(const BlockFactorization& bf);
BlockFactorization factorization_from_json(const json& j, const std::string& field);
json to_json(const GKLSRep& g);
GKLSRep gkls_from_json(const json& j, const std::string& field);
json to_json(const AtomicNormalForm& nf);
AtomicNormalForm normal_form_from_json(const json& j, const std::string& field, double tol);
json to_json(const GaugeData& g);
GaugeData gauge_from_json(const json& j, const std::string& field);
json to_json(const KoashiImotoResult& r);

json to_json(const InstanceBundle& b);
// Validates the payload against the kind's schema and checks unitarity invariants.
InstanceBundle bundle_from_json(const json& j);

InstanceBundle decode(std::istream& in);
InstanceBundle decode_string(const std::string& text);
InstanceBundle decode_file(const std::string& path);
std::string encode(const InstanceBundle& b);

// Deterministic random bundle. params: see README (d0, factors, d_env, f_max, d_f, k_only, ...).
InstanceBundle random_instance(BundleKind kind, const json& params, std::uint64_t seed);

}  // namespace igkls
