#include "igkls/io.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <sstream>

#include "igkls/sampling.hpp"

namespace igkls {

namespace {

[[noreturn]] void schema(const std::string& field, const std::string& what) {
    throw Error(ErrorKind::SchemaError, field + ": " + what);
}

const json& member(const json& j, const char* key, const std::string& field) {
    if (!j.is_object()) schema(field, "expected an object");
    auto it = j.find(key);
    if (it == j.end()) schema(field + "." + key, "missing");
    return *it;
}

int int_member(const json& j, const char* key, const std::string& field, int min_value = 0) {
    const json& v = member(j, key, field);
    if (!v.is_number_integer()) schema(field + "." + key, "expected an integer");
    const auto x = v.get<long long>();
    if (x < min_value || x > 1 << 20) schema(field + "." + key, "integer out of range");
    return static_cast<int>(x);
}

cplx complex_from_json(const json& j, const std::string& field) {
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
        schema(field, "expected [re, im] pair of numbers");
    const double re = j[0].get<double>(), im = j[1].get<double>();
    if (!std::isfinite(re) || !std::isfinite(im)) schema(field, "non-finite entry");
    return {re, im};
}

json pairs_json(const std::vector<PairBlock>& pairs) {
    json out = json::array();
    for (const auto& p : pairs) out.push_back(to_json(p));
    return out;
}

std::vector<PairBlock> pairs_from_json(const json& j, const std::string& field, int n_a, int n_c) {
    if (!j.is_array() || static_cast<int>(j.size()) != n_a * n_c) schema(field, "expected one entry per (i, j) pair");
    std::vector<PairBlock> out;
    for (std::size_t k = 0; k < j.size(); ++k) {
        const std::string f = field + "[" + std::to_string(k) + "]";
        PairBlock p;
        p.i = int_member(j[k], "i", f);
        p.j = int_member(j[k], "j", f);
        p.d_f = int_member(j[k], "d_f", f);
        p.a = cmatrix_from_json(member(j[k], "a", f), f + ".a");
        p.u = cmatrix_from_json(member(j[k], "u", f), f + ".u");
        if (p.i != static_cast<int>(k) / n_c || p.j != static_cast<int>(k) % n_c) schema(f, "pairs must be ordered by (i, j)");
        out.push_back(std::move(p));
    }
    return out;
}

const char* picture_name(Picture p) { return p == Picture::Heisenberg ? "heisenberg" : "schrodinger"; }

std::vector<FactorDims> factors_param(const json& params) {
    std::vector<FactorDims> out;
    if (!params.contains("factors")) return {{2, 2}};
    for (const auto& f : params["factors"]) {
        if (!f.is_array() || f.size() != 2) schema("params.factors", "expected [dA, dB] pairs");
        out.push_back({f[0].get<int>(), f[1].get<int>()});
        if (out.back().dim_a < 1 || out.back().dim_b < 1) schema("params.factors", "dimensions must be positive");
    }
    return out;
}

}  // namespace

const char* bundle_kind_name(BundleKind kind) {
    switch (kind) {
        case BundleKind::Algebra: return "algebra";
        case BundleKind::CpMap: return "cp_map";
        case BundleKind::Gkls: return "gkls";
        case BundleKind::NormalForm: return "normal_form";
        case BundleKind::KoashiImoto: return "koashi_imoto";
    }
    return "unknown";
}

BundleKind parse_bundle_kind(const std::string& name) {
    for (BundleKind k : {BundleKind::Algebra, BundleKind::CpMap, BundleKind::Gkls, BundleKind::NormalForm,
                         BundleKind::KoashiImoto})
        if (name == bundle_kind_name(k)) return k;
    schema("kind", "unknown bundle kind '" + name + "'");
}

json to_json(const CMatrix& m) {
    json data = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) data.push_back({m(i, j).real(), m(i, j).imag()});
    return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", data}};
}

CMatrix cmatrix_from_json(const json& j, const std::string& field) {
    const int rows = int_member(j, "rows", field);
    const int cols = int_member(j, "cols", field);
    const json& data = member(j, "data", field);
    if (!data.is_array() || static_cast<long long>(data.size()) != static_cast<long long>(rows) * cols)
        schema(field + ".data", "length must equal rows * cols");
    CMatrix m(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int c = 0; c < cols; ++c)
            m(i, c) = complex_from_json(data[static_cast<std::size_t>(i * cols + c)], field + ".data");
    return m;
}

json to_json(const CVector& v) {
    json out = json::array();
    for (Eigen::Index k = 0; k < v.size(); ++k) out.push_back({v(k).real(), v(k).imag()});
    return out;
}

CVector cvector_from_json(const json& j, const std::string& field) {
    if (!j.is_array()) schema(field, "expected an array of [re, im] pairs");
    CVector v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t k = 0; k < j.size(); ++k) v(static_cast<Eigen::Index>(k)) = complex_from_json(j[k], field);
    return v;
}

json to_json(const AlgebraBasis& a) {
    json basis = json::array();
    for (const auto& b : a.basis) basis.push_back(to_json(b));
    return {{"ambient_dim", a.ambient_dim}, {"basis", basis}, {"contains_identity", a.contains_identity}};
}

AlgebraBasis algebra_from_json(const json& j, const std::string& field, double tol) {
    AlgebraBasis a;
    a.ambient_dim = int_member(j, "ambient_dim", field);
    const json& basis = member(j, "basis", field);
    if (!basis.is_array()) schema(field + ".basis", "expected an array");
    for (std::size_t k = 0; k < basis.size(); ++k) {
        const std::string f = field + ".basis[" + std::to_string(k) + "]";
        a.basis.push_back(cmatrix_from_json(basis[k], f));
        if (a.basis.back().rows() != a.ambient_dim || a.basis.back().cols() != a.ambient_dim)
            schema(f, "shape must be ambient_dim square");
    }
    const json& ci = member(j, "contains_identity", field);
    if (!ci.is_boolean()) schema(field + ".contains_identity", "expected a boolean");
    a.contains_identity = ci.get<bool>();
    for (int p = 0; p < a.size(); ++p)
        for (int q = 0; q < a.size(); ++q) {
            const cplx g = (a.basis[p].adjoint() * a.basis[q]).trace();
            if (std::abs(g - (p == q ? 1.0 : 0.0)) > std::max(tol, 1e-10))
                throw Error(ErrorKind::InvariantError, field + ".basis: not Hilbert-Schmidt orthonormal",
                            std::abs(g - (p == q ? 1.0 : 0.0)));
        }
    return a;
}

json to_json(const AtomicDecomposition& d) {
    json factors = json::array();
    for (const auto& f : d.factors) factors.push_back({f.dim_a, f.dim_b});
    return {{"d", d.dim}, {"u_alg", to_json(d.u_alg)}, {"d0", d.d0}, {"factors", factors}};
}

AtomicDecomposition decomposition_from_json(const json& j, const std::string& field, double tol) {
    AtomicDecomposition d;
    d.dim = int_member(j, "d", field);
    d.u_alg = cmatrix_from_json(member(j, "u_alg", field), field + ".u_alg");
    d.d0 = int_member(j, "d0", field);
    const json& factors = member(j, "factors", field);
    if (!factors.is_array()) schema(field + ".factors", "expected an array");
    for (const auto& f : factors) {
        if (!f.is_array() || f.size() != 2 || !f[0].is_number_integer() || !f[1].is_number_integer())
            schema(field + ".factors", "expected [dA, dB] integer pairs");
        d.factors.push_back({f[0].get<int>(), f[1].get<int>()});
    }
    try {
        validate_decomposition(d, std::max(tol, 1e-10));
    } catch (const Error& e) {
        throw Error(e.kind(), field + ": " + e.what(), e.residual());
    }
    return d;
}

json to_json(const StinespringRep& s) {
    return {{"d_in", s.d_in}, {"d_out", s.d_out}, {"d_env", s.d_env}, {"v", to_json(s.v)}};
}

StinespringRep stinespring_from_json(const json& j, const std::string& field) {
    StinespringRep s;
    s.d_in = int_member(j, "d_in", field);
    s.d_out = int_member(j, "d_out", field);
    s.d_env = int_member(j, "d_env", field);
    s.v = cmatrix_from_json(member(j, "v", field), field + ".v");
    if (s.v.rows() != s.d_in * s.d_env || s.v.cols() != s.d_out) schema(field + ".v", "shape must be (d_in*d_env) x d_out");
    return s;
}

json to_json(const KrausSet& k) {
    json ops = json::array();
    for (const auto& op : k.ops) ops.push_back(to_json(op));
    return {{"d_in", k.d_in}, {"d_out", k.d_out}, {"ops", ops}, {"picture", picture_name(k.picture)}};
}

KrausSet kraus_from_json(const json& j, const std::string& field, bool require_picture) {
    KrausSet k;
    k.d_in = int_member(j, "d_in", field);
    k.d_out = int_member(j, "d_out", field);
    const json& ops = member(j, "ops", field);
    if (!ops.is_array()) schema(field + ".ops", "expected an array");
    for (std::size_t n = 0; n < ops.size(); ++n) {
        const std::string f = field + ".ops[" + std::to_string(n) + "]";
        k.ops.push_back(cmatrix_from_json(ops[n], f));
        if (k.ops.back().rows() != k.d_in || k.ops.back().cols() != k.d_out) schema(f, "shape must be d_in x d_out");
    }
    if (j.contains("picture")) {
        const json& p = j["picture"];
        if (p == "heisenberg")
            k.picture = Picture::Heisenberg;
        else if (p == "schrodinger")
            k.picture = Picture::Schrodinger;
        else
            schema(field + ".picture", "expected \"heisenberg\" or \"schrodinger\"");
    } else if (require_picture) {
        schema(field + ".picture", "missing");
    }
    return k;
}

json to_json(const PairBlock& p) {
    return {{"i", p.i}, {"j", p.j}, {"d_f", p.d_f}, {"a", to_json(p.a)}, {"u", to_json(p.u)}};
}

json to_json(const BlockFactorization& bf) {
    return {{"d_env", bf.d_env}, {"n_a", bf.n_a}, {"n_c", bf.n_c}, {"v0", to_json(bf.v0)}, {"pairs", pairs_json(bf.pairs)}};
}

BlockFactorization factorization_from_json(const json& j, const std::string& field) {
    BlockFactorization bf;
    bf.d_env = int_member(j, "d_env", field);
    bf.n_a = int_member(j, "n_a", field);
    bf.n_c = int_member(j, "n_c", field);
    bf.v0 = cmatrix_from_json(member(j, "v0", field), field + ".v0");
    bf.pairs = pairs_from_json(member(j, "pairs", field), field + ".pairs", bf.n_a, bf.n_c);
    return bf;
}

json to_json(const GKLSRep& g) { return {{"d", g.d}, {"stine", to_json(g.stine)}, {"k", to_json(g.k)}}; }

GKLSRep gkls_from_json(const json& j, const std::string& field) {
    GKLSRep g;
    g.d = int_member(j, "d", field);
    g.stine = stinespring_from_json(member(j, "stine", field), field + ".stine");
    g.k = cmatrix_from_json(member(j, "k", field), field + ".k");
    try {
        validate(g);
    } catch (const Error& e) {
        schema(field, e.what());
    }
    return g;
}

json to_json(const AtomicNormalForm& nf) {
    json factors = json::array();
    for (std::size_t i = 0; i < nf.factors.size(); ++i)
        factors.push_back({{"i", i},
                           {"k_a", to_json(nf.factors[i].k_a)},
                           {"h_b", to_json(nf.factors[i].h_b)},
                           {"b", to_json(nf.factors[i].b)}});
    return {{"dec", to_json(nf.dec)}, {"d_env", nf.d_env}, {"v0", to_json(nf.v0)}, {"k0", to_json(nf.k0)},
            {"factors", factors},     {"pairs", pairs_json(nf.pairs)}};
}

AtomicNormalForm normal_form_from_json(const json& j, const std::string& field, double tol) {
    AtomicNormalForm nf;
    nf.dec = decomposition_from_json(member(j, "dec", field), field + ".dec", tol);
    nf.d_env = int_member(j, "d_env", field);
    nf.v0 = cmatrix_from_json(member(j, "v0", field), field + ".v0");
    nf.k0 = cmatrix_from_json(member(j, "k0", field), field + ".k0");
    const json& factors = member(j, "factors", field);
    if (!factors.is_array() || static_cast<int>(factors.size()) != nf.n())
        schema(field + ".factors", "expected one entry per factor");
    for (std::size_t i = 0; i < factors.size(); ++i) {
        const std::string f = field + ".factors[" + std::to_string(i) + "]";
        FactorData fd;
        fd.k_a = cmatrix_from_json(member(factors[i], "k_a", f), f + ".k_a");
        fd.h_b = cmatrix_from_json(member(factors[i], "h_b", f), f + ".h_b");
        fd.b = cmatrix_from_json(member(factors[i], "b", f), f + ".b");
        nf.factors.push_back(std::move(fd));
    }
    nf.pairs = pairs_from_json(member(j, "pairs", field), field + ".pairs", nf.n(), nf.n());
    try {
        validate(nf, std::max(tol, 1e-9));
    } catch (const Error& e) {
        throw Error(e.kind(), field + ": " + e.what(), e.residual());
    }
    return nf;
}

json to_json(const GaugeData& g) {
    json factors = json::array(), pairs = json::array();
    for (int i = 0; i < g.n; ++i) {
        factors.push_back({{"i", i}, {"w", to_json(g.w_at(i, i))}, {"psi", to_json(g.psi[i])}, {"mu", g.mu[i]}});
        for (int j = 0; j < g.n; ++j)
            if (i != j) pairs.push_back({{"i", i}, {"j", j}, {"w", to_json(g.w_at(i, j))}});
    }
    return {{"n", g.n}, {"factors", factors}, {"pairs", pairs}};
}

GaugeData gauge_from_json(const json& j, const std::string& field) {
    GaugeData g;
    g.n = int_member(j, "n", field);
    g.w.assign(static_cast<std::size_t>(g.n) * g.n, CMatrix());
    g.psi.assign(static_cast<std::size_t>(g.n), CVector());
    g.mu.assign(static_cast<std::size_t>(g.n), 0.0);
    for (const auto& f : member(j, "factors", field)) {
        const int i = int_member(f, "i", field + ".factors");
        if (i >= g.n) schema(field + ".factors", "index out of range");
        g.w[static_cast<std::size_t>(i * g.n + i)] = cmatrix_from_json(member(f, "w", field), field + ".factors.w");
        g.psi[i] = cvector_from_json(member(f, "psi", field), field + ".factors.psi");
        g.mu[i] = member(f, "mu", field).get<double>();
    }
    for (const auto& p : member(j, "pairs", field)) {
        const int i = int_member(p, "i", field + ".pairs"), jj = int_member(p, "j", field + ".pairs");
        if (i >= g.n || jj >= g.n) schema(field + ".pairs", "index out of range");
        g.w[static_cast<std::size_t>(i * g.n + jj)] = cmatrix_from_json(member(p, "w", field), field + ".pairs.w");
    }
    return g;
}

json to_json(const KoashiImotoResult& r) {
    json factors = json::array();
    for (std::size_t i = 0; i < r.v.size(); ++i)
        factors.push_back({{"i", i}, {"v", to_json(r.v[i])}, {"sigma", to_json(r.sigma[i])}});
    return {{"q", to_json(r.q)}, {"dec", to_json(r.dec)}, {"d_env", r.d_env}, {"factors", factors}};
}

json to_json(const InstanceBundle& b) {
    return {{"kind", bundle_kind_name(b.kind)},
            {"payload", b.payload},
            {"meta",
             {{"seed", b.meta.seed},
              {"tol_rank", b.meta.tol.rank},
              {"tol_verify", b.meta.tol.verify},
              {"params", b.meta.params}}}};
}

InstanceBundle bundle_from_json(const json& j) {
    InstanceBundle b;
    const json& kind = member(j, "kind", "bundle");
    if (!kind.is_string()) schema("kind", "expected a string");
    b.kind = parse_bundle_kind(kind.get<std::string>());
    b.payload = member(j, "payload", "bundle");
    if (!b.payload.is_object()) schema("payload", "expected an object");
    if (j.contains("meta")) {
        const json& m = j["meta"];
        if (!m.is_object()) schema("meta", "expected an object");
        if (m.contains("seed")) b.meta.seed = m["seed"].get<std::uint64_t>();
        if (m.contains("tol_rank")) b.meta.tol.rank = m["tol_rank"].get<double>();
        if (m.contains("tol_verify")) b.meta.tol.verify = m["tol_verify"].get<double>();
        if (m.contains("params")) b.meta.params = m["params"];
    }
    const double tol = b.meta.tol.verify;
    const json& p = b.payload;
    switch (b.kind) {
        case BundleKind::Algebra:
            algebra_from_json(member(p, "algebra", "payload"), "payload.algebra", tol);
            if (p.contains("decomposition")) decomposition_from_json(p["decomposition"], "payload.decomposition", tol);
            break;
        case BundleKind::CpMap:
            if (!p.contains("stinespring") && !p.contains("kraus")) schema("payload", "needs \"stinespring\" or \"kraus\"");
            if (p.contains("stinespring")) stinespring_from_json(p["stinespring"], "payload.stinespring");
            if (p.contains("kraus")) kraus_from_json(p["kraus"], "payload.kraus", false);
            if (p.contains("dec_a")) decomposition_from_json(p["dec_a"], "payload.dec_a", tol);
            if (p.contains("dec_c")) decomposition_from_json(p["dec_c"], "payload.dec_c", tol);
            if (p.contains("c")) cmatrix_from_json(p["c"], "payload.c");
            break;
        case BundleKind::Gkls:
            gkls_from_json(member(p, "generator", "payload"), "payload.generator");
            if (p.contains("dec")) decomposition_from_json(p["dec"], "payload.dec", tol);
            break;
        case BundleKind::NormalForm:
            normal_form_from_json(member(p, "normal_form", "payload"), "payload.normal_form", tol);
            break;
        case BundleKind::KoashiImoto:
            kraus_from_json(member(p, "kraus", "payload"), "payload.kraus", true);
            break;
    }
    return b;
}

InstanceBundle decode(std::istream& in) {
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw Error(ErrorKind::ParseError, "at byte " + std::to_string(e.byte) + ": " + e.what());
    }
    try {
        return bundle_from_json(j);
    } catch (const json::exception& e) {
        throw Error(ErrorKind::SchemaError, e.what());
    }
}

InstanceBundle decode_string(const std::string& text) {
    std::istringstream in(text);
    return decode(in);
}

InstanceBundle decode_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::ParseError, "cannot open " + path);
    return decode(in);
}

std::string encode(const InstanceBundle& b) { return to_json(b).dump(); }

InstanceBundle random_instance(BundleKind kind, const json& params, std::uint64_t seed) {
    if (!params.is_object()) schema("params", "expected an object");
    auto get_int = [&](const char* key, int def) {
        if (!params.contains(key)) return def;
        if (!params[key].is_number_integer()) schema(std::string("params.") + key, "expected an integer");
        return params[key].get<int>();
    };
    NormalFormParams nfp;
    nfp.d0 = get_int("d0", 0);
    nfp.factors = factors_param(params);
    nfp.d_env = get_int("d_env", 2);
    nfp.f_max = get_int("f_max", 2);
    if (params.contains("d_f")) nfp.d_f = params["d_f"].get<std::vector<int>>();
    if (params.contains("k_only")) nfp.k_only = params["k_only"].get<bool>();
    if (nfp.d0 < 0 || nfp.d_env < 0 || nfp.f_max < 0 || nfp.f_max > 4)
        throw Error(ErrorKind::Infeasible, "d0, d_env must be non-negative and f_max in [0, 4]");
    int dim = nfp.d0;
    for (const auto& f : nfp.factors) dim += f.size();
    if (dim > 32) throw Error(ErrorKind::Infeasible, "total dimension " + std::to_string(dim) + " exceeds 32");
    if (nfp.d_env > 8) throw Error(ErrorKind::Infeasible, "environment dimension exceeds 8");

    Rng rng(seed);
    InstanceBundle b;
    b.kind = kind;
    b.meta.seed = seed;
    b.meta.params = params;
    switch (kind) {
        case BundleKind::Algebra: {
            const SampledAlgebra sa = random_algebra(rng, nfp.d0, nfp.factors);
            b.payload = {{"algebra", to_json(sa.alg)}};
            break;
        }
        case BundleKind::CpMap: {
            const AtomicDecomposition dec = random_decomposition(rng, nfp.d0, nfp.factors);
            const BlockFactorization bf = random_block_factorization(rng, dec, dec, nfp.d_env, nfp.f_max);
            b.payload = {{"stinespring", to_json(reassemble(bf, dec, dec))}, {"dec_a", to_json(dec)}, {"dec_c", to_json(dec)}};
            break;
        }
        case BundleKind::Gkls:
        case BundleKind::NormalForm: {
            const AtomicDecomposition dec = random_decomposition(rng, nfp.d0, nfp.factors);
            const AtomicNormalForm nf = random_normal_form(rng, dec, nfp);
            if (kind == BundleKind::Gkls)
                b.payload = {{"generator", to_json(reconstruct_from_normal_form(nf))}, {"dec", to_json(dec)}};
            else
                b.payload = {{"normal_form", to_json(nf)}};
            break;
        }
        case BundleKind::KoashiImoto: {
            const SampledKoashiImoto ki =
                random_koashi_imoto_channel(rng, nfp.factors, get_int("transient", 1), get_int("n_ops", 2));
            b.payload = {{"kraus", to_json(ki.channel)}};
            break;
        }
    }
    return b;
}

}  // namespace igkls
