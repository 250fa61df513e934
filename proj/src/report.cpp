#include "igkls/report.hpp"

#include <chrono>
#include <functional>
#include <map>
#include <sstream>

namespace igkls {

namespace {

// Collects residual rows and the command output while a command runs.
struct Recorder {
    json residuals = json::array();
    json output = json::object();
    bool pass = true;

    void check(const std::string& name, double value, double tolerance) {
        const bool ok = value <= tolerance;
        residuals.push_back({{"name", name}, {"value", value}, {"tolerance", tolerance}, {"pass", ok}});
        pass = pass && ok;
    }
    void flag(const std::string& name, bool ok) {
        residuals.push_back({{"name", name}, {"pass", ok}});
        pass = pass && ok;
    }
};

using Handler = std::function<std::optional<InstanceBundle>(const std::vector<InstanceBundle>&, const RunOptions&, Recorder&)>;

[[noreturn]] void usage(const std::string& what) { throw Error(ErrorKind::SchemaError, what); }

const InstanceBundle& only(const std::vector<InstanceBundle>& b, BundleKind kind, const char* command) {
    if (b.size() != 1) usage(std::string(command) + " takes exactly one --in bundle");
    if (b[0].kind != kind)
        usage(std::string(command) + " expects a " + bundle_kind_name(kind) + " bundle, got " + bundle_kind_name(b[0].kind));
    return b[0];
}

AtomicDecomposition required_dec(const json& p, const char* key, const Tolerances& tol) {
    if (!p.contains(key)) usage(std::string("payload.") + key + ": required by this command");
    return decomposition_from_json(p[key], std::string("payload.") + key, tol.verify);
}

StinespringRep cp_operator(const json& p) {
    if (p.contains("stinespring")) return stinespring_from_json(p["stinespring"], "payload.stinespring");
    const KrausSet k = kraus_from_json(p["kraus"], "payload.kraus", false);
    return kraus_to_stinespring(k.picture == Picture::Schrodinger ? to_heisenberg(k) : k);
}

KrausSet cp_kraus(const json& p) {
    if (p.contains("kraus")) return kraus_from_json(p["kraus"], "payload.kraus", false);
    return stinespring_to_kraus(stinespring_from_json(p["stinespring"], "payload.stinespring"));
}

double relative(double num, double den) { return num / std::max(den, 1.0); }

// Relative action mismatch on the matrix-unit basis.
double action_error(const GKLSRep& g1, const GKLSRep& g2) {
    return relative(generator_distance(g1, g2), superoperator(g1).norm());
}

json factor_list(const AtomicDecomposition& dec) {
    json f = json::array();
    for (const auto& x : dec.factors) f.push_back({x.dim_a, x.dim_b});
    return f;
}

InstanceBundle derived(const InstanceBundle& src, BundleKind kind, json payload) {
    InstanceBundle b;
    b.kind = kind;
    b.payload = std::move(payload);
    b.meta = src.meta;
    return b;
}

std::optional<InstanceBundle> cmd_algebra_decompose(const std::vector<InstanceBundle>& b, const RunOptions& o, Recorder& r) {
    const InstanceBundle& in = only(b, BundleKind::Algebra, "algebra-decompose");
    const AlgebraBasis alg = algebra_from_json(in.payload["algebra"], "payload.algebra", o.tol.verify);
    r.check("closure", closure_residual(alg), o.tol.post());
    const AtomicDecomposition dec = atomic_decompose(alg, o.tol.verify, o.seed);
    r.check("decomposition", decomposition_residual(dec, alg), o.tol.post());
    r.output = {{"d0", dec.d0}, {"factors", factor_list(dec)}};
    json payload = in.payload;
    payload["decomposition"] = to_json(dec);
    return derived(in, BundleKind::Algebra, payload);
}

std::optional<InstanceBundle> cmd_commutant(const std::vector<InstanceBundle>& b, const RunOptions& o, Recorder& r) {
    const InstanceBundle& in = only(b, BundleKind::Algebra, "commutant");
    const AlgebraBasis alg = algebra_from_json(in.payload["algebra"], "payload.algebra", o.tol.verify);
    const AlgebraBasis com = commutant(alg, o.tol.verify);
    double worst = 0.0;
    for (const auto& a : alg.basis)
        for (const auto& c : com.basis) worst = std::max(worst, (a * c - c * a).norm());
    r.check("commutation", worst, o.tol.post());
    r.check("closure", closure_residual(com), o.tol.post());
    r.output = {{"dim", com.size()}};
    return derived(in, BundleKind::Algebra, {{"algebra", to_json(com)}});
}

std::optional<InstanceBundle> cmd_cp_factorize(const std::vector<InstanceBundle>& b, const RunOptions& o, Recorder& r) {
    const InstanceBundle& in = only(b, BundleKind::CpMap, "cp-factorize");
    const StinespringRep s = cp_operator(in.payload);
    const AtomicDecomposition da = required_dec(in.payload, "dec_a", o.tol);
    const AtomicDecomposition dc = required_dec(in.payload, "dec_c", o.tol);
    const InvarianceReport inv = cp_invariance_check(s, da, dc, o.tol.verify);
    r.check("invariance", inv.max_residual, o.tol.verify);
    if (!inv.pass)
        throw Error(ErrorKind::NotInvariant, "basis element " + std::to_string(inv.worst_index) + " leaves the algebra",
                    inv.max_residual);
    const BlockFactorization bf = atomic_block_factorize(s, da, dc, o.tol);
    const OrthogonalityReport orth = orthogonality_check(bf, o.tol.verify);
    r.check("orthogonality", orth.max_residual, o.tol.verify);
    const StinespringRep back = reassemble(bf, da, dc);
    r.check("reassembly", relative((back.v - s.v).norm(), s.v.norm()), o.tol.post());
    json payload = in.payload;
    payload["factorization"] = to_json(bf);
    r.output = {{"d_env", bf.d_env}, {"pairs", bf.pairs.size()}};
    return derived(in, BundleKind::CpMap, payload);
}

std::optional<InstanceBundle> cmd_gkls_normal_form(const std::vector<InstanceBundle>& b, const RunOptions& o, Recorder& r) {
    const InstanceBundle& in = only(b, BundleKind::Gkls, "gkls-normal-form");
    const GKLSRep g = gkls_from_json(in.payload["generator"], "payload.generator");
    const AtomicDecomposition dec = required_dec(in.payload, "dec", o.tol);
    const InvarianceReport inv = gkls_invariance_check(g, dec, o.tol.verify);
    r.check("invariance", inv.max_residual, o.tol.verify);
    if (!inv.pass) throw Error(ErrorKind::NotInvariant, "generator leaves the algebra", inv.max_residual);
    const AtomicNormalForm nf = atomic_normal_form(g, dec, o.tol);
    r.check("reconstruction", action_error(g, reconstruct_from_normal_form(nf)), o.tol.post());
    r.output = {{"factors", nf.n()}, {"d_env", nf.d_env}};
    return derived(in, BundleKind::NormalForm, {{"normal_form", to_json(nf)}});
}

std::optional<InstanceBundle> cmd_gkls_reconstruct(const std::vector<InstanceBundle>& b, const RunOptions& o, Recorder& r) {
    const InstanceBundle& in = only(b, BundleKind::NormalForm, "gkls-reconstruct");
    const AtomicNormalForm nf = normal_form_from_json(in.payload["normal_form"], "payload.normal_form", o.tol.verify);
    const GKLSRep g = reconstruct_from_normal_form(nf);
    const InvarianceReport inv = gkls_invariance_check(g, nf.dec, o.tol.verify);
    r.check("invariance", inv.max_residual, o.tol.verify);
    r.output = {{"d", g.d}, {"d_env", g.stine.d_env}};
    return derived(in, BundleKind::Gkls, {{"generator", to_json(g)}, {"dec", to_json(nf.dec)}});
}

std::optional<InstanceBundle> cmd_check_invariance(const std::vector<InstanceBundle>& b, const RunOptions& o, Recorder& r) {
    if (b.size() != 1) usage("check-invariance takes exactly one --in bundle");
    const InstanceBundle& in = b[0];
    InvarianceReport inv;
    if (in.kind == BundleKind::Gkls) {
        inv = gkls_invariance_check(gkls_from_json(in.payload["generator"], "payload.generator"),
                                    required_dec(in.payload, "dec", o.tol), o.tol.verify);
    } else if (in.kind == BundleKind::CpMap) {
        inv = cp_invariance_check(cp_operator(in.payload), required_dec(in.payload, "dec_a", o.tol),
                                  required_dec(in.payload, "dec_c", o.tol), o.tol.verify);
    } else if (in.kind == BundleKind::NormalForm) {
        const AtomicNormalForm nf = normal_form_from_json(in.payload["normal_form"], "payload.normal_form", o.tol.verify);
        inv = gkls_invariance_check(reconstruct_from_normal_form(nf), nf.dec, o.tol.verify);
    } else {
        usage("check-invariance expects a gkls, cp_map or normal_form bundle");
    }
    r.check("invariance", inv.max_residual, o.tol.verify);
    r.output = {{"worst_index", inv.worst_index}};
    if (!inv.pass) throw Error(ErrorKind::NotInvariant, "basis element " + std::to_string(inv.worst_index) + " leaves the algebra",
                               inv.max_residual);
    return std::nullopt;
}

std::optional<InstanceBundle> cmd_minimalize(const std::vector<InstanceBundle>& b, const RunOptions& o, Recorder& r) {
    if (b.size() != 1) usage("minimalize takes exactly one --in bundle");
    const InstanceBundle& in = b[0];
    if (in.kind == BundleKind::Gkls) {
        const GKLSRep g = gkls_from_json(in.payload["generator"], "payload.generator");
        const GKLSMinimal m = gkls_minimalize(g, o.tol.rank);
        r.check("generator", action_error(g, m.g_min), o.tol.post());
        r.output = {{"d_env", g.stine.d_env}, {"d_env_min", m.g_min.stine.d_env}};
        json payload = in.payload;
        payload["generator"] = to_json(m.g_min);
        return derived(in, BundleKind::Gkls, payload);
    }
    if (in.kind == BundleKind::CpMap) {
        const StinespringRep s = cp_operator(in.payload);
        const MinimalDilation m = minimal_stinespring(s, o.tol.rank);
        r.check("choi", relative((choi(s) - choi(m.s_min)).norm(), choi(s).norm()), o.tol.post());
        r.output = {{"d_env", s.d_env}, {"d_env_min", m.s_min.d_env}};
        json payload = in.payload;
        payload.erase("kraus");
        payload["stinespring"] = to_json(m.s_min);
        return derived(in, BundleKind::CpMap, payload);
    }
    if (in.kind == BundleKind::NormalForm) {
        const AtomicNormalForm nf = normal_form_from_json(in.payload["normal_form"], "payload.normal_form", o.tol.verify);
        const AtomicNormalForm red = reduce_normal_form_minimal(nf, o.tol);
        r.check("generator", action_error(reconstruct_from_normal_form(nf), reconstruct_from_normal_form(red)), o.tol.post());
        const MinimalityCertificate cert = minimality_certificate(red, o.tol.rank);
        r.flag("minimal", cert.minimal);
        r.output = {{"d_env", nf.d_env}, {"d_env_min", red.d_env}, {"span_dim", cert.span_dim}, {"d_f", cert.d_f}};
        return derived(in, BundleKind::NormalForm, {{"normal_form", to_json(red)}});
    }
    usage("minimalize expects a gkls, cp_map or normal_form bundle");
}

std::optional<InstanceBundle> cmd_gauge_compare(const std::vector<InstanceBundle>& b, const RunOptions& o, Recorder& r) {
    if (b.size() != 2 || b[0].kind != b[1].kind) usage("gauge-compare takes two --in bundles of the same kind");
    if (b[0].kind == BundleKind::CpMap) {
        const StinespringRep s1 = cp_operator(b[0].payload), s2 = cp_operator(b[1].payload);
        const CMatrix w = stinespring_gauge(s1, s2, o.tol.verify);
        const CMatrix mapped = kron(identity(s1.d_in), w) * s1.v;
        r.check("gauge", relative((mapped - s2.v).norm(), s2.v.norm()), o.tol.post());
        r.check("isometry", isometry_defect(w), o.tol.post());
        r.output = {{"w", to_json(w)}};
    } else if (b[0].kind == BundleKind::Gkls) {
        const GKLSRep g1 = gkls_from_json(b[0].payload["generator"], "payload.generator");
        const GKLSRep g2 = gkls_from_json(b[1].payload["generator"], "payload.generator");
        const GKLSGauge gg = gkls_gauge(g1, g2, o.tol.verify);
        const GKLSRep mapped = apply_gkls_gauge(g1, gg);
        r.check("stinespring", relative((mapped.stine.v - g2.stine.v).norm(), g2.stine.v.norm()), o.tol.post());
        r.check("k", relative((mapped.k - g2.k).norm(), g2.k.norm()), o.tol.post());
        r.output = {{"w", to_json(gg.w)}, {"psi", to_json(gg.psi)}, {"mu", gg.mu}};
    } else if (b[0].kind == BundleKind::NormalForm) {
        if (o.mode != "full" && o.mode != "algebra") usage("--mode must be \"full\" or \"algebra\"");
        const AtomicNormalForm n1 = normal_form_from_json(b[0].payload["normal_form"], "payload.normal_form", o.tol.verify);
        const AtomicNormalForm n2 = normal_form_from_json(b[1].payload["normal_form"], "payload.normal_form", o.tol.verify);
        const GaugeResult gr =
            normal_form_gauge(n1, n2, o.tol, o.mode == "full" ? GaugeMode::Full : GaugeMode::AlgebraOnly);
        r.check("gauge", gr.residual, o.tol.post());
        r.output = {{"gauge", to_json(gr.gauge)}};
    } else {
        usage("gauge-compare expects cp_map, gkls or normal_form bundles");
    }
    return std::nullopt;
}

std::optional<InstanceBundle> cmd_semicausal(const std::vector<InstanceBundle>& b, const RunOptions& o, Recorder& r) {
    const InstanceBundle& in = only(b, BundleKind::Gkls, "semicausal");
    const GKLSRep g = gkls_from_json(in.payload["generator"], "payload.generator");
    int d_a = o.d_a, d_b = o.d_b;
    if (d_a == 0 && in.payload.contains("d_a")) d_a = in.payload["d_a"].get<int>();
    if (d_b == 0 && in.payload.contains("d_b")) d_b = in.payload["d_b"].get<int>();
    if (d_a <= 0 || d_b <= 0) usage("semicausal needs --d-a and --d-b (or payload d_a, d_b)");
    if (d_a * d_b != g.d) usage("d_a * d_b must equal the generator dimension");
    const SemicausalReport rep = semicausal_check(g, d_a, d_b, o.tol.verify);
    r.check("invariance", rep.invariance_residual, o.tol.verify);
    r.check("semicausal", rep.semicausal_residual, o.tol.verify);
    r.output = {{"d_a", d_a}, {"d_b", d_b}};
    return std::nullopt;
}

std::optional<InstanceBundle> cmd_dfs(const std::vector<InstanceBundle>& b, const RunOptions& o, Recorder& r) {
    const InstanceBundle& in = only(b, BundleKind::Gkls, "dfs");
    const GKLSRep g = gkls_from_json(in.payload["generator"], "payload.generator");
    const DfsNormalForm nf = dfs_verify_normal_form(g, required_dec(in.payload, "dec", o.tol), o.tol);
    r.check("dissipation", nf.dissipation_residual, o.tol.verify);
    r.check("kraus", nf.kraus_residual, o.tol.post());
    r.check("imaginary_part", nf.imag_residual, o.tol.post());
    r.output = {{"d_env", nf.d_env}, {"h_tilde", to_json(nf.h_tilde)}};
    return std::nullopt;
}

std::optional<InstanceBundle> cmd_abelian(const std::vector<InstanceBundle>& b, const RunOptions& o, Recorder& r) {
    const InstanceBundle& in = only(b, BundleKind::CpMap, "abelian");
    KrausSet k = cp_kraus(in.payload);
    if (k.picture == Picture::Schrodinger) k = to_heisenberg(k);
    const AtomicDecomposition dec = required_dec(in.payload, "dec_a", o.tol);
    if (!in.payload.contains("c")) usage("payload.c: required by abelian");
    const CMatrix c = cmatrix_from_json(in.payload["c"], "payload.c");
    const AbelianCoefficients ac = maximal_abelian_coefficients(k, dec, c, o.tol);
    r.check("commutator", ac.commutator_residual, o.tol.post());
    json coeffs = json::array();
    for (const auto& cm : ac.c_mn) coeffs.push_back(to_json(cm));
    r.output = {{"d_env", ac.d_env}, {"c_mn", coeffs}};
    return std::nullopt;
}

std::optional<InstanceBundle> cmd_koashi_imoto(const std::vector<InstanceBundle>& b, const RunOptions& o, Recorder& r) {
    const InstanceBundle& in = only(b, BundleKind::KoashiImoto, "koashi-imoto");
    const KrausSet k = kraus_from_json(in.payload["kraus"], "payload.kraus", true);
    const KoashiImotoResult res = koashi_imoto_decompose(k, o.tol, o.seed);
    r.check("closure", res.closure_residual, o.tol.post());
    r.check("block_pattern", res.block_residual, o.tol.post());
    r.check("fixed_points", res.fixed_residual, o.tol.post());
    r.flag("fixed_dimensions_match", res.dim_fixed == res.dim_dual_fixed);
    r.output = {{"d0", res.dec.d0},
                {"factors", factor_list(res.dec)},
                {"dim_fixed", res.dim_fixed},
                {"dim_dual_fixed", res.dim_dual_fixed}};
    json payload = in.payload;
    payload["result"] = to_json(res);
    return derived(in, BundleKind::KoashiImoto, payload);
}

std::optional<InstanceBundle> cmd_probe(const std::vector<InstanceBundle>& b, const RunOptions& o, Recorder& r) {
    const InstanceBundle& in = only(b, BundleKind::Gkls, "probe");
    const GKLSRep g = gkls_from_json(in.payload["generator"], "payload.generator");
    const double tol = std::max(o.tol.verify, 1e-6);
    const ProbeReport rep = semigroup_invariance_probe(g, required_dec(in.payload, "dec", o.tol), o.times, tol);
    for (std::size_t i = 0; i < rep.times.size(); ++i)
        r.check("t=" + json(rep.times[i]).dump(), rep.residuals[i], tol);
    r.output = {{"max_residual", rep.max_residual}};
    return std::nullopt;
}

std::optional<InstanceBundle> cmd_random(const std::vector<InstanceBundle>& b, const RunOptions& o, Recorder& r) {
    if (!b.empty()) usage("random takes no --in bundle");
    InstanceBundle out = random_instance(parse_bundle_kind(o.kind), o.params, o.seed);
    out.meta.tol = o.tol;
    r.output = {{"kind", o.kind}, {"seed", o.seed}};
    return out;
}

const std::map<std::string, Handler>& handlers() {
    static const std::map<std::string, Handler> table{
        {"algebra-decompose", cmd_algebra_decompose},
        {"commutant", cmd_commutant},
        {"cp-factorize", cmd_cp_factorize},
        {"gkls-normal-form", cmd_gkls_normal_form},
        {"gkls-reconstruct", cmd_gkls_reconstruct},
        {"check-invariance", cmd_check_invariance},
        {"minimalize", cmd_minimalize},
        {"gauge-compare", cmd_gauge_compare},
        {"semicausal", cmd_semicausal},
        {"dfs", cmd_dfs},
        {"abelian", cmd_abelian},
        {"koashi-imoto", cmd_koashi_imoto},
        {"probe", cmd_probe},
        {"random", cmd_random},
    };
    return table;
}

}  // namespace

const std::vector<std::string>& command_names() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> v;
        for (const auto& [name, _] : handlers()) v.push_back(name);
        return v;
    }();
    return names;
}

RunResult run_command(const std::string& command, const std::vector<InstanceBundle>& bundles, const RunOptions& opt) {
    const auto start = std::chrono::steady_clock::now();
    RunResult result;
    Recorder rec;
    json error;
    auto it = handlers().find(command);
    if (it == handlers().end()) {
        result.exit_code = 2;
        error = {{"kind", "UsageError"}, {"message", "unknown command '" + command + "'"}};
    } else {
        try {
            result.artifact = it->second(bundles, opt, rec);
            result.exit_code = rec.pass ? 0 : 1;
        } catch (const Error& e) {
            result.exit_code = is_verification_failure(e.kind()) ? 1 : 2;
            error = {{"kind", error_kind_name(e.kind())}, {"message", e.what()}, {"residual", e.residual()}};
        } catch (const json::exception& e) {
            result.exit_code = 2;
            error = {{"kind", "SchemaError"}, {"message", e.what()}};
        }
    }
    const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    static const char* status[] = {"pass", "fail", "error"};
    result.report = {{"command", command},
                     {"status", status[result.exit_code]},
                     {"residuals", rec.residuals},
                     {"tolerances", {{"rank", opt.tol.rank}, {"verify", opt.tol.verify}, {"post", opt.tol.post()}}},
                     {"timing_ms", ms},
                     {"output", rec.output}};
    if (!error.is_null()) result.report["error"] = error;
    return result;
}

std::string render_text(const json& report) {
    std::ostringstream out;
    out << report.value("command", "?") << ": " << report.value("status", "?") << "\n";
    if (report.contains("error"))
        out << "  error " << report["error"].value("kind", "") << ": " << report["error"].value("message", "") << "\n";
    for (const auto& row : report.value("residuals", json::array())) {
        out << "  " << (row.value("pass", false) ? "ok   " : "FAIL ") << row.value("name", "");
        if (row.contains("value")) out << " = " << row["value"].get<double>() << " (tol " << row["tolerance"].get<double>() << ")";
        out << "\n";
    }
    out << "  timing " << report.value("timing_ms", 0.0) << " ms\n";
    return out.str();
}

}  // namespace igkls
