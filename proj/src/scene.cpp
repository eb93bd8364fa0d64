#include "homlag/scene.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <future>
#include <numbers>
#include <set>
#include <sstream>

#include "homlag/backgrounds.hpp"
#include "homlag/brane.hpp"
#include "homlag/dynamics.hpp"
#include "homlag/rng.hpp"

namespace homlag {

// ---------------------------------------------------------------------------
// scene text

namespace {

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r");
    size_t b = s.find_last_not_of(" \t\r");
    if (a == std::string::npos) return "";
    return s.substr(a, b - a + 1);
}

const std::map<std::string, std::set<std::string>> kSchema = {
    {"target", {"dim", "preset", "M", "B", "Z", "q", "mass", "n", "delta", "psi", "phi"}},
    {"lagrangian", {"terms", "monomial", "lambda_lin", "lambda_quad"}},
    {"gauge", {"type", "order", "g"}},
    {"initial", {"x0", "v0"}},
    {"integrate", {"step", "n_steps", "drift_policy"}},
    {"output", {"path", "format", "emit_monitors"}},
    {"diagnose", {"n_states"}},
    {"sweep", {"variable", "from", "to", "points", "scale", "observable"}},
    {"embedding", {"preset", "rho"}},
    {"brane", {"metric", "normalization", "one_form"}},
    {"quadrature", {"grid", "order", "refine", "tol"}},
    {"checks", {"diffeo", "cb_samples"}},
};

const std::map<std::string, std::set<std::string>> kPresetParams = {
    {"minkowski", {"mass"}},
    {"schwarzschild", {"M", "mass"}},
    {"uniform_em", {"B", "q", "mass"}},
    {"coulomb_em", {"Z", "q", "mass"}},
    {"sn_ansatz", {"n", "delta", "psi", "phi"}},
    {"minkowski_plus_sn", {"n", "delta", "mass", "psi", "phi"}},
};

double to_double(const std::string& s, const std::string& what) {
    try {
        size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw Error(ErrorCode::ConfigError, "bad number for " + what + ": '" + s + "'");
    }
}

int to_int(const std::string& s, const std::string& what) {
    const double v = to_double(s, what);
    if (v != std::floor(v))
        throw Error(ErrorCode::ConfigError, "expected integer for " + what + ": '" + s + "'");
    return static_cast<int>(v);
}

bool to_bool(const std::string& s, const std::string& what) {
    if (s == "true" || s == "1" || s == "yes") return true;
    if (s == "false" || s == "0" || s == "no") return false;
    throw Error(ErrorCode::ConfigError, "expected bool for " + what + ": '" + s + "'");
}

std::vector<double> to_list(const std::string& s, const std::string& what) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(to_double(trim(item), what));
    if (out.empty()) throw Error(ErrorCode::ConfigError, "empty list for " + what);
    return out;
}

}  // namespace

const std::vector<std::pair<std::string, std::string>>* SceneText::find(
    const std::string& name) const {
    for (const auto& [sec, entries] : sections)
        if (sec == name) return &entries;
    return nullptr;
}

bool SceneText::has(const std::string& section, const std::string& key) const {
    const auto* s = find(section);
    if (!s) return false;
    for (const auto& [k, v] : *s)
        if (k == key) return true;
    return false;
}

std::string SceneText::get(const std::string& section, const std::string& key,
                           const std::string& fallback) const {
    const auto* s = find(section);
    if (!s) return fallback;
    for (const auto& [k, v] : *s)
        if (k == key) return v;
    return fallback;
}

std::string SceneText::require(const std::string& section, const std::string& key) const {
    if (!has(section, key))
        throw Error(ErrorCode::ConfigError, "missing key '" + key + "' in section [" + section + "]");
    return get(section, key, "");
}

SceneText parse_scene(const std::string& text) {
    SceneText out;
    std::stringstream ss(text);
    std::string line;
    std::string current;
    int lineno = 0;
    while (std::getline(ss, line)) {
        ++lineno;
        const size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw Error(ErrorCode::ConfigError,
                            "malformed section header at line " + std::to_string(lineno));
            current = trim(line.substr(1, line.size() - 2));
            if (!kSchema.count(current))
                throw Error(ErrorCode::ConfigError, "unknown section [" + current + "]");
            out.sections.emplace_back(current, std::vector<std::pair<std::string, std::string>>{});
            continue;
        }
        const size_t eq = line.find('=');
        if (eq == std::string::npos || current.empty())
            throw Error(ErrorCode::ConfigError,
                        "expected 'key = value' at line " + std::to_string(lineno));
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (!kSchema.at(current).count(key))
            throw Error(ErrorCode::ConfigError,
                        "unknown key '" + key + "' in section [" + current + "]");
        for (const auto& [k, v] : out.sections.back().second)
            if (k == key)
                throw Error(ErrorCode::ConfigError,
                            "duplicate key '" + key + "' in section [" + current + "]");
        out.sections.back().second.emplace_back(key, value);
    }
    return out;
}

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string config_hash(const std::string& scene_text, std::uint64_t seed) {
    std::uint64_t h = 1469598103934665603ULL;
    auto mix = [&h](unsigned char c) {
        h ^= c;
        h *= 1099511628211ULL;
    };
    for (char c : scene_text) mix(static_cast<unsigned char>(c));
    for (int i = 0; i < 8; ++i) mix(static_cast<unsigned char>((seed >> (8 * i)) & 0xff));
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

int exit_code_for_error_code(int code) {
    switch (static_cast<ErrorCode>(code)) {
        case ErrorCode::ConfigError:
        case ErrorCode::UnknownPreset:
        case ErrorCode::MissingParam:
            return 1;
        case ErrorCode::IoError:
            return 3;
        default:
            return 2;
    }
}

// ---------------------------------------------------------------------------
// particle scene construction

namespace {

struct ParticleScene {
    PresetSpec spec;
    Preset preset;
    Lagrangian lagrangian;
    bool monomial = false;
    GaugeChoice gauge = GaugeProperTime{};
    bool has_initial = false;
    State initial;
    double step = 1e-3;
    int n_steps = 1000;
    DriftPolicy drift = DriftPolicy::off;
    std::string format = "jsonl";
    bool emit_monitors = true;
    std::string out_path;
};

PresetSpec preset_spec_of(const SceneText& scene) {
    PresetSpec spec;
    spec.name = scene.require("target", "preset");
    auto it = kPresetParams.find(spec.name);
    if (it == kPresetParams.end())
        throw Error(ErrorCode::UnknownPreset, "unknown preset '" + spec.name + "'");
    const auto* sec = scene.find("target");
    for (const auto& [k, v] : *sec) {
        if (k == "preset" || k == "dim") continue;
        if (!it->second.count(k))
            throw Error(ErrorCode::ConfigError,
                        "key '" + k + "' does not apply to preset '" + spec.name + "'");
        if (k == "psi" || k == "phi")
            spec.profiles[k] = to_list(v, "target." + k);
        else
            spec.params[k] = to_double(v, "target." + k);
    }
    return spec;
}

Lagrangian wire_terms(const SceneText& scene, const Preset& preset) {
    const std::string terms = scene.get("lagrangian", "terms", "");
    if (terms.empty()) return preset.lagrangian;
    std::vector<CanonicalTerm> out;
    std::stringstream ss(terms);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        const size_t colon = item.find(':');
        if (colon == std::string::npos)
            throw Error(ErrorCode::ConfigError, "terms entries look like 'order:weight'");
        const int order = to_int(trim(item.substr(0, colon)), "lagrangian.terms order");
        const double weight = to_double(trim(item.substr(colon + 1)), "lagrangian.terms weight");
        const TensorField* field = nullptr;
        if (order == 1)
            field = preset.one_form ? &*preset.one_form : nullptr;
        else if (order == 2)
            field = preset.metric ? &*preset.metric : nullptr;
        else if (order == preset.sn_order)
            field = preset.sn_field ? &*preset.sn_field : nullptr;
        if (!field)
            throw Error(ErrorCode::ConfigError,
                        "preset provides no field of order " + std::to_string(order));
        out.push_back(CanonicalTerm{order, weight, *field});
    }
    return Lagrangian(preset.lagrangian.dim(), std::move(out));
}

std::optional<ScalarField> lambda_of(const SceneText& scene, int dim) {
    const bool lin = scene.has("lagrangian", "lambda_lin");
    const bool quad = scene.has("lagrangian", "lambda_quad");
    if (!lin && !quad) return std::nullopt;
    std::vector<double> cl(static_cast<size_t>(dim), 0.0), cq(static_cast<size_t>(dim), 0.0);
    if (lin) cl = to_list(scene.require("lagrangian", "lambda_lin"), "lambda_lin");
    if (quad) cq = to_list(scene.require("lagrangian", "lambda_quad"), "lambda_quad");
    if (static_cast<int>(cl.size()) != dim || static_cast<int>(cq.size()) != dim)
        throw Error(ErrorCode::ConfigError, "lambda coefficient count != chart dimension");
    return ScalarField(dim, [cl, cq]<class T>(std::span<const T> x) {
        T acc{};
        for (size_t i = 0; i < cl.size(); ++i)
            acc += x[i] * cl[i] + x[i] * x[i] * cq[i];
        return acc;
    });
}

GaugeChoice gauge_of(const SceneText& scene, const Lagrangian& L) {
    const std::string type = scene.get("gauge", "type", "");
    if (type.empty()) {
        if (L.term_of_order(2)) return GaugeProperTime{};
        int max_order = 0;
        for (const auto& t : L.terms()) max_order = std::max(max_order, t.order);
        if (max_order >= 2) return GaugeTermConst{max_order};
        return GaugeLagrangianConst{};
    }
    if (type == "proper_time") return GaugeProperTime{};
    if (type == "lagrangian_const") return GaugeLagrangianConst{};
    if (type == "term_const")
        return GaugeTermConst{to_int(scene.require("gauge", "order"), "gauge.order")};
    if (type == "augmented") {
        const std::string g = scene.require("gauge", "g");
        if (g != "l_minus_av")
            throw Error(ErrorCode::ConfigError, "augmented gauge supports g = l_minus_av");
        const CanonicalTerm* em = L.term_of_order(1);
        if (!em) throw Error(ErrorCode::ConfigError, "l_minus_av needs an order-1 term");
        const CanonicalTerm em_copy = *em;
        PhaseScalar G(L.dim(), [L, em_copy]<class T>(std::span<const T> x, std::span<const T> v) {
            return L.eval(x, v) - eval_term(em_copy, x, v);
        });
        return GaugeAugmented{G};
    }
    throw Error(ErrorCode::ConfigError, "unknown gauge type '" + type + "'");
}

ParticleScene build_particle_scene(const SceneText& scene, bool needs_initial,
                                   bool needs_integrate) {
    ParticleScene out;
    out.spec = preset_spec_of(scene);
    out.preset = make_preset(out.spec);
    out.lagrangian = wire_terms(scene, out.preset);
    if (auto lam = lambda_of(scene, out.lagrangian.dim()))
        out.lagrangian = out.lagrangian.with_gauge_term(*lam);
    out.monomial = to_bool(scene.get("lagrangian", "monomial", "false"), "lagrangian.monomial");
    out.gauge = gauge_of(scene, out.lagrangian);

    if (scene.has("target", "dim")) {
        const int dim = to_int(scene.require("target", "dim"), "target.dim");
        if (dim != out.lagrangian.dim())
            throw Error(ErrorCode::ConfigError,
                        "target.dim disagrees with the preset chart dimension");
    }

    if (scene.find("initial")) {
        out.initial.x = to_list(scene.require("initial", "x0"), "initial.x0");
        out.initial.v = to_list(scene.require("initial", "v0"), "initial.v0");
        if (static_cast<int>(out.initial.x.size()) != out.lagrangian.dim() ||
            static_cast<int>(out.initial.v.size()) != out.lagrangian.dim())
            throw Error(ErrorCode::ConfigError, "initial state dimension != chart dimension");
        out.has_initial = true;
    } else if (needs_initial) {
        throw Error(ErrorCode::ConfigError, "scene needs an [initial] section");
    }

    if (scene.find("integrate")) {
        out.step = to_double(scene.require("integrate", "step"), "integrate.step");
        out.n_steps = to_int(scene.require("integrate", "n_steps"), "integrate.n_steps");
        const std::string dp = scene.get("integrate", "drift_policy", "off");
        if (dp == "off")
            out.drift = DriftPolicy::off;
        else if (dp == "renormalize")
            out.drift = DriftPolicy::renormalize;
        else
            throw Error(ErrorCode::ConfigError, "drift_policy is off or renormalize");
        if (out.step <= 0 || out.n_steps < 1)
            throw Error(ErrorCode::ConfigError, "integrate.step/n_steps must be positive");
    } else if (needs_integrate) {
        throw Error(ErrorCode::ConfigError, "scene needs an [integrate] section");
    }

    out.format = scene.get("output", "format", "jsonl");
    if (out.format != "jsonl" && out.format != "csv")
        throw Error(ErrorCode::ConfigError, "output.format is jsonl or csv");
    out.emit_monitors =
        to_bool(scene.get("output", "emit_monitors", "true"), "output.emit_monitors");
    out.out_path = scene.get("output", "path", "");
    return out;
}

std::string join17(std::span<const double> v) {
    std::string s;
    for (size_t i = 0; i < v.size(); ++i) {
        if (i) s += ",";
        s += fmt17(v[i]);
    }
    return s;
}

double wall_ms_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
        .count();
}

}  // namespace

// ---------------------------------------------------------------------------
// simulate

RunResult run_simulate(const std::string& scene_text, const CliOptions& opts) {
    const auto t0 = std::chrono::steady_clock::now();
    RunResult res;
    const SceneText scene = parse_scene(scene_text);
    ParticleScene ps = build_particle_scene(scene, true, true);
    if (ps.monomial)
        throw Error(ErrorCode::ConfigError, "lagrangian.monomial is a diagnose-only flag");
    if (opts.format) ps.format = *opts.format;
    if (ps.format != "jsonl" && ps.format != "csv")
        throw Error(ErrorCode::ConfigError, "output format is jsonl or csv");
    res.out_path = opts.out ? *opts.out : ps.out_path;

    // surfaces the closed-form divergence diagnostics before integrating
    if (ps.spec.name == "sn_ansatz") {
        AnsatzProfiles prof;
        if (ps.spec.profiles.count("psi")) prof.psi = ps.spec.profiles.at("psi");
        if (ps.spec.profiles.count("phi")) prof.phi = ps.spec.profiles.at("phi");
        (void)ansatz_accel(ps.preset.sn_order, prof, ps.initial.v[0], ps.initial.v[1],
                           ps.initial.x[1]);
    }

    const Trajectory traj =
        integrate(ps.lagrangian, ps.gauge, ps.initial, ps.step, ps.n_steps, ps.drift);

    std::string& out = res.payload;
    const int m = ps.lagrangian.dim();
    if (ps.format == "csv") {
        out += "tau";
        for (int i = 0; i < m; ++i) out += ",x" + std::to_string(i);
        for (int i = 0; i < m; ++i) out += ",v" + std::to_string(i);
        if (ps.emit_monitors) out += ",L,h,gauge_value,drift";
        out += "\n";
    }
    for (size_t i = 0; i < traj.samples.size(); ++i) {
        const State& s = traj.samples[i];
        const MonitorSample& mon = traj.monitors[i];
        if (ps.format == "jsonl") {
            out += "{\"tau\":" + fmt17(s.tau) + ",\"x\":[" + join17(s.x) + "],\"v\":[" +
                   join17(s.v) + "]";
            if (ps.emit_monitors)
                out += ",\"L\":" + fmt17(mon.lagrangian) + ",\"h\":" + fmt17(mon.hamiltonian) +
                       ",\"gauge_value\":" + fmt17(mon.gauge_value) +
                       ",\"drift\":" + fmt17(mon.drift);
            out += "}\n";
        } else {
            out += fmt17(s.tau) + "," + join17(s.x) + "," + join17(s.v);
            if (ps.emit_monitors)
                out += "," + fmt17(mon.lagrangian) + "," + fmt17(mon.hamiltonian) + "," +
                       fmt17(mon.gauge_value) + "," + fmt17(mon.drift);
            out += "\n";
        }
    }

    if (traj.status != TrajectoryStatus::ok) {
        res.exit_code = 2;
        res.human = "simulate: truncated after " + std::to_string(traj.samples.size()) +
                    " samples (" + traj.note + "); wall " + fmt17(wall_ms_since(t0)) + " ms";
        return res;
    }
    res.exit_code = 0;
    res.human = "simulate: " + std::to_string(traj.samples.size()) + " samples; wall " +
                fmt17(wall_ms_since(t0)) + " ms";
    return res;
}

// ---------------------------------------------------------------------------
// diagnose

namespace {

State sample_state(const ParticleScene& ps, Rng& rng) {
    const int m = ps.lagrangian.dim();
    State s;
    s.x.assign(static_cast<size_t>(m), 0.0);
    s.v.assign(static_cast<size_t>(m), 0.0);
    if (m == 4) {
        if (ps.spec.name == "schwarzschild") {
            s.x = {rng.uniform(-1, 1), rng.uniform(5, 15), rng.uniform(0.6, 2.5),
                   rng.uniform(0, 6)};
        } else if (ps.spec.name == "coulomb_em") {
            s.x = {rng.uniform(-1, 1), rng.uniform(0.8, 2.0), rng.uniform(0.8, 2.0),
                   rng.uniform(0.8, 2.0)};
        } else {
            for (auto& c : s.x) c = rng.uniform(-1, 1);
        }
        for (int i = 1; i < 4; ++i) s.v[static_cast<size_t>(i)] = rng.uniform(-0.3, 0.3);
        // pick the time component so that g(v, v) = 1
        const CanonicalTerm* g2 = ps.lagrangian.term_of_order(2);
        if (g2) {
            const SymTensor<double> g = g2->field.eval(std::span<const double>(s.x));
            double spatial = 0.0;
            for (int a = 1; a < 4; ++a)
                for (int b = 1; b < 4; ++b)
                    spatial += g.at({a, b}) * s.v[static_cast<size_t>(a)] * s.v[static_cast<size_t>(b)];
            s.v[0] = std::sqrt((1.0 - spatial) / g.at({0, 0}));
        } else {
            s.v[0] = 1.0;
        }
    } else {
        s.x = {rng.uniform(-1, 1), rng.uniform(1.0, 3.0)};
        const double vr = rng.uniform(0.1, 0.5);
        if (ps.lagrangian.term_of_order(2)) {
            s.v = {std::sqrt(1.0 + vr * vr), vr};
        } else {
            s.v = {rng.uniform(0.8, 1.2), vr};
        }
    }
    return s;
}

struct Check {
    std::string name;
    double value = 0.0;
    double threshold = 0.0;
    bool pass = false;
};

std::string checks_json(const std::string& hash, std::uint64_t seed, int n_states,
                        const std::vector<Check>& checks, bool pass) {
    std::string out = "{\"config\":\"" + hash + "\",\"seed\":" + std::to_string(seed) +
                      ",\"n_states\":" + std::to_string(n_states) + ",\"checks\":[";
    for (size_t i = 0; i < checks.size(); ++i) {
        if (i) out += ",";
        out += "{\"name\":\"" + checks[i].name + "\",\"value\":" + fmt17(checks[i].value) +
               ",\"threshold\":" + fmt17(checks[i].threshold) +
               ",\"pass\":" + (checks[i].pass ? "true" : "false") + "}";
    }
    out += std::string("],\"pass\":") + (pass ? "true" : "false") + "}\n";
    return out;
}

}  // namespace

RunResult run_diagnose(const std::string& scene_text, const CliOptions& opts) {
    const auto t0 = std::chrono::steady_clock::now();
    RunResult res;
    const SceneText scene = parse_scene(scene_text);
    ParticleScene ps = build_particle_scene(scene, false, false);
    const int n_states = scene.has("diagnose", "n_states")
                             ? to_int(scene.require("diagnose", "n_states"), "diagnose.n_states")
                             : 100;
    res.out_path = opts.out ? *opts.out : ps.out_path;

    PhaseScalar f = ps.monomial
                        ? PhaseScalar(ps.lagrangian.dim(),
                                      [L = ps.lagrangian]<class T>(std::span<const T> x,
                                                                   std::span<const T> v) {
                                          T acc{};
                                          for (const auto& t : L.terms())
                                              acc += eval_monomial(t, x, v);
                                          return acc;
                                      })
                        : PhaseScalar(ps.lagrangian);

    Rng rng(opts.seed);
    const int m = ps.lagrangian.dim();
    double deg_max = 0.0, h_max = 0.0, mv_max = 0.0, det_max = 0.0, src_max = 0.0;
    for (int k = 0; k < n_states; ++k) {
        const State s = sample_state(ps, rng);
        const double L = f.eval(std::span<const double>(s.x), std::span<const double>(s.v));
        const double deg = homogeneity_degree(f, s.x, s.v);
        deg_max = std::max(deg_max, std::abs(deg - 1.0));
        const double h = hamiltonian(f, s.x, s.v);
        h_max = std::max(h_max, std::abs(h) / (1.0 + std::abs(L)));
        const auto [M, repM] = v_hessian(f, s.x, s.v);
        mv_max = std::max(mv_max, repM.mv_residual);
        det_max = std::max(det_max,
                           std::abs(repM.det_estimate) / std::max(1e-300, std::pow(repM.frob, m)));
        if (!ps.monomial) {
            for (const auto& t : ps.lagrangian.terms()) {
                const auto src = source_tensor(t, s.x, s.v);
                const auto jet = term_source_jet(t, s.x, s.v);
                MultiIndexIter it(t.order, m);
                size_t c = 0;
                double scale = 0.0;
                for (double j : jet) scale = std::max(scale, std::abs(j));
                do {
                    const double expect =
                        t.weight * static_cast<double>(it.multiplicity()) * src[c];
                    src_max = std::max(src_max, std::abs(jet[c] - expect) /
                                                    std::max(1e-300, scale));
                    ++c;
                } while (it.next());
            }
        }
    }

    std::vector<Check> checks = {
        {"homogeneity_degree", deg_max, 1e-9, deg_max <= 1e-9},
        {"hamiltonian_rel", h_max, 1e-10, h_max <= 1e-10},
        {"hessian_null_vector", mv_max, 1e-9, mv_max <= 1e-9},
        {"hessian_det_rel", det_max, 1e-9, det_max <= 1e-9},
    };
    if (!ps.monomial)
        checks.push_back({"source_consistency", src_max, 1e-9, src_max <= 1e-9});
    bool pass = true;
    for (const auto& c : checks) pass = pass && c.pass;

    res.payload = checks_json(config_hash(scene_text, opts.seed), opts.seed, n_states, checks, pass);
    res.exit_code = pass ? 0 : 2;
    res.human = std::string("diagnose: ") + (pass ? "all checks pass" : "CHECKS FAILED") +
                "; wall " + fmt17(wall_ms_since(t0)) + " ms";
    return res;
}

// ---------------------------------------------------------------------------
// brane

namespace {

Embedding scene_embedding(const SceneText& scene) {
    const std::string preset = scene.require("embedding", "preset");
    if (preset == "flat_sheet") {
        return Embedding(2, 4, []<class T>(std::span<const T> z) {
            std::vector<T> x(4);
            x[0] = z[0];
            x[1] = z[1];
            x[2] = T{};
            x[3] = T{};
            return x;
        });
    }
    if (preset == "cylinder") {
        const double rho = to_double(scene.require("embedding", "rho"), "embedding.rho");
        return Embedding(2, 4, [rho]<class T>(std::span<const T> z) {
            using std::cos;
            using std::sin;
            constexpr double tau = 2.0 * std::numbers::pi;
            std::vector<T> x(4);
            x[0] = z[0];
            x[1] = cos(z[1] * tau) * rho;
            x[2] = sin(z[1] * tau) * rho;
            x[3] = T{};
            return x;
        });
    }
    if (preset == "line") {
        return Embedding(1, 4, []<class T>(std::span<const T> z) {
            using std::sin;
            std::vector<T> x(4);
            x[0] = z[0] * 1.5;
            x[1] = sin(z[0] * 2.0) * 0.2;
            x[2] = z[0] * z[0] * 0.1;
            x[3] = T{};
            return x;
        });
    }
    throw Error(ErrorCode::UnknownPreset, "unknown embedding preset '" + preset + "'");
}

Embedding random_embedding_for_report(int D, int m, Rng& rng) {
    std::vector<double> c(static_cast<size_t>(m)), A(static_cast<size_t>(m) * D),
        Q(static_cast<size_t>(m) * D * D);
    for (auto& v : c) v = rng.uniform(-0.5, 0.5);
    for (auto& v : A) v = rng.uniform(-0.6, 0.6);
    for (auto& v : Q) v = rng.uniform(-0.15, 0.15);
    for (int i = 0; i < D; ++i) A[static_cast<size_t>(i) * D + i] += 1.5;
    return Embedding(D, m, [c, A, Q, D, m]<class T>(std::span<const T> z) {
        std::vector<T> x(static_cast<size_t>(m));
        for (int a = 0; a < m; ++a) {
            T acc = T{} + c[static_cast<size_t>(a)];
            for (int i = 0; i < D; ++i) {
                acc += z[static_cast<size_t>(i)] * A[static_cast<size_t>(a) * D + i];
                for (int j = 0; j < D; ++j)
                    acc += z[static_cast<size_t>(i)] * z[static_cast<size_t>(j)] *
                           Q[(static_cast<size_t>(a) * D + i) * D + j];
            }
            x[static_cast<size_t>(a)] = acc;
        }
        return x;
    });
}

BoxMap random_boxmap(int D, Rng& rng) {
    std::vector<double> eps(static_cast<size_t>(D));
    for (auto& e : eps) e = rng.uniform(-0.15, 0.15);
    const double cp = D >= 2 ? rng.uniform(-0.05, 0.05) : 0.0;
    return BoxMap(D, [eps, cp, D]<class T>(std::span<const T> z) {
        using std::sin;
        constexpr double pi = std::numbers::pi;
        std::vector<T> u(static_cast<size_t>(D));
        for (int i = 0; i < D; ++i) {
            const double k = static_cast<double>(i + 1);
            u[static_cast<size_t>(i)] =
                z[static_cast<size_t>(i)] +
                sin(z[static_cast<size_t>(i)] * (k * pi)) * (eps[static_cast<size_t>(i)] / (k * pi));
        }
        if (D >= 2)
            u[0] += z[0] * (1.0 - z[0]) * (z[1] - 0.5) * cp;
        return u;
    });
}

}  // namespace

RunResult run_brane(const std::string& scene_text, const CliOptions& opts) {
    const auto t0 = std::chrono::steady_clock::now();
    RunResult res;
    const SceneText scene = parse_scene(scene_text);
    if (!scene.find("embedding"))
        throw Error(ErrorCode::ConfigError, "brane scenes need an [embedding] section");
    const Embedding e = scene_embedding(scene);
    const std::string preset = scene.require("embedding", "preset");
    res.out_path = opts.out ? *opts.out : scene.get("output", "path", "");

    BraneLagrangian bl;
    const std::string metric = scene.get("brane", "metric", "minkowski");
    if (metric == "minkowski")
        bl.metric = minkowski_metric(e.target_dim());
    else if (metric != "none")
        throw Error(ErrorCode::ConfigError, "brane.metric is minkowski or none");
    std::string norm = scene.get("brane", "normalization", "cauchy_binet");
    if (opts.dng_normalization)
        norm = *opts.dng_normalization == "paper" ? "paper" : "cauchy_binet";
    if (norm != "paper" && norm != "cauchy_binet")
        throw Error(ErrorCode::ConfigError, "brane.normalization is paper or cauchy_binet");
    bl.normalization =
        norm == "paper" ? DngNormalization::paper : DngNormalization::cauchy_binet;
    bool has_one_form = false;
    if (scene.has("brane", "one_form")) {
        const std::vector<double> coeffs = to_list(scene.require("brane", "one_form"), "one_form");
        const size_t expect = index_combinations(e.target_dim(), e.brane_dim()).size();
        if (coeffs.size() != expect)
            throw Error(ErrorCode::ConfigError, "one_form needs C(m, D) coefficients");
        bl.one_form = [coeffs](std::span<const double>) { return coeffs; };
        has_one_form = true;
    }

    int grid = to_int(scene.get("quadrature", "grid", "4"), "quadrature.grid");
    int order = to_int(scene.get("quadrature", "order", "8"), "quadrature.order");
    int refine = to_int(scene.get("quadrature", "refine", "3"), "quadrature.refine");
    const double tol = to_double(scene.get("quadrature", "tol", "1e-8"), "quadrature.tol");
    if (opts.quadrature_order) order = *opts.quadrature_order;
    if (opts.refine) refine = *opts.refine;
    const int n_diffeo = to_int(scene.get("checks", "diffeo", "3"), "checks.diffeo");
    const int n_cb = to_int(scene.get("checks", "cb_samples", "100"), "checks.cb_samples");

    const double action = brane_action(e, bl, grid, order);

    std::vector<Check> checks;
    if (bl.metric && !has_one_form) {
        double expect = 0.0;
        bool have_expect = true;
        if (preset == "flat_sheet")
            expect = bl.normalization == DngNormalization::paper ? std::sqrt(2.0) : 1.0;
        else if (preset == "cylinder")
            expect = 2.0 * std::numbers::pi *
                     to_double(scene.require("embedding", "rho"), "embedding.rho");
        else
            have_expect = false;
        if (have_expect) {
            const double err = std::abs(action - expect);
            checks.push_back({"action_vs_expected", err, tol, err <= tol});
        }
    }

    // Cauchy-Binet cross check on seeded random embeddings
    {
        Rng rng(opts.seed + 1);
        const TensorField eta4 = minkowski_metric(4);
        const TensorField eta5 = minkowski_metric(5);
        double worst = 0.0;
        for (int k = 0; k < n_cb; ++k) {
            const bool d3 = k % 2 == 1;
            const Embedding re =
                d3 ? random_embedding_for_report(3, 5, rng) : random_embedding_for_report(2, 4, rng);
            const TensorField& g = d3 ? eta5 : eta4;
            std::vector<double> z(static_cast<size_t>(re.brane_dim()));
            for (auto& c : z) c = rng.uniform(0.1, 0.9);
            const InducedMetric im = induced_metric(re, g, z);
            const DngValue dng = dng_lagrangian(re, g, z, DngNormalization::cauchy_binet);
            const double lhs = dng.value * dng.value * dng.radicand_sign;
            worst = std::max(worst,
                             std::abs(lhs - im.det) / std::max(1.0, std::abs(im.det)));
        }
        checks.push_back({"cauchy_binet_rel", worst, 1e-8, worst <= 1e-8});
    }

    // diffeomorphism invariance under seeded random reparametrizations
    {
        Rng rng(opts.seed + 2);
        double worst = 0.0;
        for (int k = 0; k < n_diffeo; ++k) {
            const BoxMap zeta = random_boxmap(e.brane_dim(), rng);
            const DiffeoResult r = diffeo_test(e, bl, zeta, grid, order, refine);
            worst = std::max(worst, r.rel_diff);
        }
        checks.push_back({"diffeo_rel", worst, 1e-6, worst <= 1e-6});
    }

    bool pass = true;
    for (const auto& c : checks) pass = pass && c.pass;

    std::string out = "{\"config\":\"" + config_hash(scene_text, opts.seed) +
                      "\",\"action\":" + fmt17(action) + ",\"normalization\":\"" + norm +
                      "\",\"checks\":[";
    for (size_t i = 0; i < checks.size(); ++i) {
        if (i) out += ",";
        out += "{\"name\":\"" + checks[i].name + "\",\"value\":" + fmt17(checks[i].value) +
               ",\"threshold\":" + fmt17(checks[i].threshold) +
               ",\"pass\":" + (checks[i].pass ? "true" : "false") + "}";
    }
    out += std::string("],\"pass\":") + (pass ? "true" : "false") + "}\n";
    res.payload = out;
    res.exit_code = pass ? 0 : 2;
    res.human = std::string("brane: action = ") + fmt17(action) + (pass ? "; checks pass" : "; CHECKS FAILED") +
                "; wall " + fmt17(wall_ms_since(t0)) + " ms";
    return res;
}

// ---------------------------------------------------------------------------
// sweep

namespace {

State state_with_vmag(const ParticleScene& ps, double vmag) {
    State s = ps.initial;
    const int m = static_cast<int>(s.v.size());
    double spatial = 0.0;
    for (int i = 1; i < m; ++i) spatial += s.v[static_cast<size_t>(i)] * s.v[static_cast<size_t>(i)];
    spatial = std::sqrt(spatial);
    if (spatial <= 0.0)
        throw Error(ErrorCode::ConfigError, "v0 sweep needs a nonzero spatial direction in v0");
    for (int i = 1; i < m; ++i) s.v[static_cast<size_t>(i)] *= vmag / spatial;
    // swept states sit on the proper-time surface g(v, v) = 1: the quadratic
    // multiplier form of the ProperTime gauge is exact there, so the gauge
    // comparison is not polluted by a v-independent normalization offset
    if (const CanonicalTerm* g2 = ps.lagrangian.term_of_order(2)) {
        const SymTensor<double> g = g2->field.eval(std::span<const double>(s.x));
        double sp = 0.0;
        for (int a = 1; a < m; ++a)
            for (int b = 1; b < m; ++b)
                sp += g.at({a, b}) * s.v[static_cast<size_t>(a)] * s.v[static_cast<size_t>(b)];
        s.v[0] = std::sqrt((1.0 - sp) / g.at({0, 0}));
    }
    return s;
}

double spatial_diff_norm(std::span<const double> a, std::span<const double> b) {
    double acc = 0.0;
    for (size_t i = 1; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        acc += d * d;
    }
    return std::sqrt(acc);
}

}  // namespace

RunResult run_sweep(const std::string& scene_text, const CliOptions& opts) {
    const auto t0 = std::chrono::steady_clock::now();
    RunResult res;
    const SceneText scene = parse_scene(scene_text);
    const std::string variable = scene.require("sweep", "variable");
    const double from = to_double(scene.require("sweep", "from"), "sweep.from");
    const double to = to_double(scene.require("sweep", "to"), "sweep.to");
    const int points = to_int(scene.require("sweep", "points"), "sweep.points");
    const std::string scale = scene.get("sweep", "scale", "geometric");
    const std::string observable = scene.get("sweep", "observable", "accel_r");
    if (points < 2) throw Error(ErrorCode::ConfigError, "sweep.points must be >= 2");
    if (scale != "geometric" && scale != "linear")
        throw Error(ErrorCode::ConfigError, "sweep.scale is geometric or linear");
    if (variable != "v0_mag" && variable != "step" && variable != "order" && variable != "delta")
        throw Error(ErrorCode::ConfigError, "sweep.variable is v0_mag, step, order or delta");
    if (observable != "accel_r" && observable != "accel_norm" && observable != "gauge_diff" &&
        observable != "final_error")
        throw Error(ErrorCode::ConfigError,
                    "sweep.observable is accel_r, accel_norm, gauge_diff or final_error");
    if (scale == "geometric" && (from <= 0.0 || to <= 0.0))
        throw Error(ErrorCode::ConfigError, "geometric sweeps need positive bounds");
    res.out_path = opts.out ? *opts.out : scene.get("output", "path", "");

    std::vector<double> values(static_cast<size_t>(points));
    for (int i = 0; i < points; ++i) {
        const double f = static_cast<double>(i) / (points - 1);
        values[static_cast<size_t>(i)] =
            scale == "geometric" ? from * std::pow(to / from, f) : from + (to - from) * f;
    }

    auto eval_point = [&](double value) -> double {
        SceneText modified = scene;
        if (variable == "order" || variable == "delta") {
            for (auto& [sec, entries] : modified.sections)
                if (sec == "target") {
                    bool found = false;
                    for (auto& [k, v] : entries)
                        if ((variable == "order" && k == "n") || (variable == "delta" && k == "delta")) {
                            v = fmt17(value);
                            found = true;
                        }
                    if (!found)
                        entries.emplace_back(variable == "order" ? "n" : "delta", fmt17(value));
                }
        }
        ParticleScene ps = build_particle_scene(modified, true, variable == "step");
        if (variable == "step") {
            const double total = ps.step * ps.n_steps;
            const int n1 = std::max(2, static_cast<int>(std::lround(total / value)));
            const Trajectory a = integrate(ps.lagrangian, ps.gauge, ps.initial, value, n1);
            const Trajectory b =
                integrate(ps.lagrangian, ps.gauge, ps.initial, value / 2.0, 2 * n1);
            if (a.status != TrajectoryStatus::ok || b.status != TrajectoryStatus::ok)
                throw Error(ErrorCode::SingularSystem, "sweep trajectory truncated");
            double err = 0.0;
            const auto& xa = a.samples.back().x;
            const auto& xb = b.samples.back().x;
            for (size_t c = 0; c < xa.size(); ++c) err += (xa[c] - xb[c]) * (xa[c] - xb[c]);
            return std::sqrt(err);
        }
        const State s = variable == "v0_mag" ? state_with_vmag(ps, value) : ps.initial;
        if (observable == "gauge_diff") {
            const EomReport r1 = assemble_eom_report(ps.lagrangian, GaugeLagrangianConst{}, s);
            const EomReport r2 = assemble_eom_report(ps.lagrangian, GaugeProperTime{}, s);
            if (!r1.ok || !r2.ok)
                throw Error(ErrorCode::SingularSystem, "sweep point has a singular system");
            return spatial_diff_norm(r1.accel, r2.accel);
        }
        const auto a = assemble_eom(ps.lagrangian, ps.gauge, s);
        if (observable == "accel_r") return std::abs(a[1]);
        double acc = 0.0;
        for (double c : a) acc += c * c;
        return std::sqrt(acc);
    };

    // one worker per point, assembled in input order
    std::vector<std::future<double>> futures;
    futures.reserve(values.size());
    for (double v : values)
        futures.push_back(std::async(std::launch::async, [&eval_point, v] { return eval_point(v); }));
    std::vector<double> obs(values.size());
    for (size_t i = 0; i < values.size(); ++i) obs[i] = futures[i].get();

    std::string slope_str;
    if (scale == "geometric") {
        std::vector<double> lx, ly;
        for (size_t i = 0; i < values.size(); ++i)
            if (obs[i] > 0.0) {
                lx.push_back(std::log(values[i]));
                ly.push_back(std::log(obs[i]));
            }
        if (lx.size() >= 2) slope_str = fmt17(fit_slope(lx, ly));
    }

    std::string out = "value," + observable + ",slope\n";
    for (size_t i = 0; i < values.size(); ++i)
        out += fmt17(values[i]) + "," + fmt17(obs[i]) + "," + slope_str + "\n";
    res.payload = out;
    res.exit_code = 0;
    res.human = "sweep: " + std::to_string(points) + " points" +
                (slope_str.empty() ? "" : ", slope " + slope_str) + "; wall " +
                fmt17(wall_ms_since(t0)) + " ms";
    return res;
}

}  // namespace homlag
