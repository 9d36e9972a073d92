#include "randpol/harness/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "randpol/errors.hpp"
#include "randpol/harness/csv.hpp"
#include "randpol/oracles.hpp"

namespace randpol::harness {

namespace {

using Kind = ConfigError::Kind;

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

[[noreturn]] void bad_value(const std::string& key, std::string_view value, const std::string& expected) {
    throw ConfigError(Kind::parse, key, "'" + std::string(value) + "' is not " + expected);
}

int to_int(const std::string& key, std::string_view v) {
    int out = 0;
    const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
    if (res.ec != std::errc() || res.ptr != v.data() + v.size()) bad_value(key, v, "an integer");
    return out;
}

double to_double(const std::string& key, std::string_view v) {
    const auto parsed = parse_number(v);
    if (!parsed) bad_value(key, v, "a number");
    return *parsed;
}

std::optional<double> to_auto_double(const std::string& key, std::string_view v) {
    if (v == "auto") return std::nullopt;
    return to_double(key, v);
}

bool to_bool(const std::string& key, std::string_view v) {
    if (v == "on" || v == "true" || v == "yes" || v == "1") return true;
    if (v == "off" || v == "false" || v == "no" || v == "0") return false;
    bad_value(key, v, "on/off");
}

std::vector<std::string_view> split(std::string_view v, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t at = v.find(sep, start);
        out.push_back(trim(v.substr(start, at - start)));
        if (at == std::string_view::npos) break;
        start = at + 1;
    }
    return out;
}

// "lo:hi,lo:hi" per dimension
std::optional<Box> to_box(const std::string& key, std::string_view v) {
    if (v == "auto") return std::nullopt;
    std::vector<double> lo;
    std::vector<double> hi;
    for (auto part : split(v, ',')) {
        const auto ends = split(part, ':');
        if (ends.size() != 2) bad_value(key, v, "a box 'lo:hi,lo:hi,...'");
        lo.push_back(to_double(key, ends[0]));
        hi.push_back(to_double(key, ends[1]));
    }
    try {
        return Box(Eigen::Map<Vec>(lo.data(), static_cast<Eigen::Index>(lo.size())),
                   Eigen::Map<Vec>(hi.data(), static_cast<Eigen::Index>(hi.size())));
    } catch (const InvalidArgument& e) {
        throw ConfigError(Kind::validation, key, e.what());
    }
}

std::string auto_text(const std::optional<double>& v) { return v ? format_number(*v) : "auto"; }

std::string box_text(const std::optional<Box>& b) {
    if (!b) return "auto";
    std::string out;
    for (int k = 0; k < b->dim(); ++k) {
        if (k) out += ',';
        out += format_number(b->lower[k]) + ":" + format_number(b->upper[k]);
    }
    return out;
}

std::string bool_text(bool b) { return b ? "on" : "off"; }

struct KeyHandler {
    std::string key;
    std::string description;
    std::function<void(ExperimentConfig&, const std::string&, std::string_view)> set;
    std::function<std::string(const ExperimentConfig&)> get;
};

#define RP_INT(name, field, desc)                                                                              \
    KeyHandler {                                                                                               \
        name, desc, [](ExperimentConfig& c, const std::string& k, std::string_view v) { c.field = to_int(k, v); }, \
            [](const ExperimentConfig& c) { return std::to_string(c.field); }                                  \
    }
#define RP_DOUBLE(name, field, desc)                                                                  \
    KeyHandler {                                                                                      \
        name, desc,                                                                                   \
            [](ExperimentConfig& c, const std::string& k, std::string_view v) { c.field = to_double(k, v); }, \
            [](const ExperimentConfig& c) { return format_number(c.field); }                          \
    }
#define RP_AUTO(name, field, desc)                                                                         \
    KeyHandler {                                                                                           \
        name, desc,                                                                                        \
            [](ExperimentConfig& c, const std::string& k, std::string_view v) { c.field = to_auto_double(k, v); }, \
            [](const ExperimentConfig& c) { return auto_text(c.field); }                                   \
    }
#define RP_BOOL(name, field, desc)                                                                  \
    KeyHandler {                                                                                    \
        name, desc,                                                                                 \
            [](ExperimentConfig& c, const std::string& k, std::string_view v) { c.field = to_bool(k, v); }, \
            [](const ExperimentConfig& c) { return bool_text(c.field); }                            \
    }

const std::vector<KeyHandler>& handlers() {
    static const std::vector<KeyHandler> table{
        {"env", "synthetic_1d | linear_quadratic",
         [](ExperimentConfig& c, const std::string& k, std::string_view v) {
             if (v != "synthetic_1d" && v != "linear_quadratic")
                 throw ConfigError(Kind::validation, k,
                                   "unknown environment '" + std::string(v) +
                                       "' (expected synthetic_1d or linear_quadratic)");
             c.env.name = std::string(v);
         },
         [](const ExperimentConfig& c) { return c.env.name; }},
        RP_AUTO("gamma", env.gamma, "discount factor; auto = 0.7 synthetic, 0.9 LQ"),
        RP_DOUBLE("u_max", env.u_max, "synthetic_1d action upper bound"),
        RP_DOUBLE("dt", env.dt, "linear_quadratic time step"),
        RP_DOUBLE("position_bound", env.lq.position_bound, "LQ state box half-width (position)"),
        RP_DOUBLE("velocity_bound", env.lq.velocity_bound, "LQ state box half-width (velocity)"),
        RP_DOUBLE("action_bound", env.lq.action_bound, "LQ action box half-width"),
        RP_BOOL("clip", env.lq.clip, "LQ: clamp next states to the state box"),
        RP_INT("n_q", randpol.n_q, "critic samples per iteration"),
        RP_INT("n_pi", randpol.n_pi, "actor states per iteration"),
        RP_INT("m", randpol.m, "next-state draws per critic sample"),
        RP_INT("j_q", randpol.j_q, "critic random features"),
        RP_INT("j_pi", randpol.j_pi, "actor random features (split over action coordinates)"),
        RP_INT("k", randpol.k_iterations, "iterations"),
        RP_AUTO("c_bound", randpol.c_bound, "critic weight bound C; auto = 10 Q_max"),
        RP_AUTO("c_prime", randpol.c_prime, "actor weight bound C'; auto = 10 max|action bound|"),
        RP_AUTO("bandwidth_q", randpol.bandwidth_q, "critic frequency scale; auto = median heuristic"),
        RP_AUTO("bandwidth_pi", randpol.bandwidth_pi, "actor frequency scale; auto = median heuristic"),
        {"features", "resample | fixed",
         [](ExperimentConfig& c, const std::string& k, std::string_view v) {
             if (v == "resample") c.randpol.features = FeatureMode::resample;
             else if (v == "fixed") c.randpol.features = FeatureMode::fixed;
             else bad_value(k, v, "resample or fixed");
         },
         [](const ExperimentConfig& c) {
             return std::string(c.randpol.features == FeatureMode::fixed ? "fixed" : "resample");
         }},
        {"initial_q", "zero | random (uniform weights in the feasible box)",
         [](ExperimentConfig& c, const std::string& k, std::string_view v) {
             if (v == "zero") c.randpol.initial_q = InitialQ::zero;
             else if (v == "random") c.randpol.initial_q = InitialQ::random;
             else bad_value(k, v, "zero or random");
         },
         [](const ExperimentConfig& c) {
             return std::string(c.randpol.initial_q == InitialQ::random ? "random" : "zero");
         }},
        {"sample_state_box", "sampling box for states 'lo:hi,...'; auto = state box",
         [](ExperimentConfig& c, const std::string& k, std::string_view v) {
             c.randpol.sampling.state_box = to_box(k, v);
         },
         [](const ExperimentConfig& c) { return box_text(c.randpol.sampling.state_box); }},
        {"sample_action_box", "sampling box for actions 'lo:hi,...'; auto = action box",
         [](ExperimentConfig& c, const std::string& k, std::string_view v) {
             c.randpol.sampling.action_box = to_box(k, v);
         },
         [](const ExperimentConfig& c) { return box_text(c.randpol.sampling.action_box); }},
        RP_INT("heldout", randpol.heldout, "held-out points for the Bellman residual"),
        RP_INT("fit_max_iterations", randpol.fit.max_iterations, "box least squares iteration cap"),
        RP_DOUBLE("fit_tolerance", randpol.fit.tolerance, "box least squares objective-decrease tolerance"),
        RP_INT("improve_multistarts", randpol.improve.multistarts, "actor ascent starts"),
        RP_INT("improve_max_iterations", randpol.improve.max_iterations, "actor ascent iteration cap"),
        RP_DOUBLE("improve_tolerance", randpol.improve.tolerance, "actor ascent relative tolerance"),
        RP_BOOL("eval", randpol.evaluation.enabled, "compute perf_error_sup"),
        RP_INT("eval_grid", randpol.evaluation.grid_points, "evaluation grid points per state dimension"),
        RP_INT("eval_horizon", randpol.evaluation.horizon, "rollout horizon; 0 = from eval_truncation"),
        RP_DOUBLE("eval_truncation", randpol.evaluation.truncation, "tail bound gamma^H Q_max for automatic horizon"),
        RP_INT("eval_episodes", randpol.evaluation.episodes, "rollouts per grid state (1 if deterministic)"),
        RP_INT("gap_grid", randpol.evaluation.gap_grid, "action grid per coordinate for improvement_gap"),
        RP_INT("threads", randpol.threads, "worker threads"),
        {"seeds", "comma-separated seed list",
         [](ExperimentConfig& c, const std::string& k, std::string_view v) { c.seeds = parse_seed_list(v, k); },
         [](const ExperimentConfig& c) {
             std::string out;
             for (std::size_t i = 0; i < c.seeds.size(); ++i) out += (i ? "," : "") + std::to_string(c.seeds[i]);
             return out;
         }},
        {"out", "output directory",
         [](ExperimentConfig& c, const std::string&, std::string_view v) { c.out_dir = std::string(v); },
         [](const ExperimentConfig& c) { return c.out_dir.generic_string(); }},
        RP_BOOL("svg", svg, "write perf_error_sup.svg"),
        RP_BOOL("timing", timing, "fill the wall_ms column"),
    };
    return table;
}

#undef RP_INT
#undef RP_DOUBLE
#undef RP_AUTO
#undef RP_BOOL

}  // namespace

ConfigError::ConfigError(Kind kind, std::string field, const std::string& message)
    : std::runtime_error(field.empty() ? message : field + ": " + message), kind_(kind), field_(std::move(field)) {}

std::vector<std::uint64_t> parse_seed_list(std::string_view text, const std::string& field) {
    std::vector<std::uint64_t> out;
    std::set<std::uint64_t> seen;
    for (auto part : split(trim(text), ',')) {
        std::uint64_t s = 0;
        const auto res = std::from_chars(part.data(), part.data() + part.size(), s);
        if (part.empty() || res.ec != std::errc() || res.ptr != part.data() + part.size())
            bad_value(field, part, "a non-negative integer seed");
        if (!seen.insert(s).second)
            throw ConfigError(Kind::validation, field, "seed " + std::to_string(s) + " is listed twice");
        out.push_back(s);
    }
    return out;
}

void ExperimentConfig::validate() const {
    auto check = [](bool ok, const char* field, const std::string& msg) {
        if (!ok) throw ConfigError(Kind::validation, field, msg);
    };
    check(env.name == "synthetic_1d" || env.name == "linear_quadratic", "env", "unknown environment '" + env.name + "'");
    if (env.gamma) check(*env.gamma > 0.0 && *env.gamma < 1.0, "gamma", "must lie in (0, 1), got " + format_number(*env.gamma));
    check(env.u_max > 0.0 && env.u_max <= 1.0, "u_max", "must lie in (0, 1]");
    check(env.dt > 0.0 && std::isfinite(env.dt), "dt", "must be positive");
    check(env.lq.position_bound > 0.0, "position_bound", "must be positive");
    check(env.lq.velocity_bound > 0.0, "velocity_bound", "must be positive");
    check(env.lq.action_bound > 0.0, "action_bound", "must be positive");
    const auto& r = randpol;
    check(r.n_q >= 1, "n_q", "must be >= 1");
    check(r.n_pi >= 1, "n_pi", "must be >= 1");
    check(r.m >= 1, "m", "must be >= 1");
    check(r.j_q >= 1, "j_q", "must be >= 1");
    check(r.j_pi >= 1, "j_pi", "must be >= 1");
    check(r.k_iterations >= 0, "k", "must be >= 0");
    check(!r.c_bound || *r.c_bound > 0.0, "c_bound", "must be positive");
    check(!r.c_prime || *r.c_prime > 0.0, "c_prime", "must be positive");
    check(!r.bandwidth_q || *r.bandwidth_q > 0.0, "bandwidth_q", "must be positive");
    check(!r.bandwidth_pi || *r.bandwidth_pi > 0.0, "bandwidth_pi", "must be positive");
    check(r.heldout >= 1, "heldout", "must be >= 1");
    check(r.fit.max_iterations >= 1, "fit_max_iterations", "must be >= 1");
    check(r.fit.tolerance > 0.0, "fit_tolerance", "must be positive");
    check(r.improve.multistarts >= 1, "improve_multistarts", "must be >= 1");
    check(r.improve.max_iterations >= 1, "improve_max_iterations", "must be >= 1");
    check(r.improve.tolerance > 0.0, "improve_tolerance", "must be positive");
    check(r.evaluation.grid_points >= 2, "eval_grid", "must be >= 2");
    check(r.evaluation.horizon >= 0, "eval_horizon", "must be >= 0");
    check(r.evaluation.truncation > 0.0, "eval_truncation", "must be positive");
    check(r.evaluation.episodes >= 1, "eval_episodes", "must be >= 1");
    check(r.evaluation.gap_grid >= 2, "gap_grid", "must be >= 2");
    check(r.threads >= 1, "threads", "must be >= 1");
    check(!seeds.empty(), "seeds", "at least one seed is required");
    check(!out_dir.empty(), "out", "must not be empty");

    const int dx = env.name == "synthetic_1d" ? 1 : 2;
    const int du = 1;
    check(r.j_pi >= du, "j_pi", "must be at least the action dimension");
    if (r.sampling.state_box)
        check(r.sampling.state_box->dim() == dx, "sample_state_box", "needs " + std::to_string(dx) + " dimension(s)");
    if (r.sampling.action_box)
        check(r.sampling.action_box->dim() == du, "sample_action_box", "needs " + std::to_string(du) + " dimension(s)");
}

ExperimentConfig parse_config(std::string_view text, const std::string& source) {
    std::map<std::string, const KeyHandler*> by_key;
    for (const auto& h : handlers()) by_key[h.key] = &h;
    ExperimentConfig cfg;
    std::set<std::string> seen;
    int line_no = 0;
    std::size_t start = 0;
    while (start <= text.size()) {
        std::size_t end = text.find('\n', start);
        if (end == std::string_view::npos) end = text.size();
        std::string_view line = text.substr(start, end - start);
        start = end + 1;
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const std::string where = source + ":" + std::to_string(line_no);
        const auto eq = line.find('=');
        if (eq == std::string_view::npos)
            throw ConfigError(Kind::parse, "", where + ": expected 'key = value', got '" + std::string(line) + "'");
        const std::string key(trim(line.substr(0, eq)));
        const std::string_view value = trim(line.substr(eq + 1));
        const auto it = by_key.find(key);
        if (it == by_key.end()) throw ConfigError(Kind::parse, key, where + ": unknown key");
        if (!seen.insert(key).second) throw ConfigError(Kind::parse, key, where + ": key given twice");
        if (value.empty()) throw ConfigError(Kind::parse, key, where + ": missing value");
        try {
            it->second->set(cfg, key, value);
        } catch (const ConfigError& e) {
            throw ConfigError(e.kind(), e.field(), where + ": " + std::string(e.what()).substr(e.field().size() + 2));
        }
    }
    cfg.validate();
    return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError(Kind::missing_file, "", "cannot open config file '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str(), path.string());
}

std::string resolved_config_text(const ExperimentConfig& cfg) {
    std::string out = "# resolved randpol configuration\n";
    for (const auto& h : handlers()) out += h.key + " = " + h.get(cfg) + "\n";
    return out;
}

const std::vector<KeyDoc>& config_keys() {
    static const std::vector<KeyDoc> docs = [] {
        std::vector<KeyDoc> out;
        const ExperimentConfig defaults;
        for (const auto& h : handlers()) out.push_back({h.key, h.get(defaults), h.description});
        return out;
    }();
    return docs;
}

EnvModel make_env(const EnvSpec& spec) {
    if (spec.name == "synthetic_1d") return synthetic_1d(spec.gamma.value_or(0.7), spec.u_max);
    if (spec.name == "linear_quadratic") {
        const double gamma = spec.gamma.value_or(0.9);
        EnvModel env = linear_quadratic(spec.dt, gamma, spec.lq);
        const Mat p = oracles::riccati_oracle(double_integrator_spec(spec.dt), gamma).p;
        // unconstrained optimum; ignores the action box and state clipping
        env.optimal_value = [p](const Vec& x) { return -(x.transpose() * p * x)(0, 0); };
        return env;
    }
    throw ConfigError(Kind::validation, "env", "unknown environment '" + spec.name + "'");
}

}  // namespace randpol::harness
