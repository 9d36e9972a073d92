#include "randpol/driver.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <string>

#include "randpol/errors.hpp"
#include "randpol/parallel.hpp"

namespace randpol {

namespace {

// Substream layout inside one iteration.
enum Stream : std::uint64_t {
    kSamples = 0,
    kFeatures = 1,
    kTargets = 2,
    kPolicyStates = 3,
    kMultistarts = 4,
    kHeldoutPoints = 5,
    kHeldoutTargets = 6,
    kPerformance = 7,
    kInitialQ = 8,
};

Box joint_box(const EnvModel& env) {
    const int dx = env.state_dim();
    const int du = env.action_dim();
    Vec lo(dx + du);
    Vec hi(dx + du);
    lo << env.state_box.lower, env.action_box.lower;
    hi << env.state_box.upper, env.action_box.upper;
    return Box(lo, hi);
}

}  // namespace

void RandpolConfig::validate() const {
    require(n_q >= 1, "n_q must be >= 1");
    require(n_pi >= 1, "n_pi must be >= 1");
    require(m >= 1, "m must be >= 1");
    require(j_q >= 1, "j_q must be >= 1");
    require(j_pi >= 1, "j_pi must be >= 1");
    require(k_iterations >= 0, "k_iterations must be >= 0");
    require(heldout >= 1, "heldout must be >= 1");
    require(!c_bound || *c_bound > 0.0, "c_bound must be positive");
    require(!c_prime || *c_prime > 0.0, "c_prime must be positive");
    require(!bandwidth_q || *bandwidth_q > 0.0, "bandwidth_q must be positive");
    require(!bandwidth_pi || *bandwidth_pi > 0.0, "bandwidth_pi must be positive");
    require(threads >= 1, "threads must be >= 1");
    require(evaluation.grid_points >= 2 && evaluation.horizon >= 0 && evaluation.episodes >= 1 &&
                evaluation.gap_grid >= 2 && evaluation.truncation > 0.0,
            "evaluation spec values must be positive");
}

ResolvedParameters resolve_parameters(const EnvModel& env, const RandpolConfig& cfg) {
    const double action_scale =
        std::max(env.action_box.lower.cwiseAbs().maxCoeff(), env.action_box.upper.cwiseAbs().maxCoeff());
    return ResolvedParameters{
        cfg.c_bound.value_or(10.0 * env.q_max()),
        cfg.c_prime.value_or(10.0 * std::max(action_scale, 1e-12)),
        cfg.bandwidth_q.value_or(median_heuristic_bandwidth(env.state_dim() + env.action_dim())),
        cfg.bandwidth_pi.value_or(median_heuristic_bandwidth(env.state_dim())),
    };
}

std::vector<StateAction> sample_state_actions(const EnvModel& env, int n, const SamplingSpec& spec, const Rng& rng) {
    require(n >= 1, "sample size must be >= 1");
    const Box& xs = spec.state_box ? *spec.state_box : env.state_box;
    const Box& us = spec.action_box ? *spec.action_box : env.action_box;
    Rng stream = rng;
    std::vector<StateAction> out;
    out.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        Vec x = xs.sample_uniform(stream);
        Vec u = us.sample_uniform(stream);
        out.push_back({std::move(x), std::move(u)});
    }
    return out;
}

std::vector<Vec> sample_states(const EnvModel& env, int n, const SamplingSpec& spec, const Rng& rng) {
    require(n >= 1, "sample size must be >= 1");
    const Box& xs = spec.state_box ? *spec.state_box : env.state_box;
    Rng stream = rng;
    std::vector<Vec> out;
    out.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) out.push_back(xs.sample_uniform(stream));
    return out;
}

FeatureBank sample_feature_bank(const EnvModel& env, const RandpolConfig& cfg, const ResolvedParameters& params,
                                const Rng& rng) {
    const int dx = env.state_dim();
    const int du = env.action_dim();
    require(cfg.j_pi >= du, "j_pi must be at least the action dimension");
    const Box joint = joint_box(env);
    Rng critic_stream = rng.child(0);
    FeatureSet critic = sample_feature_params(FeatureDistribution{params.bandwidth_q, dx + du},
                                              static_cast<std::size_t>(cfg.j_q), critic_stream,
                                              InputNormalizer(joint.lower, joint.upper));
    std::vector<FeatureSet> actor;
    for (int k = 0; k < du; ++k) {
        const int count = cfg.j_pi / du + (k < cfg.j_pi % du ? 1 : 0);
        Rng stream = rng.child(static_cast<std::uint64_t>(1 + k));
        actor.push_back(sample_feature_params(FeatureDistribution{params.bandwidth_pi, dx},
                                              static_cast<std::size_t>(count), stream,
                                              InputNormalizer(env.state_box.lower, env.state_box.upper)));
    }
    return FeatureBank{std::move(critic), std::move(actor)};
}

double performance_error(const EnvModel& env, const PolicyFunction& policy, const EvaluationSpec& spec,
                         const Rng& rng, int threads) {
    if (!env.optimal_value) return std::numeric_limits<double>::quiet_NaN();
    const std::vector<Vec> grid = action_grid(env.state_box, spec.grid_points);
    const int episodes = env.deterministic ? 1 : spec.episodes;
    const int horizon = spec.horizon > 0 ? spec.horizon : truncation_horizon(env.gamma, env.q_max(), spec.truncation);
    const PolicyFn fn = policy.as_fn();
    std::vector<double> errors(grid.size());
    parallel_for(grid.size(), threads, [&](std::size_t g) {
        const double v = monte_carlo_value(env, fn, grid[g], horizon, episodes, rng.child(g));
        errors[g] = std::abs(v - env.optimal_value(grid[g]));
    });
    double worst = 0.0;
    for (double e : errors) worst = std::max(worst, e);
    return worst;
}

IterationOutput randpol_iteration(const EnvModel& env, const Iterate& current, const RandpolConfig& cfg,
                                  const ResolvedParameters& params, const Rng& rng, int index,
                                  const FeatureBank* fixed) {
    const auto started = std::chrono::steady_clock::now();
    std::optional<FeatureBank> fresh;
    if (!fixed) fresh = sample_feature_bank(env, cfg, params, rng.child(kFeatures));
    const FeatureBank& bank = fixed ? *fixed : *fresh;

    const PolicyFn pi_k = current.policy.as_fn();
    const auto points = sample_state_actions(env, cfg.n_q, cfg.sampling, rng.child(kSamples));
    const TargetBatch batch =
        empirical_bellman_targets(env, current.q, pi_k, points, cfg.m, rng.child(kTargets), cfg.threads);

    FitResult fit = [&] {
        try {
            return fit_q(batch, bank.critic, params.c_bound, env.state_dim(), cfg.fit);
        } catch (const SolverFailure& e) {
            throw SolverFailure("iteration " + std::to_string(index) + ": " + e.what(), e.last_iterate, e.residual,
                                e.iterations);
        }
    }();

    const auto states = sample_states(env, cfg.n_pi, cfg.sampling, rng.child(kPolicyStates));
    ImprovementResult improved = improve_policy(fit.q, states, bank.actor, params.c_prime, env.action_box,
                                                cfg.improve, rng.child(kMultistarts), &current.policy, cfg.threads);

    IterationDiagnostics diag;
    diag.iteration = index;
    diag.critic_objective = fit.objective;
    diag.policy_objective = improved.objective;

    const auto heldout = sample_state_actions(env, cfg.heldout, cfg.sampling, rng.child(kHeldoutPoints));
    const TargetBatch check =
        empirical_bellman_targets(env, current.q, pi_k, heldout, cfg.m, rng.child(kHeldoutTargets), cfg.threads);
    double residual = 0.0;
    for (std::size_t n = 0; n < heldout.size(); ++n)
        residual += std::abs(fit.q.value(heldout[n].state, heldout[n].action) -
                             check.targets[static_cast<Eigen::Index>(n)]);
    diag.bellman_residual = residual / static_cast<double>(heldout.size());

    diag.improvement_gap = env.action_dim() <= 3
                               ? improvement_gap(fit.q, improved.policy, states, cfg.evaluation.gap_grid)
                               : std::numeric_limits<double>::quiet_NaN();
    diag.perf_error_sup = cfg.evaluation.enabled ? performance_error(env, improved.policy, cfg.evaluation,
                                                                     rng.child(kPerformance), cfg.threads)
                                                 : std::numeric_limits<double>::quiet_NaN();
    diag.wall_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started).count();
    return IterationOutput{Iterate{std::move(fit.q), std::move(improved.policy)}, diag};
}

RunResult run(const EnvModel& env, const RandpolConfig& cfg, const IterationCallback& on_iteration) {
    cfg.validate();
    require(env.gamma > 0.0 && env.gamma < 1.0, "environment gamma must lie in (0, 1)");
    const ResolvedParameters params = resolve_parameters(env, cfg);
    const Rng base(cfg.seed);

    const FeatureBank bank = sample_feature_bank(env, cfg, params, base.child(0));
    QFunction q0 = QFunction::zero(bank.critic, params.c_bound, env.state_dim());
    if (cfg.initial_q == InitialQ::random) {
        Rng stream = base.child(1).child(kInitialQ);
        Vec w(static_cast<Eigen::Index>(bank.critic.size()));
        const double b = q0.weight_bound();
        for (Eigen::Index j = 0; j < w.size(); ++j) w[j] = stream.uniform(-b, b);
        q0 = QFunction(bank.critic, std::move(w), params.c_bound, env.state_dim());
    }
    const auto states0 = sample_states(env, cfg.n_pi, cfg.sampling, base.child(1).child(kPolicyStates));
    ImprovementResult pi0 = improve_policy(q0, states0, bank.actor, params.c_prime, env.action_box, cfg.improve,
                                           base.child(1).child(kMultistarts), nullptr, cfg.threads);

    Iterate current{std::move(q0), std::move(pi0.policy)};
    RunResult result{current, current, {}};
    const bool fixed = cfg.features == FeatureMode::fixed;
    for (int k = 0; k < cfg.k_iterations; ++k) {
        IterationOutput out = randpol_iteration(env, current, cfg, params, base.child(static_cast<std::uint64_t>(k + 2)),
                                                k + 1, fixed ? &bank : nullptr);
        if (on_iteration) on_iteration(out.diagnostics, out.next);
        result.diagnostics.push_back(out.diagnostics);
        current = std::move(out.next);
    }
    result.final = std::move(current);
    return result;
}

}  // namespace randpol
