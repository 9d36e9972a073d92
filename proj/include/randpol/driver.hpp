#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "randpol/actor.hpp"
#include "randpol/critic.hpp"
#include "randpol/envs.hpp"

namespace randpol {

enum class FeatureMode { resample, fixed };

/// Q_0: identically zero, or uniform random weights in the feasible box.
enum class InitialQ { zero, random };

/// Distribution the state-action samples are drawn from.
struct SamplingSpec {
    /// Sub-box of the state box; defaults to the whole state box.
    std::optional<Box> state_box;
    std::optional<Box> action_box;
};

/// How the performance error ||v^pi - v*||_inf is estimated each iteration.
struct EvaluationSpec {
    int grid_points = 101;
    /// 0 picks the smallest H with gamma^H q_max <= truncation.
    int horizon = 0;
    double truncation = 1e-3;
    int episodes = 200;
    /// Improvement-gap action grid resolution per coordinate.
    int gap_grid = 101;
    bool enabled = true;
};

struct RandpolConfig {
    int n_q = 100;
    int n_pi = 100;
    int m = 10;
    int j_q = 20;
    int j_pi = 20;
    int k_iterations = 50;
    /// Defaults: C = 10 Q_max, C' = 10 max |action bound|.
    std::optional<double> c_bound;
    std::optional<double> c_prime;
    /// Defaults: median heuristic on the normalized input box.
    std::optional<double> bandwidth_q;
    std::optional<double> bandwidth_pi;
    FeatureMode features = FeatureMode::resample;
    InitialQ initial_q = InitialQ::zero;
    SamplingSpec sampling;
    int heldout = 200;
    FitConfig fit;
    ImproveConfig improve;
    EvaluationSpec evaluation;
    std::uint64_t seed = 1;
    int threads = 1;

    void validate() const;
};

struct IterationDiagnostics {
    int iteration = 0;
    double critic_objective = 0.0;
    /// Mean |Q_{k+1} - G^pi_k_M Q_k| over held-out points.
    double bellman_residual = 0.0;
    double improvement_gap = 0.0;
    /// NaN when the environment has no known optimal value.
    double perf_error_sup = 0.0;
    double policy_objective = 0.0;
    double wall_ms = 0.0;
};

struct ResolvedParameters {
    double c_bound;
    double c_prime;
    double bandwidth_q;
    double bandwidth_pi;
};

ResolvedParameters resolve_parameters(const EnvModel& env, const RandpolConfig& cfg);

/// n i.i.d. draws from the sampling distribution (uniform on the boxes by default).
std::vector<StateAction> sample_state_actions(const EnvModel& env, int n, const SamplingSpec& spec, const Rng& rng);
std::vector<Vec> sample_states(const EnvModel& env, int n, const SamplingSpec& spec, const Rng& rng);

struct Iterate {
    QFunction q;
    PolicyFunction policy;
};

struct IterationOutput {
    Iterate next;
    IterationDiagnostics diagnostics;
};

/// Persistent per-run feature sets (used when features are fixed).
struct FeatureBank {
    FeatureSet critic;
    std::vector<FeatureSet> actor;
};

FeatureBank sample_feature_bank(const EnvModel& env, const RandpolConfig& cfg, const ResolvedParameters& params,
                                const Rng& rng);

/// One evaluation + improvement step from (q_k, pi_k). `rng` is the
/// iteration's stream; `index` is recorded in the diagnostics.
IterationOutput randpol_iteration(const EnvModel& env, const Iterate& current, const RandpolConfig& cfg,
                                  const ResolvedParameters& params, const Rng& rng, int index,
                                  const FeatureBank* fixed = nullptr);

/// max over the evaluation grid of |v^pi(x) - v*(x)|, via Monte Carlo.
double performance_error(const EnvModel& env, const PolicyFunction& policy, const EvaluationSpec& spec,
                         const Rng& rng, int threads = 1);

struct RunResult {
    Iterate final;
    Iterate initial;
    std::vector<IterationDiagnostics> diagnostics;
};

using IterationCallback = std::function<void(const IterationDiagnostics&, const Iterate&)>;

/// Q_0 (zero or random), pi_0 = greedy w.r.t. Q_0, then K iterations.
RunResult run(const EnvModel& env, const RandpolConfig& cfg, const IterationCallback& on_iteration = {});

}  // namespace randpol
