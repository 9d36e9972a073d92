#pragma once

#include <optional>
#include <vector>

#include "randpol/critic.hpp"
#include "randpol/envs.hpp"
#include "randpol/features.hpp"

namespace randpol {

/// Deterministic policy with one random-feature expansion per action
/// coordinate, clipped into the action box.
class PolicyFunction {
public:
    PolicyFunction(std::vector<FeatureSet> coordinate_features, std::vector<Vec> coordinate_weights,
                   double c_prime, Box action_box);

    static PolicyFunction zero(std::vector<FeatureSet> coordinate_features, double c_prime, Box action_box);

    /// Unclipped feature expansion.
    Vec raw(const Vec& state) const;
    Vec action(const Vec& state) const { return action_box_.clamp(raw(state)); }
    Vec operator()(const Vec& state) const { return action(state); }

    /// Copyable callable sharing this policy's data.
    PolicyFn as_fn() const;

    int action_dim() const { return static_cast<int>(features_.size()); }
    int state_dim() const { return features_.front().input_dim(); }
    double c_prime() const { return c_prime_; }
    double coordinate_bound(int k) const;
    const Box& action_box() const { return action_box_; }
    const std::vector<FeatureSet>& coordinate_features() const { return features_; }
    const std::vector<Vec>& coordinate_weights() const { return weights_; }

private:
    std::vector<FeatureSet> features_;
    std::vector<Vec> weights_;
    double c_prime_;
    Box action_box_;
};

Vec policy_action(const PolicyFunction& p, const Vec& state);

struct ImproveConfig {
    int multistarts = 8;
    int max_iterations = 500;
    double tolerance = 1e-8;
    double armijo = 1e-4;
};

struct ImprovementResult {
    PolicyFunction policy;
    /// (1/N) sum_i Q(x_i, pi(x_i))
    double objective;
    int best_start;
    std::vector<double> start_objectives;
};

/// Empirical greedy step: maximize (1/N) sum_i q(x_i, pi(x_i)) over the
/// policy class. Start 0 is the zero policy, start 1 the incumbent when it
/// shares `feature_sets`, the rest uniform feasible draws from `rng`.
ImprovementResult improve_policy(const QFunction& q, const std::vector<Vec>& states,
                                 const std::vector<FeatureSet>& feature_sets, double c_prime, const Box& action_box,
                                 const ImproveConfig& cfg, const Rng& rng,
                                 const PolicyFunction* incumbent = nullptr, int threads = 1);

/// Empirical objective of a policy against q.
double policy_objective(const QFunction& q, const PolicyFunction& p, const std::vector<Vec>& states);

/// Mean over states of [max_{u in grid + {p(x)}} q(x,u) - q(x,p(x))], an
/// estimate of ||HQ - H^pi Q||. Supported for action dimension <= 3.
double improvement_gap(const QFunction& q, const PolicyFunction& p, const std::vector<Vec>& states,
                       int grid_resolution);

/// Grid of `resolution` points per coordinate (endpoints included).
std::vector<Vec> action_grid(const Box& box, int resolution);

}  // namespace randpol
