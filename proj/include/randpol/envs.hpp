#pragma once

#include <functional>
#include <optional>
#include <string>

#include "randpol/features.hpp"
#include "randpol/rng.hpp"

namespace randpol {

struct Box {
    Vec lower;
    Vec upper;

    Box() = default;
    Box(Vec lo, Vec hi);

    int dim() const { return static_cast<int>(lower.size()); }
    bool contains(const Vec& x, double tol = 0.0) const;
    Vec clamp(const Vec& x) const;
    Vec sample_uniform(Rng& rng) const;
    Vec center() const { return 0.5 * (lower + upper); }
};

struct LipschitzInfo {
    double l_r = 0.0;
    double l_p = 0.0;
    /// L_U = L_r + gamma * Q_max * L_p
    double l_u(double gamma, double q_max) const { return l_r + gamma * q_max * l_p; }
};

using RewardFn = std::function<double(const Vec& state, const Vec& action)>;
using TransitionFn = std::function<Vec(const Vec& state, const Vec& action, Rng& rng)>;
using PolicyFn = std::function<Vec(const Vec& state)>;

/// Generative-model MDP. Immutable after construction.
struct EnvModel {
    std::string name;
    Box state_box;
    Box action_box;
    double gamma = 0.9;
    double r_max = 1.0;
    std::optional<LipschitzInfo> lipschitz;
    std::optional<double> c_mu;
    RewardFn reward;
    TransitionFn sample_next;
    bool deterministic = false;
    /// Known optimal state value, when the environment has a closed-form one.
    std::function<double(const Vec&)> optimal_value;

    int state_dim() const { return state_box.dim(); }
    int action_dim() const { return action_box.dim(); }
    double q_max() const { return r_max / (1.0 - gamma); }
};

/// X = U = [0,1], r = -(x-u)^2, next state ~ U[u,1]. Actions restricted to
/// [0, u_max]; u_max < 1 gives a finite concentrability constant 1/(1-u_max).
EnvModel synthetic_1d(double gamma = 0.7, double u_max = 1.0);

struct LqOptions {
    double position_bound = 3.0;
    double velocity_bound = 3.0;
    double action_bound = 10.0;
    bool clip = true;
};

/// Discrete-time double integrator with quadratic cost, returned as reward.
EnvModel linear_quadratic(double dt, double gamma, const LqOptions& options = {});

/// Linear dynamics x' = A x + B u with stage cost x'Qx + u'Ru.
struct LqSpec {
    Mat a;
    Mat b;
    Mat q;
    Mat r;
};

LqSpec double_integrator_spec(double dt);

/// Average over episodes of sum_{t<horizon} gamma^t r(x_t, u_t) with u_0 = u0,
/// u_t = policy(x_t). Episode e uses substream rng.child(e).
double monte_carlo_q(const EnvModel& env, const PolicyFn& policy, const Vec& x0, const Vec& u0, int horizon,
                     int episodes, const Rng& rng);

/// monte_carlo_q with u0 = policy(x0).
double monte_carlo_value(const EnvModel& env, const PolicyFn& policy, const Vec& x0, int horizon, int episodes,
                         const Rng& rng);

/// Smallest horizon with gamma^horizon * Q_max <= truncation.
int truncation_horizon(double gamma, double q_max, double truncation);

}  // namespace randpol
