#include "randpol/envs.hpp"

#include <algorithm>
#include <cmath>

#include "randpol/errors.hpp"

namespace randpol {

Box::Box(Vec lo, Vec hi) : lower(std::move(lo)), upper(std::move(hi)) {
    require(lower.size() == upper.size() && lower.size() >= 1, "box bounds must have equal positive dimension");
    for (Eigen::Index i = 0; i < lower.size(); ++i)
        require(std::isfinite(lower[i]) && std::isfinite(upper[i]) && lower[i] <= upper[i],
                "box requires finite lower <= upper");
}

bool Box::contains(const Vec& x, double tol) const {
    if (x.size() != lower.size()) return false;
    return ((x - lower).array() >= -tol).all() && ((upper - x).array() >= -tol).all();
}

Vec Box::clamp(const Vec& x) const { return x.cwiseMax(lower).cwiseMin(upper); }

Vec Box::sample_uniform(Rng& rng) const {
    Vec x(lower.size());
    for (Eigen::Index i = 0; i < lower.size(); ++i) x[i] = rng.uniform(lower[i], upper[i]);
    return x;
}

EnvModel synthetic_1d(double gamma, double u_max) {
    require(gamma >= 0.0 && gamma < 1.0, "gamma must lie in [0, 1)");
    require(u_max > 0.0 && u_max <= 1.0, "u_max must lie in (0, 1]");
    EnvModel env;
    env.name = "synthetic_1d";
    env.state_box = Box(Vec::Zero(1), Vec::Ones(1));
    env.action_box = Box(Vec::Zero(1), Vec::Constant(1, u_max));
    env.gamma = gamma;
    env.r_max = 1.0;
    env.reward = [](const Vec& x, const Vec& u) {
        const double d = x[0] - u[0];
        return -d * d;
    };
    env.sample_next = [](const Vec& /*x*/, const Vec& u, Rng& rng) {
        const double lo = std::clamp(u[0], 0.0, 1.0);
        // U[1,1] is the point mass at 1
        return Vec::Constant(1, lo >= 1.0 ? 1.0 : rng.uniform(lo, 1.0));
    };
    env.optimal_value = [](const Vec&) { return 0.0; };
    if (u_max < 1.0) {
        env.c_mu = 1.0 / (1.0 - u_max);
        env.lipschitz = LipschitzInfo{2.0, 1.0 / (1.0 - u_max)};
    }
    return env;
}

LqSpec double_integrator_spec(double dt) {
    LqSpec s;
    s.a = Mat{{1.0, dt}, {0.0, 1.0}};
    s.b = Mat{{0.0}, {dt}};
    s.q = Mat{{1.0, 0.0}, {0.0, 0.1}};
    s.r = Mat{{0.01}};
    return s;
}

EnvModel linear_quadratic(double dt, double gamma, const LqOptions& options) {
    require(dt > 0.0 && std::isfinite(dt), "dt must be positive");
    require(gamma > 0.0 && gamma < 1.0, "gamma must lie in (0, 1)");
    require(options.position_bound > 0.0 && options.velocity_bound > 0.0 && options.action_bound > 0.0,
            "LQ box bounds must be positive");
    EnvModel env;
    env.name = "linear_quadratic";
    const Vec hi{{options.position_bound, options.velocity_bound}};
    env.state_box = Box(-hi, hi);
    env.action_box = Box(Vec::Constant(1, -options.action_bound), Vec::Constant(1, options.action_bound));
    env.gamma = gamma;
    env.deterministic = true;
    const LqSpec spec = double_integrator_spec(dt);
    env.r_max = (hi.transpose() * spec.q * hi)(0, 0) + spec.r(0, 0) * options.action_bound * options.action_bound;
    env.reward = [spec](const Vec& x, const Vec& u) {
        return -((x.transpose() * spec.q * x)(0, 0) + (u.transpose() * spec.r * u)(0, 0));
    };
    const Box box = env.state_box;
    const bool clip = options.clip;
    env.sample_next = [spec, box, clip](const Vec& x, const Vec& u, Rng&) -> Vec {
        Vec next = spec.a * x + spec.b * u;
        return clip ? box.clamp(next) : next;
    };
    return env;
}

double monte_carlo_q(const EnvModel& env, const PolicyFn& policy, const Vec& x0, const Vec& u0, int horizon,
                     int episodes, const Rng& rng) {
    require(horizon >= 1, "horizon must be >= 1");
    require(episodes >= 1, "episodes must be >= 1");
    require(x0.size() == env.state_dim() && u0.size() == env.action_dim(), "state/action dimension mismatch");
    double total = 0.0;
    for (int e = 0; e < episodes; ++e) {
        Rng stream = rng.child(static_cast<std::uint64_t>(e));
        Vec x = x0;
        Vec u = u0;
        double discount = 1.0;
        double ret = 0.0;
        for (int t = 0; t < horizon; ++t) {
            ret += discount * env.reward(x, u);
            discount *= env.gamma;
            if (t + 1 == horizon) break;
            x = env.sample_next(x, u, stream);
            u = policy(x);
        }
        total += ret;
    }
    return total / episodes;
}

double monte_carlo_value(const EnvModel& env, const PolicyFn& policy, const Vec& x0, int horizon, int episodes,
                         const Rng& rng) {
    return monte_carlo_q(env, policy, x0, policy(x0), horizon, episodes, rng);
}

int truncation_horizon(double gamma, double q_max, double truncation) {
    require(truncation > 0.0, "truncation must be positive");
    if (gamma <= 0.0 || q_max <= truncation) return 1;
    return static_cast<int>(std::ceil(std::log(truncation / q_max) / std::log(gamma)));
}

}  // namespace randpol
