#include <doctest.h>

#include <cmath>
#include <vector>

#include "randpol/errors.hpp"
#include "randpol/envs.hpp"

using namespace randpol;

namespace {

Vec v1(double a) { return Vec::Constant(1, a); }

EnvModel constant_reward_env(double gamma) {
    EnvModel env;
    env.name = "constant";
    env.state_box = Box(Vec::Zero(1), Vec::Ones(1));
    env.action_box = Box(Vec::Zero(1), Vec::Ones(1));
    env.gamma = gamma;
    env.reward = [](const Vec&, const Vec&) { return 1.0; };
    env.sample_next = [](const Vec& x, const Vec&, Rng&) { return x; };
    env.deterministic = true;
    return env;
}

}  // namespace

TEST_CASE("synthetic rewards") {
    const EnvModel env = synthetic_1d();
    CHECK(env.reward(v1(0.3), v1(0.7)) == doctest::Approx(-0.16).epsilon(1e-14));
    for (double x : {0.0, 0.25, 0.6, 1.0}) CHECK(env.reward(v1(x), v1(x)) == 0.0);
    CHECK(env.q_max() == doctest::Approx(10.0 / 3.0));
}

TEST_CASE("synthetic next state from action 0 has mean one half") {
    const EnvModel env = synthetic_1d();
    Rng rng(9);
    double sum = 0.0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) sum += env.sample_next(v1(0.4), v1(0.0), rng)[0];
    CHECK(std::abs(sum / n - 0.5) <= 0.01);
}

TEST_CASE("synthetic transitions and rewards stay in range") {
    const EnvModel env = synthetic_1d();
    Rng rng(4);
    bool ok = true;
    for (int i = 0; i < 100000; ++i) {
        const Vec x = env.state_box.sample_uniform(rng);
        const Vec u = env.action_box.sample_uniform(rng);
        ok = ok && env.state_box.contains(env.sample_next(x, u, rng));
        ok = ok && std::abs(env.reward(x, u)) <= env.r_max;
    }
    CHECK(ok);
    // u = 1 is the degenerate uniform on [1,1]
    CHECK(env.sample_next(v1(0.2), v1(1.0), rng)[0] == 1.0);
}

TEST_CASE("restricted actions give a bounded next-state density") {
    const double u_max = 0.8;
    const EnvModel env = synthetic_1d(0.7, u_max);
    REQUIRE(env.c_mu.has_value());
    CHECK(*env.c_mu == doctest::Approx(1.0 / (1.0 - u_max)));
    Rng rng(21);
    const int bins = 20;
    const int n = 100000;
    double worst = 0.0;
    for (double u : {0.0, 0.4, u_max}) {
        std::vector<int> counts(bins, 0);
        for (int i = 0; i < n; ++i) {
            const double y = env.sample_next(v1(0.5), v1(u), rng)[0];
            ++counts[std::min(bins - 1, static_cast<int>(y * bins))];
        }
        for (int c : counts) worst = std::max(worst, static_cast<double>(c) * bins / n);
    }
    // sampling error of a bin with mass 1/4 of 1e5 draws is well under 0.3
    CHECK(worst <= *env.c_mu + 0.3);
    CHECK(worst >= *env.c_mu - 0.3);
}

TEST_CASE("synthetic rejects bad parameters") {
    CHECK_THROWS_AS(synthetic_1d(1.0), InvalidArgument);
    CHECK_THROWS_AS(synthetic_1d(0.7, 0.0), InvalidArgument);
    CHECK_THROWS_AS(synthetic_1d(0.7, 1.5), InvalidArgument);
}

TEST_CASE("linear quadratic dynamics and reward") {
    const EnvModel env = linear_quadratic(0.1, 0.9);
    Rng rng(1);
    CHECK(env.reward(Vec::Zero(2), v1(0.0)) == 0.0);
    const Vec next = env.sample_next(Vec::Zero(2), v1(1.0), rng);
    CHECK(next[0] == doctest::Approx(0.0));
    CHECK(next[1] == doctest::Approx(0.1));
    CHECK(env.reward(Vec{{1.0, 2.0}}, v1(3.0)) == doctest::Approx(-(1.0 + 0.4 + 0.09)));
    CHECK(env.deterministic);
}

TEST_CASE("linear quadratic states are clipped into the box") {
    const EnvModel env = linear_quadratic(0.1, 0.9);
    Rng rng(8);
    bool ok = true;
    for (int i = 0; i < 100000; ++i) {
        const Vec x = env.state_box.sample_uniform(rng);
        const Vec u = env.action_box.sample_uniform(rng);
        ok = ok && env.state_box.contains(env.sample_next(x, u, rng));
        ok = ok && std::abs(env.reward(x, u)) <= env.r_max;
    }
    CHECK(ok);
}

TEST_CASE("linear quadratic rejects bad parameters") {
    CHECK_THROWS_AS(linear_quadratic(0.0, 0.9), InvalidArgument);
    CHECK_THROWS_AS(linear_quadratic(0.1, 1.0), InvalidArgument);
    CHECK_THROWS_AS(linear_quadratic(0.1, 0.0), InvalidArgument);
}

TEST_CASE("monte carlo with a single step returns the first reward") {
    const EnvModel env = synthetic_1d(0.0);
    const PolicyFn zero = [](const Vec&) { return v1(0.0); };
    CHECK(monte_carlo_q(env, zero, v1(0.3), v1(0.7), 1, 5, Rng(1)) == doctest::Approx(-0.16));
}

TEST_CASE("monte carlo of a constant reward is a geometric series") {
    const EnvModel env = constant_reward_env(0.7);
    const PolicyFn any = [](const Vec&) { return v1(0.5); };
    const double value = monte_carlo_q(env, any, v1(0.2), v1(0.5), 100, 3, Rng(2));
    CHECK(std::abs(value - 1.0 / 0.3) <= std::pow(0.7, 100) / 0.3 + 1e-12);
}

TEST_CASE("identity policy on the synthetic problem has zero value") {
    const EnvModel env = synthetic_1d();
    const PolicyFn identity = [](const Vec& x) { return x; };
    for (double x : {0.0, 0.3, 0.9}) CHECK(monte_carlo_q(env, identity, v1(x), v1(x), 60, 20, Rng(3)) == 0.0);
}

TEST_CASE("monte carlo is deterministic and validates its arguments") {
    const EnvModel env = synthetic_1d();
    const PolicyFn zero = [](const Vec&) { return v1(0.0); };
    CHECK(monte_carlo_value(env, zero, v1(0.5), 20, 10, Rng(5)) ==
          monte_carlo_value(env, zero, v1(0.5), 20, 10, Rng(5)));
    CHECK_THROWS_AS(monte_carlo_q(env, zero, v1(0.5), v1(0.0), 0, 10, Rng(5)), InvalidArgument);
    CHECK_THROWS_AS(monte_carlo_q(env, zero, v1(0.5), v1(0.0), 10, 0, Rng(5)), InvalidArgument);
}

TEST_CASE("truncation horizon") {
    const int h = truncation_horizon(0.7, 10.0 / 3.0, 1e-3);
    CHECK(std::pow(0.7, h) * 10.0 / 3.0 <= 1e-3);
    CHECK(std::pow(0.7, h - 1) * 10.0 / 3.0 > 1e-3);
}

TEST_CASE("lipschitz constant formula") {
    const LipschitzInfo info{2.0, 5.0};
    CHECK(info.l_u(0.7, 10.0 / 3.0) == doctest::Approx(2.0 + 0.7 * (10.0 / 3.0) * 5.0));
}

TEST_CASE("box validation and clamping") {
    CHECK_THROWS_AS(Box(Vec::Ones(1), Vec::Zero(1)), InvalidArgument);
    const Box b(Vec{{-1.0, 0.0}}, Vec{{1.0, 2.0}});
    const Vec c = b.clamp(Vec{{3.0, -1.0}});
    CHECK(c[0] == 1.0);
    CHECK(c[1] == 0.0);
}
