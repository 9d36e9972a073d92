#include <doctest.h>

#include <cmath>

#include "randpol/driver.hpp"
#include "randpol/errors.hpp"

using namespace randpol;

namespace {

Vec v1(double a) { return Vec::Constant(1, a); }

RandpolConfig small_config() {
    RandpolConfig cfg;
    cfg.n_q = 60;
    cfg.n_pi = 40;
    cfg.m = 3;
    cfg.j_q = 15;
    cfg.j_pi = 8;
    cfg.k_iterations = 3;
    cfg.heldout = 50;
    cfg.evaluation.grid_points = 11;
    cfg.evaluation.episodes = 20;
    cfg.evaluation.gap_grid = 21;
    cfg.seed = 42;
    return cfg;
}

}  // namespace

TEST_CASE("state-action sampling is deterministic and in the box") {
    const EnvModel env = synthetic_1d();
    const auto a = sample_state_actions(env, 1, {}, Rng(5));
    const auto b = sample_state_actions(env, 1, {}, Rng(5));
    CHECK(a[0].state == b[0].state);
    CHECK(a[0].action == b[0].action);

    const auto many = sample_state_actions(env, 100000, {}, Rng(6));
    double mean = 0.0;
    bool inside = true;
    for (const auto& p : many) {
        mean += p.state[0];
        inside = inside && env.state_box.contains(p.state) && env.action_box.contains(p.action);
    }
    CHECK(std::abs(mean / 100000.0 - 0.5) <= 0.01);
    CHECK(inside);
    CHECK_THROWS_AS(sample_state_actions(env, 0, {}, Rng(1)), InvalidArgument);
}

TEST_CASE("sampling respects a sub-box") {
    const EnvModel env = linear_quadratic(0.1, 0.9);
    SamplingSpec spec;
    spec.state_box = Box(Vec::Constant(2, -1.0), Vec::Constant(2, 1.0));
    bool inside = true;
    for (const auto& x : sample_states(env, 1000, spec, Rng(2))) inside = inside && spec.state_box->contains(x);
    CHECK(inside);
}

TEST_CASE("zero iterations return the initial pair") {
    RandpolConfig cfg = small_config();
    cfg.k_iterations = 0;
    const RunResult r = run(synthetic_1d(), cfg);
    CHECK(r.diagnostics.empty());
    CHECK(r.final.q.weights().isZero());
    CHECK(r.final.policy.coordinate_weights()[0] == r.initial.policy.coordinate_weights()[0]);
}

TEST_CASE("runs are deterministic and diagnostics are well formed") {
    const RandpolConfig cfg = small_config();
    const EnvModel env = synthetic_1d();
    const RunResult a = run(env, cfg);
    const RunResult b = run(env, cfg);
    REQUIRE(a.diagnostics.size() == 3);
    CHECK(a.final.q.weights() == b.final.q.weights());
    CHECK(a.final.policy.coordinate_weights()[0] == b.final.policy.coordinate_weights()[0]);
    for (std::size_t k = 0; k < a.diagnostics.size(); ++k) {
        const auto& d = a.diagnostics[k];
        CHECK(d.iteration == static_cast<int>(k) + 1);
        CHECK(d.critic_objective == b.diagnostics[k].critic_objective);
        CHECK(d.perf_error_sup == b.diagnostics[k].perf_error_sup);
        CHECK(d.critic_objective >= 0.0);
        CHECK(d.bellman_residual >= 0.0);
        CHECK(d.improvement_gap >= 0.0);
        CHECK(d.perf_error_sup >= 0.0);
        CHECK(std::isfinite(d.perf_error_sup));
    }
}

TEST_CASE("thread count does not change the result") {
    RandpolConfig cfg = small_config();
    cfg.threads = 1;
    const RunResult a = run(synthetic_1d(), cfg);
    cfg.threads = 4;
    const RunResult b = run(synthetic_1d(), cfg);
    CHECK(a.final.q.weights() == b.final.q.weights());
    for (std::size_t k = 0; k < a.diagnostics.size(); ++k)
        CHECK(a.diagnostics[k].perf_error_sup == b.diagnostics[k].perf_error_sup);
}

TEST_CASE("iterates stay bounded and in the box") {
    RandpolConfig cfg = small_config();
    cfg.initial_q = InitialQ::random;
    cfg.features = FeatureMode::fixed;
    const EnvModel env = synthetic_1d();
    bool ok = true;
    run(env, cfg, [&](const IterationDiagnostics&, const Iterate& it) {
        ok = ok && it.q.weights().lpNorm<Eigen::Infinity>() <= it.q.weight_bound();
        for (int i = 0; i <= 20; ++i) {
            const Vec x = v1(i / 20.0);
            ok = ok && std::abs(it.q.value(x, v1(0.3))) <= it.q.c_bound();
            ok = ok && env.action_box.contains(it.policy(x));
        }
    });
    CHECK(ok);
}

TEST_CASE("nearly myopic problem learns the myopic argmax") {
    const EnvModel env = synthetic_1d(0.01);
    RandpolConfig cfg;
    cfg.n_q = 400;
    cfg.n_pi = 200;
    cfg.m = 1;
    cfg.j_q = 60;
    cfg.j_pi = 20;
    cfg.k_iterations = 1;
    cfg.evaluation.enabled = false;
    cfg.seed = 3;
    const RunResult r = run(env, cfg);
    const auto& d = r.diagnostics.back();
    MESSAGE("held-out residual " << d.bellman_residual << ", fit objective " << d.critic_objective);
    CHECK(d.bellman_residual <= 0.02);
    double worst = 0.0;
    for (int i = 0; i <= 100; ++i) worst = std::max(worst, std::abs(r.final.policy(v1(i / 100.0))[0] - i / 100.0));
    MESSAGE("max |pi(x) - x| = " << worst);
    CHECK(worst <= 0.1);
}

TEST_CASE("invalid configurations are rejected") {
    RandpolConfig cfg = small_config();
    cfg.n_q = 0;
    CHECK_THROWS_AS(run(synthetic_1d(), cfg), InvalidArgument);
    cfg = small_config();
    cfg.c_bound = -1.0;
    CHECK_THROWS_AS(run(synthetic_1d(), cfg), InvalidArgument);
    CHECK_THROWS_AS(run(synthetic_1d(0.0), small_config()), InvalidArgument);
}

TEST_CASE("default constants follow the environment") {
    const EnvModel env = synthetic_1d();
    const ResolvedParameters p = resolve_parameters(env, RandpolConfig{});
    CHECK(p.c_bound == doctest::Approx(10.0 * env.q_max()));
    CHECK(p.c_prime == doctest::Approx(10.0));
    CHECK(p.bandwidth_q == median_heuristic_bandwidth(2));
    CHECK(p.bandwidth_pi == median_heuristic_bandwidth(1));
}
