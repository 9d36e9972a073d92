#include <doctest.h>

#include <cmath>
#include <vector>

#include "randpol/critic.hpp"
#include "randpol/errors.hpp"
#include "randpol/oracles.hpp"

using namespace randpol;

namespace {

Vec v1(double a) { return Vec::Constant(1, a); }

std::vector<StateAction> uniform_points(const EnvModel& env, int n, Rng& rng) {
    std::vector<StateAction> pts;
    for (int i = 0; i < n; ++i) pts.push_back({env.state_box.sample_uniform(rng), env.action_box.sample_uniform(rng)});
    return pts;
}

FeatureSet synthetic_features(int j, Rng& rng, double bandwidth = 1.5) {
    return sample_feature_params({bandwidth, 2}, j, rng, InputNormalizer(Vec::Zero(2), Vec::Ones(2)));
}

QFunction random_q(const FeatureSet& fs, double c, Rng& rng) {
    Vec w(static_cast<Eigen::Index>(fs.size()));
    const double b = c / static_cast<double>(fs.size());
    for (auto& x : w) x = rng.uniform(-b, b);
    return QFunction(fs, w, c, 1);
}

double sample_sd(const std::vector<double>& xs) {
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= static_cast<double>(xs.size());
    double ss = 0.0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

// One feature with zero frequency: the constant function c.
QFunction constant_q(double c, double c_bound, int input_dim, int state_dim) {
    FeatureSet fs({FeatureParam{Vec::Zero(input_dim), 0.0}}, input_dim);
    return QFunction(fs, v1(c), c_bound, state_dim);
}

}  // namespace

TEST_CASE("zero continuation gives reward targets") {
    const EnvModel env = synthetic_1d();
    Rng rng(1);
    const auto pts = uniform_points(env, 50, rng);
    const QFunction q = QFunction::zero(synthetic_features(10, rng), 30.0, 1);
    const PolicyFn pol = [](const Vec& x) { return x; };
    const TargetBatch b = empirical_bellman_targets(env, q, pol, pts, 7, Rng(2));
    for (std::size_t n = 0; n < pts.size(); ++n)
        CHECK(b.targets[static_cast<Eigen::Index>(n)] == env.reward(pts[n].state, pts[n].action));
    const TargetBatch at_diag = empirical_bellman_targets(env, q, pol, {{v1(0.5), v1(0.5)}}, 3, Rng(2));
    CHECK(at_diag.targets[0] == 0.0);
}

TEST_CASE("constant continuation on a deterministic env is independent of m") {
    const EnvModel lq = linear_quadratic(0.1, 0.5);
    const QFunction q = constant_q(2.0, 5.0, 3, 2);
    const PolicyFn pol = [](const Vec&) { return v1(0.0); };
    const std::vector<StateAction> pts{{Vec{{0.5, -1.0}}, v1(2.0)}};
    const double r = lq.reward(pts[0].state, pts[0].action);
    for (int m : {1, 4, 25}) {
        const TargetBatch b = empirical_bellman_targets(lq, q, pol, pts, m, Rng(3));
        CHECK(b.targets[0] == doctest::Approx(r + 0.5 * 2.0).epsilon(1e-14));
    }
}

TEST_CASE("targets reject m = 0 and are deterministic across threads") {
    const EnvModel env = synthetic_1d();
    Rng rng(4);
    const auto pts = uniform_points(env, 40, rng);
    const QFunction q = random_q(synthetic_features(10, rng), 30.0, rng);
    const PolicyFn pol = [](const Vec& x) { return x * 0.5; };
    CHECK_THROWS_AS(empirical_bellman_targets(env, q, pol, pts, 0, Rng(1)), InvalidArgument);
    const Vec a = empirical_bellman_targets(env, q, pol, pts, 5, Rng(9), 1).targets;
    const Vec b = empirical_bellman_targets(env, q, pol, pts, 5, Rng(9), 4).targets;
    CHECK(a == b);
}

TEST_CASE("target spread shrinks like one over root m") {
    const EnvModel env = synthetic_1d();
    Rng rng(5);
    const QFunction q = random_q(synthetic_features(20, rng, 3.0), 30.0, rng);
    const PolicyFn pol = [](const Vec& x) { return x; };
    const std::vector<StateAction> pts{{v1(0.3), v1(0.1)}};
    std::vector<double> sd;
    for (int m : {10, 40, 160}) {
        std::vector<double> t;
        for (std::uint64_t s = 0; s < 400; ++s)
            t.push_back(empirical_bellman_targets(env, q, pol, pts, m, Rng(1000 + s)).targets[0]);
        sd.push_back(sample_sd(t));
    }
    CHECK(sd[0] / sd[1] == doctest::Approx(2.0).epsilon(0.2));
    CHECK(sd[1] / sd[2] == doctest::Approx(2.0).epsilon(0.2));
}

TEST_CASE("fitting zero targets gives zero weights") {
    const EnvModel env = synthetic_1d();
    Rng rng(6);
    const auto pts = uniform_points(env, 30, rng);
    const FeatureSet fs = synthetic_features(8, rng);
    const FitResult r = fit_q({pts, Vec::Zero(30)}, fs, 10.0, 1);
    CHECK(r.q.weights().isZero());
    CHECK(r.objective == 0.0);
}

TEST_CASE("fitting realizable targets recovers them") {
    const EnvModel env = synthetic_1d();
    Rng rng(7);
    const int j = 15;
    const double c = 10.0;
    const FeatureSet fs = synthetic_features(j, rng);
    Vec truth(j);
    for (auto& x : truth) x = rng.uniform(-0.9, 0.9) * c / j;
    const QFunction target_q(fs, truth, c, 1);
    const auto pts = uniform_points(env, 600, rng);
    Vec y(600);
    for (int n = 0; n < 600; ++n) y[n] = target_q.value(pts[n].state, pts[n].action);
    const FitResult r = fit_q({pts, y}, fs, c, 1);
    CHECK(r.objective <= 1e-8);
    double worst = 0.0;
    for (int n = 0; n < 600; ++n) worst = std::max(worst, std::abs(r.q.value(pts[n].state, pts[n].action) - y[n]));
    CHECK(worst <= 1e-4);
}

TEST_CASE("two-weight fit matches exhaustive grid search") {
    Rng rng(8);
    for (int trial = 0; trial < 5; ++trial) {
        const int n = 40;
        Mat phi(n, 2);
        for (auto& x : phi.reshaped()) x = rng.uniform(-1.0, 1.0);
        const double bound = 0.5;
        // unconstrained optimum lies well outside the box
        const Vec a_out{{3.0 - trial, -2.0 + 0.3 * trial}};
        Vec y = phi * a_out;
        for (auto& x : y) x += 0.05 * rng.normal();
        const BoxLsResult fit = solve_box_least_squares(phi, y, bound);
        const oracles::GridSearchResult grid = oracles::grid_search_box_ls(phi, y, bound, 1e-3);
        CHECK(std::abs(fit.objective - grid.objective) <= 1e-5);
        CHECK(fit.objective <= grid.objective + 1e-12);
    }
}

TEST_CASE("box constraint holds exactly on random problems") {
    Rng rng(9);
    bool feasible = true;
    for (int trial = 0; trial < 1000; ++trial) {
        const int n = 5 + static_cast<int>(rng.uniform() * 40);
        const int j = 1 + static_cast<int>(rng.uniform() * 12);
        Mat phi(n, j);
        for (auto& x : phi.reshaped()) x = rng.uniform(-1.0, 1.0);
        Vec y(n);
        for (auto& x : y) x = 10.0 * rng.normal();
        const double bound = 0.01 + rng.uniform();
        const BoxLsResult r = solve_box_least_squares(phi, y, bound);
        feasible = feasible && r.weights.lpNorm<Eigen::Infinity>() <= bound;
    }
    CHECK(feasible);
}

TEST_CASE("solver objective never increases") {
    Rng rng(10);
    for (bool subspace : {false, true}) {
        Mat phi(60, 12);
        for (auto& x : phi.reshaped()) x = rng.uniform(-1.0, 1.0);
        Vec y(60);
        for (auto& x : y) x = 3.0 * rng.normal();
        FitConfig cfg;
        cfg.record_trace = true;
        cfg.subspace_steps = subspace;
        cfg.max_iterations = 200000;
        const BoxLsResult r = solve_box_least_squares(phi, y, 0.4, cfg);
        REQUIRE(r.trace.size() >= 2);
        bool monotone = true;
        for (std::size_t i = 1; i < r.trace.size(); ++i) monotone = monotone && r.trace[i] <= r.trace[i - 1];
        CHECK(monotone);
    }
}

TEST_CASE("non-finite targets and iteration cap are reported") {
    Mat phi = Mat::Identity(3, 3);
    Vec y{{1.0, std::nan(""), 0.0}};
    CHECK_THROWS_AS(solve_box_least_squares(phi, y, 1.0), InvalidArgument);

    Rng rng(11);
    Mat hard(50, 20);
    for (auto& x : hard.reshaped()) x = rng.uniform(-1.0, 1.0);
    Vec t(50);
    for (auto& x : t) x = rng.normal();
    FitConfig cfg;
    cfg.max_iterations = 1;
    cfg.subspace_steps = false;
    try {
        solve_box_least_squares(hard, t, 1.0, cfg);
        FAIL("expected a solver failure");
    } catch (const SolverFailure& e) {
        CHECK(e.iterations == 1);
        CHECK(e.last_iterate.size() == 20);
        CHECK(e.residual > 0.0);
    }
}

TEST_CASE("q values for zero and constant weights") {
    Rng rng(12);
    const QFunction z = QFunction::zero(synthetic_features(5, rng), 4.0, 1);
    CHECK(z.value(v1(0.2), v1(0.9)) == 0.0);
    CHECK(z.grad_action(v1(0.2), v1(0.9)).isZero());
    const QFunction c = constant_q(1.7, 2.0, 2, 1);
    CHECK(q_value(c, v1(0.1), v1(0.4)) == doctest::Approx(1.7));
    CHECK(q_grad_action(c, v1(0.1), v1(0.4)).isZero());
    CHECK_THROWS_AS(c.value(Vec::Zero(2), v1(0.4)), InvalidArgument);
}

TEST_CASE("weights outside the box are rejected") {
    FeatureSet fs({FeatureParam{Vec::Zero(2), 0.0}}, 2);
    CHECK_THROWS_AS(QFunction(fs, v1(2.5), 2.0, 1), InvalidArgument);
}

TEST_CASE("q values are bounded by C") {
    Rng rng(13);
    bool bounded = true;
    for (int trial = 0; trial < 100; ++trial) {
        const QFunction q = random_q(synthetic_features(20, rng, 4.0), 3.0, rng);
        // push weights to the corners of the box
        Vec w = q.weights();
        for (auto& x : w) x = x >= 0.0 ? q.weight_bound() : -q.weight_bound();
        const QFunction corner(q.features(), w, q.c_bound(), 1);
        for (int k = 0; k < 1000; ++k) {
            const double x = rng.uniform();
            const double u = rng.uniform();
            bounded = bounded && std::abs(corner.value(v1(x), v1(u))) <= 3.0 + 1e-12;
        }
    }
    CHECK(bounded);
}

TEST_CASE("action gradient matches central differences") {
    Rng rng(14);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const EnvModel lq = linear_quadratic(0.1, 0.9);
        const FeatureSet fs =
            sample_feature_params({1.2, 3}, 30, rng, InputNormalizer(Vec{{-3.0, -3.0, -10.0}}, Vec{{3.0, 3.0, 10.0}}));
        Vec w(30);
        for (auto& x : w) x = rng.uniform(-1.0, 1.0) / 3.0;
        const QFunction q(fs, w, 10.0, 2);
        const Vec x = lq.state_box.sample_uniform(rng);
        const Vec u = lq.action_box.sample_uniform(rng);
        const double g = q.grad_action(x, u)[0];
        const double h = 1e-5;
        const double fd = (q.value(x, u + v1(h)) - q.value(x, u - v1(h))) / (2.0 * h);
        worst = std::max(worst, std::abs(g - fd) / std::max(std::abs(g), 1e-3));
    }
    CHECK(worst <= 1e-6);
}
