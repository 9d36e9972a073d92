#include "randpol/critic.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "randpol/errors.hpp"
#include "randpol/parallel.hpp"

namespace randpol {

QFunction::QFunction(FeatureSet features, Vec weights, double c_bound, int state_dim)
    : features_(std::move(features)), weights_(std::move(weights)), c_bound_(c_bound), state_dim_(state_dim) {
    require(c_bound > 0.0 && std::isfinite(c_bound), "Q bound C must be positive");
    require(state_dim >= 1 && state_dim < features_.input_dim(), "Q features must cover state and action");
    require(weights_.size() == static_cast<Eigen::Index>(features_.size()), "Q weight count must equal J");
    require(weights_.allFinite() && weights_.lpNorm<Eigen::Infinity>() <= weight_bound(),
            "Q weights violate ||alpha||_inf <= C/J");
}

QFunction QFunction::zero(FeatureSet features, double c_bound, int state_dim) {
    const auto j = static_cast<Eigen::Index>(features.size());
    return QFunction(std::move(features), Vec::Zero(j), c_bound, state_dim);
}

Vec QFunction::join(const Vec& state, const Vec& action) const {
    if (state.size() != state_dim_ || action.size() != action_dim())
        throw InvalidArgument("Q input dimension mismatch");
    Vec z(features_.input_dim());
    z << state, action;
    return z;
}

double QFunction::value(const Vec& state, const Vec& action) const {
    return weights_.dot(features_.eval(join(state, action)));
}

Vec QFunction::grad_action(const Vec& state, const Vec& action) const {
    const Vec full = features_.gradient(join(state, action)).transpose() * weights_;
    return full.tail(action_dim());
}

double q_value(const QFunction& q, const Vec& state, const Vec& action) { return q.value(state, action); }

Vec q_grad_action(const QFunction& q, const Vec& state, const Vec& action) { return q.grad_action(state, action); }

TargetBatch empirical_bellman_targets(const EnvModel& env, const QFunction& q, const PolicyFn& policy,
                                      const std::vector<StateAction>& points, int m, const Rng& rng,
                                      int threads) {
    require(m >= 1, "number of next-state samples M must be >= 1");
    require(!points.empty(), "target batch needs at least one point");
    TargetBatch batch{points, Vec(static_cast<Eigen::Index>(points.size()))};
    parallel_for(points.size(), threads, [&](std::size_t n) {
        const auto& [x, u] = points[n];
        Rng stream = rng.child(n);
        double continuation = 0.0;
        for (int i = 0; i < m; ++i) {
            const Vec next = env.sample_next(x, u, stream);
            continuation += q.value(next, policy(next));
        }
        batch.targets[static_cast<Eigen::Index>(n)] = env.reward(x, u) + env.gamma * continuation / m;
    });
    return batch;
}

Mat design_inputs(const std::vector<StateAction>& points) {
    require(!points.empty(), "no points");
    const auto dx = points.front().state.size();
    const auto du = points.front().action.size();
    Mat z(static_cast<Eigen::Index>(points.size()), dx + du);
    for (std::size_t n = 0; n < points.size(); ++n) {
        require(points[n].state.size() == dx && points[n].action.size() == du, "inconsistent point dimensions");
        z.row(static_cast<Eigen::Index>(n)) << points[n].state.transpose(), points[n].action.transpose();
    }
    return z;
}

namespace {

struct BoxQuadratic {
    Mat gram;    // Phi'Phi / N
    Vec linear;  // Phi'y / N
    double constant;
    double bound;

    double objective(const Vec& a) const { return a.dot(gram * a) - 2.0 * linear.dot(a) + constant; }
    Vec gradient(const Vec& a) const { return 2.0 * (gram * a - linear); }
    Vec project(const Vec& a) const { return a.cwiseMax(-bound).cwiseMin(bound); }
};

double largest_eigenvalue(const Mat& sym, int iterations) {
    Vec v = Vec::Ones(sym.rows()).normalized();
    double lambda = 0.0;
    for (int k = 0; k < iterations; ++k) {
        Vec w = sym * v;
        const double norm = w.norm();
        if (norm == 0.0) return 0.0;
        lambda = v.dot(w);
        v = w / norm;
    }
    return std::max(lambda, (sym * v).norm());
}

// Exact minimization over the current face (coordinates strictly inside
// the box), truncated at the first bound it reaches. Each truncation fixes
// one more coordinate, so the loop runs at most J times.
void face_newton(const BoxQuadratic& qp, Vec& a, double& f) {
    for (Eigen::Index pass = 0; pass <= a.size(); ++pass) {
        std::vector<Eigen::Index> free;
        for (Eigen::Index j = 0; j < a.size(); ++j)
            if (std::abs(a[j]) < qp.bound) free.push_back(j);
        if (free.empty()) return;
        const Vec g = qp.gradient(a);
        const auto nf = static_cast<Eigen::Index>(free.size());
        Mat h(nf, nf);
        Vec rhs(nf);
        for (Eigen::Index r = 0; r < nf; ++r) {
            rhs[r] = -0.5 * g[free[r]];
            for (Eigen::Index c = 0; c < nf; ++c) h(r, c) = qp.gram(free[r], free[c]);
        }
        h.diagonal().array() += 1e-12 * std::max(h.diagonal().mean(), 1e-300);
        const Vec step = h.ldlt().solve(rhs);
        if (!step.allFinite()) return;
        double t = 1.0;
        Eigen::Index blocking = -1;
        for (Eigen::Index r = 0; r < nf; ++r) {
            const double aj = a[free[r]];
            const double dj = step[r];
            if (dj == 0.0) continue;
            const double limit = ((dj > 0.0 ? qp.bound : -qp.bound) - aj) / dj;
            if (limit < t) {
                t = limit;
                blocking = r;
            }
        }
        Vec trial = a;
        for (Eigen::Index r = 0; r < nf; ++r) trial[free[r]] += t * step[r];
        if (blocking >= 0) trial[free[blocking]] = step[blocking] > 0.0 ? qp.bound : -qp.bound;
        trial = qp.project(trial);
        const double ft = qp.objective(trial);
        if (!(ft < f)) return;
        a = std::move(trial);
        f = ft;
        if (blocking < 0) return;
    }
}

}  // namespace

BoxLsResult solve_box_least_squares(const Mat& phi, const Vec& y, double bound, const FitConfig& cfg) {
    require(phi.rows() == y.size() && phi.rows() >= 1, "design matrix and targets disagree");
    require(y.allFinite(), "fit targets must be finite");
    require(bound > 0.0, "weight bound must be positive");
    const double n = static_cast<double>(phi.rows());
    BoxQuadratic qp{phi.transpose() * phi / n, phi.transpose() * y / n, y.squaredNorm() / n, bound};

    double lipschitz = 2.0 * largest_eigenvalue(qp.gram, cfg.power_iterations) * 1.05;
    Vec a = Vec::Zero(phi.cols());
    double f = qp.objective(a);
    BoxLsResult out{a, f, 0, {}};
    if (cfg.record_trace) out.trace.push_back(f);
    if (lipschitz == 0.0) {
        out.objective = (phi * a - y).squaredNorm() / n;
        return out;
    }

    bool converged = false;
    int it = 0;
    for (; it < cfg.max_iterations; ++it) {
        const double f_start = f;
        Vec trial = qp.project(a - qp.gradient(a) / lipschitz);
        double f_trial = qp.objective(trial);
        // power iteration can undershoot the true curvature
        const double slack = 1e-13 * std::max(1.0, std::abs(f));
        while (f_trial > f + slack && lipschitz < 1e300) {
            lipschitz *= 2.0;
            trial = qp.project(a - qp.gradient(a) / lipschitz);
            f_trial = qp.objective(trial);
        }
        if (f_trial <= f) {
            a = std::move(trial);
            f = f_trial;
        }
        if (cfg.subspace_steps) face_newton(qp, a, f);
        if (cfg.record_trace) out.trace.push_back(f);
        if (f_start - f < cfg.tolerance) {
            converged = true;
            ++it;
            break;
        }
    }
    out.weights = a;
    out.objective = (phi * a - y).squaredNorm() / n;
    out.iterations = it;
    if (!converged) {
        const Vec kkt = a - qp.project(a - qp.gradient(a));
        throw SolverFailure("box least squares did not converge in " + std::to_string(cfg.max_iterations) +
                                " iterations",
                            a, kkt.lpNorm<Eigen::Infinity>(), it);
    }
    return out;
}

FitResult fit_q(const TargetBatch& batch, const FeatureSet& features, double c_bound, int state_dim,
                const FitConfig& cfg) {
    require(!batch.points.empty(), "fit needs at least one point");
    require(batch.targets.size() == static_cast<Eigen::Index>(batch.points.size()), "targets/points size mismatch");
    require(batch.targets.allFinite(), "fit targets must be finite");
    require(c_bound > 0.0, "Q bound C must be positive");
    const Mat phi = features.eval_batch(design_inputs(batch.points));
    const double bound = c_bound / static_cast<double>(features.size());
    BoxLsResult solved = solve_box_least_squares(phi, batch.targets, bound, cfg);
    return FitResult{QFunction(features, std::move(solved.weights), c_bound, state_dim), solved.objective,
                     solved.iterations, std::move(solved.trace)};
}

}  // namespace randpol
