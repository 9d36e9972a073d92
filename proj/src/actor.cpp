#include "randpol/actor.hpp"

#include <cmath>
#include <limits>
#include <memory>
#include <string>

#include "randpol/errors.hpp"
#include "randpol/parallel.hpp"

namespace randpol {

PolicyFunction::PolicyFunction(std::vector<FeatureSet> coordinate_features, std::vector<Vec> coordinate_weights,
                               double c_prime, Box action_box)
    : features_(std::move(coordinate_features)), weights_(std::move(coordinate_weights)), c_prime_(c_prime),
      action_box_(std::move(action_box)) {
    require(c_prime > 0.0 && std::isfinite(c_prime), "policy bound C' must be positive");
    require(!features_.empty(), "policy needs at least one action coordinate");
    require(static_cast<int>(features_.size()) == action_box_.dim(), "one feature set per action coordinate");
    require(weights_.size() == features_.size(), "one weight vector per action coordinate");
    for (std::size_t k = 0; k < features_.size(); ++k) {
        require(features_[k].input_dim() == features_.front().input_dim(), "policy features must share input dim");
        require(weights_[k].size() == static_cast<Eigen::Index>(features_[k].size()), "policy weight count mismatch");
        require(weights_[k].allFinite() &&
                    weights_[k].lpNorm<Eigen::Infinity>() <= coordinate_bound(static_cast<int>(k)),
                "policy weights violate ||alpha_k||_inf <= C'/J_k");
    }
}

PolicyFunction PolicyFunction::zero(std::vector<FeatureSet> coordinate_features, double c_prime, Box action_box) {
    std::vector<Vec> weights;
    for (const auto& fs : coordinate_features) weights.push_back(Vec::Zero(static_cast<Eigen::Index>(fs.size())));
    return PolicyFunction(std::move(coordinate_features), std::move(weights), c_prime, std::move(action_box));
}

double PolicyFunction::coordinate_bound(int k) const {
    return c_prime_ / static_cast<double>(features_.at(static_cast<std::size_t>(k)).size());
}

Vec PolicyFunction::raw(const Vec& state) const {
    Vec out(action_dim());
    for (std::size_t k = 0; k < features_.size(); ++k)
        out[static_cast<Eigen::Index>(k)] = weights_[k].dot(features_[k].eval(state));
    return out;
}

PolicyFn PolicyFunction::as_fn() const {
    auto shared = std::make_shared<const PolicyFunction>(*this);
    return [shared](const Vec& x) { return shared->action(x); };
}

Vec policy_action(const PolicyFunction& p, const Vec& state) { return p.action(state); }

namespace {

// Q evaluated on a fixed state sample as a function of the actions only.
class StateBatchQ {
public:
    StateBatchQ(const QFunction& q, const std::vector<Vec>& states) : alpha_(q.weights()) {
        const int du = q.action_dim();
        const auto n = static_cast<Eigen::Index>(states.size());
        base_.resize(n, static_cast<Eigen::Index>(q.features().size()));
        const Vec zero_u = Vec::Zero(du);
        for (Eigen::Index i = 0; i < n; ++i)
            base_.row(i) = q.features().activations(q.join(states[static_cast<std::size_t>(i)], zero_u)).transpose();
        const Vec scale = q.features().normalizer().jacobian_diagonal(static_cast<std::size_t>(q.features().input_dim()));
        action_freq_ = q.features().frequencies().rightCols(du) * scale.tail(du).asDiagonal();
    }

    /// Row i holds Q(x_i, actions.row(i)); optionally dQ/du per row.
    Vec values(const Mat& actions, Mat* grad = nullptr) const {
        const Mat act = base_ + actions * action_freq_.transpose();
        if (!grad) return act.array().cos().matrix() * alpha_;
        const Eigen::Index n = act.rows();
        Vec out = Vec::Zero(n);
        Mat slope(n, act.cols());
        // sin and cos of the same argument in one pass (fused by the compiler)
        for (Eigen::Index j = 0; j < act.cols(); ++j) {
            const double a = alpha_[j];
            for (Eigen::Index i = 0; i < n; ++i) {
                const double z = act(i, j);
                out[i] += a * std::cos(z);
                slope(i, j) = -a * std::sin(z);
            }
        }
        *grad = slope * action_freq_;
        return out;
    }

private:
    Vec alpha_;
    Mat base_;
    Mat action_freq_;
};

struct Evaluation {
    double objective;
    std::vector<Vec> gradient;
};

class ImprovementProblem {
public:
    ImprovementProblem(const QFunction& q, const std::vector<Vec>& states, const std::vector<FeatureSet>& fs,
                       double c_prime, const Box& box)
        : qbatch_(q, states), box_(box), n_(static_cast<double>(states.size())) {
        for (std::size_t k = 0; k < fs.size(); ++k) {
            Mat psi(static_cast<Eigen::Index>(states.size()), static_cast<Eigen::Index>(fs[k].size()));
            for (std::size_t i = 0; i < states.size(); ++i)
                psi.row(static_cast<Eigen::Index>(i)) = fs[k].eval(states[i]).transpose();
            psi_.push_back(std::move(psi));
            bounds_.push_back(c_prime / static_cast<double>(fs[k].size()));
        }
    }

    Evaluation evaluate(const std::vector<Vec>& w, bool with_gradient) const {
        const auto n = psi_.front().rows();
        const auto du = static_cast<Eigen::Index>(psi_.size());
        Mat actions(n, du);
        Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> inside(n, du);
        for (Eigen::Index k = 0; k < du; ++k) {
            const Vec raw = psi_[static_cast<std::size_t>(k)] * w[static_cast<std::size_t>(k)];
            const double lo = box_.lower[k];
            const double hi = box_.upper[k];
            inside.col(k) = (raw.array() >= lo) && (raw.array() <= hi);
            actions.col(k) = raw.cwiseMax(lo).cwiseMin(hi);
        }
        Mat grad_u;
        const Vec vals = qbatch_.values(actions, with_gradient ? &grad_u : nullptr);
        Evaluation out{vals.sum() / n_, {}};
        if (with_gradient) {
            for (Eigen::Index k = 0; k < du; ++k) {
                // clipped coordinates contribute nothing
                const Vec g = inside.col(k).select(grad_u.col(k), 0.0);
                out.gradient.push_back(psi_[static_cast<std::size_t>(k)].transpose() * g / n_);
            }
        }
        return out;
    }

    std::vector<Vec> project(std::vector<Vec> w) const {
        for (std::size_t k = 0; k < w.size(); ++k) w[k] = w[k].cwiseMax(-bounds_[k]).cwiseMin(bounds_[k]);
        return w;
    }

    double bound(std::size_t k) const { return bounds_[k]; }
    std::size_t coordinates() const { return psi_.size(); }

private:
    StateBatchQ qbatch_;
    Box box_;
    double n_;
    std::vector<Mat> psi_;
    std::vector<double> bounds_;
};

double inner(const std::vector<Vec>& a, const std::vector<Vec>& b) {
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) s += a[k].dot(b[k]);
    return s;
}

struct AscentResult {
    std::vector<Vec> weights;
    double objective;
};

AscentResult projected_ascent(const ImprovementProblem& problem, std::vector<Vec> w, const ImproveConfig& cfg) {
    w = problem.project(std::move(w));
    Evaluation current = problem.evaluate(w, true);
    double step = -1.0;
    for (int it = 0; it < cfg.max_iterations; ++it) {
        double gmax = 0.0;
        double width = 0.0;
        for (std::size_t k = 0; k < current.gradient.size(); ++k) {
            gmax = std::max(gmax, current.gradient[k].lpNorm<Eigen::Infinity>());
            width = std::max(width, problem.bound(k));
        }
        if (gmax == 0.0) break;
        if (step <= 0.0) step = 2.0 * width / gmax;
        bool accepted = false;
        for (int ls = 0; ls < 60; ++ls, step *= 0.5) {
            std::vector<Vec> trial = w;
            for (std::size_t k = 0; k < trial.size(); ++k) trial[k] += step * current.gradient[k];
            trial = problem.project(std::move(trial));
            std::vector<Vec> delta = trial;
            for (std::size_t k = 0; k < delta.size(); ++k) delta[k] -= w[k];
            const double predicted = inner(current.gradient, delta);
            if (predicted <= 0.0) continue;
            Evaluation next = problem.evaluate(trial, true);
            if (next.objective >= current.objective + cfg.armijo * predicted) {
                const double gain = next.objective - current.objective;
                w = std::move(trial);
                current = std::move(next);
                accepted = true;
                step *= 2.0;
                if (gain < cfg.tolerance) return {std::move(w), current.objective};
                break;
            }
        }
        if (!accepted) break;
    }
    return {std::move(w), current.objective};
}

bool same_features(const std::vector<FeatureSet>& a, const std::vector<FeatureSet>& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t k = 0; k < a.size(); ++k) {
        if (a[k].size() != b[k].size() || a[k].input_dim() != b[k].input_dim()) return false;
        if (a[k].frequencies() != b[k].frequencies() || a[k].phases() != b[k].phases()) return false;
    }
    return true;
}

}  // namespace

ImprovementResult improve_policy(const QFunction& q, const std::vector<Vec>& states,
                                 const std::vector<FeatureSet>& feature_sets, double c_prime, const Box& action_box,
                                 const ImproveConfig& cfg, const Rng& rng, const PolicyFunction* incumbent,
                                 int threads) {
    require(!states.empty(), "policy improvement needs at least one state");
    require(static_cast<int>(feature_sets.size()) == q.action_dim(), "one policy feature set per action coordinate");
    require(action_box.dim() == q.action_dim(), "action box dimension mismatch");
    require(cfg.multistarts >= 1, "at least one multistart is required");
    for (const auto& x : states) require(x.size() == q.state_dim(), "state dimension mismatch");

    const ImprovementProblem problem(q, states, feature_sets, c_prime, action_box);
    const bool use_incumbent = incumbent != nullptr && same_features(incumbent->coordinate_features(), feature_sets);

    std::vector<std::vector<Vec>> starts(static_cast<std::size_t>(cfg.multistarts));
    for (int s = 0; s < cfg.multistarts; ++s) {
        auto& w = starts[static_cast<std::size_t>(s)];
        if (s == 1 && use_incumbent) {
            w = incumbent->coordinate_weights();
            continue;
        }
        Rng stream = rng.child(static_cast<std::uint64_t>(s));
        for (std::size_t k = 0; k < feature_sets.size(); ++k) {
            const double b = problem.bound(k);
            Vec v(static_cast<Eigen::Index>(feature_sets[k].size()));
            for (Eigen::Index j = 0; j < v.size(); ++j) v[j] = s == 0 ? 0.0 : stream.uniform(-b, b);
            w.push_back(std::move(v));
        }
    }

    std::vector<AscentResult> results(starts.size());
    parallel_for(starts.size(), threads, [&](std::size_t s) { results[s] = projected_ascent(problem, starts[s], cfg); });

    std::size_t best = 0;
    std::vector<double> objectives;
    for (std::size_t s = 0; s < results.size(); ++s) {
        objectives.push_back(results[s].objective);
        if (results[s].objective > results[best].objective) best = s;
    }
    PolicyFunction policy(feature_sets, std::move(results[best].weights), c_prime, action_box);
    return ImprovementResult{std::move(policy), results[best].objective, static_cast<int>(best), std::move(objectives)};
}

double policy_objective(const QFunction& q, const PolicyFunction& p, const std::vector<Vec>& states) {
    require(!states.empty(), "no states");
    double total = 0.0;
    for (const auto& x : states) total += q.value(x, p.action(x));
    return total / static_cast<double>(states.size());
}

std::vector<Vec> action_grid(const Box& box, int resolution) {
    require(resolution >= 2, "grid resolution must be >= 2");
    const int d = box.dim();
    std::vector<Vec> grid;
    std::vector<int> idx(static_cast<std::size_t>(d), 0);
    while (true) {
        Vec u(d);
        for (int k = 0; k < d; ++k)
            u[k] = box.lower[k] + (box.upper[k] - box.lower[k]) * idx[static_cast<std::size_t>(k)] / (resolution - 1);
        grid.push_back(std::move(u));
        int k = 0;
        while (k < d && ++idx[static_cast<std::size_t>(k)] == resolution) idx[static_cast<std::size_t>(k++)] = 0;
        if (k == d) break;
    }
    return grid;
}

double improvement_gap(const QFunction& q, const PolicyFunction& p, const std::vector<Vec>& states,
                       int grid_resolution) {
    if (q.action_dim() > 3)
        throw Unsupported("improvement gap grid search supports action dimension <= 3, got " +
                          std::to_string(q.action_dim()));
    require(!states.empty(), "no states");
    const std::vector<Vec> grid = action_grid(p.action_box(), grid_resolution);
    Mat actions(static_cast<Eigen::Index>(grid.size()), q.action_dim());
    for (std::size_t g = 0; g < grid.size(); ++g) actions.row(static_cast<Eigen::Index>(g)) = grid[g].transpose();
    double total = 0.0;
    for (const auto& x : states) {
        const StateBatchQ along_grid(q, std::vector<Vec>(grid.size(), x));
        const double at_policy = q.value(x, p.action(x));
        const double best = std::max(along_grid.values(actions).maxCoeff(), at_policy);
        total += best - at_policy;
    }
    return total / static_cast<double>(states.size());
}

}  // namespace randpol
