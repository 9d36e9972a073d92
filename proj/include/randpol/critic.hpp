#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "randpol/envs.hpp"
#include "randpol/features.hpp"

namespace randpol {

/// Q(x,u) = sum_j alpha_j cos(theta_j . normalize(x,u) + b_j) with
/// ||alpha||_inf <= C / J, hence |Q| <= C everywhere.
class QFunction {
public:
    QFunction(FeatureSet features, Vec weights, double c_bound, int state_dim);

    static QFunction zero(FeatureSet features, double c_bound, int state_dim);

    double value(const Vec& state, const Vec& action) const;
    /// dQ/du, including the action part of the input normalization.
    Vec grad_action(const Vec& state, const Vec& action) const;

    const FeatureSet& features() const { return features_; }
    const Vec& weights() const { return weights_; }
    double c_bound() const { return c_bound_; }
    double weight_bound() const { return c_bound_ / static_cast<double>(features_.size()); }
    int state_dim() const { return state_dim_; }
    int action_dim() const { return features_.input_dim() - state_dim_; }

    Vec join(const Vec& state, const Vec& action) const;

private:
    FeatureSet features_;
    Vec weights_;
    double c_bound_;
    int state_dim_;
};

double q_value(const QFunction& q, const Vec& state, const Vec& action);
Vec q_grad_action(const QFunction& q, const Vec& state, const Vec& action);

struct StateAction {
    Vec state;
    Vec action;
};

struct TargetBatch {
    std::vector<StateAction> points;
    Vec targets;
};

/// target_n = r(x_n,u_n) + (gamma/m) sum_i q(x'_i, policy(x'_i)), x'_i ~ P(.|x_n,u_n).
/// Point n draws from rng.child(n).
TargetBatch empirical_bellman_targets(const EnvModel& env, const QFunction& q, const PolicyFn& policy,
                                      const std::vector<StateAction>& points, int m, const Rng& rng,
                                      int threads = 1);

struct FitConfig {
    int max_iterations = 5000;
    /// Stop once one sweep improves the objective by less than this.
    double tolerance = 1e-10;
    int power_iterations = 100;
    /// Take a Newton step on the free coordinates after every projected step.
    bool subspace_steps = true;
    bool record_trace = false;
};

/// Raised when the box-constrained fit does not converge within the cap.
class SolverFailure : public std::runtime_error {
public:
    SolverFailure(const std::string& what, Vec last_iterate, double residual, int iterations)
        : std::runtime_error(what), last_iterate(std::move(last_iterate)), residual(residual),
          iterations(iterations) {}

    Vec last_iterate;
    double residual;
    int iterations;
};

struct FitResult {
    QFunction q;
    /// (1/N) sum_n (Q(x_n,u_n) - target_n)^2
    double objective;
    int iterations;
    std::vector<double> trace;
};

/// Least squares over the box ||alpha||_inf <= c_bound / J.
FitResult fit_q(const TargetBatch& batch, const FeatureSet& features, double c_bound, int state_dim,
                const FitConfig& cfg = {});

/// Core solver: min (1/N)||Phi a - y||^2 s.t. |a_j| <= bound.
struct BoxLsResult {
    Vec weights;
    double objective;
    int iterations;
    std::vector<double> trace;
};
BoxLsResult solve_box_least_squares(const Mat& phi, const Vec& y, double bound, const FitConfig& cfg = {});

/// Rows are the joined (state, action) inputs of the batch points.
Mat design_inputs(const std::vector<StateAction>& points);

}  // namespace randpol
