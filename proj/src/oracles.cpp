#include "randpol/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "randpol/errors.hpp"

namespace randpol::oracles {

GridMdp discretize_synthetic(int n_x, int n_u, double gamma, double u_max) {
    require(n_x >= 2 && n_u >= 2, "grid needs at least two states and two actions");
    require(gamma >= 0.0 && gamma < 1.0, "gamma must lie in [0, 1)");
    require(u_max > 0.0 && u_max <= 1.0, "u_max must lie in (0, 1]");
    GridMdp mdp;
    mdp.gamma = gamma;
    mdp.states.resize(n_x);
    mdp.actions.resize(n_u);
    const double width = 1.0 / n_x;
    for (int i = 0; i < n_x; ++i) mdp.states[i] = (i + 0.5) * width;
    for (int j = 0; j < n_u; ++j) mdp.actions[j] = u_max * j / (n_u - 1);
    mdp.rewards.resize(n_x, n_u);
    for (int i = 0; i < n_x; ++i)
        for (int j = 0; j < n_u; ++j) {
            const double d = mdp.states[i] - mdp.actions[j];
            mdp.rewards(i, j) = -d * d;
        }
    mdp.transitions = Mat::Zero(static_cast<Eigen::Index>(n_x) * n_u, n_x);
    for (int j = 0; j < n_u; ++j) {
        const double u = mdp.actions[j];
        Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(n_x);
        if (u >= 1.0) {
            row[n_x - 1] = 1.0;
        } else {
            for (int c = 0; c < n_x; ++c) {
                const double overlap = std::max(0.0, (c + 1) * width - std::max(c * width, u));
                row[c] = overlap / (1.0 - u);
            }
            row /= row.sum();
        }
        // transitions do not depend on the current state
        for (int i = 0; i < n_x; ++i) mdp.transitions.row(static_cast<Eigen::Index>(i) * n_u + j) = row;
    }
    return mdp;
}

Mat bellman_optimality(const GridMdp& mdp, const Mat& q) {
    const Vec v = q.rowwise().maxCoeff();
    const Vec expected = mdp.transitions * v;
    Mat out(mdp.n_states(), mdp.n_actions());
    for (int i = 0; i < mdp.n_states(); ++i)
        for (int j = 0; j < mdp.n_actions(); ++j)
            out(i, j) = mdp.rewards(i, j) + mdp.gamma * expected[static_cast<Eigen::Index>(i) * mdp.n_actions() + j];
    return out;
}

ValueIterationResult exact_value_iteration(const GridMdp& mdp, double tol, int max_sweeps) {
    require(tol > 0.0, "tolerance must be positive");
    Mat q = mdp.rewards;
    double residual = std::numeric_limits<double>::infinity();
    int sweep = 0;
    for (; sweep < max_sweeps; ++sweep) {
        Mat next = bellman_optimality(mdp, q);
        residual = (next - q).cwiseAbs().maxCoeff();
        if (residual <= tol) break;
        q = std::move(next);
    }
    ValueIterationResult out{q, q.rowwise().maxCoeff(), std::vector<int>(static_cast<std::size_t>(mdp.n_states())),
                             residual, sweep};
    for (int i = 0; i < mdp.n_states(); ++i) {
        int best = 0;
        for (int j = 1; j < mdp.n_actions(); ++j)
            if (q(i, j) > q(i, best)) best = j;
        out.policy[static_cast<std::size_t>(i)] = best;
    }
    return out;
}

Lemma5Check lemma5_check(const GridMdp& mdp, const Mat& q, const std::vector<int>& policy) {
    require(q.rows() == mdp.n_states() && q.cols() == mdp.n_actions(), "Q table shape mismatch");
    require(static_cast<int>(policy.size()) == mdp.n_states(), "policy size mismatch");
    Vec greedy_gap(mdp.n_states());
    for (int i = 0; i < mdp.n_states(); ++i)
        greedy_gap[i] = q.row(i).maxCoeff() - q(i, policy[static_cast<std::size_t>(i)]);
    // G Q - G^pi Q = gamma P (HQ - H^pi Q), nonnegative
    const Vec eval_gap = mdp.gamma * (mdp.transitions * greedy_gap);
    const double c_mu = mdp.transitions.maxCoeff() * mdp.n_states();
    return Lemma5Check{eval_gap.mean(), greedy_gap.mean(), c_mu};
}

double interpolate_q(const GridMdp& mdp, const Mat& q, double x, double u) {
    auto bracket = [](const Vec& nodes, double v, int& lo, double& w) {
        const int n = static_cast<int>(nodes.size());
        if (v <= nodes[0]) {
            lo = 0;
            w = 0.0;
            return;
        }
        if (v >= nodes[n - 1]) {
            lo = n - 2;
            w = 1.0;
            return;
        }
        lo = static_cast<int>(std::upper_bound(nodes.data(), nodes.data() + n, v) - nodes.data()) - 1;
        lo = std::clamp(lo, 0, n - 2);
        w = (v - nodes[lo]) / (nodes[lo + 1] - nodes[lo]);
    };
    int i = 0;
    int j = 0;
    double wx = 0.0;
    double wu = 0.0;
    bracket(mdp.states, x, i, wx);
    bracket(mdp.actions, u, j, wu);
    return (1 - wx) * ((1 - wu) * q(i, j) + wu * q(i, j + 1)) + wx * ((1 - wu) * q(i + 1, j) + wu * q(i + 1, j + 1));
}

RiccatiSolution riccati_oracle(const LqSpec& spec, double gamma, double tol, int max_iterations) {
    require(gamma > 0.0 && gamma < 1.0, "gamma must lie in (0, 1)");
    require(tol > 0.0, "tolerance must be positive");
    const auto n = spec.a.rows();
    require(spec.a.cols() == n && spec.b.rows() == n && spec.q.rows() == n && spec.q.cols() == n &&
                spec.r.rows() == spec.b.cols() && spec.r.cols() == spec.b.cols(),
            "inconsistent LQ matrix shapes");
    Mat p = Mat::Zero(n, n);
    for (int it = 1; it <= max_iterations; ++it) {
        const Mat s = spec.r + gamma * spec.b.transpose() * p * spec.b;
        const Mat bpa = spec.b.transpose() * p * spec.a;
        const Mat next = spec.q + gamma * spec.a.transpose() * p * spec.a -
                         gamma * gamma * bpa.transpose() * s.ldlt().solve(bpa);
        if (!next.allFinite() || next.cwiseAbs().maxCoeff() > 1e15)
            throw RiccatiDivergence("discounted Riccati recursion diverged after " + std::to_string(it) +
                                    " iterations");
        const double change = (next - p).cwiseAbs().maxCoeff();
        p = next;
        if (change <= tol) {
            const Mat s_final = spec.r + gamma * spec.b.transpose() * p * spec.b;
            const Mat gain = gamma * s_final.ldlt().solve(spec.b.transpose() * p * spec.a);
            return RiccatiSolution{p, gain, it};
        }
    }
    throw RiccatiDivergence("discounted Riccati recursion did not converge in " + std::to_string(max_iterations) +
                            " iterations");
}

double lq_rollout_return(const LqSpec& spec, const Mat& gain, const Vec& x0, double gamma, int steps) {
    Vec x = x0;
    double discount = 1.0;
    double total = 0.0;
    for (int t = 0; t < steps; ++t) {
        const Vec u = -gain * x;
        total -= discount * ((x.transpose() * spec.q * x)(0, 0) + (u.transpose() * spec.r * u)(0, 0));
        discount *= gamma;
        x = spec.a * x + spec.b * u;
    }
    return total;
}

GridSearchResult grid_search_box_ls(const Mat& phi, const Vec& y, double bound, double step) {
    require(phi.cols() == 2, "grid search oracle handles exactly two weights");
    require(phi.rows() == y.size() && phi.rows() >= 1, "design matrix and targets disagree");
    require(bound > 0.0 && step > 0.0, "bound and step must be positive");
    const double n = static_cast<double>(phi.rows());
    const Mat gram = phi.transpose() * phi / n;
    const Vec lin = phi.transpose() * y / n;
    const double c = y.squaredNorm() / n;
    const int count = static_cast<int>(std::floor(2.0 * bound / step + 1e-9));
    auto node = [&](int k) { return k == count ? bound : -bound + k * step; };
    GridSearchResult best{Vec::Zero(2), std::numeric_limits<double>::infinity()};
    for (int a = 0; a <= count; ++a) {
        const double w0 = node(a);
        for (int b = 0; b <= count; ++b) {
            const double w1 = node(b);
            const double f = gram(0, 0) * w0 * w0 + 2.0 * gram(0, 1) * w0 * w1 + gram(1, 1) * w1 * w1 -
                             2.0 * (lin[0] * w0 + lin[1] * w1) + c;
            if (f < best.objective) best = {Vec{{w0, w1}}, f};
        }
    }
    best.objective = (phi * best.weights - y).squaredNorm() / n;
    return best;
}

}  // namespace randpol::oracles
