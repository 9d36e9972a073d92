#pragma once

#include <stdexcept>
#include <vector>

#include "randpol/envs.hpp"
#include "randpol/features.hpp"

namespace randpol::oracles {

/// Finite MDP: states x_i, actions u_j, P(. | i, j) and r(i, j).
struct GridMdp {
    Vec states;
    Vec actions;
    /// Row (i * n_u + j) is P(. | x_i, u_j).
    Mat transitions;
    /// n_x x n_u
    Mat rewards;
    double gamma;

    int n_states() const { return static_cast<int>(states.size()); }
    int n_actions() const { return static_cast<int>(actions.size()); }
    Eigen::Ref<const Eigen::RowVectorXd> row(int i, int j) const { return transitions.row(i * n_actions() + j); }
};

/// Synthetic MDP on n_x equal cells of [0,1] (nodes at cell centres) and
/// n_u evenly spaced actions on [0, u_max]. U[u,1] is split over cells by
/// overlap length; u = 1 is a point mass on the last cell.
GridMdp discretize_synthetic(int n_x, int n_u, double gamma = 0.7, double u_max = 1.0);

struct ValueIterationResult {
    Mat q;            // n_x x n_u
    Vec v;            // n_x
    std::vector<int> policy;  // greedy action index per state, lowest index on ties
    double residual;  // sup-norm fixed-point residual of q
    int sweeps;
};

ValueIterationResult exact_value_iteration(const GridMdp& mdp, double tol, int max_sweeps = 1000000);

/// Bellman optimality operator applied to a Q table.
Mat bellman_optimality(const GridMdp& mdp, const Mat& q);

/// (G Q - G^pi Q) and (HQ - H^pi Q) L1 norms under uniform sampling, plus
/// the max density ratio C_mu of the grid MDP.
struct Lemma5Check {
    double policy_evaluation_gap;
    double greedy_gap;
    double c_mu;
};
Lemma5Check lemma5_check(const GridMdp& mdp, const Mat& q, const std::vector<int>& policy);

/// Interpolated lookup of a Q table at an off-grid point (nearest cell, linear in u).
double interpolate_q(const GridMdp& mdp, const Mat& q, double x, double u);

class RiccatiDivergence : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct RiccatiSolution {
    /// Optimal cost-to-go is x' P x, so the optimal reward value is -x' P x.
    Mat p;
    /// u = -gain x
    Mat gain;
    int iterations;
};

/// Fixed point of P = Q + g A'PA - g^2 A'PB (R + g B'PB)^-1 B'PA.
RiccatiSolution riccati_oracle(const LqSpec& spec, double gamma, double tol = 1e-12, int max_iterations = 1000000);

/// Discounted reward of u = -gain x on the unclipped linear system.
double lq_rollout_return(const LqSpec& spec, const Mat& gain, const Vec& x0, double gamma, int steps);

struct GridSearchResult {
    Vec weights;
    double objective;
};

/// Exhaustive search of (1/N)||Phi a - y||^2 over |a_j| <= bound on a
/// lattice with the given step (two columns only).
GridSearchResult grid_search_box_ls(const Mat& phi, const Vec& y, double bound, double step);

}  // namespace randpol::oracles
