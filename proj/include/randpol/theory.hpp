#pragma once

#include <optional>
#include <vector>

#include "randpol/features.hpp"
#include "randpol/rng.hpp"

namespace randpol::theory {

/// Inputs to the sample-size and iteration-count calculators. v_max is
/// taken to be q_max throughout; all logarithms are natural.
struct TheoryInputs {
    double epsilon = 0.25;
    double delta = 0.5;
    double gamma = 0.5;
    double q_max = 1.0;
    double c_mu = 1.0;
    double c_bound = 1.0;
    double c_prime = 1.0;
    double l_u = 1.0;
    int j_q = 20;
    int j_pi = 20;
    /// N in the log(10 N / delta) factor of M^0.
    int n_for_m = 100;
    double q_good = 0.5;

    void validate() const;
};

/// Counts, returned as ceilings (stored as doubles; they can be large).
struct SampleBounds {
    double j_q0;
    double j_pi0;
    double m0;
    double n_q0;
    double n_pi0;
};

/// ceil((log(C_mu eps) - log(2 Q_max)) / log gamma), at least 1.
int k_star(double epsilon, double c_mu, double q_max, double gamma);

/// Uncapped formula value before the ceiling.
double k_star_raw(double epsilon, double c_mu, double q_max, double gamma);

/// Sample bounds evaluated at `inputs.delta`.
SampleBounds sample_bounds(const TheoryInputs& inputs);

/// 1 - (1/2 + delta/2)^(1/(K*-1)); empty for K* = 1 where it is undefined.
std::optional<double> delta_prime(double delta, int k_star);

/// ceil(log(4 / ((1/2 - delta/2)(1-q) q^(K*-1)))). delta may be 0.
int min_iterations(double delta, double q_good, int k_star);
double min_iterations_raw(double delta, double q_good, int k_star);

/// Stationary law of the dominating chain on {1..K*}.
struct ChainDistribution {
    int k_star;
    std::vector<double> probabilities;
};

ChainDistribution chain_stationary(double q_good, int k_star);

/// Row-stochastic transition matrix: from i go to max(i-1, 1) w.p. q, to K* w.p. 1-q.
Mat chain_transition(double q_good, int k_star);

/// Exact law of Y_steps for Y_0 = K*.
std::vector<double> chain_distribution_after(double q_good, int k_star, int steps);

/// Visit frequencies over `steps` transitions of one trajectory from K*.
std::vector<double> simulate_chain(double q_good, int k_star, long long steps, Rng& rng);

double total_variation(const std::vector<double>& a, const std::vector<double>& b);

/// log(1 / (delta' (1-q) q^(K*-1))).
double mixing_time_bound(double delta_prime, double q_good, int k_star);

/// First k with ||Q^k - mu||_TV <= delta' from Y_0 = K* (searched up to max_steps).
std::optional<int> exact_mixing_time(double delta_prime, double q_good, int k_star, int max_steps = 100000);

/// 2 (1 - gamma^(K+1)) / (1-gamma)^2 [C_mu eps + gamma^(K/2) 2 Q_max].
double error_propagation_bound(double epsilon, int k, double gamma, double c_mu, double q_max);

/// Every calculator output for one set of inputs.
struct TheoryReport {
    TheoryInputs inputs;
    double k_star_raw;
    int k_star;
    std::optional<double> delta_prime;
    /// Bounds at delta' (at delta when delta' is undefined).
    SampleBounds bounds;
    int min_iterations;
    ChainDistribution stationary;
    std::optional<double> mixing_time_bound;
    /// At K = max(K*, min_iterations).
    int propagation_k;
    double propagation_bound;
};

TheoryReport theory_report(const TheoryInputs& inputs);

}  // namespace randpol::theory
