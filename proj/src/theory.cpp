#include "randpol/theory.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "randpol/errors.hpp"

namespace randpol::theory {

namespace {

// Ceiling that treats values within a few ulps of an integer as that
// integer, so exact cases such as log(1/8)/log(1/2) = 3 are not bumped to 4.
double snapped_ceil(double x) {
    const double nearest = std::round(x);
    if (std::abs(x - nearest) <= 1e-12 * std::max(1.0, std::abs(x))) return nearest;
    return std::ceil(x);
}

void check_unit_open(double v, const char* name) {
    require(v > 0.0 && v < 1.0, std::string(name) + " must lie in (0, 1)");
}

void check_positive(double v, const char* name) {
    require(v > 0.0 && std::isfinite(v), std::string(name) + " must be positive");
}

}  // namespace

void TheoryInputs::validate() const {
    check_positive(epsilon, "epsilon");
    check_unit_open(delta, "delta");
    check_unit_open(gamma, "gamma");
    check_positive(q_max, "q_max");
    check_positive(c_mu, "c_mu");
    check_positive(c_bound, "c_bound");
    check_positive(c_prime, "c_prime");
    require(l_u >= 0.0 && std::isfinite(l_u), "l_u must be nonnegative");
    require(j_q >= 1, "j_q must be >= 1");
    require(j_pi >= 1, "j_pi must be >= 1");
    require(n_for_m >= 1, "n_for_m must be >= 1");
    check_unit_open(q_good, "q");
}

double k_star_raw(double epsilon, double c_mu, double q_max, double gamma) {
    check_positive(epsilon, "epsilon");
    check_positive(c_mu, "c_mu");
    check_positive(q_max, "q_max");
    check_unit_open(gamma, "gamma");
    return (std::log(c_mu * epsilon) - std::log(2.0 * q_max)) / std::log(gamma);
}

int k_star(double epsilon, double c_mu, double q_max, double gamma) {
    const double raw = snapped_ceil(k_star_raw(epsilon, c_mu, q_max, gamma));
    return raw < 1.0 ? 1 : static_cast<int>(raw);
}

SampleBounds sample_bounds(const TheoryInputs& in) {
    in.validate();
    const double eps = in.epsilon;
    const double d = in.delta;
    const double v = in.q_max;
    const double e = std::numbers::e;
    const double jq = in.j_q;
    const double jpi = in.j_pi;

    const double jq0 = std::pow(5.0 * in.c_bound / eps * (1.0 + std::sqrt(2.0 * std::log(5.0 / d))), 2);
    const double jpi0 = std::pow(3.0 * in.l_u * in.c_prime / eps * (1.0 + std::sqrt(2.0 * std::log(3.0 / d))), 2);
    const double m0 = 2.0 * v * v / std::pow(eps / 5.0, 2) * std::log(10.0 * in.n_for_m / d);
    // log of the product, so the J-th power never overflows
    const double nq0 = 128.0 * v * v / std::pow(eps / 5.0, 2) *
                       (std::log(40.0 * e * (jq + 1.0) / d) + jq * std::log(2.0 * e * v / (eps / 5.0)));
    const double npi0 = 128.0 * v * v / std::pow(eps / 3.0, 2) *
                        (std::log(24.0 * e * (jpi + 1.0) / d) + jpi * std::log(2.0 * e * v / std::pow(eps / 3.0, 2)));
    // the N bounds turn negative once eps is large; a count is at least 1
    auto count = [](double x) { return std::max(1.0, snapped_ceil(x)); };
    return SampleBounds{count(jq0), count(jpi0), count(m0), count(nq0), count(npi0)};
}

std::optional<double> delta_prime(double delta, int k_star) {
    require(delta > 0.0 && delta < 1.0, "delta must lie in (0, 1)");
    require(k_star >= 1, "K* must be >= 1");
    if (k_star == 1) return std::nullopt;
    return 1.0 - std::pow(0.5 + 0.5 * delta, 1.0 / (k_star - 1));
}

double min_iterations_raw(double delta, double q_good, int k_star) {
    require(delta >= 0.0 && delta < 1.0, "delta must lie in [0, 1)");
    check_unit_open(q_good, "q");
    require(k_star >= 1, "K* must be >= 1");
    return std::log(4.0 / ((0.5 - 0.5 * delta) * (1.0 - q_good) * std::pow(q_good, k_star - 1)));
}

int min_iterations(double delta, double q_good, int k_star) {
    return static_cast<int>(snapped_ceil(min_iterations_raw(delta, q_good, k_star)));
}

ChainDistribution chain_stationary(double q_good, int k_star) {
    check_unit_open(q_good, "q");
    require(k_star >= 1, "K* must be >= 1");
    ChainDistribution out{k_star, std::vector<double>(static_cast<std::size_t>(k_star), 0.0)};
    if (k_star == 1) {
        out.probabilities[0] = 1.0;
        return out;
    }
    out.probabilities[0] = std::pow(q_good, k_star - 1);
    for (int i = 2; i <= k_star - 1; ++i)
        out.probabilities[static_cast<std::size_t>(i - 1)] = (1.0 - q_good) * std::pow(q_good, k_star - i);
    out.probabilities[static_cast<std::size_t>(k_star - 1)] = 1.0 - q_good;
    return out;
}

Mat chain_transition(double q_good, int k_star) {
    require(q_good >= 0.0 && q_good <= 1.0, "q must lie in [0, 1]");
    require(k_star >= 1, "K* must be >= 1");
    Mat p = Mat::Zero(k_star, k_star);
    for (int i = 0; i < k_star; ++i) {
        p(i, std::max(i - 1, 0)) += q_good;
        p(i, k_star - 1) += 1.0 - q_good;
    }
    return p;
}

std::vector<double> chain_distribution_after(double q_good, int k_star, int steps) {
    require(steps >= 0, "steps must be >= 0");
    const Mat p = chain_transition(q_good, k_star);
    Eigen::RowVectorXd dist = Eigen::RowVectorXd::Zero(k_star);
    dist[k_star - 1] = 1.0;
    for (int s = 0; s < steps; ++s) dist = dist * p;
    return {dist.data(), dist.data() + dist.size()};
}

std::vector<double> simulate_chain(double q_good, int k_star, long long steps, Rng& rng) {
    require(q_good >= 0.0 && q_good <= 1.0, "q must lie in [0, 1]");
    require(k_star >= 1, "K* must be >= 1");
    require(steps >= 1, "steps must be >= 1");
    std::vector<long long> visits(static_cast<std::size_t>(k_star), 0);
    int state = k_star;
    for (long long s = 0; s < steps; ++s) {
        state = rng.bernoulli(q_good) ? std::max(state - 1, 1) : k_star;
        ++visits[static_cast<std::size_t>(state - 1)];
    }
    std::vector<double> freq(visits.size());
    for (std::size_t i = 0; i < visits.size(); ++i) freq[i] = static_cast<double>(visits[i]) / static_cast<double>(steps);
    return freq;
}

double total_variation(const std::vector<double>& a, const std::vector<double>& b) {
    require(a.size() == b.size(), "distributions must have equal support");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
    return 0.5 * s;
}

double mixing_time_bound(double delta_prime, double q_good, int k_star) {
    check_unit_open(delta_prime, "delta'");
    check_unit_open(q_good, "q");
    require(k_star >= 1, "K* must be >= 1");
    return std::log(1.0 / (delta_prime * (1.0 - q_good) * std::pow(q_good, k_star - 1)));
}

std::optional<int> exact_mixing_time(double delta_prime, double q_good, int k_star, int max_steps) {
    check_unit_open(delta_prime, "delta'");
    const auto mu = chain_stationary(q_good, k_star).probabilities;
    const Mat p = chain_transition(q_good, k_star);
    Eigen::RowVectorXd dist = Eigen::RowVectorXd::Zero(k_star);
    dist[k_star - 1] = 1.0;
    for (int k = 0; k <= max_steps; ++k) {
        if (total_variation({dist.data(), dist.data() + dist.size()}, mu) <= delta_prime) return k;
        dist = dist * p;
    }
    return std::nullopt;
}

double error_propagation_bound(double epsilon, int k, double gamma, double c_mu, double q_max) {
    require(epsilon >= 0.0 && std::isfinite(epsilon), "epsilon must be nonnegative");
    require(k >= 0, "K must be >= 0");
    check_unit_open(gamma, "gamma");
    check_positive(c_mu, "c_mu");
    check_positive(q_max, "q_max");
    const double horizon = (1.0 - std::pow(gamma, k + 1)) / ((1.0 - gamma) * (1.0 - gamma));
    return 2.0 * horizon * (c_mu * epsilon + std::pow(gamma, 0.5 * k) * 2.0 * q_max);
}

TheoryReport theory_report(const TheoryInputs& inputs) {
    inputs.validate();
    TheoryReport r{inputs, 0.0, 0, std::nullopt, {}, 0, {}, std::nullopt, 0, 0.0};
    r.k_star_raw = k_star_raw(inputs.epsilon, inputs.c_mu, inputs.q_max, inputs.gamma);
    r.k_star = k_star(inputs.epsilon, inputs.c_mu, inputs.q_max, inputs.gamma);
    r.delta_prime = delta_prime(inputs.delta, r.k_star);
    TheoryInputs at = inputs;
    if (r.delta_prime) at.delta = *r.delta_prime;
    r.bounds = sample_bounds(at);
    r.min_iterations = min_iterations(inputs.delta, inputs.q_good, r.k_star);
    r.stationary = chain_stationary(inputs.q_good, r.k_star);
    if (r.delta_prime) r.mixing_time_bound = mixing_time_bound(*r.delta_prime, inputs.q_good, r.k_star);
    r.propagation_k = std::max(r.k_star, r.min_iterations);
    r.propagation_bound =
        error_propagation_bound(inputs.epsilon, r.propagation_k, inputs.gamma, inputs.c_mu, inputs.q_max);
    return r;
}

}  // namespace randpol::theory
