#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <optional>
#include <vector>

#include "randpol/rng.hpp"

namespace randpol {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// One random Fourier feature: cos(frequency . z + phase).
struct FeatureParam {
    Vec frequency;
    double phase = 0.0;
};

struct FeatureDistribution {
    double bandwidth = 1.0;
    int input_dim = 1;
};

/// Affine map of a box onto [-1, 1]^d. Degenerate coordinates (lower ==
/// upper) map to 0. Default-constructed means identity.
class InputNormalizer {
public:
    InputNormalizer() = default;
    InputNormalizer(const Vec& lower, const Vec& upper);

    bool is_identity() const { return !scale_.has_value(); }
    Vec apply(const Vec& z) const;
    /// Diagonal of d(normalized)/dz.
    Vec jacobian_diagonal(std::size_t dim) const;

    const std::optional<Vec>& scale() const { return scale_; }
    const std::optional<Vec>& offset() const { return offset_; }

private:
    std::optional<Vec> scale_;
    std::optional<Vec> offset_;
};

/// Immutable set of J cosine features over an input of fixed dimension.
class FeatureSet {
public:
    FeatureSet(std::vector<FeatureParam> params, int input_dim, InputNormalizer normalizer = {});

    std::size_t size() const { return static_cast<std::size_t>(phases_.size()); }
    int input_dim() const { return input_dim_; }
    const InputNormalizer& normalizer() const { return normalizer_; }

    /// Frequencies as rows (J x d).
    const Mat& frequencies() const { return frequencies_; }
    const Vec& phases() const { return phases_; }
    std::vector<FeatureParam> params() const;

    Vec eval(const Vec& z) const;
    /// Rows are inputs; returns N x J.
    Mat eval_batch(const Mat& inputs) const;
    /// J x d Jacobian with respect to the raw (un-normalized) input.
    Mat gradient(const Vec& z) const;

    /// Pre-activation frequency . normalize(z) + phase.
    Vec activations(const Vec& z) const;

private:
    void check_dim(const Vec& z) const;

    int input_dim_;
    Mat frequencies_;
    Vec phases_;
    InputNormalizer normalizer_;
};

/// Draws `count` features: frequencies ~ N(0, bandwidth^2 I), phases ~ U[0, 2pi).
FeatureSet sample_feature_params(const FeatureDistribution& dist, std::size_t count, Rng& rng,
                                 InputNormalizer normalizer = {});

Vec eval_features(const FeatureSet& fs, const Vec& z);
Mat feature_gradient(const FeatureSet& fs, const Vec& z);

/// 1 / median pairwise distance of a fixed 256-point uniform probe of [-1,1]^dim.
double median_heuristic_bandwidth(int dim);

}  // namespace randpol
