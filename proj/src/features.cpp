#include "randpol/features.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "randpol/errors.hpp"

namespace randpol {

InputNormalizer::InputNormalizer(const Vec& lower, const Vec& upper) {
    require(lower.size() == upper.size(), "normalizer bounds must have equal dimension");
    Vec scale(lower.size());
    Vec offset(lower.size());
    for (Eigen::Index i = 0; i < lower.size(); ++i) {
        const double width = upper[i] - lower[i];
        require(width >= 0.0 && std::isfinite(width), "normalizer requires finite lower <= upper");
        if (width > 0.0) {
            scale[i] = 2.0 / width;
            offset[i] = -1.0 - 2.0 * lower[i] / width;
        } else {
            scale[i] = 0.0;
            offset[i] = 0.0;
        }
    }
    scale_ = std::move(scale);
    offset_ = std::move(offset);
}

Vec InputNormalizer::apply(const Vec& z) const {
    if (!scale_) return z;
    return scale_->cwiseProduct(z) + *offset_;
}

Vec InputNormalizer::jacobian_diagonal(std::size_t dim) const {
    if (!scale_) return Vec::Ones(static_cast<Eigen::Index>(dim));
    return *scale_;
}

FeatureSet::FeatureSet(std::vector<FeatureParam> params, int input_dim, InputNormalizer normalizer)
    : input_dim_(input_dim), normalizer_(std::move(normalizer)) {
    require(input_dim >= 1, "feature input dimension must be >= 1");
    require(!params.empty(), "a feature set needs at least one feature");
    if (normalizer_.scale()) require(normalizer_.scale()->size() == input_dim, "normalizer dimension mismatch");
    const auto count = static_cast<Eigen::Index>(params.size());
    frequencies_.resize(count, input_dim);
    phases_.resize(count);
    for (Eigen::Index j = 0; j < count; ++j) {
        const auto& p = params[static_cast<std::size_t>(j)];
        require(p.frequency.size() == input_dim, "feature frequency dimension mismatch");
        require(p.phase >= 0.0 && p.phase < 2.0 * std::numbers::pi, "feature phase must lie in [0, 2pi)");
        frequencies_.row(j) = p.frequency.transpose();
        phases_[j] = p.phase;
    }
}

std::vector<FeatureParam> FeatureSet::params() const {
    std::vector<FeatureParam> out;
    out.reserve(size());
    for (Eigen::Index j = 0; j < phases_.size(); ++j) out.push_back({frequencies_.row(j).transpose(), phases_[j]});
    return out;
}

void FeatureSet::check_dim(const Vec& z) const {
    if (z.size() != input_dim_)
        throw InvalidArgument("feature input has dimension " + std::to_string(z.size()) + ", expected " +
                              std::to_string(input_dim_));
}

Vec FeatureSet::activations(const Vec& z) const {
    check_dim(z);
    return frequencies_ * normalizer_.apply(z) + phases_;
}

Vec FeatureSet::eval(const Vec& z) const { return activations(z).array().cos().matrix(); }

Mat FeatureSet::eval_batch(const Mat& inputs) const {
    if (inputs.cols() != input_dim_) throw InvalidArgument("feature batch has wrong input dimension");
    Mat normalized = inputs;
    if (normalizer_.scale()) {
        normalized = (inputs.array().rowwise() * normalizer_.scale()->transpose().array()).rowwise() +
                     normalizer_.offset()->transpose().array();
    }
    Mat act = normalized * frequencies_.transpose();
    act.rowwise() += phases_.transpose();
    return act.array().cos().matrix();
}

Mat FeatureSet::gradient(const Vec& z) const {
    const Vec s = activations(z).array().sin().matrix();
    Mat grad = -(s.asDiagonal() * frequencies_);
    if (normalizer_.scale()) grad = grad * normalizer_.scale()->asDiagonal();
    return grad;
}

FeatureSet sample_feature_params(const FeatureDistribution& dist, std::size_t count, Rng& rng,
                                 InputNormalizer normalizer) {
    require(count >= 1, "feature count must be >= 1");
    require(dist.input_dim >= 1, "feature input dimension must be >= 1");
    require(dist.bandwidth > 0.0 && std::isfinite(dist.bandwidth), "feature bandwidth must be positive");
    std::vector<FeatureParam> params(count);
    for (auto& p : params) {
        p.frequency.resize(dist.input_dim);
        for (int d = 0; d < dist.input_dim; ++d) p.frequency[d] = rng.normal(0.0, dist.bandwidth);
        p.phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
        // uniform_real_distribution can return the upper bound after rounding
        if (p.phase >= 2.0 * std::numbers::pi) p.phase = 0.0;
    }
    return FeatureSet(std::move(params), dist.input_dim, std::move(normalizer));
}

Vec eval_features(const FeatureSet& fs, const Vec& z) { return fs.eval(z); }

Mat feature_gradient(const FeatureSet& fs, const Vec& z) { return fs.gradient(z); }

double median_heuristic_bandwidth(int dim) {
    require(dim >= 1, "dimension must be >= 1");
    constexpr int probe = 256;
    Rng rng(0x5eed'b0d'1ULL + static_cast<std::uint64_t>(dim));
    Mat pts(probe, dim);
    for (int i = 0; i < probe; ++i)
        for (int d = 0; d < dim; ++d) pts(i, d) = rng.uniform(-1.0, 1.0);
    std::vector<double> dists;
    dists.reserve(probe * (probe - 1) / 2);
    for (int i = 0; i < probe; ++i)
        for (int k = i + 1; k < probe; ++k) dists.push_back((pts.row(i) - pts.row(k)).norm());
    auto mid = dists.begin() + static_cast<std::ptrdiff_t>(dists.size() / 2);
    std::nth_element(dists.begin(), mid, dists.end());
    return 1.0 / *mid;
}

}  // namespace randpol
