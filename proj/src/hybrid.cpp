#include "protonet/hybrid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "protonet/error.hpp"

namespace protonet {

void GaussianNb::learn(std::span<const double> features, Label label) {
  if (dimension_ == 0) dimension_ = features.size();
  if (features.size() != dimension_ || dimension_ == 0) {
    throw DimensionError("naive bayes: expected dimension " + std::to_string(dimension_) + ", got " +
                         std::to_string(features.size()));
  }
  auto it = std::lower_bound(classes_.begin(), classes_.end(), label,
                             [](const ClassStats& s, Label l) { return s.label < l; });
  if (it == classes_.end() || it->label != label) {
    ClassStats fresh;
    fresh.label = label;
    fresh.mean.assign(dimension_, 0.0);
    fresh.m2.assign(dimension_, 0.0);
    it = classes_.insert(it, std::move(fresh));
  }
  ClassStats& s = *it;
  ++s.count;
  const double n = static_cast<double>(s.count);
  for (std::size_t j = 0; j < dimension_; ++j) {
    const double delta = features[j] - s.mean[j];
    s.mean[j] += delta / n;
    s.m2[j] += delta * (features[j] - s.mean[j]);
  }
  ++total_;
}

std::optional<Label> GaussianNb::predict(std::span<const double> features) const {
  if (total_ == 0) return std::nullopt;
  if (features.size() != dimension_) {
    throw DimensionError("naive bayes: expected dimension " + std::to_string(dimension_) + ", got " +
                         std::to_string(features.size()));
  }
  const double log_two_pi = std::log(2.0 * std::numbers::pi);
  std::optional<Label> best;
  double best_score = -std::numeric_limits<double>::infinity();
  for (const ClassStats& s : classes_) {
    double score = std::log(static_cast<double>(s.count) / static_cast<double>(total_));
    for (std::size_t j = 0; j < dimension_; ++j) {
      const double var = std::max(s.variance(j), kVarianceFloor);
      const double diff = features[j] - s.mean[j];
      score -= 0.5 * (log_two_pi + std::log(var) + diff * diff / var);
    }
    if (!best || score > best_score) {
      best_score = score;
      best = s.label;
    }
  }
  return best;
}

std::uint64_t GaussianNb::count(Label label) const {
  const ClassStats* s = stats(label);
  return s == nullptr ? 0 : s->count;
}

const GaussianNb::ClassStats* GaussianNb::stats(Label label) const {
  auto it = std::lower_bound(classes_.begin(), classes_.end(), label,
                             [](const ClassStats& s, Label l) { return s.label < l; });
  return (it == classes_.end() || it->label != label) ? nullptr : &*it;
}

HybridNodeModel::HybridNodeModel(XuIlvqParams params, std::unique_ptr<IncrementalClassifier> predictor)
    : prototyper_(params), predictor_(predictor ? std::move(predictor) : std::make_unique<GaussianNb>()) {}

HybridNodeModel::HybridNodeModel(const HybridNodeModel& other)
    : prototyper_(other.prototyper_), predictor_(other.predictor_->clone()), dimension_(other.dimension_) {}

HybridNodeModel& HybridNodeModel::operator=(const HybridNodeModel& other) {
  if (this != &other) {
    prototyper_ = other.prototyper_;
    predictor_ = other.predictor_->clone();
    dimension_ = other.dimension_;
  }
  return *this;
}

void HybridNodeModel::check_dimension(std::span<const double> x) const {
  if (x.empty() || (dimension_ != 0 && x.size() != dimension_)) {
    throw DimensionError("hybrid: expected dimension " + std::to_string(dimension_) + ", got " +
                         std::to_string(x.size()));
  }
}

void HybridNodeModel::learn(std::span<const double> features, Label label) {
  check_dimension(features);
  prototyper_.learn_one(features, label);
  predictor_->learn(features, label);
  dimension_ = features.size();
}

void HybridNodeModel::absorb_prototype(const LabeledVector& proto) {
  check_dimension(proto.weights);
  predictor_->learn(proto.weights, proto.label);
  dimension_ = proto.weights.size();
}

}  // namespace protonet
