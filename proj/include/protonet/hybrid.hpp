#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "protonet/prototypes.hpp"
#include "protonet/xuilvq.hpp"

namespace protonet {

/// Contract for a stream classifier that can be slotted into the hybrid
/// node model as the predictor.
class IncrementalClassifier {
 public:
  virtual ~IncrementalClassifier() = default;

  virtual void learn(std::span<const double> features, Label label) = 0;
  /// nullopt means abstain. Must not modify the classifier.
  [[nodiscard]] virtual std::optional<Label> predict(std::span<const double> features) const = 0;
  /// Number of labeled vectors seen so far.
  [[nodiscard]] virtual std::uint64_t observed() const = 0;
  [[nodiscard]] virtual std::unique_ptr<IncrementalClassifier> clone() const = 0;
};

/// Incremental Gaussian naive Bayes with Welford accumulators per class.
class GaussianNb final : public IncrementalClassifier {
 public:
  static constexpr double kVarianceFloor = 1e-9;

  struct ClassStats {
    Label label = 0;
    std::uint64_t count = 0;
    std::vector<double> mean;
    std::vector<double> m2;  // sum of squared deviations from the running mean

    [[nodiscard]] double variance(std::size_t j) const {
      return count == 0 ? 0.0 : m2[j] / static_cast<double>(count);
    }
  };

  GaussianNb() = default;

  void learn(std::span<const double> features, Label label) override;
  [[nodiscard]] std::optional<Label> predict(std::span<const double> features) const override;
  [[nodiscard]] std::uint64_t observed() const override { return total_; }
  [[nodiscard]] std::unique_ptr<IncrementalClassifier> clone() const override {
    return std::make_unique<GaussianNb>(*this);
  }

  [[nodiscard]] std::uint64_t count(Label label) const;
  [[nodiscard]] const ClassStats* stats(Label label) const;
  [[nodiscard]] const std::vector<ClassStats>& classes() const { return classes_; }
  [[nodiscard]] std::size_t dimension() const { return dimension_; }

 private:
  std::size_t dimension_ = 0;
  std::uint64_t total_ = 0;
  std::vector<ClassStats> classes_;  // sorted by label
};

/// Naive Bayes decision as a free function over the accumulator state.
inline std::optional<Label> nb_predict(const GaussianNb& state, std::span<const double> x) { return state.predict(x); }

/// ILVQ maintains the shareable prototype set; a separate classifier predicts.
/// Local samples reach both; prototypes received from peers reach only the
/// predictor.
class HybridNodeModel {
 public:
  explicit HybridNodeModel(XuIlvqParams params, std::unique_ptr<IncrementalClassifier> predictor = nullptr);

  HybridNodeModel(const HybridNodeModel& other);
  HybridNodeModel& operator=(const HybridNodeModel& other);
  HybridNodeModel(HybridNodeModel&&) noexcept = default;
  HybridNodeModel& operator=(HybridNodeModel&&) noexcept = default;

  void learn(std::span<const double> features, Label label);
  void learn(const Sample& s) { learn(s.features, s.label); }
  void absorb_prototype(const LabeledVector& proto);

  [[nodiscard]] std::optional<Label> predict(std::span<const double> features) const {
    return predictor_->predict(features);
  }

  [[nodiscard]] const XuIlvqModel& prototyper() const { return prototyper_; }
  [[nodiscard]] const IncrementalClassifier& predictor() const { return *predictor_; }

 private:
  void check_dimension(std::span<const double> x) const;

  XuIlvqModel prototyper_;
  std::unique_ptr<IncrementalClassifier> predictor_;
  std::size_t dimension_ = 0;
};

inline void hybrid_learn(HybridNodeModel& model, const Sample& s) { model.learn(s); }
inline void hybrid_absorb_prototype(HybridNodeModel& model, const LabeledVector& proto) {
  model.absorb_prototype(proto);
}

}  // namespace protonet
