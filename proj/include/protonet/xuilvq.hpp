#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "protonet/prototypes.hpp"

namespace protonet {

/// Learning-rate schedule as a function of the winner's win count M.
struct RateRule {
  enum class Kind { harmonic, constant };
  Kind kind = Kind::harmonic;
  /// harmonic: rate = 1 / (scale * M). constant: rate = scale.
  double scale = 1.0;

  [[nodiscard]] double rate(std::uint64_t win_count) const {
    return kind == Kind::constant ? scale : 1.0 / (scale * static_cast<double>(win_count));
  }

  friend bool operator==(const RateRule&, const RateRule&) = default;
};

struct XuIlvqParams {
  std::uint32_t age_old = 400;
  std::uint64_t lambda = 600;
  RateRule eta1{RateRule::Kind::harmonic, 1.0};
  RateRule eta2{RateRule::Kind::harmonic, 100.0};
  std::size_t k = 3;
  /// A sample that coincides with its same-class winner updates it instead
  /// of being inserted as a zero-distance copy.
  bool merge_duplicates = false;

  /// Throws ConfigError when a field is out of range.
  void validate() const;

  friend bool operator==(const XuIlvqParams&, const XuIlvqParams&) = default;
};

enum class LearnOutcome { buffered_init, inserted_new_prototype, updated_winner };

/// Result of the adaptive threshold computation. nullopt means "undefined"
/// (the prototype has no neighbors).
using Threshold = std::optional<double>;

/// Adaptive insertion threshold of one prototype, computed from the distances
/// to its graph neighbors. Throws UnknownPrototype.
Threshold compute_threshold(const PrototypeGraph& graph, PrototypeId id);

/// Incremental learning vector quantization with adaptive thresholds,
/// edge aging and periodic denoising.
///
/// A single-owner value type: copying yields an independent model.
class XuIlvqModel {
 public:
  XuIlvqModel() = default;
  explicit XuIlvqModel(XuIlvqParams params);

  LearnOutcome learn_one(std::span<const double> x, Label y);
  LearnOutcome learn_one(const Sample& s) { return learn_one(s.features, s.label); }

  /// Label of the inverse-distance vote among the k nearest prototypes, or
  /// nullopt when the model holds no prototypes.
  [[nodiscard]] std::optional<Label> predict_one(std::span<const double> x) const;

  /// Softmax-normalised class scores of the k nearest prototypes, sorted by
  /// label. An exact hit yields a single entry with probability 1.
  [[nodiscard]] std::vector<std::pair<Label, double>> predict_proba(std::span<const double> x) const;

  /// Removes neighbor-less prototypes and single-neighbor prototypes whose win
  /// count is below half the mean. Returns the number removed.
  std::size_t denoise();

  /// Detached copy of the current prototype set, in id order.
  [[nodiscard]] std::vector<LabeledVector> export_prototypes() const;

  [[nodiscard]] const PrototypeGraph& graph() const { return graph_; }
  [[nodiscard]] const XuIlvqParams& params() const { return params_; }
  [[nodiscard]] std::uint64_t step_index() const { return step_index_; }
  [[nodiscard]] std::size_t size() const { return graph_.size(); }
  [[nodiscard]] std::size_t dimension() const { return graph_.dimension(); }

  /// Winner and runner-up ids for x (ties to the lower id). Requires at least
  /// two prototypes.
  [[nodiscard]] std::pair<PrototypeId, PrototypeId> winner_and_runner_up(std::span<const double> x) const;

  /// Reassembles a model from serialized state.
  static XuIlvqModel restore(XuIlvqParams params, PrototypeGraph graph, std::uint64_t step_index);

  friend bool operator==(const XuIlvqModel& a, const XuIlvqModel& b) {
    return a.params_ == b.params_ && a.step_index_ == b.step_index_ && a.graph_ == b.graph_;
  }

 private:
  void check_dimension(std::span<const double> x) const;
  struct Search {
    PrototypeId s1 = 0;
    PrototypeId s2 = 0;
    bool label_seen = false;
  };
  /// Winner/runner-up scan that also reports whether `probe` occurs as a label.
  [[nodiscard]] Search search(std::span<const double> x, std::optional<Label> probe) const;
  [[nodiscard]] std::vector<std::pair<double, PrototypeId>> nearest(std::span<const double> x, std::size_t k) const;

  XuIlvqParams params_;
  PrototypeGraph graph_;
  std::uint64_t step_index_ = 0;
};

}  // namespace protonet
