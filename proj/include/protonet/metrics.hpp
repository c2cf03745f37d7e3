#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "protonet/prototypes.hpp"

namespace protonet {

struct ConfusionCounts {
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  std::uint64_t fn = 0;
  std::uint64_t tn = 0;

  friend bool operator==(const ConfusionCounts&, const ConfusionCounts&) = default;
};

/// 2tp / (2tp + fp + fn); 0 when the denominator is 0.
double f1(const ConfusionCounts& c);

/// A prequential outcome: what was predicted (nullopt = abstained) and the truth.
struct Outcome {
  std::optional<Label> predicted;
  Label actual = 0;
};

/// Confusion matrix over dense labels [0, n_classes) plus an abstain column.
///
/// With two classes, F1 is reported for the positive class 1. With more,
/// it is the macro average over classes that occur as truth or prediction.
/// An abstention never earns a true positive, so it lands in fn for the
/// true class.
class ConfusionMatrix {
 public:
  explicit ConfusionMatrix(std::size_t n_classes = 2);

  void add(const Outcome& o);
  void add(std::optional<Label> predicted, Label actual) { add(Outcome{predicted, actual}); }

  [[nodiscard]] ConfusionCounts counts_for(Label positive) const;
  [[nodiscard]] double f1_score() const;

  [[nodiscard]] std::uint64_t total() const { return total_; }
  [[nodiscard]] std::uint64_t abstains() const;
  [[nodiscard]] std::uint64_t correct() const;
  [[nodiscard]] std::size_t n_classes() const { return n_classes_; }
  /// Binary tallies for the positive class (tp, fp, fn, tn over
  /// non-abstained predictions only).
  [[nodiscard]] ConfusionCounts binary_tallies() const;

 private:
  [[nodiscard]] std::uint64_t cell(std::size_t actual, std::size_t predicted) const {
    return cells_[actual * (n_classes_ + 1) + predicted];
  }

  std::size_t n_classes_;
  std::vector<std::uint64_t> cells_;  // row: actual, column: predicted (last column = abstain)
  std::uint64_t total_ = 0;
};

/// F1 over a batch of outcomes, same conventions as ConfusionMatrix.
double f1_of(std::span<const Outcome> outcomes, std::size_t n_classes);

/// Bounded FIFO of the most recent prequential outcomes.
class PrequentialWindow {
 public:
  explicit PrequentialWindow(std::size_t capacity = 50);
  void push(const Outcome& o);
  [[nodiscard]] double f1_score(std::size_t n_classes) const;
  [[nodiscard]] std::size_t size() const { return items_.size(); }
  [[nodiscard]] std::size_t capacity() const { return capacity_; }
  [[nodiscard]] const std::deque<Outcome>& items() const { return items_; }

 private:
  std::size_t capacity_;
  std::deque<Outcome> items_;
};

/// First index whose value reaches 85% of the series maximum; nullopt when
/// the series is empty or its maximum is 0.
std::optional<std::size_t> convergence_time(std::span<const double> series, double fraction = 0.85);

struct StorageFootprint {
  std::size_t count = 0;
  std::size_t bytes = 0;

  friend bool operator==(const StorageFootprint&, const StorageFootprint&) = default;
};

/// count x (d + 1) x 8 bytes: each prototype stores d doubles plus its label.
StorageFootprint storage_complexity(const PrototypeGraph& graph);

inline std::size_t prototype_bytes(std::size_t count, std::size_t dimension) { return count * (dimension + 1) * 8; }

}  // namespace protonet
