#include "protonet/metrics.hpp"

#include <algorithm>
#include <stdexcept>

namespace protonet {

double f1(const ConfusionCounts& c) {
  const std::uint64_t denom = 2 * c.tp + c.fp + c.fn;
  return denom == 0 ? 0.0 : static_cast<double>(2 * c.tp) / static_cast<double>(denom);
}

ConfusionMatrix::ConfusionMatrix(std::size_t n_classes)
    : n_classes_(n_classes), cells_(n_classes * (n_classes + 1), 0) {
  if (n_classes == 0) throw std::invalid_argument("ConfusionMatrix needs at least one class");
}

void ConfusionMatrix::add(const Outcome& o) {
  if (o.actual < 0 || static_cast<std::size_t>(o.actual) >= n_classes_) {
    throw std::out_of_range("actual label outside [0, n_classes)");
  }
  std::size_t col = n_classes_;
  if (o.predicted) {
    if (*o.predicted < 0 || static_cast<std::size_t>(*o.predicted) >= n_classes_) {
      throw std::out_of_range("predicted label outside [0, n_classes)");
    }
    col = static_cast<std::size_t>(*o.predicted);
  }
  ++cells_[static_cast<std::size_t>(o.actual) * (n_classes_ + 1) + col];
  ++total_;
}

ConfusionCounts ConfusionMatrix::counts_for(Label positive) const {
  const auto p = static_cast<std::size_t>(positive);
  ConfusionCounts c;
  for (std::size_t a = 0; a < n_classes_; ++a) {
    for (std::size_t col = 0; col <= n_classes_; ++col) {
      const std::uint64_t v = cell(a, col);
      if (a == p && col == p) {
        c.tp += v;
      } else if (a == p) {
        c.fn += v;
      } else if (col == p) {
        c.fp += v;
      } else {
        c.tn += v;
      }
    }
  }
  return c;
}

double ConfusionMatrix::f1_score() const {
  if (n_classes_ == 2) return f1(counts_for(1));
  double sum = 0.0;
  std::size_t seen = 0;
  for (std::size_t c = 0; c < n_classes_; ++c) {
    const ConfusionCounts counts = counts_for(static_cast<Label>(c));
    if (counts.tp + counts.fp + counts.fn == 0) continue;
    sum += f1(counts);
    ++seen;
  }
  return seen == 0 ? 0.0 : sum / static_cast<double>(seen);
}

std::uint64_t ConfusionMatrix::abstains() const {
  std::uint64_t n = 0;
  for (std::size_t a = 0; a < n_classes_; ++a) n += cell(a, n_classes_);
  return n;
}

std::uint64_t ConfusionMatrix::correct() const {
  std::uint64_t n = 0;
  for (std::size_t a = 0; a < n_classes_; ++a) n += cell(a, a);
  return n;
}

ConfusionCounts ConfusionMatrix::binary_tallies() const {
  const std::size_t p = n_classes_ >= 2 ? 1 : 0;
  ConfusionCounts c;
  for (std::size_t a = 0; a < n_classes_; ++a) {
    for (std::size_t col = 0; col < n_classes_; ++col) {
      const std::uint64_t v = cell(a, col);
      if (a == p && col == p) {
        c.tp += v;
      } else if (a == p) {
        c.fn += v;
      } else if (col == p) {
        c.fp += v;
      } else {
        c.tn += v;
      }
    }
  }
  return c;
}

double f1_of(std::span<const Outcome> outcomes, std::size_t n_classes) {
  ConfusionMatrix m(n_classes);
  for (const Outcome& o : outcomes) m.add(o);
  return m.f1_score();
}

PrequentialWindow::PrequentialWindow(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw std::invalid_argument("window capacity must be positive");
}

void PrequentialWindow::push(const Outcome& o) {
  items_.push_back(o);
  if (items_.size() > capacity_) items_.pop_front();
}

double PrequentialWindow::f1_score(std::size_t n_classes) const {
  ConfusionMatrix m(n_classes);
  for (const Outcome& o : items_) m.add(o);
  return m.f1_score();
}

std::optional<std::size_t> convergence_time(std::span<const double> series, double fraction) {
  if (series.empty()) return std::nullopt;
  const double best = *std::max_element(series.begin(), series.end());
  if (best <= 0.0) return std::nullopt;
  const double target = fraction * best;
  for (std::size_t i = 0; i < series.size(); ++i) {
    if (series[i] >= target) return i;
  }
  return std::nullopt;
}

StorageFootprint storage_complexity(const PrototypeGraph& graph) {
  return {graph.size(), prototype_bytes(graph.size(), graph.dimension())};
}

}  // namespace protonet
