#pragma once

#include <cstdint>
#include <vector>

#include "protonet/xuilvq.hpp"

namespace protonet {

/// Memory and runtime scaling study of a single XuILVQ learner on synthetic
/// blobs, varying the number of features and then the number of classes.
struct BenchConfig {
  std::vector<std::size_t> features{5, 10, 20, 40};
  std::vector<std::size_t> classes{2, 4, 8};
  std::size_t base_features = 10;
  std::size_t base_classes = 2;
  std::size_t n_samples = 2000;
  double separation = 10.0;
  std::size_t runs = 5;
  std::uint64_t seed = 1;
  XuIlvqParams learner;

  void validate() const;
};

struct BenchRow {
  std::size_t n_features = 0;
  std::size_t n_classes = 0;
  /// Medians over the runs. protos is the prototype count averaged over the
  /// stream (memory held while learning), bytes = protos x (d + 1) x 8.
  double protos = 0.0;
  double bytes = 0.0;
  double wall_ms = 0.0;
};

struct BenchMeasurement {
  double mean_protos = 0.0;
  std::size_t final_protos = 0;
  double wall_ms = 0.0;
};

/// Trains one model on one synthetic stream and times it.
BenchMeasurement measure_once(std::size_t n_features, std::size_t n_classes, const BenchConfig& cfg,
                              std::uint64_t seed);

/// Feature sweep rows (n_classes = base_classes) followed by class sweep
/// rows (n_features = base_features).
std::vector<BenchRow> run_bench(const BenchConfig& cfg);

double median_of(std::vector<double> values);

}  // namespace protonet
