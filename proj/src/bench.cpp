#include "protonet/bench.hpp"

#include <algorithm>
#include <chrono>

#include "protonet/dataset.hpp"
#include "protonet/error.hpp"
#include "protonet/metrics.hpp"

namespace protonet {

void BenchConfig::validate() const {
  if (features.empty() || classes.empty()) throw ConfigError("bench.features and bench.classes must be non-empty");
  if (runs < 1) throw ConfigError("bench.runs must be >= 1");
  if (n_samples < 1) throw ConfigError("bench.n_samples must be >= 1");
  learner.validate();
}

double median_of(std::vector<double> values) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  const std::size_t mid = values.size() / 2;
  return values.size() % 2 == 1 ? values[mid] : 0.5 * (values[mid - 1] + values[mid]);
}

BenchMeasurement measure_once(std::size_t n_features, std::size_t n_classes, const BenchConfig& cfg,
                              std::uint64_t seed) {
  SynthSource src;
  src.n_features = n_features;
  src.n_classes = n_classes;
  src.n_samples = cfg.n_samples;
  src.separation = cfg.separation;
  src.seed = seed;
  const Dataset data = synth_dataset(src);

  XuIlvqModel model(cfg.learner);
  double proto_sum = 0.0;
  const auto start = std::chrono::steady_clock::now();
  for (const Sample& s : data.samples) {
    model.learn_one(s);
    proto_sum += static_cast<double>(model.size());
  }
  const auto stop = std::chrono::steady_clock::now();

  BenchMeasurement m;
  m.mean_protos = proto_sum / static_cast<double>(data.size());
  m.final_protos = model.size();
  m.wall_ms = std::chrono::duration<double, std::milli>(stop - start).count();
  return m;
}

std::vector<BenchRow> run_bench(const BenchConfig& cfg) {
  cfg.validate();
  const auto row_for = [&](std::size_t f, std::size_t c) {
    std::vector<double> protos;
    std::vector<double> bytes;
    std::vector<double> wall;
    for (std::size_t r = 0; r < cfg.runs; ++r) {
      const BenchMeasurement m = measure_once(f, c, cfg, cfg.seed + r);
      protos.push_back(m.mean_protos);
      bytes.push_back(m.mean_protos * static_cast<double>(prototype_bytes(1, f)));
      wall.push_back(m.wall_ms);
    }
    return BenchRow{f, c, median_of(protos), median_of(bytes), median_of(wall)};
  };

  std::vector<BenchRow> rows;
  for (std::size_t f : cfg.features) rows.push_back(row_for(f, cfg.base_classes));
  for (std::size_t c : cfg.classes) rows.push_back(row_for(cfg.base_features, c));
  return rows;
}

}  // namespace protonet
