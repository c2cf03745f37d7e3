#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "protonet/dataset.hpp"
#include "protonet/gossip.hpp"
#include "protonet/metrics.hpp"
#include "protonet/rng.hpp"
#include "protonet/xuilvq.hpp"

namespace protonet {

enum class Protocol { none, random, relative_threshold };
enum class LearnerMode { fully_ilvq, hybrid };

std::string to_string(Protocol p);
std::string to_string(LearnerMode m);
Protocol protocol_from_string(const std::string& s);
LearnerMode mode_from_string(const std::string& s);

struct SimConfig {
  std::size_t n_nodes = 5;
  std::vector<std::size_t> partition_sizes{300, 300, 300, 300, 50};
  Protocol protocol = Protocol::random;
  ShareConfig share{0.2, 4};
  LearnerMode mode = LearnerMode::fully_ilvq;
  XuIlvqParams learner;
  std::size_t perf_window = 50;
  std::uint64_t seed = 1;
  std::size_t replications = 1;

  /// Throws ConfigError. dataset_size is checked against the partition total.
  void validate(std::size_t dataset_size) const;
  /// Node with the smallest partition (lowest id on ties).
  [[nodiscard]] std::size_t tagged_node() const;
};

/// One point-to-point transfer of a prototype snapshot.
struct TraceEntry {
  std::uint64_t step = 0;  ///< simulation round, 1-based
  NodeId sender = 0;
  NodeId receiver = 0;
  std::size_t prototype_count = 0;

  friend bool operator==(const TraceEntry&, const TraceEntry&) = default;
};

struct NodeResult {
  NodeId id = 0;
  std::size_t samples_processed = 0;
  /// Per local step, windowed (last perf_window predictions) and cumulative.
  std::vector<double> f1_series;
  std::vector<double> f1_cumulative;
  /// Prototype count after each local step (including the inbox drain).
  std::vector<std::size_t> prototype_counts;
  double final_f1 = 0.0;
  double final_f1_cumulative = 0.0;
  std::optional<std::size_t> convergence_step;
  std::uint64_t messages_sent = 0;
  std::uint64_t messages_received = 0;
  std::uint64_t bytes_sent = 0;
  std::uint64_t prototypes_absorbed = 0;
  std::uint64_t prototypes_dropped = 0;
  ConfusionCounts tallies;
  std::uint64_t abstains = 0;
  StorageFootprint final_storage;
};

struct RunResult {
  std::uint64_t seed = 0;
  std::size_t tagged = 0;
  std::uint64_t rounds = 0;
  std::uint64_t total_messages = 0;
  std::vector<NodeResult> nodes;
  std::vector<TraceEntry> trace;

  [[nodiscard]] const NodeResult& tagged_node() const { return nodes.at(tagged); }
};

/// Assigns each of the first sum(sizes) stream positions to one node through
/// a seeded shuffle of node labels; each part keeps the original order.
/// Returns the original indices per node. Throws ConfigError when the sizes
/// exceed the stream.
std::vector<std::vector<std::size_t>> partition_indices(std::size_t stream_length,
                                                        const std::vector<std::size_t>& sizes, Rng& rng);

std::vector<std::vector<Sample>> partition_stream(const std::vector<Sample>& stream,
                                                  const std::vector<std::size_t>& sizes, Rng& rng);

RunResult run_simulation(const SimConfig& cfg, const Dataset& dataset);

/// Runs on already-partitioned streams (one per node, cfg.partition_sizes is
/// ignored apart from its length).
RunResult run_partitioned(const SimConfig& cfg, const std::vector<std::vector<Sample>>& streams,
                          std::size_t n_classes);

/// A single node that sees the whole stream; no sharing.
RunResult run_centralized(const Dataset& dataset, const XuIlvqParams& params,
                          LearnerMode mode = LearnerMode::fully_ilvq, std::size_t perf_window = 50);

struct MeanCi {
  double mean = 0.0;
  double ci = 0.0;  ///< half-width of the normal-approximation 95% interval
};

/// Mean and 1.96 * s / sqrt(n). Non-finite entries are skipped; an empty
/// input gives NaN.
MeanCi mean_ci(const std::vector<double>& values);

struct NodeAggregate {
  MeanCi final_f1;
  MeanCi convergence_step;
};

struct AggregateResult {
  std::size_t replications = 0;
  std::size_t tagged = 0;
  std::vector<NodeAggregate> nodes;
  MeanCi total_messages;
  /// Per-replication values, in seed order.
  std::vector<double> tagged_final_f1;
  std::vector<std::uint64_t> messages;
};

/// Runs the configurations concurrently on up to `jobs` threads (0 = one per
/// hardware thread). Output order matches input order.
std::vector<RunResult> run_many(const std::vector<SimConfig>& configs, const Dataset& dataset, std::size_t jobs = 0);

AggregateResult aggregate(const std::vector<RunResult>& runs);

/// Runs seeds seed, seed+1, ..., seed+replications-1 and aggregates.
AggregateResult replicate(const SimConfig& cfg, const Dataset& dataset, std::size_t jobs = 0);

struct SweepRow {
  double t = 0.0;
  double f1_mean = 0.0;
  double f1_ci = 0.0;
  double messages_mean = 0.0;
  double convergence_mean = 0.0;

  friend bool operator==(const SweepRow&, const SweepRow&) = default;
};

std::vector<SweepRow> sweep_t(const SimConfig& cfg, const Dataset& dataset, const std::vector<double>& t_values,
                              std::size_t jobs = 0);

}  // namespace protonet
