#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <memory>
#include <span>
#include <variant>
#include <vector>

#include "protonet/hybrid.hpp"
#include "protonet/metrics.hpp"
#include "protonet/prototypes.hpp"
#include "protonet/rng.hpp"
#include "protonet/xuilvq.hpp"

namespace protonet {

using NodeId = std::uint32_t;

struct ShareConfig {
  double t = 0.0;      ///< probability of sharing after each local sample
  std::size_t s = 1;   ///< number of peers sampled per share

  /// Checks 0 <= t <= 1 and 1 <= s <= n_nodes - 1. Throws ConfigError.
  void validate(std::size_t n_nodes) const;
};

using PrototypeSnapshot = std::vector<LabeledVector>;

struct Outgoing {
  NodeId destination = 0;
  std::shared_ptr<const PrototypeSnapshot> prototypes;
};

/// FIFO of prototypes received from peers.
struct Inbox {
  std::deque<LabeledVector> queue;

  void deliver(const PrototypeSnapshot& snapshot) { queue.insert(queue.end(), snapshot.begin(), snapshot.end()); }
  [[nodiscard]] bool empty() const { return queue.empty(); }
  [[nodiscard]] std::size_t size() const { return queue.size(); }
};

/// Latest windowed F1 per node. Starts at 0 for every node.
class PerfTable {
 public:
  PerfTable() = default;
  explicit PerfTable(std::size_t n_nodes);

  [[nodiscard]] double at(NodeId node) const;
  void set(NodeId node, double score);
  [[nodiscard]] bool contains(NodeId node) const { return scores_.contains(node); }
  [[nodiscard]] std::size_t size() const { return scores_.size(); }

 private:
  std::map<NodeId, double> scores_;
};

/// Draws `count` distinct peers uniformly without replacement; returned
/// ascending.
std::vector<NodeId> sample_peers(std::span<const NodeId> peers, std::size_t count, Rng& rng);

/// Median; mean of the two central values for even sizes. Requires a
/// non-empty input.
double median(std::vector<double> values);

/// With probability t, sends the snapshot to s peers chosen uniformly.
std::vector<Outgoing> random_share_step(NodeId self, std::shared_ptr<const PrototypeSnapshot> protos,
                                        const ShareConfig& cfg, std::span<const NodeId> peers, Rng& rng);

/// With probability t, samples s peers; if this node scores above their
/// median, sends the snapshot to the sampled peers scoring strictly below it.
std::vector<Outgoing> relative_threshold_step(NodeId self, std::shared_ptr<const PrototypeSnapshot> protos,
                                              const ShareConfig& cfg, std::span<const NodeId> peers,
                                              const PerfTable& perf, Rng& rng);

using NodeModel = std::variant<XuIlvqModel, HybridNodeModel>;

struct DrainStats {
  std::size_t processed = 0;
  std::size_t dropped = 0;
};

/// Feeds every queued prototype to the model in FIFO order and empties the
/// inbox. ILVQ models learn them as samples; hybrid models pass them to the
/// predictor only. Prototypes of the wrong dimension are dropped and counted.
DrainStats drain_inbox(NodeModel& model, Inbox& inbox);

/// perf[node] = F1 over the window.
void update_perf(PerfTable& perf, NodeId node, const PrequentialWindow& window, std::size_t n_classes);

}  // namespace protonet
