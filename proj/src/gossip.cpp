#include "protonet/gossip.hpp"

#include <algorithm>
#include <stdexcept>

#include "protonet/error.hpp"

namespace protonet {

void ShareConfig::validate(std::size_t n_nodes) const {
  if (!(t >= 0.0 && t <= 1.0)) throw ConfigError("share.t must lie in [0, 1]");
  if (n_nodes < 2) return;
  if (s < 1 || s > n_nodes - 1) {
    throw ConfigError("share.s must lie in [1, n_nodes - 1] (got " + std::to_string(s) + " for " +
                      std::to_string(n_nodes) + " nodes)");
  }
}

PerfTable::PerfTable(std::size_t n_nodes) {
  for (std::size_t i = 0; i < n_nodes; ++i) scores_.emplace(static_cast<NodeId>(i), 0.0);
}

double PerfTable::at(NodeId node) const {
  auto it = scores_.find(node);
  if (it == scores_.end()) throw std::out_of_range("no performance entry for node " + std::to_string(node));
  return it->second;
}

void PerfTable::set(NodeId node, double score) { scores_[node] = score; }

std::vector<NodeId> sample_peers(std::span<const NodeId> peers, std::size_t count, Rng& rng) {
  if (count > peers.size()) throw std::invalid_argument("cannot sample more peers than exist");
  std::vector<NodeId> pool(peers.begin(), peers.end());
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.uniform_index(pool.size() - i));
    std::swap(pool[i], pool[j]);
  }
  pool.resize(count);
  std::sort(pool.begin(), pool.end());
  return pool;
}

double median(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("median of an empty set");
  std::sort(values.begin(), values.end());
  const std::size_t mid = values.size() / 2;
  return values.size() % 2 == 1 ? values[mid] : 0.5 * (values[mid - 1] + values[mid]);
}

namespace {

void check_peers(NodeId self, std::span<const NodeId> peers) {
  if (std::find(peers.begin(), peers.end(), self) != peers.end()) {
    throw std::invalid_argument("peer list must not contain the sender");
  }
}

}  // namespace

std::vector<Outgoing> random_share_step(NodeId self, std::shared_ptr<const PrototypeSnapshot> protos,
                                        const ShareConfig& cfg, std::span<const NodeId> peers, Rng& rng) {
  check_peers(self, peers);
  if (!(rng.uniform01() < cfg.t)) return {};
  std::vector<Outgoing> out;
  for (NodeId dest : sample_peers(peers, cfg.s, rng)) out.push_back({dest, protos});
  return out;
}

std::vector<Outgoing> relative_threshold_step(NodeId self, std::shared_ptr<const PrototypeSnapshot> protos,
                                              const ShareConfig& cfg, std::span<const NodeId> peers,
                                              const PerfTable& perf, Rng& rng) {
  check_peers(self, peers);
  const double own = perf.at(self);
  for (NodeId p : peers) (void)perf.at(p);
  if (!(rng.uniform01() < cfg.t)) return {};

  const std::vector<NodeId> sampled = sample_peers(peers, cfg.s, rng);
  std::vector<double> scores;
  scores.reserve(sampled.size());
  for (NodeId p : sampled) scores.push_back(perf.at(p));
  const double mid = median(scores);
  if (!(own > mid)) return {};

  std::vector<Outgoing> out;
  for (NodeId p : sampled) {
    if (perf.at(p) < mid) out.push_back({p, protos});
  }
  return out;
}

DrainStats drain_inbox(NodeModel& model, Inbox& inbox) {
  DrainStats stats;
  while (!inbox.queue.empty()) {
    LabeledVector proto = std::move(inbox.queue.front());
    inbox.queue.pop_front();
    try {
      std::visit(
          [&](auto& m) {
            using M = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<M, XuIlvqModel>) {
              m.learn_one(proto.weights, proto.label);
            } else {
              m.absorb_prototype(proto);
            }
          },
          model);
      ++stats.processed;
    } catch (const DimensionError&) {
      ++stats.dropped;
    }
  }
  return stats;
}

void update_perf(PerfTable& perf, NodeId node, const PrequentialWindow& window, std::size_t n_classes) {
  perf.set(node, window.f1_score(n_classes));
}

}  // namespace protonet
