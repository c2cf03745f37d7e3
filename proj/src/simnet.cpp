#include "protonet/simnet.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <memory>
#include <mutex>
#include <numeric>
#include <thread>

#include "protonet/error.hpp"

namespace protonet {

std::string to_string(Protocol p) {
  switch (p) {
    case Protocol::none:
      return "none";
    case Protocol::random:
      return "random";
    case Protocol::relative_threshold:
      return "relative-threshold";
  }
  return "?";
}

std::string to_string(LearnerMode m) { return m == LearnerMode::fully_ilvq ? "fully-ilvq" : "hybrid"; }

Protocol protocol_from_string(const std::string& s) {
  if (s == "none") return Protocol::none;
  if (s == "random") return Protocol::random;
  if (s == "relative-threshold" || s == "relative") return Protocol::relative_threshold;
  throw ConfigError("unknown protocol '" + s + "' (expected none, random or relative-threshold)");
}

LearnerMode mode_from_string(const std::string& s) {
  if (s == "fully-ilvq") return LearnerMode::fully_ilvq;
  if (s == "hybrid") return LearnerMode::hybrid;
  throw ConfigError("unknown mode '" + s + "' (expected fully-ilvq or hybrid)");
}

void SimConfig::validate(std::size_t dataset_size) const {
  if (n_nodes < 1) throw ConfigError("simulation.n_nodes must be >= 1");
  if (partition_sizes.size() != n_nodes) {
    throw ConfigError("simulation.partition_sizes must have one entry per node (" + std::to_string(n_nodes) +
                      "), got " + std::to_string(partition_sizes.size()));
  }
  for (std::size_t s : partition_sizes) {
    if (s < 1) throw ConfigError("simulation.partition_sizes entries must be positive");
  }
  const std::size_t total = std::accumulate(partition_sizes.begin(), partition_sizes.end(), std::size_t{0});
  if (total > dataset_size) {
    throw ConfigError("partition sizes sum to " + std::to_string(total) + " but the dataset has " +
                      std::to_string(dataset_size) + " samples");
  }
  if (protocol != Protocol::none) share.validate(n_nodes);
  if (protocol != Protocol::none && n_nodes < 2 && share.t > 0.0) {
    throw ConfigError("a sharing protocol needs at least two nodes");
  }
  learner.validate();
  if (perf_window < 1) throw ConfigError("simulation.perf_window must be >= 1");
  if (replications < 1) throw ConfigError("simulation.replications must be >= 1");
}

std::size_t SimConfig::tagged_node() const {
  if (partition_sizes.empty()) return 0;
  return static_cast<std::size_t>(std::min_element(partition_sizes.begin(), partition_sizes.end()) -
                                  partition_sizes.begin());
}

std::vector<std::vector<std::size_t>> partition_indices(std::size_t stream_length,
                                                        const std::vector<std::size_t>& sizes, Rng& rng) {
  const std::size_t total = std::accumulate(sizes.begin(), sizes.end(), std::size_t{0});
  if (total > stream_length) {
    throw ConfigError("partition sizes sum to " + std::to_string(total) + ", stream has " +
                      std::to_string(stream_length));
  }
  std::vector<std::size_t> owner;
  owner.reserve(total);
  for (std::size_t node = 0; node < sizes.size(); ++node) owner.insert(owner.end(), sizes[node], node);
  for (std::size_t i = owner.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng.uniform_index(i));
    std::swap(owner[i - 1], owner[j]);
  }
  std::vector<std::vector<std::size_t>> parts(sizes.size());
  for (std::size_t node = 0; node < sizes.size(); ++node) parts[node].reserve(sizes[node]);
  for (std::size_t pos = 0; pos < owner.size(); ++pos) parts[owner[pos]].push_back(pos);
  return parts;
}

std::vector<std::vector<Sample>> partition_stream(const std::vector<Sample>& stream,
                                                  const std::vector<std::size_t>& sizes, Rng& rng) {
  const auto parts = partition_indices(stream.size(), sizes, rng);
  std::vector<std::vector<Sample>> out(parts.size());
  for (std::size_t node = 0; node < parts.size(); ++node) {
    out[node].reserve(parts[node].size());
    for (std::size_t idx : parts[node]) out[node].push_back(stream[idx]);
  }
  return out;
}

namespace {

struct SimNode {
  NodeModel model;
  Inbox inbox;
  PrequentialWindow window;
  ConfusionMatrix cumulative;
  Rng rng;
  std::vector<NodeId> peers;
  std::size_t cursor = 0;
};

NodeModel make_model(LearnerMode mode, const XuIlvqParams& params) {
  if (mode == LearnerMode::hybrid) return HybridNodeModel(params);
  return XuIlvqModel(params);
}

const XuIlvqModel& prototyper_of(const NodeModel& m) {
  if (const auto* ilvq = std::get_if<XuIlvqModel>(&m)) return *ilvq;
  return std::get<HybridNodeModel>(m).prototyper();
}

std::optional<Label> predict(const NodeModel& m, std::span<const double> x) {
  return std::visit([&](const auto& model) -> std::optional<Label> {
    using M = std::decay_t<decltype(model)>;
    if constexpr (std::is_same_v<M, XuIlvqModel>) {
      return model.predict_one(x);
    } else {
      return model.predict(x);
    }
  }, m);
}

void learn(NodeModel& m, const Sample& s) {
  std::visit([&](auto& model) {
    using M = std::decay_t<decltype(model)>;
    if constexpr (std::is_same_v<M, XuIlvqModel>) {
      model.learn_one(s);
    } else {
      model.learn(s);
    }
  }, m);
}

}  // namespace

RunResult run_partitioned(const SimConfig& cfg, const std::vector<std::vector<Sample>>& streams,
                          std::size_t n_classes) {
  if (streams.size() != cfg.n_nodes) throw ConfigError("one stream per node required");
  if (n_classes < 1) throw ConfigError("dataset has no classes");
  const std::size_t n = cfg.n_nodes;
  const Rng root(cfg.seed);

  std::vector<SimNode> nodes;
  nodes.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    SimNode node{make_model(cfg.mode, cfg.learner), Inbox{}, PrequentialWindow(cfg.perf_window),
                 ConfusionMatrix(n_classes), root.derive("node", i), {}, 0};
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) node.peers.push_back(static_cast<NodeId>(j));
    }
    nodes.push_back(std::move(node));
  }

  RunResult result;
  result.seed = cfg.seed;
  result.nodes.resize(n);
  {
    std::size_t tagged = 0;
    for (std::size_t i = 1; i < n; ++i) {
      if (streams[i].size() < streams[tagged].size()) tagged = i;
    }
    result.tagged = tagged;
  }
  for (std::size_t i = 0; i < n; ++i) result.nodes[i].id = static_cast<NodeId>(i);

  PerfTable perf(n);
  const bool sharing = cfg.protocol != Protocol::none && cfg.share.t > 0.0 && n > 1;

  std::uint64_t round = 0;
  for (;;) {
    bool pending = false;
    for (std::size_t i = 0; i < n; ++i) {
      pending = pending || nodes[i].cursor < streams[i].size() || !nodes[i].inbox.empty();
    }
    if (!pending) break;
    ++round;

    for (std::size_t i = 0; i < n; ++i) {
      SimNode& node = nodes[i];
      NodeResult& out = result.nodes[i];
      const bool has_sample = node.cursor < streams[i].size();

      if (has_sample) {
        const Sample& s = streams[i][node.cursor++];
        const Outcome outcome{predict(node.model, s.features), s.label};
        node.window.push(outcome);
        node.cumulative.add(outcome);
        learn(node.model, s);
        update_perf(perf, static_cast<NodeId>(i), node.window, n_classes);
        out.f1_series.push_back(perf.at(static_cast<NodeId>(i)));
        out.f1_cumulative.push_back(node.cumulative.f1_score());
        ++out.samples_processed;

        if (sharing) {
          const XuIlvqModel& protos = prototyper_of(node.model);
          auto snapshot = std::make_shared<const PrototypeSnapshot>(protos.export_prototypes());
          const auto id = static_cast<NodeId>(i);
          std::vector<Outgoing> messages =
              cfg.protocol == Protocol::random
                  ? random_share_step(id, snapshot, cfg.share, node.peers, node.rng)
                  : relative_threshold_step(id, snapshot, cfg.share, node.peers, perf, node.rng);
          for (const Outgoing& msg : messages) {
            nodes[msg.destination].inbox.deliver(*msg.prototypes);
            result.trace.push_back({round, id, msg.destination, msg.prototypes->size()});
            ++out.messages_sent;
            out.bytes_sent += prototype_bytes(msg.prototypes->size(), protos.dimension());
            ++result.nodes[msg.destination].messages_received;
          }
        }
      }

      const DrainStats drained = drain_inbox(node.model, node.inbox);
      out.prototypes_absorbed += drained.processed;
      out.prototypes_dropped += drained.dropped;
      if (has_sample) out.prototype_counts.push_back(prototyper_of(node.model).size());
    }
  }

  result.rounds = round;
  result.total_messages = result.trace.size();
  for (std::size_t i = 0; i < n; ++i) {
    NodeResult& out = result.nodes[i];
    if (!out.f1_series.empty()) {
      out.final_f1 = out.f1_series.back();
      out.final_f1_cumulative = out.f1_cumulative.back();
    }
    out.convergence_step = convergence_time(out.f1_series);
    out.tallies = nodes[i].cumulative.binary_tallies();
    out.abstains = nodes[i].cumulative.abstains();
    out.final_storage = storage_complexity(prototyper_of(nodes[i].model).graph());
  }
  return result;
}

RunResult run_simulation(const SimConfig& cfg, const Dataset& dataset) {
  cfg.validate(dataset.size());
  Rng partition_rng = Rng(cfg.seed).derive("partition");
  const auto streams = partition_stream(dataset.samples, cfg.partition_sizes, partition_rng);
  return run_partitioned(cfg, streams, dataset.n_classes);
}

RunResult run_centralized(const Dataset& dataset, const XuIlvqParams& params, LearnerMode mode,
                          std::size_t perf_window) {
  SimConfig cfg;
  cfg.n_nodes = 1;
  cfg.partition_sizes = {dataset.size()};
  cfg.protocol = Protocol::none;
  cfg.share = {0.0, 1};
  cfg.mode = mode;
  cfg.learner = params;
  cfg.perf_window = perf_window;
  params.validate();
  return run_partitioned(cfg, {dataset.samples}, std::max<std::size_t>(dataset.n_classes, 1));
}

MeanCi mean_ci(const std::vector<double>& values) {
  std::vector<double> finite;
  for (double v : values) {
    if (std::isfinite(v)) finite.push_back(v);
  }
  if (finite.empty()) return {std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN()};
  const double n = static_cast<double>(finite.size());
  const double mean = std::accumulate(finite.begin(), finite.end(), 0.0) / n;
  if (finite.size() == 1) return {mean, 0.0};
  double ss = 0.0;
  for (double v : finite) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / (n - 1.0));
  return {mean, 1.96 * sd / std::sqrt(n)};
}

std::vector<RunResult> run_many(const std::vector<SimConfig>& configs, const Dataset& dataset, std::size_t jobs) {
  for (const SimConfig& c : configs) c.validate(dataset.size());
  std::vector<RunResult> results(configs.size());
  if (jobs == 0) jobs = std::max(1u, std::thread::hardware_concurrency());
  jobs = std::min(jobs, configs.size());
  if (jobs <= 1) {
    for (std::size_t i = 0; i < configs.size(); ++i) results[i] = run_simulation(configs[i], dataset);
    return results;
  }

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> workers;
  for (std::size_t w = 0; w < jobs; ++w) {
    workers.emplace_back([&] {
      for (std::size_t i = next++; i < configs.size(); i = next++) {
        try {
          results[i] = run_simulation(configs[i], dataset);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : workers) t.join();
  if (failure) std::rethrow_exception(failure);
  return results;
}

AggregateResult aggregate(const std::vector<RunResult>& runs) {
  AggregateResult agg;
  agg.replications = runs.size();
  if (runs.empty()) return agg;
  agg.tagged = runs.front().tagged;
  const std::size_t n = runs.front().nodes.size();
  agg.nodes.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> f1s;
    std::vector<double> tcs;
    for (const RunResult& r : runs) {
      f1s.push_back(r.nodes[i].final_f1);
      tcs.push_back(r.nodes[i].convergence_step ? static_cast<double>(*r.nodes[i].convergence_step)
                                                : std::numeric_limits<double>::quiet_NaN());
    }
    agg.nodes[i].final_f1 = mean_ci(f1s);
    agg.nodes[i].convergence_step = mean_ci(tcs);
  }
  std::vector<double> ls;
  for (const RunResult& r : runs) {
    ls.push_back(static_cast<double>(r.total_messages));
    agg.messages.push_back(r.total_messages);
    agg.tagged_final_f1.push_back(r.nodes[agg.tagged].final_f1);
  }
  agg.total_messages = mean_ci(ls);
  return agg;
}

AggregateResult replicate(const SimConfig& cfg, const Dataset& dataset, std::size_t jobs) {
  cfg.validate(dataset.size());
  std::vector<SimConfig> configs;
  for (std::size_t r = 0; r < cfg.replications; ++r) {
    SimConfig c = cfg;
    c.seed = cfg.seed + r;
    configs.push_back(std::move(c));
  }
  return aggregate(run_many(configs, dataset, jobs));
}

std::vector<SweepRow> sweep_t(const SimConfig& cfg, const Dataset& dataset, const std::vector<double>& t_values,
                              std::size_t jobs) {
  // Flatten (t, replication) so that workers stay busy across the whole grid.
  std::vector<SimConfig> configs;
  for (double t : t_values) {
    for (std::size_t r = 0; r < cfg.replications; ++r) {
      SimConfig c = cfg;
      c.share.t = t;
      c.seed = cfg.seed + r;
      configs.push_back(std::move(c));
    }
  }
  const std::vector<RunResult> runs = run_many(configs, dataset, jobs);

  std::vector<SweepRow> rows;
  for (std::size_t k = 0; k < t_values.size(); ++k) {
    const auto first = runs.begin() + static_cast<std::ptrdiff_t>(k * cfg.replications);
    const AggregateResult agg =
        aggregate(std::vector<RunResult>(first, first + static_cast<std::ptrdiff_t>(cfg.replications)));
    const NodeAggregate& tagged = agg.nodes[agg.tagged];
    rows.push_back({t_values[k], tagged.final_f1.mean, tagged.final_f1.ci, agg.total_messages.mean,
                    tagged.convergence_step.mean});
  }
  return rows;
}

}  // namespace protonet
