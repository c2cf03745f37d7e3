#include <doctest.h>

#include <numeric>
#include <set>

#include "protonet/error.hpp"
#include "protonet/serialize.hpp"
#include "protonet/simnet.hpp"

using namespace protonet;

namespace {

Dataset small_dataset(std::size_t n = 600, std::uint64_t seed = 3) {
  SynthSource src;
  src.n_features = 4;
  src.n_samples = n;
  src.seed = seed;
  src.clusters_per_class = 2;
  src.cluster_spread = 1.5;
  src.label_noise = 0.05;
  return synth_dataset(src);
}

SimConfig small_config(Protocol protocol = Protocol::random, double t = 0.3) {
  SimConfig c;
  c.n_nodes = 4;
  c.partition_sizes = {150, 150, 150, 40};
  c.protocol = protocol;
  c.share = {t, 3};
  c.learner.lambda = 25;
  c.seed = 5;
  return c;
}

}  // namespace

TEST_CASE("partition is an order-preserving split of the stream") {
  Rng rng(1);
  const std::vector<std::size_t> sizes{300, 300, 300, 300, 50};
  const auto parts = partition_indices(1300, sizes, rng);
  REQUIRE(parts.size() == 5);
  std::vector<std::size_t> all;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    CHECK(parts[i].size() == sizes[i]);
    CHECK(std::is_sorted(parts[i].begin(), parts[i].end()));
    all.insert(all.end(), parts[i].begin(), parts[i].end());
  }
  std::sort(all.begin(), all.end());
  std::vector<std::size_t> expected(1250);
  std::iota(expected.begin(), expected.end(), 0);
  CHECK(all == expected);
}

TEST_CASE("partition_stream inverts back to the original stream") {
  const Dataset data = small_dataset(490);
  Rng rng(2);
  Rng same(2);
  const auto streams = partition_stream(data.samples, {150, 150, 150, 40}, rng);
  const auto idx = partition_indices(data.size(), {150, 150, 150, 40}, same);
  std::vector<const Sample*> rebuilt(490, nullptr);
  for (std::size_t n = 0; n < streams.size(); ++n) {
    for (std::size_t k = 0; k < streams[n].size(); ++k) rebuilt[idx[n][k]] = &streams[n][k];
  }
  for (std::size_t i = 0; i < 490; ++i) {
    REQUIRE(rebuilt[i] != nullptr);
    CHECK(rebuilt[i]->features == data.samples[i].features);
    CHECK(rebuilt[i]->label == data.samples[i].label);
  }
}

TEST_CASE("partition rejects sizes beyond the stream") {
  Rng rng(1);
  CHECK_THROWS_AS(partition_indices(10, {6, 5}, rng), ConfigError);
}

TEST_CASE("config validation") {
  SimConfig c = small_config();
  CHECK_NOTHROW(c.validate(600));
  CHECK_THROWS_AS(c.validate(400), ConfigError);
  c.n_nodes = 3;
  CHECK_THROWS_AS(c.validate(600), ConfigError);
  c = small_config();
  c.share.s = 4;
  CHECK_THROWS_AS(c.validate(600), ConfigError);
  c = small_config();
  c.perf_window = 0;
  CHECK_THROWS_AS(c.validate(600), ConfigError);
  CHECK(small_config().tagged_node() == 3);
}

TEST_CASE("simulation conserves samples and messages") {
  const Dataset data = small_dataset();
  for (Protocol p : {Protocol::random, Protocol::relative_threshold}) {
    const RunResult r = run_simulation(small_config(p, 0.4), data);
    std::uint64_t sent = 0;
    std::uint64_t received = 0;
    for (const NodeResult& n : r.nodes) {
      sent += n.messages_sent;
      received += n.messages_received;
      const ConfusionCounts& c = n.tallies;
      CHECK(c.tp + c.fp + c.fn + c.tn + n.abstains == n.samples_processed);
      CHECK(n.f1_series.size() == n.samples_processed);
      CHECK(n.prototype_counts.size() == n.samples_processed);
      for (double f : n.f1_series) CHECK((f >= 0.0 && f <= 1.0));
    }
    CHECK(sent == r.trace.size());
    CHECK(received == r.trace.size());
    CHECK(r.total_messages == r.trace.size());
    CHECK(r.tagged == 3);
    CHECK(r.nodes[3].samples_processed == 40);
    for (const TraceEntry& e : r.trace) {
      CHECK(e.sender != e.receiver);
      CHECK(e.step >= 1);
      CHECK(e.step <= r.rounds);
    }
  }
}

TEST_CASE("exhausted nodes only receive") {
  const Dataset data = small_dataset();
  const RunResult r = run_simulation(small_config(Protocol::random, 1.0), data);
  bool received_late = false;
  for (const TraceEntry& e : r.trace) {
    CHECK(e.step <= r.nodes[e.sender].samples_processed);
    if (e.receiver == 3 && e.step > 40) received_late = true;
  }
  CHECK(received_late);
  CHECK(r.nodes[3].messages_sent <= 40 * 3);
}

TEST_CASE("messages within a step are distinct and never self-addressed") {
  const Dataset data = small_dataset();
  const RunResult r = run_simulation(small_config(Protocol::random, 0.6), data);
  std::set<std::tuple<std::uint64_t, NodeId, NodeId>> seen;
  for (const TraceEntry& e : r.trace) {
    CHECK(e.sender != e.receiver);
    CHECK(seen.insert({e.step, e.sender, e.receiver}).second);
  }
}

TEST_CASE("runs are deterministic down to the serialized bytes") {
  const Dataset data = small_dataset();
  for (Protocol p : {Protocol::random, Protocol::relative_threshold}) {
    const SimConfig c = small_config(p);
    const RunResult a = run_simulation(c, data);
    const RunResult b = run_simulation(c, data);
    CHECK(to_json(a).dump() == to_json(b).dump());
    CHECK(a.trace == b.trace);
  }
  SimConfig other = small_config();
  other.seed = 6;
  CHECK(to_json(run_simulation(small_config(), data)).dump() != to_json(run_simulation(other, data)).dump());
}

TEST_CASE("t = 0 produces no messages") {
  const Dataset data = small_dataset();
  for (Protocol p : {Protocol::random, Protocol::relative_threshold}) {
    const RunResult r = run_simulation(small_config(p, 0.0), data);
    CHECK(r.total_messages == 0);
    CHECK(r.trace.empty());
  }
}

TEST_CASE("a one-node network matches the centralized learner") {
  const Dataset data = small_dataset(300);
  SimConfig c;
  c.n_nodes = 1;
  c.partition_sizes = {300};
  c.protocol = Protocol::none;
  c.share = {0.0, 1};
  c.learner.lambda = 40;
  const RunResult net = run_simulation(c, data);
  const RunResult central = run_centralized(data, c.learner);
  CHECK(net.nodes[0].f1_series == central.nodes[0].f1_series);
  CHECK(net.nodes[0].prototype_counts == central.nodes[0].prototype_counts);
  CHECK(net.nodes[0].final_storage == central.nodes[0].final_storage);
}

TEST_CASE("without sharing, removing a node leaves the others unchanged") {
  const Dataset data = small_dataset();
  Rng rng(9);
  const auto streams = partition_stream(data.samples, {150, 150, 150, 40}, rng);
  SimConfig c = small_config(Protocol::none, 0.0);
  const RunResult full = run_partitioned(c, streams, data.n_classes);
  for (std::size_t drop = 0; drop < 4; ++drop) {
    std::vector<std::vector<Sample>> fewer;
    std::vector<std::size_t> kept;
    for (std::size_t i = 0; i < 4; ++i) {
      if (i == drop) continue;
      fewer.push_back(streams[i]);
      kept.push_back(i);
    }
    SimConfig c3 = c;
    c3.n_nodes = 3;
    c3.share.s = 2;
    const RunResult part = run_partitioned(c3, fewer, data.n_classes);
    for (std::size_t k = 0; k < kept.size(); ++k) {
      CHECK(part.nodes[k].f1_series == full.nodes[kept[k]].f1_series);
    }
  }
}

TEST_CASE("sharing changes the tagged node's history") {
  const Dataset data = small_dataset();
  const RunResult alone = run_simulation(small_config(Protocol::random, 0.0), data);
  const RunResult shared = run_simulation(small_config(Protocol::random, 0.5), data);
  CHECK(alone.tagged_node().f1_series != shared.tagged_node().f1_series);
  CHECK(shared.tagged_node().prototypes_absorbed > 0);
}

TEST_CASE("mean_ci") {
  const MeanCi one = mean_ci({0.4});
  CHECK(one.mean == 0.4);
  CHECK(one.ci == 0.0);
  const MeanCi m = mean_ci({1.0, 2.0, 3.0, 4.0});
  CHECK(m.mean == doctest::Approx(2.5));
  CHECK(m.ci == doctest::Approx(1.96 * std::sqrt(5.0 / 3.0) / 2.0));
  const MeanCi skip = mean_ci({1.0, std::nan(""), 3.0});
  CHECK(skip.mean == doctest::Approx(2.0));
  CHECK(std::isnan(mean_ci({}).mean));
}

TEST_CASE("replicate with one replication reproduces the run") {
  const Dataset data = small_dataset();
  SimConfig c = small_config();
  c.replications = 1;
  const AggregateResult agg = replicate(c, data);
  const RunResult r = run_simulation(c, data);
  CHECK(agg.nodes[agg.tagged].final_f1.mean == r.tagged_node().final_f1);
  CHECK(agg.nodes[agg.tagged].final_f1.ci == 0.0);
  CHECK(agg.total_messages.mean == static_cast<double>(r.total_messages));
}

TEST_CASE("replicate averages the per-seed runs") {
  const Dataset data = small_dataset();
  SimConfig c = small_config(Protocol::random, 0.0);
  c.replications = 20;
  const AggregateResult agg = replicate(c, data, 2);
  std::vector<double> f1s;
  for (std::size_t r = 0; r < 20; ++r) {
    SimConfig one = c;
    one.seed = c.seed + r;
    f1s.push_back(run_simulation(one, data).tagged_node().final_f1);
  }
  CHECK(agg.tagged_final_f1 == f1s);
  CHECK(agg.nodes[agg.tagged].final_f1.mean ==
        doctest::Approx(std::accumulate(f1s.begin(), f1s.end(), 0.0) / 20.0));
  const AggregateResult again = replicate(c, data, 1);
  CHECK(to_json(again).dump() == to_json(agg).dump());
}

TEST_CASE("sweep rows: t = 0 has no traffic and mean L grows with t") {
  const Dataset data = small_dataset();
  SimConfig c = small_config();
  c.replications = 20;
  const auto zero = sweep_t(c, data, {0.0});
  REQUIRE(zero.size() == 1);
  CHECK(zero[0].messages_mean == 0.0);

  const std::vector<double> grid{0.0, 0.1, 0.2, 0.4, 0.6, 0.8, 1.0};
  const auto rows = sweep_t(c, data, grid);
  REQUIRE(rows.size() == grid.size());
  for (std::size_t i = 1; i < rows.size(); ++i) {
    CHECK(rows[i].t == grid[i]);
    CHECK(rows[i].messages_mean >= rows[i - 1].messages_mean);
  }
  double top = 0.0;
  for (const auto& r : rows) top = std::max(top, r.messages_mean);
  CHECK(rows.back().messages_mean == top);
}

TEST_CASE("hybrid mode runs end to end") {
  const Dataset data = small_dataset();
  SimConfig c = small_config(Protocol::random, 0.5);
  c.mode = LearnerMode::hybrid;
  const RunResult r = run_simulation(c, data);
  CHECK(r.total_messages > 0);
  CHECK(r.tagged_node().final_f1 > 0.0);
}

TEST_CASE("protocol and mode names") {
  CHECK(protocol_from_string("relative-threshold") == Protocol::relative_threshold);
  CHECK(protocol_from_string(to_string(Protocol::random)) == Protocol::random);
  CHECK(mode_from_string(to_string(LearnerMode::hybrid)) == LearnerMode::hybrid);
  CHECK_THROWS_AS(protocol_from_string("flood"), ConfigError);
  CHECK_THROWS_AS(mode_from_string("forest"), ConfigError);
}
