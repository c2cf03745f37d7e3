#include "protonet/serialize.hpp"

#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <stdexcept>

#include "protonet/config.hpp"
#include "protonet/dataset.hpp"
#include "protonet/error.hpp"

namespace protonet {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

ordered_json optional_step(const std::optional<std::size_t>& v) { return v ? ordered_json(*v) : ordered_json(nullptr); }

ordered_json mean_ci_json(const MeanCi& m) {
  const auto num = [](double v) { return std::isfinite(v) ? ordered_json(v) : ordered_json(nullptr); };
  return {{"mean", num(m.mean)}, {"ci95", num(m.ci)}};
}

double parse_field(const std::string& text, std::size_t line) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw DataError("line " + std::to_string(line) + ": not a number: '" + text + "'");
  }
  return v;
}

std::vector<std::vector<double>> read_numeric_csv(std::istream& in, const std::string& header, std::size_t width) {
  std::string line;
  if (!std::getline(in, line)) throw DataError("empty CSV, expected header '" + header + "'");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != header) throw DataError("unexpected CSV header '" + line + "', expected '" + header + "'");
  std::vector<std::vector<double>> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != width) throw DataError("line " + std::to_string(line_no) + ": wrong field count");
    std::vector<double> row;
    for (const auto& f : fields) row.push_back(parse_field(f, line_no));
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

ordered_json to_json(const RunResult& r) {
  ordered_json nodes = ordered_json::array();
  for (const NodeResult& n : r.nodes) {
    nodes.push_back({
        {"id", n.id},
        {"samples_processed", n.samples_processed},
        {"final_f1", n.final_f1},
        {"final_f1_cumulative", n.final_f1_cumulative},
        {"convergence_step", optional_step(n.convergence_step)},
        {"messages_sent", n.messages_sent},
        {"messages_received", n.messages_received},
        {"bytes_sent", n.bytes_sent},
        {"prototypes_absorbed", n.prototypes_absorbed},
        {"prototypes_dropped", n.prototypes_dropped},
        {"tallies", {{"tp", n.tallies.tp}, {"fp", n.tallies.fp}, {"fn", n.tallies.fn}, {"tn", n.tallies.tn},
                     {"abstain", n.abstains}}},
        {"storage", {{"prototypes", n.final_storage.count}, {"bytes", n.final_storage.bytes}}},
        {"f1_series", n.f1_series},
        {"f1_cumulative_series", n.f1_cumulative},
        {"prototype_count_series", n.prototype_counts},
    });
  }
  return {
      {"seed", r.seed},
      {"tagged_node", r.tagged},
      {"rounds", r.rounds},
      {"total_messages", r.total_messages},
      {"nodes", nodes},
  };
}

ordered_json to_json(const AggregateResult& a) {
  ordered_json nodes = ordered_json::array();
  for (std::size_t i = 0; i < a.nodes.size(); ++i) {
    nodes.push_back({{"id", i},
                     {"final_f1", mean_ci_json(a.nodes[i].final_f1)},
                     {"convergence_step", mean_ci_json(a.nodes[i].convergence_step)}});
  }
  return {
      {"replications", a.replications},
      {"tagged_node", a.tagged},
      {"total_messages", mean_ci_json(a.total_messages)},
      {"tagged_final_f1_per_run", a.tagged_final_f1},
      {"total_messages_per_run", a.messages},
      {"nodes", nodes},
  };
}

ordered_json model_to_json(const XuIlvqModel& m) {
  ordered_json protos = ordered_json::array();
  for (const Prototype& p : m.graph().prototypes()) {
    protos.push_back({{"id", p.id}, {"label", p.label}, {"win_count", p.win_count}, {"weights", p.weights}});
  }
  ordered_json edges = ordered_json::array();
  for (const auto& [key, age] : m.graph().edges()) edges.push_back({key.lo, key.hi, age});
  ordered_json params = ordered_json::parse(learner_to_json(m.params()).dump());
  return {
      {"params", params},
      {"step_index", m.step_index()},
      {"dimension", m.graph().dimension()},
      {"next_id", m.graph().next_id()},
      {"prototypes", protos},
      {"edges", edges},
  };
}

XuIlvqModel model_from_json(const json& j) {
  const XuIlvqParams params = learner_from_json(j.at("params"));
  std::vector<Prototype> protos;
  for (const auto& p : j.at("prototypes")) {
    Prototype proto;
    proto.id = p.at("id").get<PrototypeId>();
    proto.label = p.at("label").get<Label>();
    proto.win_count = p.at("win_count").get<std::uint64_t>();
    proto.weights = p.at("weights").get<std::vector<double>>();
    protos.push_back(std::move(proto));
  }
  std::vector<std::pair<EdgeKey, std::uint32_t>> edges;
  for (const auto& e : j.at("edges")) {
    if (!e.is_array() || e.size() != 3) throw std::invalid_argument("edge entries must be [lo, hi, age]");
    const auto a = e[0].get<PrototypeId>();
    const auto b = e[1].get<PrototypeId>();
    if (a == b) throw std::invalid_argument("self-edge in snapshot");
    edges.emplace_back(EdgeKey(a, b), e[2].get<std::uint32_t>());
  }
  PrototypeGraph graph = PrototypeGraph::from_parts(j.at("dimension").get<std::size_t>(),
                                                    j.at("next_id").get<PrototypeId>(), std::move(protos), edges);
  return XuIlvqModel::restore(params, std::move(graph), j.at("step_index").get<std::uint64_t>());
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
  out << kSweepHeader << '\n';
  for (const SweepRow& r : rows) {
    out << format_double(r.t) << ',' << format_double(r.f1_mean) << ',' << format_double(r.f1_ci) << ','
        << format_double(r.messages_mean) << ',' << format_double(r.convergence_mean) << '\n';
  }
}

std::vector<SweepRow> read_sweep_csv(std::istream& in) {
  std::vector<SweepRow> rows;
  for (const auto& f : read_numeric_csv(in, kSweepHeader, 5)) rows.push_back({f[0], f[1], f[2], f[3], f[4]});
  return rows;
}

void write_bench_csv(std::ostream& out, const std::vector<BenchRow>& rows) {
  out << kBenchHeader << '\n';
  for (const BenchRow& r : rows) {
    out << r.n_features << ',' << r.n_classes << ',' << format_double(r.protos) << ',' << format_double(r.bytes)
        << ',' << format_double(r.wall_ms) << '\n';
  }
}

std::vector<BenchRow> read_bench_csv(std::istream& in) {
  std::vector<BenchRow> rows;
  for (const auto& f : read_numeric_csv(in, kBenchHeader, 5)) {
    rows.push_back({static_cast<std::size_t>(f[0]), static_cast<std::size_t>(f[1]), f[2], f[3], f[4]});
  }
  return rows;
}

void write_trace_csv(std::ostream& out, const std::vector<TraceEntry>& trace) {
  out << kTraceHeader << '\n';
  for (const TraceEntry& e : trace) {
    out << e.step << ',' << e.sender << ',' << e.receiver << ',' << e.prototype_count << '\n';
  }
}

std::vector<TraceEntry> read_trace_csv(std::istream& in) {
  std::vector<TraceEntry> trace;
  for (const auto& f : read_numeric_csv(in, kTraceHeader, 4)) {
    trace.push_back({static_cast<std::uint64_t>(f[0]), static_cast<NodeId>(f[1]), static_cast<NodeId>(f[2]),
                     static_cast<std::size_t>(f[3])});
  }
  return trace;
}

}  // namespace protonet
