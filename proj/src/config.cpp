#include "protonet/config.hpp"

#include <fstream>
#include <set>

#include "protonet/error.hpp"

namespace protonet {

using nlohmann::json;

namespace {

void require_object(const json& j, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
}

void reject_unknown(const json& j, const std::string& where, const std::set<std::string>& allowed) {
  for (const auto& [key, value] : j.items()) {
    (void)value;
    if (!allowed.contains(key)) throw ConfigError(where + ": unknown field '" + key + "'");
  }
}

template <typename T>
T get_number(const json& j, const std::string& key, const std::string& where, T fallback) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if constexpr (std::is_integral_v<T>) {
    const bool negative = !v.is_number_unsigned() && v.is_number_integer() && v.get<long long>() < 0;
    if (!v.is_number_integer() || (std::is_unsigned_v<T> && negative)) {
      throw ConfigError(where + "." + key + ": expected a non-negative integer");
    }
    return v.get<T>();
  } else {
    if (!v.is_number()) throw ConfigError(where + "." + key + ": expected a number");
    return v.get<T>();
  }
}

std::string get_string(const json& j, const std::string& key, const std::string& where, const std::string& fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_string()) throw ConfigError(where + "." + key + ": expected a string");
  return j.at(key).get<std::string>();
}

template <typename T>
std::vector<T> get_array(const json& j, const std::string& key, const std::string& where, std::vector<T> fallback) {
  if (!j.contains(key)) return fallback;
  const json& arr = j.at(key);
  if (!arr.is_array()) throw ConfigError(where + "." + key + ": expected an array");
  std::vector<T> out;
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const std::string item = where + "." + key + "[" + std::to_string(i) + "]";
    if constexpr (std::is_same_v<T, std::string>) {
      if (!arr[i].is_string()) throw ConfigError(item + ": expected a string");
    } else if constexpr (std::is_integral_v<T>) {
      if (!arr[i].is_number_unsigned() && !(arr[i].is_number_integer() && arr[i].get<long long>() >= 0)) {
        throw ConfigError(item + ": expected a non-negative integer");
      }
    } else {
      if (!arr[i].is_number()) throw ConfigError(item + ": expected a number");
    }
    out.push_back(arr[i].get<T>());
  }
  return out;
}

RateRule rate_from_json(const json& j, const std::string& where, RateRule fallback) {
  require_object(j, where);
  reject_unknown(j, where, {"rule", "scale"});
  RateRule r = fallback;
  const std::string rule = get_string(j, "rule", where, r.kind == RateRule::Kind::harmonic ? "harmonic" : "constant");
  if (rule == "harmonic") {
    r.kind = RateRule::Kind::harmonic;
  } else if (rule == "constant") {
    r.kind = RateRule::Kind::constant;
  } else {
    throw ConfigError(where + ".rule: expected 'harmonic' or 'constant'");
  }
  r.scale = get_number<double>(j, "scale", where, r.scale);
  return r;
}

json rate_to_json(const RateRule& r) {
  return {{"rule", r.kind == RateRule::Kind::harmonic ? "harmonic" : "constant"}, {"scale", r.scale}};
}

XuIlvqParams learner_from_json_at(const json& j, const std::string& where) {
  require_object(j, where);
  reject_unknown(j, where, {"age_old", "lambda", "k", "eta1", "eta2", "merge_duplicates"});
  XuIlvqParams p;
  p.age_old = get_number<std::uint32_t>(j, "age_old", where, p.age_old);
  p.lambda = get_number<std::uint64_t>(j, "lambda", where, p.lambda);
  p.k = get_number<std::size_t>(j, "k", where, p.k);
  if (j.contains("eta1")) p.eta1 = rate_from_json(j.at("eta1"), where + ".eta1", p.eta1);
  if (j.contains("eta2")) p.eta2 = rate_from_json(j.at("eta2"), where + ".eta2", p.eta2);
  if (j.contains("merge_duplicates")) {
    if (!j.at("merge_duplicates").is_boolean()) throw ConfigError(where + ".merge_duplicates: expected a boolean");
    p.merge_duplicates = j.at("merge_duplicates").get<bool>();
  }
  p.validate();
  return p;
}

DatasetSpec dataset_from_json(const json& j, const std::filesystem::path& base_dir) {
  const std::string where = "dataset";
  require_object(j, where);
  const std::string source = get_string(j, "source", where, "synthetic");
  if (source == "csv") {
    reject_unknown(j, where, {"source", "path", "label_column", "feature_columns"});
    if (!j.contains("path")) throw ConfigError("dataset.path: required for csv datasets");
    if (!j.contains("label_column")) throw ConfigError("dataset.label_column: required for csv datasets");
    CsvSource csv;
    csv.path = get_string(j, "path", where, "");
    if (csv.path.is_relative() && !base_dir.empty()) csv.path = base_dir / csv.path;
    csv.label_column = get_string(j, "label_column", where, "");
    csv.feature_columns = get_array<std::string>(j, "feature_columns", where, {});
    return csv;
  }
  if (source == "synthetic") {
    reject_unknown(j, where,
                   {"source", "n_features", "n_classes", "n_samples", "separation", "seed", "clusters_per_class",
                    "cluster_spread", "label_noise"});
    SynthSource s;
    s.n_features = get_number<std::size_t>(j, "n_features", where, s.n_features);
    s.n_classes = get_number<std::size_t>(j, "n_classes", where, s.n_classes);
    s.n_samples = get_number<std::size_t>(j, "n_samples", where, s.n_samples);
    s.separation = get_number<double>(j, "separation", where, s.separation);
    s.seed = get_number<std::uint64_t>(j, "seed", where, s.seed);
    s.clusters_per_class = get_number<std::size_t>(j, "clusters_per_class", where, s.clusters_per_class);
    s.cluster_spread = get_number<double>(j, "cluster_spread", where, s.cluster_spread);
    s.label_noise = get_number<double>(j, "label_noise", where, s.label_noise);
    s.validate();
    return s;
  }
  throw ConfigError("dataset.source: expected 'csv' or 'synthetic'");
}

SimConfig simulation_from_json(const json& j) {
  const std::string where = "simulation";
  require_object(j, where);
  reject_unknown(j, where,
                 {"n_nodes", "partition_sizes", "protocol", "t", "s", "mode", "perf_window", "seed", "replications"});
  SimConfig c;
  c.n_nodes = get_number<std::size_t>(j, "n_nodes", where, c.n_nodes);
  c.partition_sizes = get_array<std::size_t>(j, "partition_sizes", where, c.partition_sizes);
  c.protocol = protocol_from_string(get_string(j, "protocol", where, to_string(c.protocol)));
  c.share.t = get_number<double>(j, "t", where, c.share.t);
  c.share.s = get_number<std::size_t>(j, "s", where, c.n_nodes > 1 ? c.n_nodes - 1 : 1);
  c.mode = mode_from_string(get_string(j, "mode", where, to_string(c.mode)));
  c.perf_window = get_number<std::size_t>(j, "perf_window", where, c.perf_window);
  c.seed = get_number<std::uint64_t>(j, "seed", where, c.seed);
  c.replications = get_number<std::size_t>(j, "replications", where, c.replications);
  if (c.partition_sizes.size() != c.n_nodes) {
    throw ConfigError("simulation.partition_sizes: expected " + std::to_string(c.n_nodes) + " entries, got " +
                      std::to_string(c.partition_sizes.size()));
  }
  if (c.protocol != Protocol::none) c.share.validate(c.n_nodes);
  return c;
}

BenchConfig bench_from_json(const json& j) {
  const std::string where = "bench";
  require_object(j, where);
  reject_unknown(j, where,
                 {"features", "classes", "base_features", "base_classes", "n_samples", "separation", "runs", "seed"});
  BenchConfig b;
  b.features = get_array<std::size_t>(j, "features", where, b.features);
  b.classes = get_array<std::size_t>(j, "classes", where, b.classes);
  b.base_features = get_number<std::size_t>(j, "base_features", where, b.base_features);
  b.base_classes = get_number<std::size_t>(j, "base_classes", where, b.base_classes);
  b.n_samples = get_number<std::size_t>(j, "n_samples", where, b.n_samples);
  b.separation = get_number<double>(j, "separation", where, b.separation);
  b.runs = get_number<std::size_t>(j, "runs", where, b.runs);
  b.seed = get_number<std::uint64_t>(j, "seed", where, b.seed);
  return b;
}

}  // namespace

XuIlvqParams learner_from_json(const json& j) { return learner_from_json_at(j, "learner"); }

json learner_to_json(const XuIlvqParams& p) {
  return {{"age_old", p.age_old}, {"lambda", p.lambda}, {"k", p.k}, {"eta1", rate_to_json(p.eta1)},
          {"eta2", rate_to_json(p.eta2)}, {"merge_duplicates", p.merge_duplicates}};
}

ExperimentFile parse_experiment(const json& doc, const std::filesystem::path& base_dir) {
  require_object(doc, "experiment");
  reject_unknown(doc, "experiment", {"$schema", "dataset", "simulation", "learner", "sweep", "bench", "output"});
  ExperimentFile exp;
  if (doc.contains("dataset")) exp.dataset = dataset_from_json(doc.at("dataset"), base_dir);
  if (doc.contains("simulation")) exp.simulation = simulation_from_json(doc.at("simulation"));
  if (doc.contains("learner")) {
    exp.simulation.learner = learner_from_json_at(doc.at("learner"), "learner");
  }
  exp.bench.learner = exp.simulation.learner;
  if (doc.contains("sweep")) {
    const json& sw = doc.at("sweep");
    require_object(sw, "sweep");
    reject_unknown(sw, "sweep", {"t_values"});
    exp.t_values = get_array<double>(sw, "t_values", "sweep", exp.t_values);
    for (double t : exp.t_values) {
      if (!(t >= 0.0 && t <= 1.0)) throw ConfigError("sweep.t_values: every entry must lie in [0, 1]");
    }
  }
  if (doc.contains("bench")) {
    BenchConfig b = bench_from_json(doc.at("bench"));
    b.learner = exp.simulation.learner;
    exp.bench = b;
  }
  exp.bench.validate();
  if (doc.contains("output")) {
    const json& out = doc.at("output");
    require_object(out, "output");
    reject_unknown(out, "output", {"dir"});
    exp.output_dir = get_string(out, "dir", "output", "out");
  }
  if (exp.output_dir.is_relative() && !base_dir.empty()) exp.output_dir = base_dir / exp.output_dir;
  return exp;
}

ExperimentFile load_experiment(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open experiment file " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": malformed JSON: " + e.what());
  }
  try {
    return parse_experiment(doc, path.parent_path());
  } catch (const json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

}  // namespace protonet
