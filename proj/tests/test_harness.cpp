#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "oracles.hpp"
#include "protonet/bench.hpp"
#include "protonet/config.hpp"
#include "protonet/dataset.hpp"
#include "protonet/error.hpp"
#include "protonet/serialize.hpp"

namespace fs = std::filesystem;
using namespace protonet;
using nlohmann::json;

namespace {

fs::path scratch_dir() {
  static const fs::path dir = [] {
    const fs::path d = fs::temp_directory_path() / ("protonet_tests_" + std::to_string(::getpid()));
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

fs::path write_file(const std::string& name, const std::string& text) {
  const fs::path p = scratch_dir() / name;
  std::ofstream(p, std::ios::binary) << text;
  return p;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string("\"") + PROTONET_CLI + "\" " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("csv load: a small file") {
  const fs::path p = write_file("small.csv", "a,b,y\n1,2,0\n3.5,-4,1\n0,0,1\n");
  const Dataset d = load_csv({p, "y", {}});
  CHECK(d.size() == 3);
  CHECK(d.dimension == 2);
  CHECK(d.n_classes == 2);
  CHECK(d.feature_names == std::vector<std::string>{"a", "b"});
  CHECK(d.samples[1].features == std::vector<double>{3.5, -4.0});
  CHECK(d.samples[2].label == 1);
}

TEST_CASE("csv load: quoted fields and column selection") {
  const fs::path p = write_file("quoted.csv", "\"name, full\",x,\"y\"\n\"a, b\",1,cat\n\"c\",2,dog\n");
  const Dataset d = load_csv({p, "y", {"x"}});
  CHECK(d.dimension == 1);
  CHECK(d.samples[0].features[0] == 1.0);
  CHECK(d.label_names == std::vector<std::string>{"cat", "dog"});
  CHECK(split_csv_line("\"he said \"\"hi\"\"\", 2 ") == std::vector<std::string>{"he said \"hi\"", "2"});
}

TEST_CASE("csv load: errors name the line") {
  const fs::path bad_num = write_file("bad_num.csv", "a,y\n1,0\nfoo,1\n");
  try {
    load_csv({bad_num, "y", {}});
    FAIL("expected DataError");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find(":3:") != std::string::npos);
  }
  const fs::path short_row = write_file("short.csv", "a,b,y\n1,2,0\n1,0\n");
  try {
    load_csv({short_row, "y", {}});
    FAIL("expected DataError");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find(":3:") != std::string::npos);
  }
  CHECK_THROWS_AS(load_csv({write_file("nolabel.csv", "a,b\n1,2\n"), "y", {}}), DataError);
  CHECK_THROWS_AS(load_csv({scratch_dir() / "missing.csv", "y", {}}), DataError);
  CHECK_THROWS_AS(load_csv({write_file("empty.csv", ""), "y", {}}), DataError);
}

TEST_CASE("csv load: column order does not matter") {
  Rng rng(5);
  std::ostringstream straight;
  std::ostringstream permuted;
  straight << "f0,f1,f2,label\n";
  permuted << "label,f2,f0,f1\n";
  for (int i = 0; i < 50; ++i) {
    const auto x = oracle::random_vector(rng, 3);
    const int y = static_cast<int>(rng.uniform_index(3));
    straight << x[0] << ',' << x[1] << ',' << x[2] << ',' << y << '\n';
    permuted << y << ',' << x[2] << ',' << x[0] << ',' << x[1] << '\n';
  }
  const Dataset a = load_csv({write_file("straight.csv", straight.str()), "label", {"f0", "f1", "f2"}});
  const Dataset b = load_csv({write_file("permuted.csv", permuted.str()), "label", {"f0", "f1", "f2"}});
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a.samples[i].features == b.samples[i].features);
    CHECK(a.samples[i].label == b.samples[i].label);
  }
}

TEST_CASE("csv load: numeric labels map in numeric order") {
  const Dataset d = load_csv({write_file("labels.csv", "x,y\n1,10\n2,-1\n3,2\n4,10\n"), "y", {}});
  CHECK(d.label_names == std::vector<std::string>{"-1", "2", "10"});
  CHECK(d.samples[0].label == 2);
  CHECK(d.samples[1].label == 0);
  CHECK(d.samples[2].label == 1);
}

TEST_CASE("csv round trip through write_csv") {
  SynthSource src;
  src.n_features = 3;
  src.n_classes = 3;
  src.n_samples = 100;
  src.seed = 2;
  const Dataset d = synth_dataset(src);
  const fs::path p = scratch_dir() / "synth.csv";
  write_csv(d, p);
  const Dataset back = load_csv({p, "label", {}});
  REQUIRE(back.size() == d.size());
  for (std::size_t i = 0; i < d.size(); ++i) {
    CHECK(back.samples[i].features == d.samples[i].features);
    CHECK(back.samples[i].label == d.samples[i].label);
  }
}

TEST_CASE("synthetic data is seeded and separable") {
  SynthSource src;
  src.n_features = 5;
  src.n_classes = 4;
  src.n_samples = 2000;
  src.seed = 11;
  const Dataset a = synth_dataset(src);
  const Dataset b = synth_dataset(src);
  CHECK(a.size() == 2000);
  CHECK(a.n_classes == 4);
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a.samples[i].features == b.samples[i].features);
  src.seed = 12;
  CHECK(synth_dataset(src).samples[0].features != a.samples[0].features);

  // Nearest empirical centroid recovers the labels almost always.
  std::vector<std::vector<double>> centroid(4, std::vector<double>(5, 0.0));
  std::vector<double> count(4, 0.0);
  for (const Sample& s : a.samples) {
    for (std::size_t j = 0; j < 5; ++j) centroid[s.label][j] += s.features[j];
    count[s.label] += 1.0;
  }
  for (std::size_t c = 0; c < 4; ++c) {
    CHECK(count[c] > 0.0);
    for (double& v : centroid[c]) v /= count[c];
  }
  std::size_t hits = 0;
  for (const Sample& s : a.samples) {
    std::size_t best = 0;
    for (std::size_t c = 1; c < 4; ++c) {
      if (oracle::euclid(s.features, centroid[c]) < oracle::euclid(s.features, centroid[best])) best = c;
    }
    hits += best == static_cast<std::size_t>(s.label);
  }
  CHECK(hits >= 1980);
}

TEST_CASE("synthetic spec validation") {
  SynthSource s;
  s.n_classes = 1;
  CHECK_THROWS_AS(s.validate(), ConfigError);
  s = {};
  s.separation = 0.0;
  CHECK_THROWS_AS(s.validate(), ConfigError);
  s = {};
  s.label_noise = 1.0;
  CHECK_THROWS_AS(s.validate(), ConfigError);
  s = {};
  s.n_features = 1;
  s.n_classes = 3;
  CHECK_THROWS_AS(s.validate(), ConfigError);
}

TEST_CASE("experiment parsing: defaults") {
  const json doc = json::parse(R"({"simulation": {"n_nodes": 3, "partition_sizes": [10, 10, 5]}})");
  const ExperimentFile e = parse_experiment(doc);
  CHECK(e.simulation.share.s == 2);
  CHECK(e.simulation.protocol == Protocol::random);
  CHECK(e.simulation.learner.lambda == XuIlvqParams{}.lambda);
  CHECK(e.t_values.size() == 7);
  CHECK(std::holds_alternative<SynthSource>(e.dataset));
}

TEST_CASE("experiment parsing: paths resolve against the config directory") {
  const json doc = json::parse(R"({"dataset": {"source": "csv", "path": "d.csv", "label_column": "y"},
                                   "output": {"dir": "res"}})");
  const ExperimentFile e = parse_experiment(doc, "/base");
  CHECK(std::get<CsvSource>(e.dataset).path == fs::path("/base/d.csv"));
  CHECK(e.output_dir == fs::path("/base/res"));
}

TEST_CASE("experiment parsing: errors") {
  const auto bad = [](const char* text) { return parse_experiment(json::parse(text)); };
  CHECK_THROWS_AS(bad(R"({"extra": 1})"), ConfigError);
  CHECK_THROWS_AS(bad(R"({"simulation": {"n_nodes": "five"}})"), ConfigError);
  CHECK_THROWS_AS(bad(R"({"simulation": {"n_nodes": 2, "partition_sizes": [1]}})"), ConfigError);
  CHECK_THROWS_AS(bad(R"({"simulation": {"protocol": "flood"}})"), ConfigError);
  CHECK_THROWS_AS(bad(R"({"learner": {"lambda": -3}})"), ConfigError);
  CHECK_THROWS_AS(bad(R"({"learner": {"merge_duplicates": 1}})"), ConfigError);
  CHECK_THROWS_AS(bad(R"({"learner": {"eta1": {"rule": "cosine"}}})"), ConfigError);
  CHECK_THROWS_AS(bad(R"({"sweep": {"t_values": [0.5, 1.5]}})"), ConfigError);
  CHECK_THROWS_AS(bad(R"({"dataset": {"source": "csv", "path": "x.csv"}})"), ConfigError);
  CHECK_THROWS_AS(bad(R"({"dataset": {"source": "parquet"}})"), ConfigError);
  CHECK_THROWS_AS(bad(R"([1, 2])"), ConfigError);
  CHECK_THROWS_AS(load_experiment(write_file("broken.json", "{ not json")), ConfigError);
}

TEST_CASE("learner params survive a JSON round trip") {
  XuIlvqParams p;
  p.age_old = 17;
  p.lambda = 33;
  p.k = 5;
  p.merge_duplicates = true;
  p.eta1 = {RateRule::Kind::constant, 0.25};
  const XuIlvqParams back = learner_from_json(learner_to_json(p));
  CHECK(back.age_old == 17);
  CHECK(back.lambda == 33);
  CHECK(back.k == 5);
  CHECK(back.merge_duplicates);
  CHECK(back.eta1.kind == RateRule::Kind::constant);
  CHECK(back.eta1.scale == 0.25);
}

TEST_CASE("model snapshot round trip") {
  Rng rng(21);
  XuIlvqParams p;
  p.lambda = 30;
  p.age_old = 20;
  XuIlvqModel m(p);
  for (int i = 0; i < 400; ++i) {
    auto x = oracle::random_vector(rng, 3, 5.0);
    const Label y = static_cast<Label>(rng.uniform_index(3));
    x[0] += 6.0 * y;
    m.learn_one(x, y);
  }
  const XuIlvqModel back = model_from_json(json::parse(model_to_json(m).dump()));
  CHECK(back == m);
  for (int i = 0; i < 50; ++i) {
    const auto q = oracle::random_vector(rng, 3, 10.0);
    CHECK(back.predict_one(q) == m.predict_one(q));
  }
  CHECK_THROWS(model_from_json(json::parse(R"({"params": {}})")));
}

TEST_CASE("format_double reads back exactly") {
  Rng rng(3);
  for (int i = 0; i < 1000; ++i) {
    const double v = (rng.uniform01() - 0.5) * std::pow(10.0, static_cast<double>(rng.uniform_index(20)) - 10.0);
    CHECK(std::stod(format_double(v)) == v);
  }
  CHECK(format_double(0.5) == "0.5");
  CHECK(format_double(3.0) == "3");
}

TEST_CASE("sweep, bench and trace CSV round trips") {
  const std::vector<SweepRow> rows{{0.0, 0.7, 0.01, 0.0, 12.5}, {0.2, 0.81234567891, 0.02, 986.8, 9.0}};
  std::stringstream sweep;
  write_sweep_csv(sweep, rows);
  CHECK(sweep.str().rfind(kSweepHeader, 0) == 0);
  CHECK(read_sweep_csv(sweep) == rows);

  const std::vector<BenchRow> bench{{5, 2, 100.5, 4824.0, 3.25}, {10, 8, 300.0, 26400.0, 10.0}};
  std::stringstream b;
  write_bench_csv(b, bench);
  const auto bench_back = read_bench_csv(b);
  REQUIRE(bench_back.size() == 2);
  CHECK(bench_back[1].n_classes == 8);
  CHECK(bench_back[0].protos == 100.5);
  CHECK(bench_back[1].wall_ms == 10.0);

  const std::vector<TraceEntry> trace{{1, 0, 2, 7}, {3, 4, 1, 12}};
  std::stringstream t;
  write_trace_csv(t, trace);
  CHECK(read_trace_csv(t) == trace);

  std::stringstream wrong("a,b\n1,2\n");
  CHECK_THROWS_AS(read_trace_csv(wrong), DataError);
  std::stringstream short_row(std::string(kTraceHeader) + "\n1,2\n");
  CHECK_THROWS_AS(read_trace_csv(short_row), DataError);
}

TEST_CASE("run_bench produces a feature sweep then a class sweep") {
  BenchConfig cfg;
  cfg.features = {2, 4};
  cfg.classes = {2, 3};
  cfg.base_features = 4;
  cfg.base_classes = 2;
  cfg.n_samples = 150;
  cfg.runs = 3;
  const auto rows = run_bench(cfg);
  REQUIRE(rows.size() == 4);
  CHECK(rows[0].n_features == 2);
  CHECK(rows[0].n_classes == 2);
  CHECK(rows[1].n_features == 4);
  CHECK(rows[2].n_features == 4);
  CHECK(rows[3].n_classes == 3);
  for (const BenchRow& r : rows) {
    CHECK(r.protos > 0.0);
    CHECK(r.bytes == doctest::Approx(r.protos * static_cast<double>(r.n_features + 1) * 8.0));
    CHECK(r.wall_ms >= 0.0);
  }
  CHECK(median_of({3.0, 1.0, 2.0}) == 2.0);
  CHECK(median_of({4.0, 1.0, 2.0, 3.0}) == 2.5);
  cfg.runs = 0;
  CHECK_THROWS_AS(run_bench(cfg), ConfigError);
}

TEST_CASE("cli exit codes") {
  const fs::path good = write_file("good.json", R"({
    "dataset": {"source": "synthetic", "n_features": 3, "n_samples": 120, "seed": 1},
    "simulation": {"n_nodes": 3, "partition_sizes": [50, 50, 20], "t": 0.0},
    "learner": {"lambda": 20},
    "sweep": {"t_values": [0.0, 0.5]}
  })");
  const std::string out = (scratch_dir() / "cli_out").string();
  CHECK(run_cli("run --config \"" + good.string() + "\" --out \"" + out + "\"") == 0);
  std::ifstream result(fs::path(out) / "run_result.json");
  REQUIRE(result.good());
  const json r = json::parse(result);
  CHECK(r.at("total_messages") == 0);
  std::ifstream trace(fs::path(out) / "trace.csv");
  std::string header;
  std::getline(trace, header);
  CHECK(header == kTraceHeader);

  CHECK(run_cli("sweep --config \"" + good.string() + "\" --out \"" + out + "\"") == 0);
  CHECK(fs::exists(fs::path(out) / "sweep.csv"));
  CHECK(run_cli("baseline --config \"" + good.string() + "\" --out \"" + out + "\"") == 0);
  CHECK(run_cli("epidemic --beta 1 --nodes 5 --points 5") == 0);

  const fs::path bad = write_file("bad.json", R"({"simulation": {"n_nodes": "x"}})");
  CHECK(run_cli("run --config \"" + bad.string() + "\"") == 2);
  CHECK(run_cli("run --config \"" + (scratch_dir() / "absent.json").string() + "\"") == 2);
  CHECK(run_cli("run") == 2);
  CHECK(run_cli("no-such-command") == 2);

  const fs::path missing_data = write_file("missing_data.json", R"({
    "dataset": {"source": "csv", "path": "nowhere.csv", "label_column": "y"}
  })");
  CHECK(run_cli("run --config \"" + missing_data.string() + "\" --out \"" + out + "\"") == 3);
}

TEST_CASE("shipped configs parse") {
  for (const auto& entry : fs::directory_iterator(fs::path(PROTONET_SOURCE_DIR) / "configs")) {
    if (entry.path().extension() != ".json") continue;
    CAPTURE(entry.path().string());
    CHECK_NOTHROW(load_experiment(entry.path()));
  }
}
