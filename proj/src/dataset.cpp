#include "protonet/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "protonet/error.hpp"
#include "protonet/rng.hpp"

namespace protonet {

namespace {

std::string trim(std::string s) {
  const auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

bool parse_double(const std::string& text, double& out) {
  const char* first = text.data();
  const char* last = text.data() + text.size();
  if (first != last && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last && first != last;
}

}  // namespace

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur.push_back('"');
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(trim(std::move(cur)));
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  fields.push_back(trim(std::move(cur)));
  return fields;
}

Dataset load_csv(const CsvSource& spec) {
  std::ifstream in(spec.path);
  if (!in) throw DataError("cannot open dataset file " + spec.path.string());

  std::string line;
  if (!std::getline(in, line)) throw DataError(spec.path.string() + ": empty file, expected a header row");
  const std::vector<std::string> header = split_csv_line(line);

  const auto column_of = [&](const std::string& name) -> std::size_t {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw DataError(spec.path.string() + ": no column named '" + name + "' in header");
    return static_cast<std::size_t>(it - header.begin());
  };

  const std::size_t label_col = column_of(spec.label_column);
  std::vector<std::size_t> feature_cols;
  Dataset data;
  if (spec.feature_columns.empty()) {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (i != label_col) {
        feature_cols.push_back(i);
        data.feature_names.push_back(header[i]);
      }
    }
  } else {
    for (const auto& name : spec.feature_columns) {
      feature_cols.push_back(column_of(name));
      data.feature_names.push_back(name);
    }
  }
  if (feature_cols.empty()) throw DataError(spec.path.string() + ": no feature columns");

  std::vector<std::string> raw_labels;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != header.size()) {
      throw DataError(spec.path.string() + ":" + std::to_string(line_no) + ": expected " +
                      std::to_string(header.size()) + " fields, found " + std::to_string(fields.size()));
    }
    Sample s;
    s.features.reserve(feature_cols.size());
    for (std::size_t col : feature_cols) {
      double v = 0.0;
      if (!parse_double(fields[col], v)) {
        throw DataError(spec.path.string() + ":" + std::to_string(line_no) + ": column '" + header[col] +
                        "' is not a number: '" + fields[col] + "'");
      }
      s.features.push_back(v);
    }
    raw_labels.push_back(fields[label_col]);
    data.samples.push_back(std::move(s));
  }

  // Dense label mapping with a deterministic order.
  std::set<std::string> distinct(raw_labels.begin(), raw_labels.end());
  std::vector<std::string> names(distinct.begin(), distinct.end());
  const bool numeric = std::all_of(names.begin(), names.end(), [](const std::string& n) {
    double v = 0.0;
    return parse_double(n, v);
  });
  if (numeric) {
    std::stable_sort(names.begin(), names.end(), [](const std::string& a, const std::string& b) {
      double x = 0.0;
      double y = 0.0;
      parse_double(a, x);
      parse_double(b, y);
      return x < y;
    });
  }
  std::map<std::string, Label> index;
  for (std::size_t i = 0; i < names.size(); ++i) index.emplace(names[i], static_cast<Label>(i));
  for (std::size_t i = 0; i < data.samples.size(); ++i) data.samples[i].label = index.at(raw_labels[i]);

  data.label_names = std::move(names);
  data.n_classes = data.label_names.size();
  data.dimension = feature_cols.size();
  return data;
}

void SynthSource::validate() const {
  if (n_features < 1) throw ConfigError("dataset.n_features must be >= 1");
  if (n_classes < 2) throw ConfigError("dataset.n_classes must be >= 2");
  if (clusters_per_class < 1) throw ConfigError("dataset.clusters_per_class must be >= 1");
  if (clusters_per_class == 1 && n_classes > 2 * n_features) {
    throw ConfigError("dataset.n_classes may not exceed 2 * n_features for single-blob classes");
  }
  if (!(separation > 0.0)) throw ConfigError("dataset.separation must be positive");
  if (!(cluster_spread > 0.0)) throw ConfigError("dataset.cluster_spread must be positive");
  if (!(label_noise >= 0.0 && label_noise < 1.0)) throw ConfigError("dataset.label_noise must lie in [0, 1)");
}

Dataset synth_dataset(const SynthSource& spec) {
  spec.validate();
  const Rng root(spec.seed);
  Rng centre_rng = root.derive("synth-centres");
  Rng sample_rng = root.derive("synth-samples");

  const std::size_t d = spec.n_features;
  // centres[c][k] is the k-th cluster centre of class c.
  std::vector<std::vector<std::vector<double>>> centres(spec.n_classes);
  for (std::size_t c = 0; c < spec.n_classes; ++c) {
    if (spec.clusters_per_class == 1) {
      std::vector<double> centre(d, 0.0);
      const double sign = (c / d) % 2 == 0 ? 1.0 : -1.0;
      centre[c % d] = sign * spec.separation / std::sqrt(2.0);
      centres[c].push_back(std::move(centre));
    } else {
      for (std::size_t k = 0; k < spec.clusters_per_class; ++k) {
        std::vector<double> centre(d);
        for (double& v : centre) v = spec.separation * centre_rng.uniform01();
        centres[c].push_back(std::move(centre));
      }
    }
  }

  Dataset data;
  data.dimension = d;
  data.n_classes = spec.n_classes;
  for (std::size_t j = 0; j < d; ++j) data.feature_names.push_back("x" + std::to_string(j));
  for (std::size_t c = 0; c < spec.n_classes; ++c) data.label_names.push_back(std::to_string(c));
  data.samples.reserve(spec.n_samples);
  for (std::size_t i = 0; i < spec.n_samples; ++i) {
    const auto c = static_cast<std::size_t>(sample_rng.uniform_index(spec.n_classes));
    const auto k = static_cast<std::size_t>(sample_rng.uniform_index(spec.clusters_per_class));
    Sample s;
    s.features.resize(d);
    for (std::size_t j = 0; j < d; ++j) s.features[j] = centres[c][k][j] + spec.cluster_spread * sample_rng.normal();
    s.label = static_cast<Label>(c);
    if (spec.label_noise > 0.0 && sample_rng.uniform01() < spec.label_noise) {
      const auto shift = 1 + sample_rng.uniform_index(spec.n_classes - 1);
      s.label = static_cast<Label>((c + shift) % spec.n_classes);
    }
    data.samples.push_back(std::move(s));
  }
  return data;
}

Dataset load_dataset(const DatasetSpec& spec) {
  return std::visit(
      [](const auto& src) -> Dataset {
        using S = std::decay_t<decltype(src)>;
        if constexpr (std::is_same_v<S, CsvSource>) {
          return load_csv(src);
        } else {
          return synth_dataset(src);
        }
      },
      spec);
}

void write_csv(const Dataset& data, const std::filesystem::path& path, const std::string& label_column) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  for (std::size_t j = 0; j < data.dimension; ++j) {
    out << (j < data.feature_names.size() ? data.feature_names[j] : "x" + std::to_string(j)) << ',';
  }
  out << label_column << '\n';
  char buf[32];
  for (const Sample& s : data.samples) {
    for (double v : s.features) {
      auto res = std::to_chars(buf, buf + sizeof(buf), v);
      out.write(buf, res.ptr - buf) << ',';
    }
    const auto l = static_cast<std::size_t>(s.label);
    out << (l < data.label_names.size() ? data.label_names[l] : std::to_string(s.label)) << '\n';
  }
}

}  // namespace protonet
