#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <variant>
#include <vector>

#include "protonet/prototypes.hpp"

namespace protonet {

/// An ordered stream of labeled samples with dense labels 0..n_classes-1.
struct Dataset {
  std::vector<Sample> samples;
  std::size_t dimension = 0;
  std::size_t n_classes = 0;
  std::vector<std::string> feature_names;
  /// label_names[i] is the original value that was mapped to label i.
  std::vector<std::string> label_names;

  [[nodiscard]] std::size_t size() const { return samples.size(); }
};

struct CsvSource {
  std::filesystem::path path;
  std::string label_column;
  /// Empty means every column except the label, in file order.
  std::vector<std::string> feature_columns;
};

/// Seeded Gaussian blobs. With clusters_per_class == 1 each class is one
/// isotropic unit-variance blob and the class centroids are pairwise
/// `separation` apart. With more clusters per class, cluster centres are
/// drawn uniformly from a cube of side `separation` and each class is a
/// mixture; `label_noise` flips that fraction of labels uniformly.
struct SynthSource {
  std::size_t n_features = 10;
  std::size_t n_classes = 2;
  std::size_t n_samples = 1000;
  double separation = 10.0;
  std::uint64_t seed = 0;
  std::size_t clusters_per_class = 1;
  double cluster_spread = 1.0;
  double label_noise = 0.0;

  void validate() const;
};

using DatasetSpec = std::variant<CsvSource, SynthSource>;

/// Reads a CSV with a header row. Labels are mapped to dense integers:
/// numerically ordered when every label parses as a number, otherwise
/// lexicographically. Throws DataError (with the 1-based line number) on
/// malformed rows.
Dataset load_csv(const CsvSource& spec);

Dataset synth_dataset(const SynthSource& spec);

Dataset load_dataset(const DatasetSpec& spec);

/// Writes features then a `label` column holding the original label names.
void write_csv(const Dataset& data, const std::filesystem::path& path, const std::string& label_column = "label");

/// Splits one CSV line, honouring double-quoted fields.
std::vector<std::string> split_csv_line(const std::string& line);

}  // namespace protonet
