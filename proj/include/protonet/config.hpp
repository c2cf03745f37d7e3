#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "protonet/bench.hpp"
#include "protonet/dataset.hpp"
#include "protonet/simnet.hpp"

namespace protonet {

/// Everything one CLI invocation needs. Mirrors schemas/experiment.schema.json.
struct ExperimentFile {
  DatasetSpec dataset = SynthSource{};
  SimConfig simulation;
  std::vector<double> t_values{0.0, 0.05, 0.1, 0.2, 0.3, 0.5, 1.0};
  BenchConfig bench;
  std::filesystem::path output_dir = "out";
};

/// Validates and converts an experiment document. Relative paths are resolved
/// against base_dir. Throws ConfigError naming the offending field.
ExperimentFile parse_experiment(const nlohmann::json& doc, const std::filesystem::path& base_dir = {});

/// Reads and parses a file. Throws ConfigError on malformed JSON and
/// DataError when the file cannot be opened.
ExperimentFile load_experiment(const std::filesystem::path& path);

nlohmann::json learner_to_json(const XuIlvqParams& p);
XuIlvqParams learner_from_json(const nlohmann::json& j);

}  // namespace protonet
