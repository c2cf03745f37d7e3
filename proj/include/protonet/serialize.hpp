#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "protonet/bench.hpp"
#include "protonet/simnet.hpp"
#include "protonet/xuilvq.hpp"

namespace protonet {

nlohmann::ordered_json to_json(const RunResult& r);
nlohmann::ordered_json to_json(const AggregateResult& a);

/// Model snapshot: params, step index, next id, prototypes and edges.
nlohmann::ordered_json model_to_json(const XuIlvqModel& m);
/// Throws std::invalid_argument (or a json exception) on malformed snapshots.
XuIlvqModel model_from_json(const nlohmann::json& j);

/// Shortest decimal text that reads back to the same double.
std::string format_double(double v);

inline constexpr const char* kSweepHeader = "t,f1_mean,f1_ci,L_mean,Tc_mean";
inline constexpr const char* kBenchHeader = "n_features,n_classes,protos,bytes,wall_ms";
inline constexpr const char* kTraceHeader = "step,sender,receiver,prototype_count";

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows);
std::vector<SweepRow> read_sweep_csv(std::istream& in);

void write_bench_csv(std::ostream& out, const std::vector<BenchRow>& rows);
std::vector<BenchRow> read_bench_csv(std::istream& in);

void write_trace_csv(std::ostream& out, const std::vector<TraceEntry>& trace);
std::vector<TraceEntry> read_trace_csv(std::istream& in);

}  // namespace protonet
