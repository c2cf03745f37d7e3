#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace protonet {

using Label = int;
using PrototypeId = std::uint64_t;

struct Sample {
  std::vector<double> features;
  Label label = 0;
};

/// Weights plus class; what nodes exchange with each other.
struct LabeledVector {
  std::vector<double> weights;
  Label label = 0;

  friend bool operator==(const LabeledVector&, const LabeledVector&) = default;
};

struct Prototype {
  PrototypeId id = 0;
  std::vector<double> weights;
  Label label = 0;
  std::uint64_t win_count = 0;
  /// Sorted ids of adjacent prototypes. Kept in sync with the graph's edge map.
  std::vector<PrototypeId> neighbors;
};

/// Unordered pair stored as (lo, hi).
struct EdgeKey {
  PrototypeId lo = 0;
  PrototypeId hi = 0;

  EdgeKey() = default;
  EdgeKey(PrototypeId a, PrototypeId b) : lo(a < b ? a : b), hi(a < b ? b : a) {}

  friend auto operator<=>(const EdgeKey&, const EdgeKey&) = default;
};

/// Euclidean distance. Throws DimensionError on mismatched sizes.
double distance(std::span<const double> a, std::span<const double> b);

/// Squared Euclidean distance without the dimension check.
inline double squared_distance_unchecked(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = a[i] - b[i];
    acc += d * d;
  }
  return acc;
}

/// Prototypes and the aged edges between them.
///
/// Prototypes are kept sorted by id; ids are handed out monotonically and are
/// never reused, so appending preserves the order.
class PrototypeGraph {
 public:
  PrototypeGraph() = default;
  explicit PrototypeGraph(std::size_t dimension) : dimension_(dimension) {}

  [[nodiscard]] std::size_t dimension() const { return dimension_; }
  [[nodiscard]] std::size_t size() const { return prototypes_.size(); }
  [[nodiscard]] bool empty() const { return prototypes_.empty(); }
  [[nodiscard]] PrototypeId next_id() const { return next_id_; }

  [[nodiscard]] const std::vector<Prototype>& prototypes() const { return prototypes_; }
  [[nodiscard]] const std::map<EdgeKey, std::uint32_t>& edges() const { return edges_; }

  /// Adds a prototype with win_count 1 and no edges. Fixes the graph
  /// dimension on first insertion.
  PrototypeId insert(std::span<const double> weights, Label label);

  [[nodiscard]] bool contains(PrototypeId id) const;
  [[nodiscard]] const Prototype& at(PrototypeId id) const;
  Prototype& at(PrototypeId id);

  void erase(PrototypeId id);

  /// Creates the edge if missing; in both cases sets its age to `age`.
  void set_edge(PrototypeId a, PrototypeId b, std::uint32_t age = 0);
  void remove_edge(PrototypeId a, PrototypeId b);
  [[nodiscard]] bool has_edge(PrototypeId a, PrototypeId b) const;
  [[nodiscard]] std::uint32_t edge_age(PrototypeId a, PrototypeId b) const;
  std::uint32_t& edge_age_ref(PrototypeId a, PrototypeId b);

  /// Ids adjacent to `id`, ascending. Throws UnknownPrototype.
  [[nodiscard]] const std::vector<PrototypeId>& neighbors(PrototypeId id) const;

  /// Checks every structural invariant. Returns an empty string when the
  /// graph is valid, otherwise a description of the first violation.
  [[nodiscard]] std::string validate() const;

  /// Rebuilds a graph from raw parts (deserialization). Throws on
  /// inconsistent input.
  static PrototypeGraph from_parts(std::size_t dimension, PrototypeId next_id,
                                   std::vector<Prototype> prototypes,
                                   const std::vector<std::pair<EdgeKey, std::uint32_t>>& edges);

  friend bool operator==(const PrototypeGraph& a, const PrototypeGraph& b);

 private:
  std::size_t index_of(PrototypeId id) const;

  std::size_t dimension_ = 0;
  PrototypeId next_id_ = 0;
  std::vector<Prototype> prototypes_;
  std::map<EdgeKey, std::uint32_t> edges_;
};

/// Free-function form of PrototypeGraph::neighbors.
inline const std::vector<PrototypeId>& neighbors(const PrototypeGraph& graph, PrototypeId id) {
  return graph.neighbors(id);
}

bool operator==(const Prototype& a, const Prototype& b);

}  // namespace protonet
