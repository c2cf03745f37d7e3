#include "protonet/prototypes.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "protonet/error.hpp"

namespace protonet {

double distance(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    std::ostringstream msg;
    msg << "distance: dimension mismatch (" << a.size() << " vs " << b.size() << ")";
    throw DimensionError(msg.str());
  }
  return std::sqrt(squared_distance_unchecked(a.data(), b.data(), a.size()));
}

bool operator==(const Prototype& a, const Prototype& b) {
  return a.id == b.id && a.weights == b.weights && a.label == b.label && a.win_count == b.win_count &&
         a.neighbors == b.neighbors;
}

bool operator==(const PrototypeGraph& a, const PrototypeGraph& b) {
  return a.dimension_ == b.dimension_ && a.next_id_ == b.next_id_ && a.prototypes_ == b.prototypes_ &&
         a.edges_ == b.edges_;
}

std::size_t PrototypeGraph::index_of(PrototypeId id) const {
  auto it = std::lower_bound(prototypes_.begin(), prototypes_.end(), id,
                             [](const Prototype& p, PrototypeId key) { return p.id < key; });
  if (it == prototypes_.end() || it->id != id) {
    throw UnknownPrototype("unknown prototype id " + std::to_string(id));
  }
  return static_cast<std::size_t>(it - prototypes_.begin());
}

PrototypeId PrototypeGraph::insert(std::span<const double> weights, Label label) {
  if (prototypes_.empty() && dimension_ == 0) {
    dimension_ = weights.size();
  }
  if (weights.size() != dimension_ || dimension_ == 0) {
    throw DimensionError("insert: expected dimension " + std::to_string(dimension_) + ", got " +
                         std::to_string(weights.size()));
  }
  Prototype p;
  p.id = next_id_++;
  p.weights.assign(weights.begin(), weights.end());
  p.label = label;
  p.win_count = 1;
  prototypes_.push_back(std::move(p));
  return prototypes_.back().id;
}

bool PrototypeGraph::contains(PrototypeId id) const {
  auto it = std::lower_bound(prototypes_.begin(), prototypes_.end(), id,
                             [](const Prototype& p, PrototypeId key) { return p.id < key; });
  return it != prototypes_.end() && it->id == id;
}

const Prototype& PrototypeGraph::at(PrototypeId id) const { return prototypes_[index_of(id)]; }
Prototype& PrototypeGraph::at(PrototypeId id) { return prototypes_[index_of(id)]; }

void PrototypeGraph::erase(PrototypeId id) {
  const std::size_t idx = index_of(id);
  for (PrototypeId other : prototypes_[idx].neighbors) {
    edges_.erase(EdgeKey(id, other));
    auto& nb = at(other).neighbors;
    nb.erase(std::lower_bound(nb.begin(), nb.end(), id));
  }
  prototypes_.erase(prototypes_.begin() + static_cast<std::ptrdiff_t>(idx));
}

void PrototypeGraph::set_edge(PrototypeId a, PrototypeId b, std::uint32_t age) {
  if (a == b) throw std::invalid_argument("set_edge: self-edge on prototype " + std::to_string(a));
  auto& na = at(a).neighbors;
  auto& nb = at(b).neighbors;
  auto [it, inserted] = edges_.insert_or_assign(EdgeKey(a, b), age);
  (void)it;
  if (inserted) {
    na.insert(std::lower_bound(na.begin(), na.end(), b), b);
    nb.insert(std::lower_bound(nb.begin(), nb.end(), a), a);
  }
}

void PrototypeGraph::remove_edge(PrototypeId a, PrototypeId b) {
  if (edges_.erase(EdgeKey(a, b)) == 0) return;
  auto& na = at(a).neighbors;
  auto& nb = at(b).neighbors;
  na.erase(std::lower_bound(na.begin(), na.end(), b));
  nb.erase(std::lower_bound(nb.begin(), nb.end(), a));
}

bool PrototypeGraph::has_edge(PrototypeId a, PrototypeId b) const { return edges_.contains(EdgeKey(a, b)); }

std::uint32_t PrototypeGraph::edge_age(PrototypeId a, PrototypeId b) const {
  auto it = edges_.find(EdgeKey(a, b));
  if (it == edges_.end()) throw std::out_of_range("no edge between prototypes");
  return it->second;
}

std::uint32_t& PrototypeGraph::edge_age_ref(PrototypeId a, PrototypeId b) {
  auto it = edges_.find(EdgeKey(a, b));
  if (it == edges_.end()) throw std::out_of_range("no edge between prototypes");
  return it->second;
}

const std::vector<PrototypeId>& PrototypeGraph::neighbors(PrototypeId id) const { return at(id).neighbors; }

std::string PrototypeGraph::validate() const {
  std::ostringstream err;
  for (std::size_t i = 0; i < prototypes_.size(); ++i) {
    const Prototype& p = prototypes_[i];
    if (i > 0 && prototypes_[i - 1].id >= p.id) {
      err << "prototype ids not strictly increasing at " << p.id;
      return err.str();
    }
    if (p.id >= next_id_) {
      err << "prototype id " << p.id << " not below next_id " << next_id_;
      return err.str();
    }
    if (p.weights.size() != dimension_) {
      err << "prototype " << p.id << " has dimension " << p.weights.size() << ", graph has " << dimension_;
      return err.str();
    }
    if (!std::is_sorted(p.neighbors.begin(), p.neighbors.end()) ||
        std::adjacent_find(p.neighbors.begin(), p.neighbors.end()) != p.neighbors.end()) {
      err << "prototype " << p.id << " has an unsorted or duplicated neighbor list";
      return err.str();
    }
    for (PrototypeId n : p.neighbors) {
      if (n == p.id) {
        err << "self-edge on prototype " << p.id;
        return err.str();
      }
      if (!edges_.contains(EdgeKey(p.id, n))) {
        err << "neighbor list of " << p.id << " mentions " << n << " without an edge";
        return err.str();
      }
    }
  }
  std::size_t adjacency_total = 0;
  for (const Prototype& p : prototypes_) adjacency_total += p.neighbors.size();
  if (adjacency_total != 2 * edges_.size()) {
    err << "edge map and neighbor lists disagree (" << edges_.size() << " edges, " << adjacency_total
        << " adjacency entries)";
    return err.str();
  }
  for (const auto& [key, age] : edges_) {
    (void)age;
    if (key.lo == key.hi) {
      err << "self-edge on prototype " << key.lo;
      return err.str();
    }
    if (!contains(key.lo) || !contains(key.hi)) {
      err << "edge (" << key.lo << "," << key.hi << ") references a missing prototype";
      return err.str();
    }
  }
  return {};
}

PrototypeGraph PrototypeGraph::from_parts(std::size_t dimension, PrototypeId next_id,
                                          std::vector<Prototype> prototypes,
                                          const std::vector<std::pair<EdgeKey, std::uint32_t>>& edges) {
  PrototypeGraph g(dimension);
  g.next_id_ = next_id;
  for (auto& p : prototypes) p.neighbors.clear();
  g.prototypes_ = std::move(prototypes);
  for (const auto& [key, age] : edges) {
    if (g.has_edge(key.lo, key.hi)) throw std::invalid_argument("duplicate edge in snapshot");
    g.set_edge(key.lo, key.hi, age);
  }
  if (auto problem = g.validate(); !problem.empty()) {
    throw std::invalid_argument("invalid prototype graph: " + problem);
  }
  return g;
}

}  // namespace protonet
