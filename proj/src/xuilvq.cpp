#include "protonet/xuilvq.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "protonet/error.hpp"

namespace protonet {

void XuIlvqParams::validate() const {
  if (age_old < 1) throw ConfigError("learner.age_old must be >= 1");
  if (lambda < 1) throw ConfigError("learner.lambda must be >= 1");
  if (k < 1) throw ConfigError("learner.k must be >= 1");
  for (const RateRule* r : {&eta1, &eta2}) {
    if (!(r->scale > 0.0) || !std::isfinite(r->scale)) throw ConfigError("learning-rate scale must be positive");
  }
}

Threshold compute_threshold(const PrototypeGraph& graph, PrototypeId id) {
  const Prototype& self = graph.at(id);
  if (self.neighbors.empty()) return std::nullopt;

  std::vector<double> same;
  std::vector<double> diff;
  for (PrototypeId n : self.neighbors) {
    const Prototype& other = graph.at(n);
    const double d = distance(self.weights, other.weights);
    (other.label == self.label ? same : diff).push_back(d);
  }
  if (same.empty()) return *std::max_element(diff.begin(), diff.end());
  if (diff.empty()) return *std::min_element(same.begin(), same.end());

  double mean_same = 0.0;
  for (double d : same) mean_same += d;
  mean_same /= static_cast<double>(same.size());

  // Drop the nearest between-class neighbor until the threshold clears the
  // in-class mean.
  std::sort(diff.begin(), diff.end());
  for (double t : diff) {
    if (t >= mean_same) return t;
  }
  return mean_same;
}

XuIlvqModel::XuIlvqModel(XuIlvqParams params) : params_(params) { params_.validate(); }

XuIlvqModel XuIlvqModel::restore(XuIlvqParams params, PrototypeGraph graph, std::uint64_t step_index) {
  XuIlvqModel m(params);
  m.graph_ = std::move(graph);
  m.step_index_ = step_index;
  return m;
}

void XuIlvqModel::check_dimension(std::span<const double> x) const {
  if (graph_.dimension() != 0 && x.size() != graph_.dimension()) {
    throw DimensionError("xuilvq: expected dimension " + std::to_string(graph_.dimension()) + ", got " +
                         std::to_string(x.size()));
  }
  if (x.empty()) throw DimensionError("xuilvq: empty feature vector");
}

XuIlvqModel::Search XuIlvqModel::search(std::span<const double> x, std::optional<Label> probe) const {
  const auto& protos = graph_.prototypes();
  const std::size_t d = graph_.dimension();
  double best = std::numeric_limits<double>::infinity();
  double second = best;
  std::size_t s1 = 0;
  std::size_t s2 = 0;
  std::size_t found = 0;
  Search out;
  // Strict comparisons over id-ordered storage give lowest-id tie-breaking.
  // A partial sum that already reaches the runner-up distance cannot displace
  // either, so the scan stops early.
  for (std::size_t i = 0; i < protos.size(); ++i) {
    const Prototype& p = protos[i];
    if (probe && p.label == *probe) out.label_seen = true;
    const double* w = p.weights.data();
    double dist = 0.0;
    std::size_t j = 0;
    for (; j < d; ++j) {
      const double diff = x[j] - w[j];
      dist += diff * diff;
      if (found == 2 && dist >= second) break;
    }
    if (j < d) continue;
    if (found == 0 || dist < best) {
      second = best;
      s2 = s1;
      best = dist;
      s1 = i;
      found = std::min<std::size_t>(found + 1, 2);
    } else if (found == 1 || dist < second) {
      second = dist;
      s2 = i;
      found = 2;
    }
  }
  out.s1 = protos[s1].id;
  out.s2 = protos[s2].id;
  return out;
}

std::pair<PrototypeId, PrototypeId> XuIlvqModel::winner_and_runner_up(std::span<const double> x) const {
  if (graph_.size() < 2) throw std::logic_error("winner_and_runner_up needs two prototypes");
  const Search s = search(x, std::nullopt);
  return {s.s1, s.s2};
}

LearnOutcome XuIlvqModel::learn_one(std::span<const double> x, Label y) {
  check_dimension(x);

  if (graph_.size() < 2) {
    graph_.insert(x, y);
    ++step_index_;
    return LearnOutcome::buffered_init;
  }

  const Search found = search(x, y);
  const PrototypeId s1 = found.s1;
  const PrototypeId s2 = found.s2;

  const auto exceeds = [&](PrototypeId id) {
    const Threshold t = compute_threshold(graph_, id);
    // An undefined threshold behaves as +inf.
    return t.has_value() && distance(x, graph_.at(id).weights) > *t;
  };
  const bool duplicate = params_.merge_duplicates && graph_.at(s1).label == y &&
                         squared_distance_unchecked(x.data(), graph_.at(s1).weights.data(), x.size()) == 0.0;
  if (!duplicate && (!found.label_seen || exceeds(s1) || exceeds(s2))) {
    graph_.insert(x, y);
    ++step_index_;
    return LearnOutcome::inserted_new_prototype;
  }

  graph_.set_edge(s1, s2, 0);
  for (PrototypeId n : graph_.neighbors(s1)) ++graph_.edge_age_ref(s1, n);

  Prototype& winner = graph_.at(s1);
  ++winner.win_count;
  const double eta1 = params_.eta1.rate(winner.win_count);
  const double eta2 = params_.eta2.rate(winner.win_count);
  const std::size_t d = graph_.dimension();

  const auto move = [&](Prototype& p, double signed_rate) {
    for (std::size_t i = 0; i < d; ++i) p.weights[i] += signed_rate * (x[i] - p.weights[i]);
  };

  const bool same_class = winner.label == y;
  move(winner, same_class ? eta1 : -eta1);
  const std::vector<PrototypeId> adjacent = graph_.neighbors(s1);
  for (PrototypeId n : adjacent) {
    Prototype& p = graph_.at(n);
    if (same_class && p.label != y) {
      move(p, -eta2);
    } else if (!same_class && p.label == y) {
      move(p, eta2);
    }
  }

  // Only s1's edges aged, so only they can have expired.
  for (PrototypeId n : adjacent) {
    if (graph_.edge_age(s1, n) >= params_.age_old) graph_.remove_edge(s1, n);
  }

  ++step_index_;
  if (step_index_ % params_.lambda == 0) denoise();
  return LearnOutcome::updated_winner;
}

std::size_t XuIlvqModel::denoise() {
  const auto& protos = graph_.prototypes();
  if (protos.empty()) return 0;
  double mean_wins = 0.0;
  for (const Prototype& p : protos) mean_wins += static_cast<double>(p.win_count);
  mean_wins /= static_cast<double>(protos.size());

  std::vector<PrototypeId> doomed;
  for (const Prototype& p : protos) {
    const std::size_t degree = p.neighbors.size();
    if (degree == 0 || (degree == 1 && static_cast<double>(p.win_count) < 0.5 * mean_wins)) {
      doomed.push_back(p.id);
    }
  }
  for (PrototypeId id : doomed) graph_.erase(id);
  return doomed.size();
}

std::vector<std::pair<double, PrototypeId>> XuIlvqModel::nearest(std::span<const double> x, std::size_t k) const {
  const auto& protos = graph_.prototypes();
  const std::size_t d = graph_.dimension();
  std::vector<std::pair<double, PrototypeId>> all;
  all.reserve(protos.size());
  for (const Prototype& p : protos) all.emplace_back(squared_distance_unchecked(x.data(), p.weights.data(), d), p.id);
  k = std::min(k, all.size());
  std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(k), all.end());
  all.resize(k);
  for (auto& entry : all) entry.first = std::sqrt(entry.first);
  return all;
}

std::vector<std::pair<Label, double>> XuIlvqModel::predict_proba(std::span<const double> x) const {
  if (graph_.empty()) return {};
  check_dimension(x);
  const auto knn = nearest(x, params_.k);

  std::map<Label, double> votes;
  for (const auto& [dist, id] : knn) {
    const Label c = graph_.at(id).label;
    if (dist == 0.0) return {{c, 1.0}};
    votes[c] += 1.0 / dist;
  }

  double top = -std::numeric_limits<double>::infinity();
  for (const auto& [c, v] : votes) top = std::max(top, v);
  double norm = 0.0;
  std::vector<std::pair<Label, double>> out;
  for (const auto& [c, v] : votes) {
    const double e = std::exp(v - top);
    out.emplace_back(c, e);
    norm += e;
  }
  for (auto& entry : out) entry.second /= norm;
  return out;
}

std::optional<Label> XuIlvqModel::predict_one(std::span<const double> x) const {
  if (graph_.empty()) return std::nullopt;
  check_dimension(x);
  const auto knn = nearest(x, params_.k);

  std::map<Label, double> votes;
  for (const auto& [dist, id] : knn) {
    const Label c = graph_.at(id).label;
    if (dist == 0.0) return c;
    votes[c] += 1.0 / dist;
  }
  // Softmax is monotone, so the argmax of the raw scores is the answer.
  // std::map iterates labels ascending; strict > keeps the lowest on ties.
  std::optional<Label> best;
  double best_score = -1.0;
  for (const auto& [c, v] : votes) {
    if (v > best_score) {
      best_score = v;
      best = c;
    }
  }
  return best;
}

std::vector<LabeledVector> XuIlvqModel::export_prototypes() const {
  std::vector<LabeledVector> out;
  out.reserve(graph_.size());
  for (const Prototype& p : graph_.prototypes()) out.push_back({p.weights, p.label});
  return out;
}

}  // namespace protonet
