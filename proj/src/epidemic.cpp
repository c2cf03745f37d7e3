#include "protonet/epidemic.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "protonet/error.hpp"

namespace protonet {

void SiParams::validate() const {
  if (!(beta > 0.0)) throw ConfigError("SI beta must be positive");
  if (!(x0 > 0.0 && x0 <= 1.0)) throw ConfigError("SI x0 must lie in (0, 1]");
  if (n_prime < 1) throw ConfigError("SI population must be positive");
}

double si_closed_form(const SiParams& p, double t) {
  p.validate();
  if (t < 0.0) throw std::invalid_argument("si_closed_form: t must be non-negative");
  return p.x0 / (p.x0 + (1.0 - p.x0) * std::exp(-p.beta * t));
}

double si_numeric(const SiParams& p, double t, double dt) {
  p.validate();
  if (!(dt > 0.0)) throw std::invalid_argument("si_numeric: dt must be positive");
  if (t < 0.0) throw std::invalid_argument("si_numeric: t must be non-negative");
  const auto f = [&](double x) { return p.beta * (1.0 - x) * x; };
  double x = p.x0;
  if (t == 0.0) return x;
  const auto steps = static_cast<std::uint64_t>(std::ceil(t / dt - 1e-9));
  const double h = t / static_cast<double>(std::max<std::uint64_t>(steps, 1));
  for (std::uint64_t i = 0; i < std::max<std::uint64_t>(steps, 1); ++i) {
    const double k1 = f(x);
    const double k2 = f(x + 0.5 * h * k1);
    const double k3 = f(x + 0.5 * h * k2);
    const double k4 = f(x + h * k3);
    x += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return x;
}

std::optional<std::uint64_t> diffusion_check(std::span<const TraceEntry> trace, std::size_t n_nodes) {
  if (n_nodes == 0) return std::nullopt;
  std::vector<bool> reached(n_nodes, false);
  std::size_t remaining = n_nodes;
  for (const TraceEntry& e : trace) {
    if (e.receiver >= n_nodes) throw std::out_of_range("trace receiver outside the network");
    if (!reached[e.receiver]) {
      reached[e.receiver] = true;
      if (--remaining == 0) return e.step;
    }
  }
  return std::nullopt;
}

}  // namespace protonet
