#pragma once

#include <cstdint>
#include <optional>
#include <span>

#include "protonet/simnet.hpp"

namespace protonet {

/// Susceptible-informed rumor model.
struct SiParams {
  double beta = 1.0;          ///< infection rate per unit time
  double x0 = 0.2;            ///< initial informed fraction, in (0, 1]
  std::uint64_t n_prime = 5;  ///< population size

  /// x0 = 1 / n' (one informed source).
  static SiParams single_source(double beta, std::uint64_t n_prime) {
    return {beta, 1.0 / static_cast<double>(n_prime), n_prime};
  }

  void validate() const;
};

/// Logistic solution x(t) = x0 e^{bt} / (1 - x0 + x0 e^{bt}), evaluated as
/// x0 / (x0 + (1 - x0) e^{-bt}) so that large bt does not overflow.
double si_closed_form(const SiParams& p, double t);

/// Fixed-step RK4 integration of dx/dt = beta (1 - x) x from x0 over [0, t].
/// The step is shrunk to t / ceil(t / dt) so the grid lands exactly on t.
double si_numeric(const SiParams& p, double t, double dt);

/// First round by which every node has received at least one message, or
/// nullopt if some node never does.
std::optional<std::uint64_t> diffusion_check(std::span<const TraceEntry> trace, std::size_t n_nodes);

}  // namespace protonet
