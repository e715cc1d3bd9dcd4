#pragma once

#include <cmath>
#include <cstdint>

#include "ordbayes/errors.hpp"

namespace ordbayes {

struct McmcConfig {
  int iterations = 0;
  int burn_in = 0;
  int thin = 1;
  int chains = 1;
  std::uint64_t seed = 1;

  void validate() const {
    if (iterations <= 0) throw ConfigError("mcmc: iterations must be positive");
    if (burn_in < 0) throw ConfigError("mcmc: burn-in must be nonnegative");
    if (iterations <= burn_in)
      throw ConfigError("mcmc: iterations must exceed burn-in");
    if (thin < 1) throw ConfigError("mcmc: thinning must be at least 1");
    if (chains < 1) throw ConfigError("mcmc: need at least 1 chain");
  }

  /// Draws kept per chain: sweeps s with s > burn_in and
  /// (s - burn_in) divisible by thin.
  int retained_per_chain() const { return (iterations - burn_in) / thin; }

  bool keep(int sweep) const {
    return sweep > burn_in && (sweep - burn_in) % thin == 0;
  }
};

/// Robbins-Monro adaptation of a random-walk proposal scale on the log
/// scale, targeting a fixed acceptance rate. Adapt only during burn-in and
/// freeze afterwards so the post-burn-in kernel satisfies detailed balance.
class AdaptiveScale {
public:
  explicit AdaptiveScale(double initial = 1.0, double target = 0.44)
      : log_scale_(std::log(initial)), target_(target) {}

  double scale() const { return std::exp(log_scale_); }

  void adapt(double accept_prob, int iteration) {
    const double step = std::pow(static_cast<double>(iteration), -0.6);
    log_scale_ += step * (accept_prob - target_);
    constexpr double lo = -6.907755278982137; // log(1e-3)
    constexpr double hi = 4.605170185988092;  // log(1e2)
    if (log_scale_ < lo) log_scale_ = lo;
    if (log_scale_ > hi) log_scale_ = hi;
  }

private:
  double log_scale_;
  double target_;
};

inline double accept_prob_from_log(double log_accept) {
  if (log_accept >= 0.0) return 1.0;
  return std::exp(log_accept);
}

} // namespace ordbayes
