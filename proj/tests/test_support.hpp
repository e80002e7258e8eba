#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "pinlab/model.hpp"

namespace pinlab::testing {

/// Random small instance: positive tabulated p, a field h and charges.
struct Instance {
  InterArrivalLaw law;
  double h = 0.0;
  DisorderSample omega;
  int n = 0;
};

inline DisorderLaw family_for(std::uint64_t k) {
  switch (k % 5) {
    case 0: return DisorderLaw::zero();
    case 1: return DisorderLaw::gaussian(1.0);
    case 2: return DisorderLaw::uniform_centered(1.5);
    case 3: return DisorderLaw::rademacher(0.8);
    default: return DisorderLaw::shifted_exponential(0.7);
  }
}

/// p(t) = exp(-u_t * (1 + t/4)) with u_t uniform in (0.3, 2.3), so tables are
/// positive but otherwise arbitrary. n_max >= n + extra.
inline Instance random_instance(std::uint64_t seed, int n, double h_lo = -2.0, double h_hi = 4.0, int extra = 0) {
  CounterRng rng(seed, 0xABCDEFULL);
  std::vector<double> lp(static_cast<std::size_t>(std::max(n + extra, 1)));
  for (std::size_t t = 0; t < lp.size(); ++t) lp[t] = -(0.3 + 2.0 * rng.uniform()) * (1.0 + (t + 1) / 4.0);
  Instance inst{InterArrivalLaw::from_table(std::move(lp)), h_lo + (h_hi - h_lo) * rng.uniform(),
                sample_disorder(family_for(seed), std::max(n + extra, 1), seed, 7), n};
  return inst;
}

inline double rel_err(double a, double b) { return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300}); }

}  // namespace pinlab::testing
