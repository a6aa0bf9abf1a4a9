#pragma once

#include <cstddef>
#include <optional>
#include <utility>

namespace hlift {

/// Sharp bound on the Chan-Darwiche distance after replacing factors by
/// eps-equivalent ones: m ln((1 + (m-1)/m eps)(1 + eps) / (1 + eps/m)).
/// `m` is the factor count of the whole model. Throws InvalidArgument for
/// eps < 0 or m == 0.
double dcd_bound_sharp(double eps, std::size_t m);

struct LooseBounds {
  double d3 = 0.0;  // 2m ln(1 + eps)
  double d4 = 0.0;  // m ln((1 + eps)/(1 - eps))
};

/// Throws EpsOutOfRange for eps >= 1 (d4 undefined).
LooseBounds dcd_bounds_loose(double eps, std::size_t m);

/// Largest change of any query probability for a given distance:
/// (sqrt(e^d) - 1)/(sqrt(e^d) + 1) = tanh(d/4).
double pmax_bound(double d);

struct Interval {
  double lower = 0.0;
  double upper = 0.0;
};

/// Range of p' given p and a distance d.
Interval cd_interval(double p, double d);

/// Smallest eps whose sharp bound on m factors reaches the distance that
/// admits a query shift of p_star. May exceed 1. Throws InvalidArgument
/// outside p_star in (0, 0.5], m >= 2.
double eps_for_target(double p_star, std::size_t m);

/// 2 ln((1 + p)/(1 - p)): distance whose pmax_bound is p.
double dcd_for_pmax(double p);

struct BoundChain {
  double eps = 0.0;
  std::size_t m = 0;
  double d2 = 0.0;
  double d3 = 0.0;
  double d4 = 0.0;
  double pmax_d2 = 0.0;
  double pmax_d3 = 0.0;
  double pmax_d4 = 0.0;
  std::optional<double> d1;  // measured
  std::optional<double> pmax_d1;
};

/// Throws EpsOutOfRange for eps >= 1.
BoundChain bound_chain(double eps, std::size_t m, std::optional<double> measured = std::nullopt);

}  // namespace hlift
