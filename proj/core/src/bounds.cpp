#include "hlift/bounds.hpp"

#include <cmath>
#include <string>

#include "hlift/error.hpp"

namespace hlift {

namespace {

void check_eps(double eps) {
  if (!(eps >= 0.0) || std::isinf(eps)) {
    throw Error(ErrorCode::InvalidArgument, "eps must be finite and non-negative");
  }
}

void check_m(std::size_t m) {
  if (m == 0) throw Error(ErrorCode::InvalidArgument, "factor count must be positive");
}

}  // namespace

double dcd_bound_sharp(double eps, std::size_t m) {
  check_eps(eps);
  check_m(m);
  const auto mm = static_cast<double>(m);
  return mm * (std::log1p((mm - 1.0) / mm * eps) + std::log1p(eps) - std::log1p(eps / mm));
}

LooseBounds dcd_bounds_loose(double eps, std::size_t m) {
  check_eps(eps);
  check_m(m);
  if (eps >= 1.0) {
    throw Error(ErrorCode::EpsOutOfRange,
                "eps " + std::to_string(eps) + " must be below 1 for the ratio bound");
  }
  const auto mm = static_cast<double>(m);
  return {2.0 * mm * std::log1p(eps), mm * (std::log1p(eps) - std::log1p(-eps))};
}

double pmax_bound(double d) {
  if (!(d >= 0.0)) throw Error(ErrorCode::InvalidArgument, "distance must be non-negative");
  if (d > 700.0) return std::tanh(d / 4.0);
  const double s = std::expm1(d / 2.0);  // sqrt(e^d) - 1
  return s / (s + 2.0);
}

Interval cd_interval(double p, double d) {
  if (!(p >= 0.0 && p <= 1.0)) throw Error(ErrorCode::InvalidArgument, "p must lie in [0, 1]");
  if (!(d >= 0.0)) throw Error(ErrorCode::InvalidArgument, "distance must be non-negative");
  if (d == 0.0 || p == 0.0 || p == 1.0) return {p, p};
  const double q = 1.0 - p;
  return {p / (p + q * std::exp(d)), p / (p + q * std::exp(-d))};
}

double dcd_for_pmax(double p) { return 2.0 * (std::log1p(p) - std::log1p(-p)); }

double eps_for_target(double p_star, std::size_t m) {
  if (!(p_star > 0.0 && p_star <= 0.5)) {
    throw Error(ErrorCode::InvalidArgument, "target must lie in (0, 0.5]");
  }
  if (m < 2) throw Error(ErrorCode::InvalidArgument, "factor count must be at least 2");
  const auto mm = static_cast<double>(m);
  const double d = dcd_for_pmax(p_star);
  const double c = (mm - 1.0) / mm;
  const double q1 = (1.0 + c - std::exp(d / mm) / mm) / c;
  const double q2 = -std::expm1(d / mm) / c;
  const double root = std::sqrt(q1 * q1 / 4.0 - q2);
  // avoid cancellation in -q1/2 + root when q1 > 0
  return q1 >= 0.0 ? -q2 / (q1 / 2.0 + root) : -q1 / 2.0 + root;
}

BoundChain bound_chain(double eps, std::size_t m, std::optional<double> measured) {
  BoundChain out;
  out.eps = eps;
  out.m = m;
  const LooseBounds loose = dcd_bounds_loose(eps, m);
  out.d2 = dcd_bound_sharp(eps, m);
  out.d3 = loose.d3;
  out.d4 = loose.d4;
  out.pmax_d2 = pmax_bound(out.d2);
  out.pmax_d3 = pmax_bound(out.d3);
  out.pmax_d4 = pmax_bound(out.d4);
  if (measured) {
    out.d1 = *measured;
    out.pmax_d1 = pmax_bound(*measured);
  }
  return out;
}

}  // namespace hlift
