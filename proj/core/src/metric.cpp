#include "hlift/metric.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <ostream>

#include "hlift/error.hpp"
#include "parallel.hpp"

namespace hlift {

double odeed(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw Error(ErrorCode::LengthMismatch, "tables of length " + std::to_string(a.size()) +
                                               " and " + std::to_string(b.size()));
  }
  double d = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    d = std::max(d, std::abs(a[k] - b[k]) / std::min(a[k], b[k]));
  }
  return d;
}

bool eps_equivalent(std::span<const double> a, std::span<const double> b, double eps) {
  if (!(eps > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "eps must be positive");
  }
  return odeed(a, b) <= eps;
}

DistanceMatrix::DistanceMatrix(std::size_t m, std::vector<double> upper,
                               std::vector<std::size_t> class_ids)
    : m_(m), upper_(std::move(upper)), class_ids_(std::move(class_ids)) {
  if (upper_.size() != (m_ == 0 ? 0 : m_ * (m_ - 1) / 2) || class_ids_.size() != m_) {
    throw Error(ErrorCode::LengthMismatch,
                "distance matrix of size " + std::to_string(m_) + " needs " +
                    std::to_string(m_ == 0 ? 0 : m_ * (m_ - 1) / 2) + " entries and " +
                    std::to_string(m_) + " class ids");
  }
  for (double v : upper_) {
    if (!(v >= 0.0)) throw Error(ErrorCode::InvalidArgument, "negative or NaN distance");
  }
}

double DistanceMatrix::at(std::size_t i, std::size_t j) const {
  if (i >= m_ || j >= m_) {
    throw Error(ErrorCode::InvalidArgument, "index out of range for matrix of size " +
                                                std::to_string(m_));
  }
  if (i == j) return 0.0;
  if (i > j) std::swap(i, j);
  return upper_[packed_index(m_, i, j)];
}

std::vector<std::size_t> compatibility_classes(const FactorGraph& g) {
  std::map<CompatibilitySignature, std::size_t> ids;
  std::vector<std::size_t> out;
  out.reserve(g.factor_count());
  for (const Factor& f : g.factors()) {
    auto [it, inserted] = ids.emplace(signature(f), ids.size());
    out.push_back(it->second);
  }
  return out;
}

DistanceMatrix distance_matrix(const FactorGraph& g, const MetricOptions& options) {
  const std::size_t m = g.factor_count();
  std::vector<std::size_t> classes = compatibility_classes(g);
  std::vector<double> upper(m == 0 ? 0 : m * (m - 1) / 2);
  const auto factors = g.factors();
  const double inf = std::numeric_limits<double>::infinity();
  const long rows = static_cast<long>(m);

#pragma omp parallel for schedule(dynamic, 8) num_threads(detail::thread_count(options.threads))
  for (long si = 0; si < rows; ++si) {
    const auto i = static_cast<std::size_t>(si);
    std::size_t at = DistanceMatrix::packed_index(m, i, i + 1);
    for (std::size_t j = i + 1; j < m; ++j, ++at) {
      upper[at] = classes[i] == classes[j] ? odeed(factors[i].table, factors[j].table) : inf;
    }
  }
  return DistanceMatrix(m, std::move(upper), std::move(classes));
}

void write_distance_csv(std::ostream& out, const DistanceMatrix& dm) {
  out << "i,j,distance\n";
  char buf[64];
  for (std::size_t i = 0; i < dm.size(); ++i) {
    for (std::size_t j = i + 1; j < dm.size(); ++j) {
      const double d = dm.at(i, j);
      out << i + 1 << ',' << j + 1 << ',';
      if (std::isinf(d)) {
        out << "inf\n";
      } else {
        std::snprintf(buf, sizeof buf, "%.17g", d);
        out << buf << '\n';
      }
    }
  }
}

}  // namespace hlift
