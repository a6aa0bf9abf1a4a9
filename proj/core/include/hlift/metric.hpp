#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

#include "hlift/model.hpp"

namespace hlift {

/// One-dimensional epsilon-equivalence distance:
///   max_k |a_k - b_k| / min(a_k, b_k)
/// Symmetric and zero iff a == b, but not a metric (no triangle inequality).
/// Throws LengthMismatch.
double odeed(std::span<const double> a, std::span<const double> b);

/// True iff odeed(a, b) <= eps. Throws LengthMismatch, InvalidArgument (eps <= 0).
bool eps_equivalent(std::span<const double> a, std::span<const double> b, double eps);

/// Pairwise odeed between the factors of a graph. Only the strict upper
/// triangle is stored; pairs with different compatibility signatures hold
/// +infinity.
class DistanceMatrix {
 public:
  DistanceMatrix() = default;
  /// `class_ids[i]` is the compatibility class of factor i; `upper` holds the
  /// m(m-1)/2 entries (0,1), (0,2), ..., (m-2,m-1) in row-major order.
  DistanceMatrix(std::size_t m, std::vector<double> upper, std::vector<std::size_t> class_ids);

  std::size_t size() const noexcept { return m_; }
  std::size_t entry_count() const noexcept { return upper_.size(); }

  /// Distance between factors i and j (0-based). Symmetric, 0 on the diagonal.
  double at(std::size_t i, std::size_t j) const;
  std::size_t class_id(std::size_t i) const { return class_ids_.at(i); }
  std::span<const std::size_t> class_ids() const noexcept { return class_ids_; }
  std::span<const double> upper() const noexcept { return upper_; }

  static std::size_t packed_index(std::size_t m, std::size_t i, std::size_t j) noexcept {
    return i * (2 * m - i - 1) / 2 + (j - i - 1);
  }

  bool operator==(const DistanceMatrix&) const = default;

 private:
  std::size_t m_ = 0;
  std::vector<double> upper_;
  std::vector<std::size_t> class_ids_;
};

/// Compatibility class of every factor: factors share a class iff their
/// signatures are equal. Ids are dense and ordered by first occurrence.
std::vector<std::size_t> compatibility_classes(const FactorGraph& g);

struct MetricOptions {
  int threads = 0;  // 0 = OpenMP default
};

/// Phase I of the hierarchical ordering: all pairwise distances, computed
/// once. Entries are independent, so the parallel result is bit-identical to
/// the sequential one.
DistanceMatrix distance_matrix(const FactorGraph& g, const MetricOptions& options = {});

/// CSV dump with header i,j,distance (1-based factor ids, "inf" for
/// incompatible pairs).
void write_distance_csv(std::ostream& out, const DistanceMatrix& dm);

}  // namespace hlift
