#pragma once

// Complete-linkage agglomerative ordering of factors under odeed.
//
// Node ids are 0-based: leaves are the factor indices 0..m-1 and the merge
// performed at level l (1-based) creates node m + l - 1. Adding one to any
// node id gives the 1-based numbering used in the hierarchy file and in
// nested_list(), where merge l is labelled l + m.

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "hlift/metric.hpp"

namespace hlift {

struct Merge {
  std::size_t left = 0;   // node holding the smaller active index
  std::size_t right = 0;  // node whose active index was retired
  double eps = 0.0;       // linkage distance at which the merge happened

  bool operator==(const Merge&) const = default;
};

class MergeTree {
 public:
  MergeTree() = default;
  /// Validates that every merge joins two existing, not yet merged nodes
  /// and that merge distances are non-decreasing.
  MergeTree(std::size_t leaf_count, std::vector<Merge> merges);

  std::size_t leaf_count() const noexcept { return m_; }
  /// Number of levels above level 0 (L). Smaller than m - 1 when
  /// incompatible factor classes never merge.
  std::size_t level_count() const noexcept { return merges_.size(); }
  std::size_t node_count() const noexcept { return m_ + merges_.size(); }

  std::span<const Merge> merges() const noexcept { return merges_; }
  /// Merge performed at `level` (1-based). Throws LevelOutOfRange.
  const Merge& merge_at(std::size_t level) const;

  /// The epsilon ladder eps_1 <= eps_2 <= ... <= eps_L.
  const std::vector<double>& epsilons() const noexcept { return ladder_; }

  bool is_leaf(std::size_t node) const noexcept { return node < m_; }
  /// Merge distance of a node; 0 for leaves.
  double node_eps(std::size_t node) const;
  /// Sorted factor indices below `node`.
  std::vector<std::size_t> leaves(std::size_t node) const;
  /// Nodes without a parent, ordered by their smallest leaf.
  std::vector<std::size_t> roots() const;

  /// Nested-list rendering with 1-based ids, e.g. [[1,2,11],[3,4,12],14].
  /// A hierarchy with a single top-level group renders as that group;
  /// several top-level groups are wrapped in one more list. Factors that
  /// never merge do not appear.
  std::string nested_list() const;

  bool operator==(const MergeTree&) const = default;

 private:
  std::size_t m_ = 0;
  std::vector<Merge> merges_;
  std::vector<double> ladder_;
};

struct LevelPartition {
  std::size_t level = 0;
  /// Disjoint blocks of factor indices covering 0..m-1. Members ascending,
  /// blocks ordered by smallest member.
  std::vector<std::vector<std::size_t>> groups;

  bool operator==(const LevelPartition&) const = default;
};

/// Runs the complete-linkage ordering on a distance matrix. Ties in the
/// arg-min are broken by the lexicographically smallest (i, j) pair of
/// active indices; +infinity entries never merge. Sequential.
MergeTree build_hierarchy(const DistanceMatrix& dm);

/// Horizontal cut after `level` merges. Throws LevelOutOfRange.
LevelPartition partition_at_level(const MergeTree& tree, std::size_t level);

/// Largest level whose merge distance is <= eps (0 if none).
std::size_t level_for_epsilon(const MergeTree& tree, double eps);

}  // namespace hlift
