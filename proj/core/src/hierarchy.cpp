#include "hlift/hierarchy.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

#include "hlift/error.hpp"

namespace hlift {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Upper-triangular working copy of the active linkage matrix. Retired
// indices are dropped by periodic compaction; between compactions their
// columns hold +inf and their rows are skipped.
class ActiveMatrix {
 public:
  explicit ActiveMatrix(const DistanceMatrix& dm)
      : n_(dm.size()), cells_(dm.upper().begin(), dm.upper().end()), alive_(n_, 1), slot_(n_) {
    std::iota(slot_.begin(), slot_.end(), std::size_t{0});
    alive_count_ = n_;
  }

  std::size_t size() const noexcept { return n_; }
  bool alive(std::size_t i) const noexcept { return alive_[i] != 0; }
  std::size_t original(std::size_t i) const noexcept { return slot_[i]; }

  double& at(std::size_t i, std::size_t j) noexcept {
    return cells_[DistanceMatrix::packed_index(n_, i, j)];
  }
  const double* row(std::size_t i) const noexcept {
    return cells_.data() + DistanceMatrix::packed_index(n_, i, i + 1);
  }

  void retire(std::size_t j) noexcept {
    alive_[j] = 0;
    --alive_count_;
    for (std::size_t k = 0; k < j; ++k) at(k, j) = kInf;
  }

  // Rebuild without retired indices once a fifth of the rows are dead.
  // Relative order of the survivors is kept, so the (i, j) tie rule is
  // unaffected.
  void maybe_compact() {
    if (n_ < 64 || alive_count_ * 5 >= n_ * 4) return;
    std::vector<std::size_t> keep;
    keep.reserve(alive_count_);
    for (std::size_t i = 0; i < n_; ++i) {
      if (alive_[i]) keep.push_back(i);
    }
    const std::size_t nn = keep.size();
    std::vector<double> next(nn * (nn - 1) / 2);
    std::vector<std::size_t> next_slot(nn);
    std::size_t at_out = 0;
    for (std::size_t a = 0; a < nn; ++a) {
      next_slot[a] = slot_[keep[a]];
      for (std::size_t b = a + 1; b < nn; ++b) next[at_out++] = at(keep[a], keep[b]);
    }
    cells_.swap(next);
    slot_.swap(next_slot);
    n_ = nn;
    alive_.assign(n_, 1);
  }

 private:
  std::size_t n_;
  std::vector<double> cells_;
  std::vector<char> alive_;
  std::vector<std::size_t> slot_;  // compacted index -> original factor index
  std::size_t alive_count_;
};

struct ArgMin {
  double value = kInf;
  std::size_t row = 0;
};

double row_min(const double* row, std::size_t len) noexcept {
  double best = kInf;
#pragma omp simd reduction(min : best)
  for (std::size_t j = 0; j < len; ++j) best = std::min(best, row[j]);
  return best;
}

// Smallest value; among equal values the smallest row. Rows are scanned in
// ascending order, so a strict comparison keeps the first occurrence.
ArgMin find_min_row(const ActiveMatrix& a) {
  const std::size_t n = a.size();
  ArgMin best;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    if (!a.alive(i)) continue;
    const double v = row_min(a.row(i), n - i - 1);
    if (v < best.value) best = {v, i};
  }
  return best;
}

}  // namespace

MergeTree::MergeTree(std::size_t leaf_count, std::vector<Merge> merges)
    : m_(leaf_count), merges_(std::move(merges)) {
  std::vector<char> used(m_ + merges_.size(), 0);
  ladder_.reserve(merges_.size());
  for (std::size_t l = 0; l < merges_.size(); ++l) {
    const Merge& mg = merges_[l];
    const std::size_t id = m_ + l;
    const std::string where = "merge at level " + std::to_string(l + 1);
    if (mg.left >= id || mg.right >= id || mg.left == mg.right) {
      throw Error(ErrorCode::InvalidArgument, where + " references an invalid node");
    }
    if (used[mg.left] || used[mg.right]) {
      throw Error(ErrorCode::InvalidArgument, where + " reuses an already merged node");
    }
    if (!(mg.eps >= 0.0)) {
      throw Error(ErrorCode::InvalidArgument, where + " has a negative distance");
    }
    if (!ladder_.empty() && mg.eps < ladder_.back()) {
      throw Error(ErrorCode::InvalidArgument, where + " decreases the epsilon ladder");
    }
    used[mg.left] = used[mg.right] = 1;
    ladder_.push_back(mg.eps);
  }
}

const Merge& MergeTree::merge_at(std::size_t level) const {
  if (level == 0 || level > merges_.size()) {
    throw Error(ErrorCode::LevelOutOfRange, "level " + std::to_string(level) +
                                                " outside 1.." + std::to_string(merges_.size()));
  }
  return merges_[level - 1];
}

double MergeTree::node_eps(std::size_t node) const {
  if (node >= node_count()) {
    throw Error(ErrorCode::InvalidArgument, "node " + std::to_string(node) + " does not exist");
  }
  return is_leaf(node) ? 0.0 : merges_[node - m_].eps;
}

std::vector<std::size_t> MergeTree::leaves(std::size_t node) const {
  if (node >= node_count()) {
    throw Error(ErrorCode::InvalidArgument, "node " + std::to_string(node) + " does not exist");
  }
  std::vector<std::size_t> out;
  std::vector<std::size_t> stack{node};
  while (!stack.empty()) {
    const std::size_t n = stack.back();
    stack.pop_back();
    if (is_leaf(n)) {
      out.push_back(n);
    } else {
      stack.push_back(merges_[n - m_].left);
      stack.push_back(merges_[n - m_].right);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::size_t> MergeTree::roots() const {
  std::vector<char> has_parent(node_count(), 0);
  for (const Merge& mg : merges_) has_parent[mg.left] = has_parent[mg.right] = 1;
  std::vector<std::pair<std::size_t, std::size_t>> keyed;  // (smallest leaf, node)
  for (std::size_t n = 0; n < node_count(); ++n) {
    if (!has_parent[n]) keyed.emplace_back(leaves(n).front(), n);
  }
  std::sort(keyed.begin(), keyed.end());
  std::vector<std::size_t> out;
  for (const auto& [leaf, n] : keyed) out.push_back(n);
  return out;
}

std::string MergeTree::nested_list() const {
  auto render = [this](auto&& self, std::size_t node) -> std::string {
    if (is_leaf(node)) return std::to_string(node + 1);
    const Merge& mg = merges_[node - m_];
    return "[" + self(self, mg.left) + "," + self(self, mg.right) + "," +
           std::to_string(node + 1) + "]";
  };
  std::vector<std::string> groups;
  for (std::size_t r : roots()) {
    if (!is_leaf(r)) groups.push_back(render(render, r));
  }
  if (groups.size() == 1) return groups.front();
  std::string out = "[";
  for (std::size_t i = 0; i < groups.size(); ++i) {
    if (i) out += ",";
    out += groups[i];
  }
  return out + "]";
}

MergeTree build_hierarchy(const DistanceMatrix& dm) {
  const std::size_t m = dm.size();
  ActiveMatrix active(dm);
  // node currently represented by each original factor index
  std::vector<std::size_t> node_of(m);
  std::iota(node_of.begin(), node_of.end(), std::size_t{0});
  std::vector<Merge> merges;
  merges.reserve(m == 0 ? 0 : m - 1);

  for (std::size_t level = 1; level < m; ++level) {
    active.maybe_compact();
    const ArgMin best = find_min_row(active);
    if (best.value == kInf) break;  // only incompatible pairs remain

    const std::size_t i = best.row;
    const std::size_t n = active.size();
    const double* row = active.row(i);
    std::size_t j = i + 1;
    while (row[j - i - 1] != best.value) ++j;

    const std::size_t oi = active.original(i);
    const std::size_t oj = active.original(j);
    merges.push_back({node_of[oi], node_of[oj], best.value});
    node_of[oi] = m + level - 1;

    // complete linkage: the merged row keeps the larger distance per column
    for (std::size_t k = 0; k < n; ++k) {
      if (k == i || k == j || !active.alive(k)) continue;
      double& target = k < i ? active.at(k, i) : active.at(i, k);
      const double other = k < j ? active.at(k, j) : active.at(j, k);
      target = std::max(target, other);
    }
    active.retire(j);
  }
  return MergeTree(m, std::move(merges));
}

LevelPartition partition_at_level(const MergeTree& tree, std::size_t level) {
  if (level > tree.level_count()) {
    throw Error(ErrorCode::LevelOutOfRange, "level " + std::to_string(level) + " outside 0.." +
                                                std::to_string(tree.level_count()));
  }
  const std::size_t m = tree.leaf_count();
  // representative factor of every node created so far
  std::vector<std::size_t> parent(m);
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  auto find = [&parent](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  std::vector<std::size_t> node_rep(m + level);
  std::iota(node_rep.begin(), node_rep.begin() + static_cast<long>(m), std::size_t{0});
  for (std::size_t l = 1; l <= level; ++l) {
    const Merge& mg = tree.merge_at(l);
    const std::size_t a = find(node_rep[mg.left]);
    const std::size_t b = find(node_rep[mg.right]);
    parent[std::max(a, b)] = std::min(a, b);
    node_rep[m + l - 1] = std::min(a, b);
  }
  LevelPartition out{level, {}};
  std::vector<std::size_t> block_of(m, static_cast<std::size_t>(-1));
  for (std::size_t f = 0; f < m; ++f) {
    const std::size_t r = find(f);
    if (block_of[r] == static_cast<std::size_t>(-1)) {
      block_of[r] = out.groups.size();
      out.groups.emplace_back();
    }
    out.groups[block_of[r]].push_back(f);
  }
  return out;
}

std::size_t level_for_epsilon(const MergeTree& tree, double eps) {
  if (!(eps >= 0.0)) throw Error(ErrorCode::InvalidArgument, "eps must be non-negative");
  const auto& ladder = tree.epsilons();
  return static_cast<std::size_t>(std::upper_bound(ladder.begin(), ladder.end(), eps) -
                                  ladder.begin());
}

}  // namespace hlift
