#include "hlift/colour_passing.hpp"

#include <algorithm>
#include <map>

#include "hlift/error.hpp"
#include "hlift/metric.hpp"

namespace hlift {

namespace {

using Key = std::vector<std::size_t>;

// Replace arbitrary keys by their rank among the distinct keys.
std::vector<std::size_t> canonical_ids(const std::vector<Key>& keys, std::size_t* distinct) {
  std::map<Key, std::size_t> rank;
  for (const Key& k : keys) rank.emplace(k, 0);
  std::size_t next = 0;
  for (auto& [k, id] : rank) id = next++;
  if (distinct) *distinct = next;
  std::vector<std::size_t> out;
  out.reserve(keys.size());
  for (const Key& k : keys) out.push_back(rank.at(k));
  return out;
}

std::vector<std::vector<std::size_t>> blocks_from_colours(std::span<const std::size_t> colours,
                                                          std::vector<std::size_t>* block_colour) {
  std::map<std::size_t, std::size_t> block_of_colour;
  std::vector<std::vector<std::size_t>> blocks;
  for (std::size_t j = 0; j < colours.size(); ++j) {
    auto [it, inserted] = block_of_colour.emplace(colours[j], blocks.size());
    if (inserted) {
      blocks.emplace_back();
      if (block_colour) block_colour->push_back(colours[j]);
    }
    blocks[it->second].push_back(j);
  }
  return blocks;
}

void check_partition(const std::vector<std::vector<std::size_t>>& blocks, std::size_t m) {
  std::vector<char> seen(m, 0);
  std::size_t count = 0;
  for (const auto& b : blocks) {
    if (b.empty()) throw Error(ErrorCode::EmptyGroup, "grouping contains an empty block");
    for (std::size_t j : b) {
      if (j >= m || seen[j]) {
        throw Error(ErrorCode::InvalidArgument,
                    "grouping does not partition the factors (index " + std::to_string(j) + ")");
      }
      seen[j] = 1;
      ++count;
    }
  }
  if (count != m) {
    throw Error(ErrorCode::InvalidArgument, "grouping covers " + std::to_string(count) + " of " +
                                                std::to_string(m) + " factors");
  }
}

}  // namespace

std::vector<std::size_t> Grouping::block_of_factor() const {
  std::size_t m = 0;
  for (const auto& b : blocks) m += b.size();
  std::vector<std::size_t> out(m);
  for (std::size_t k = 0; k < blocks.size(); ++k) {
    for (std::size_t j : blocks[k]) out.at(j) = k;
  }
  return out;
}

Grouping acp_refine(const FactorGraph& g, std::span<const std::size_t> initial_factor_colours) {
  const std::size_t m = g.factor_count();
  const std::size_t n = g.variable_count();
  if (initial_factor_colours.size() != m) {
    throw Error(ErrorCode::LengthMismatch, "expected " + std::to_string(m) +
                                               " initial colours, got " +
                                               std::to_string(initial_factor_colours.size()));
  }
  {
    std::map<std::size_t, CompatibilitySignature> sig_of_colour;
    for (std::size_t j = 0; j < m; ++j) {
      auto sig = signature(g.factor(j));
      auto [it, inserted] = sig_of_colour.emplace(initial_factor_colours[j], sig);
      if (!inserted && it->second != sig) {
        throw Error(ErrorCode::InvalidArgument,
                    "factor \"" + g.factor(j).name +
                        "\" shares an initial colour with an incompatible factor");
      }
    }
  }

  std::size_t var_count = 0;
  std::size_t fac_count = 0;
  std::vector<Key> keys(n);
  for (std::size_t v = 0; v < n; ++v) keys[v] = {g.variable(v).size()};
  std::vector<std::size_t> var_colour = canonical_ids(keys, &var_count);
  keys.assign(m, {});
  for (std::size_t j = 0; j < m; ++j) keys[j] = {initial_factor_colours[j]};
  std::vector<std::size_t> fac_colour = canonical_ids(keys, &fac_count);

  Grouping out;
  for (;;) {
    std::vector<Key> vkeys(n);
    for (std::size_t v = 0; v < n; ++v) {
      std::vector<std::pair<std::size_t, std::size_t>> incident;
      for (std::size_t j : g.neighbours(v)) {
        const Factor& f = g.factor(j);
        for (std::size_t a = 0; a < f.args.size(); ++a) {
          if (f.args[a] == v) incident.emplace_back(fac_colour[j], a);
        }
      }
      std::sort(incident.begin(), incident.end());
      Key& k = vkeys[v];
      k.push_back(var_colour[v]);
      for (const auto& [c, pos] : incident) {
        k.push_back(c);
        k.push_back(pos);
      }
    }
    std::size_t next_var_count = 0;
    std::vector<std::size_t> next_var = canonical_ids(vkeys, &next_var_count);

    std::vector<Key> fkeys(m);
    for (std::size_t j = 0; j < m; ++j) {
      Key& k = fkeys[j];
      k.push_back(fac_colour[j]);
      for (std::size_t v : g.factor(j).args) k.push_back(next_var[v]);
    }
    std::size_t next_fac_count = 0;
    std::vector<std::size_t> next_fac = canonical_ids(fkeys, &next_fac_count);

    // signatures include the previous colour, so colour classes only split
    const bool stable = next_var_count == var_count && next_fac_count == fac_count;
    var_colour = std::move(next_var);
    fac_colour = std::move(next_fac);
    var_count = next_var_count;
    fac_count = next_fac_count;
    if (stable) break;
    ++out.rounds;
  }

  out.blocks = blocks_from_colours(fac_colour, &out.block_colour);
  out.factor_colour = std::move(fac_colour);
  out.variable_colour = std::move(var_colour);
  return out;
}

std::vector<double> mean_table(std::span<const std::vector<double>> tables) {
  if (tables.empty()) throw Error(ErrorCode::EmptyGroup, "mean of no tables");
  const std::vector<double>& first = tables.front();
  for (const auto& t : tables) {
    if (t.size() != first.size()) {
      throw Error(ErrorCode::LengthMismatch, "tables of length " + std::to_string(first.size()) +
                                                 " and " + std::to_string(t.size()));
    }
  }
  if (tables.size() == 1) return first;
  const double k = static_cast<double>(tables.size());
  std::vector<double> out(first.size());
  for (std::size_t r = 0; r < first.size(); ++r) {
    // shifted by the first member so that identical entries reproduce exactly
    double shift = 0.0;
    for (std::size_t i = 1; i < tables.size(); ++i) shift += tables[i][r] - first[r];
    out[r] = first[r] + shift / k;
  }
  return out;
}

Grouping greedy_eps_grouping(const FactorGraph& g, double eps) {
  if (!(eps > 0.0)) throw Error(ErrorCode::InvalidArgument, "eps must be positive");
  const auto classes = compatibility_classes(g);
  Grouping out;
  for (std::size_t j = 0; j < g.factor_count(); ++j) {
    const auto& table = g.factor(j).table;
    bool placed = false;
    for (auto& block : out.blocks) {
      const bool fits = std::all_of(block.begin(), block.end(), [&](std::size_t i) {
        return classes[i] == classes[j] && odeed(g.factor(i).table, table) <= eps;
      });
      if (fits) {
        block.push_back(j);
        placed = true;
        break;
      }
    }
    if (!placed) out.blocks.push_back({j});
  }
  out.factor_colour.assign(g.factor_count(), 0);
  for (std::size_t k = 0; k < out.blocks.size(); ++k) {
    out.block_colour.push_back(k);
    for (std::size_t j : out.blocks[k]) out.factor_colour[j] = k;
  }
  return out;
}

CompressedModel compress_groups(const FactorGraph& g,
                                std::vector<std::vector<std::size_t>> initial_blocks,
                                std::size_t level, double eps) {
  const std::size_t m = g.factor_count();
  check_partition(initial_blocks, m);

  std::vector<std::size_t> colours(m);
  for (std::size_t k = 0; k < initial_blocks.size(); ++k) {
    for (std::size_t j : initial_blocks[k]) colours[j] = k;
  }
  CompressedModel out;
  out.grouping = acp_refine(g, colours);
  out.level = level;
  out.eps = eps;
  out.initial_blocks = std::move(initial_blocks);

  std::vector<std::vector<double>> tables(m);
  for (std::size_t j = 0; j < m; ++j) tables[j] = g.factor(j).table;
  for (const auto& block : out.grouping.blocks) {
    std::vector<std::vector<double>> members;
    members.reserve(block.size());
    for (std::size_t j : block) members.push_back(g.factor(j).table);
    std::vector<double> shared = mean_table(members);
    for (std::size_t j : block) tables[j] = shared;
    out.shared_tables.push_back(std::move(shared));
  }
  out.model = g.with_tables(std::move(tables));
  return out;
}

void verify_hierarchy(const FactorGraph& g, const MergeTree& tree, std::size_t level) {
  if (tree.leaf_count() != g.factor_count()) {
    throw Error(ErrorCode::HierarchyMismatch,
                "hierarchy has " + std::to_string(tree.leaf_count()) + " leaves, model has " +
                    std::to_string(g.factor_count()) + " factors");
  }
  if (level > tree.level_count()) {
    throw Error(ErrorCode::LevelOutOfRange, "level " + std::to_string(level) + " outside 0.." +
                                                std::to_string(tree.level_count()));
  }
  const auto classes = compatibility_classes(g);
  for (std::size_t l = 1; l <= level; ++l) {
    const Merge& mg = tree.merge_at(l);
    const auto left = tree.leaves(mg.left);
    const auto right = tree.leaves(mg.right);
    // complete linkage: max of both sides and every cross pair
    double linkage = std::max(tree.node_eps(mg.left), tree.node_eps(mg.right));
    for (std::size_t a : left) {
      for (std::size_t b : right) {
        if (classes[a] != classes[b]) {
          throw Error(ErrorCode::HierarchyMismatch,
                      "level " + std::to_string(l) + " merges incompatible factors \"" +
                          g.factor(a).name + "\" and \"" + g.factor(b).name + "\"");
        }
        linkage = std::max(linkage, odeed(g.factor(a).table, g.factor(b).table));
      }
    }
    if (linkage != mg.eps) {
      throw Error(ErrorCode::HierarchyMismatch,
                  "level " + std::to_string(l) + " records eps " + std::to_string(mg.eps) +
                      " but the model gives " + std::to_string(linkage));
    }
  }
}

CompressedModel hacp_compress(const FactorGraph& g, const MergeTree& tree, std::size_t level) {
  verify_hierarchy(g, tree, level);
  LevelPartition cut = partition_at_level(tree, level);
  const double eps = level == 0 ? 0.0 : tree.epsilons()[level - 1];
  return compress_groups(g, std::move(cut.groups), level, eps);
}

}  // namespace hlift
