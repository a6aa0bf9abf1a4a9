#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "hlift/hierarchy.hpp"
#include "hlift/model.hpp"

namespace hlift {

/// Factor partition with the colours that produced it.
struct Grouping {
  /// Disjoint factor-index blocks covering 0..m-1; members ascending,
  /// blocks ordered by smallest member.
  std::vector<std::vector<std::size_t>> blocks;
  std::vector<std::size_t> block_colour;     // colour id of each block
  std::vector<std::size_t> factor_colour;    // per factor
  std::vector<std::size_t> variable_colour;  // per variable; empty without refinement
  std::size_t rounds = 0;                    // refinement iterations until stable

  std::vector<std::size_t> block_of_factor() const;
};

/// Colour refinement on the factor graph. Variables start coloured by range
/// size, factors by `initial_factor_colours`; each round recolours
///   variable <- (own colour, sorted {(adjacent factor colour, arg position)})
///   factor   <- (own colour, argument colours in order)
/// until the number of colours stops growing. Colour ids are canonical (rank
/// of the encoded signature), so results do not depend on iteration order.
/// Throws InvalidArgument if equal initial colours span different signatures.
Grouping acp_refine(const FactorGraph& g, std::span<const std::size_t> initial_factor_colours);

/// Entry-wise arithmetic mean. Exact when all tables agree in an entry.
/// Throws EmptyGroup, LengthMismatch.
std::vector<double> mean_table(std::span<const std::vector<double>> tables);

/// Order-dependent baseline: each factor joins the first block whose members
/// are all compatible and within `eps`, else opens a new block.
Grouping greedy_eps_grouping(const FactorGraph& g, double eps);

struct CompressedModel {
  FactorGraph model;     // tables replaced by block means
  Grouping grouping;     // blocks after refinement
  std::vector<std::vector<double>> shared_tables;  // per block
  std::size_t level = 0;
  double eps = 0.0;      // merge distance of the source level (0 at level 0)
  /// Blocks handed to refinement (hierarchy cut or baseline grouping).
  std::vector<std::vector<std::size_t>> initial_blocks;

  std::size_t block_count() const noexcept { return grouping.blocks.size(); }
};

/// Phases II and III on a given initial grouping: colour refinement seeded
/// by the blocks, then mean replacement within every refined block.
CompressedModel compress_groups(const FactorGraph& g,
                                std::vector<std::vector<std::size_t>> initial_blocks,
                                std::size_t level = 0, double eps = 0.0);

/// Hierarchical colour passing at one level of `tree`. Refinement may split
/// a hierarchy block whose members sit in structurally different places;
/// initial_blocks keeps the unsplit cut. Throws HierarchyMismatch when the
/// tree was not built from this graph, LevelOutOfRange.
CompressedModel hacp_compress(const FactorGraph& g, const MergeTree& tree, std::size_t level);

/// Checks that `tree` is consistent with the factor tables of `g` up to
/// `level`: same factor count, compatible members and merge distances equal
/// to the complete-linkage distances recomputed from the tables.
void verify_hierarchy(const FactorGraph& g, const MergeTree& tree, std::size_t level);

}  // namespace hlift
