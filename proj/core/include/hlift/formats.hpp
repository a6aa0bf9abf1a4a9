#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hlift/bounds.hpp"
#include "hlift/colour_passing.hpp"
#include "hlift/hierarchy.hpp"
#include "hlift/inference.hpp"
#include "hlift/model.hpp"

namespace hlift {

/// Shortest decimal text that parses back to exactly `x`.
std::string format_number(double x);

// ---- model ----------------------------------------------------------------

/// Throws SchemaError (syntax errors carry line and column, schema errors the
/// field path and entity name) or the model validation errors.
FactorGraph parse_model(std::string_view document, const BuildOptions& options = {});

/// Canonical form: fixed key order, one variable or factor per line.
std::string write_model(const FactorGraph& g);

// ---- hierarchy --------------------------------------------------------------

/// {"m", "epsilons", "tree", "levels"}; node and factor ids are 1-based.
/// "tree" is a single node, or an array of nodes when the hierarchy is a
/// forest (incompatible factors never merge).
std::string export_tree(const MergeTree& tree);

/// Reads "m" and "tree" (plus "epsilons"/"levels" when present, which must
/// agree with the tree). Throws SchemaError.
MergeTree parse_tree(std::string_view document);

// ---- compressed model -----------------------------------------------------

/// Model document with an extra "grouping" object holding level, eps, the
/// refined blocks and the blocks handed to refinement (factor names).
std::string write_compressed(const CompressedModel& cm);

/// Throws SchemaError when the grouping does not name every factor once or
/// a block mixes different tables.
CompressedModel parse_compressed(std::string_view document, const BuildOptions& options = {});

// ---- reports ----------------------------------------------------------------

struct ReportRow {
  std::size_t level = 0;
  double eps = 0.0;
  std::size_t num_groups = 0;
  std::size_t max_group_size = 0;
  double d2 = 0.0;
  double d3 = 0.0;
  std::optional<double> d4;  // empty for eps >= 1
  double pmax_d2 = 0.0;
  std::optional<double> measured_dcd;
  std::optional<double> measured_pmax;
  /// Multiset of group sizes, e.g. "4(1) 2(1) 1(4)" (descending).
  std::string group_sizes;
};

/// Rows for every level of `tree` on a model with `m` factors.
std::vector<ReportRow> report_rows(const MergeTree& tree, std::size_t m);

/// "4(1) 2(1) 1(4)" for groups of sizes {4, 2, 1, 1, 1, 1}.
std::string group_size_summary(const std::vector<std::vector<std::size_t>>& groups);

/// 9 significant digits, optional fields blank.
void write_report(std::ostream& out, const std::vector<ReportRow>& rows);
std::vector<ReportRow> parse_report(std::string_view document);

/// Per-query deviations followed by footer rows with the measurements and
/// the bound chain.
void write_deviation_csv(std::ostream& out, const FactorGraph& g, const DeviationReport& report,
                         const BoundChain& chain);

/// eps, m, d2, d3, d4, pmax_d2, pmax_d3, pmax_d4 per row.
void write_bounds_csv(std::ostream& out, const std::vector<BoundChain>& rows);

}  // namespace hlift
