#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "hlift/colour_passing.hpp"
#include "hlift/model.hpp"

namespace hlift {

inline constexpr std::uint64_t kDefaultEnumBudget = std::uint64_t{1} << 24;

struct InferenceOptions {
  /// Largest joint state count any enumeration may visit.
  std::uint64_t enum_budget = kDefaultEnumBudget;
  int threads = 0;  // 0 = OpenMP default
};

enum class Method { VariableElimination, Enumeration };

struct QueryResult {
  std::size_t variable = 0;
  std::string variable_name;
  Assignment evidence;
  std::vector<double> distribution;  // P(variable = range[k] | evidence)
};

/// ln Z. Enumeration visits every joint state in the log domain (throws
/// StateSpaceTooLarge beyond the budget); elimination uses a min-degree
/// order with per-step rescaling.
double log_partition_function(const FactorGraph& g, Method method = Method::Enumeration,
                              const InferenceOptions& options = {});
double partition_function(const FactorGraph& g, Method method = Method::Enumeration,
                          const InferenceOptions& options = {});

/// P(q | evidence). Throws UnknownVariable, MissingValue, InvalidArgument
/// (q observed), InconsistentEvidence, StateSpaceTooLarge (enumeration).
QueryResult query(const FactorGraph& g, std::string_view q, const Assignment& evidence = {},
                  Method method = Method::VariableElimination,
                  const InferenceOptions& options = {});

/// Chan-Darwiche distance ln max_r P2(r)/P1(r) - ln min_r P2(r)/P1(r) by
/// full enumeration. The normalising constants cancel, so only potential
/// ratios are visited. Throws StructureMismatch, StateSpaceTooLarge.
double dcd_distance(const FactorGraph& g, const FactorGraph& g2,
                    const InferenceOptions& options = {});

struct QueryDeviation {
  std::string variable;
  std::string value;
  Assignment evidence;
  double p = 0.0;             // original model
  double p_compressed = 0.0;  // modified model
  double abs_dev = 0.0;
};

struct DeviationReport {
  double dcd = 0.0;
  /// Largest |p - p'| over the scanned queries only; a lower bound on the
  /// true maximum whenever evidence_budget < variable_count - 1.
  double pmax = 0.0;
  std::size_t argmax = 0;  // index into queries
  std::vector<QueryDeviation> queries;
  std::size_t evidence_budget = 0;
};

/// Scans every single-variable query under every evidence assignment of up
/// to `evidence_budget` other variables (0 = marginals only).
DeviationReport max_query_deviation(const FactorGraph& g, const FactorGraph& g2,
                                    std::size_t evidence_budget,
                                    const InferenceOptions& options = {});

struct LiftedResult {
  QueryResult result;
  /// Potential entries added up while forming per-factor (ground) or
  /// per-block (lifted) contributions.
  std::size_t summation_ops = 0;
};

/// Marginal of `q` in a star-shaped component: every factor touching the
/// component contains q and all its other arguments are unobserved
/// variables of degree one. Each block of identical factors contributes
/// (sum over its leaves)^|block|, computed once per block.
/// Throws PatternNotLiftable when the component or a block breaks the pattern.
LiftedResult lifted_marginal(const CompressedModel& cm, std::string_view q,
                             const Assignment& evidence = {});

/// Same factorised computation with one contribution per factor.
LiftedResult star_marginal(const FactorGraph& g, std::string_view q,
                           const Assignment& evidence = {});

}  // namespace hlift
