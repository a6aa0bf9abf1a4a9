#pragma once

// Propositional factor graphs: random variables with finite ranges and
// factors with strictly positive potential tables.
//
// Table layout: rows enumerate the joint assignments of a factor's
// arguments in mixed radix with the LAST argument varying fastest. For two
// booleans with range order (true, false) the rows are TT, TF, FT, FF.

#include <compare>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace hlift {

/// Replacement value for zero potentials when clamping is enabled.
inline constexpr double kZeroClamp = 1e-9;

struct RandomVariable {
  std::string name;
  std::vector<std::string> range;

  std::size_t size() const noexcept { return range.size(); }
  std::optional<std::size_t> value_index(std::string_view label) const;
};

/// Factor as supplied by a caller: arguments by variable name.
struct FactorSpec {
  std::string name;
  std::vector<std::string> args;
  std::vector<double> table;
};

/// Validated factor. `args` are indices into FactorGraph::variables().
struct Factor {
  std::string name;
  std::vector<std::size_t> args;
  std::vector<std::size_t> arg_sizes;  // range size of each argument
  std::vector<std::size_t> strides;    // mixed-radix weights, last arg = 1
  std::vector<double> table;

  std::size_t dimension() const noexcept { return table.size(); }
  std::size_t arity() const noexcept { return args.size(); }
};

/// Table dimension plus the sorted multiset of argument range sizes. Equal
/// signatures mean two tables can be compared entry by entry.
struct CompatibilitySignature {
  std::size_t dimension = 0;
  std::vector<std::size_t> range_sizes;

  auto operator<=>(const CompatibilitySignature&) const = default;
};

CompatibilitySignature signature(const Factor& f);

/// Variable name -> value label. Total over a graph's variables when used
/// as a full assignment, partial when used as evidence.
using Assignment = std::map<std::string, std::string, std::less<>>;

struct BuildOptions {
  bool clamp_zeros = false;
};

class FactorGraph {
 public:
  FactorGraph() = default;

  std::span<const RandomVariable> variables() const noexcept { return variables_; }
  std::span<const Factor> factors() const noexcept { return factors_; }
  std::size_t variable_count() const noexcept { return variables_.size(); }
  std::size_t factor_count() const noexcept { return factors_.size(); }

  const RandomVariable& variable(std::size_t i) const { return variables_.at(i); }
  const Factor& factor(std::size_t j) const { return factors_.at(j); }

  std::optional<std::size_t> find_variable(std::string_view name) const;
  std::optional<std::size_t> find_factor(std::string_view name) const;
  /// Throws UnknownVariable.
  std::size_t variable_index(std::string_view name) const;

  /// Factors adjacent to variable `v`, ascending.
  std::span<const std::size_t> neighbours(std::size_t v) const { return adjacency_.at(v); }

  /// Number of joint states; saturates at UINT64_MAX.
  std::uint64_t state_count() const noexcept;

  /// Warnings collected during construction (zero clamping).
  const std::vector<std::string>& warnings() const noexcept { return warnings_; }

  /// Same structure with every factor table replaced. Tables are validated
  /// exactly like build_graph validates them.
  FactorGraph with_tables(std::vector<std::vector<double>> tables) const;

  bool same_variables(const FactorGraph& other) const;

  friend FactorGraph build_graph(std::vector<RandomVariable> variables,
                                 std::vector<FactorSpec> factors,
                                 const BuildOptions& options);

 private:
  void index();

  std::vector<RandomVariable> variables_;
  std::vector<Factor> factors_;
  std::vector<std::vector<std::size_t>> adjacency_;
  std::map<std::string, std::size_t, std::less<>> variable_ids_;
  std::map<std::string, std::size_t, std::less<>> factor_ids_;
  std::vector<std::string> warnings_;
};

/// Validates and builds a graph. Errors: DuplicateName, TableSizeMismatch,
/// NonPositivePotential, DanglingVariable, UnknownVariable.
FactorGraph build_graph(std::vector<RandomVariable> variables, std::vector<FactorSpec> factors,
                        const BuildOptions& options = {});

/// Dense state: value index per variable, indexed like FactorGraph::variables().
using State = std::vector<std::size_t>;

/// Resolves a total assignment. Throws IncompleteAssignment / UnknownVariable.
State to_state(const FactorGraph& g, const Assignment& r);
Assignment to_assignment(const FactorGraph& g, std::span<const std::size_t> state);

std::size_t row_index(const Factor& f, std::span<const std::size_t> state) noexcept;
/// Throws MissingValue when `r` does not cover the factor's arguments.
std::size_t row_index(const FactorGraph& g, const Factor& f, const Assignment& r);
/// Inverse of row_index: value index of each argument, in argument order.
std::vector<std::size_t> row_values(const Factor& f, std::size_t row);

double joint_potential(const FactorGraph& g, const Assignment& r);
double joint_potential(const FactorGraph& g, std::span<const std::size_t> state);
double log_joint_potential(const FactorGraph& g, std::span<const std::size_t> state);

}  // namespace hlift
