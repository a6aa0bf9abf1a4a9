#include "hlift/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>

#include "hlift/error.hpp"

namespace hlift {

namespace {

std::string quoted(std::string_view s) { return "\"" + std::string(s) + "\""; }

void validate_table(const Factor& f, std::vector<double>& table, bool clamp_zeros,
                    std::vector<std::string>* warnings) {
  std::size_t expected = 1;
  for (std::size_t s : f.arg_sizes) {
    if (expected > std::numeric_limits<std::size_t>::max() / s) {
      throw Error(ErrorCode::TableSizeMismatch, "factor " + quoted(f.name) + ": table too large");
    }
    expected *= s;
  }
  if (table.size() != expected) {
    throw Error(ErrorCode::TableSizeMismatch,
                "factor " + quoted(f.name) + ": table has " + std::to_string(table.size()) +
                    " entries, expected " + std::to_string(expected));
  }
  for (std::size_t k = 0; k < table.size(); ++k) {
    double& v = table[k];
    if (v == 0.0 && clamp_zeros) {
      v = kZeroClamp;
      if (warnings) {
        warnings->push_back("factor " + quoted(f.name) + " row " + std::to_string(k) +
                            ": zero potential clamped to 1e-9");
      }
      continue;
    }
    if (!(v > 0.0) || !std::isfinite(v)) {
      std::ostringstream msg;
      msg << "factor " << quoted(f.name) << " row " << k << ": potential " << v
          << " is not a finite positive number";
      throw Error(ErrorCode::NonPositivePotential, msg.str());
    }
  }
}

}  // namespace

std::optional<std::size_t> RandomVariable::value_index(std::string_view label) const {
  auto it = std::find(range.begin(), range.end(), label);
  if (it == range.end()) return std::nullopt;
  return static_cast<std::size_t>(it - range.begin());
}

CompatibilitySignature signature(const Factor& f) {
  CompatibilitySignature sig{f.dimension(), f.arg_sizes};
  std::sort(sig.range_sizes.begin(), sig.range_sizes.end());
  return sig;
}

FactorGraph build_graph(std::vector<RandomVariable> variables, std::vector<FactorSpec> factors,
                        const BuildOptions& options) {
  FactorGraph g;
  for (std::size_t i = 0; i < variables.size(); ++i) {
    const RandomVariable& v = variables[i];
    if (v.range.size() < 2) {
      throw Error(ErrorCode::InvalidArgument,
                  "variable " + quoted(v.name) + ": range needs at least two values");
    }
    std::set<std::string_view> labels;
    for (const auto& label : v.range) {
      if (!labels.insert(label).second) {
        throw Error(ErrorCode::DuplicateName,
                    "variable " + quoted(v.name) + ": duplicate range value " + quoted(label));
      }
    }
    if (!g.variable_ids_.emplace(v.name, i).second) {
      throw Error(ErrorCode::DuplicateName, "variable " + quoted(v.name) + " defined twice");
    }
  }
  g.variables_ = std::move(variables);

  g.factors_.reserve(factors.size());
  for (std::size_t j = 0; j < factors.size(); ++j) {
    FactorSpec& spec = factors[j];
    if (!g.factor_ids_.emplace(spec.name, j).second) {
      throw Error(ErrorCode::DuplicateName, "factor " + quoted(spec.name) + " defined twice");
    }
    if (spec.args.empty()) {
      throw Error(ErrorCode::InvalidArgument, "factor " + quoted(spec.name) + " has no arguments");
    }
    Factor f;
    f.name = std::move(spec.name);
    for (const auto& arg : spec.args) {
      auto it = g.variable_ids_.find(arg);
      if (it == g.variable_ids_.end()) {
        throw Error(ErrorCode::UnknownVariable,
                    "factor " + quoted(f.name) + " references unknown variable " + quoted(arg));
      }
      if (std::find(f.args.begin(), f.args.end(), it->second) != f.args.end()) {
        throw Error(ErrorCode::DuplicateName,
                    "factor " + quoted(f.name) + " lists variable " + quoted(arg) + " twice");
      }
      f.args.push_back(it->second);
      f.arg_sizes.push_back(g.variables_[it->second].size());
    }
    f.strides.assign(f.args.size(), 1);
    for (std::size_t a = f.args.size(); a-- > 1;) {
      f.strides[a - 1] = f.strides[a] * f.arg_sizes[a];
    }
    validate_table(f, spec.table, options.clamp_zeros, &g.warnings_);
    f.table = std::move(spec.table);
    g.factors_.push_back(std::move(f));
  }

  g.index();
  for (std::size_t v = 0; v < g.variables_.size(); ++v) {
    if (g.adjacency_[v].empty()) {
      throw Error(ErrorCode::DanglingVariable,
                  "variable " + quoted(g.variables_[v].name) + " is not used by any factor");
    }
  }
  return g;
}

void FactorGraph::index() {
  adjacency_.assign(variables_.size(), {});
  for (std::size_t j = 0; j < factors_.size(); ++j) {
    for (std::size_t v : factors_[j].args) adjacency_[v].push_back(j);
  }
}

std::optional<std::size_t> FactorGraph::find_variable(std::string_view name) const {
  auto it = variable_ids_.find(name);
  if (it == variable_ids_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::size_t> FactorGraph::find_factor(std::string_view name) const {
  auto it = factor_ids_.find(name);
  if (it == factor_ids_.end()) return std::nullopt;
  return it->second;
}

std::size_t FactorGraph::variable_index(std::string_view name) const {
  if (auto v = find_variable(name)) return *v;
  throw Error(ErrorCode::UnknownVariable, "no variable named " + quoted(name));
}

std::uint64_t FactorGraph::state_count() const noexcept {
  std::uint64_t total = 1;
  for (const auto& v : variables_) {
    if (total > std::numeric_limits<std::uint64_t>::max() / v.size()) {
      return std::numeric_limits<std::uint64_t>::max();
    }
    total *= v.size();
  }
  return total;
}

FactorGraph FactorGraph::with_tables(std::vector<std::vector<double>> tables) const {
  if (tables.size() != factors_.size()) {
    throw Error(ErrorCode::LengthMismatch, "expected " + std::to_string(factors_.size()) +
                                               " tables, got " + std::to_string(tables.size()));
  }
  FactorGraph g = *this;
  g.warnings_.clear();
  for (std::size_t j = 0; j < tables.size(); ++j) {
    validate_table(g.factors_[j], tables[j], false, nullptr);
    g.factors_[j].table = std::move(tables[j]);
  }
  return g;
}

bool FactorGraph::same_variables(const FactorGraph& other) const {
  if (variables_.size() != other.variables_.size()) return false;
  for (std::size_t i = 0; i < variables_.size(); ++i) {
    if (variables_[i].name != other.variables_[i].name ||
        variables_[i].range != other.variables_[i].range) {
      return false;
    }
  }
  return true;
}

State to_state(const FactorGraph& g, const Assignment& r) {
  State state(g.variable_count());
  for (std::size_t i = 0; i < g.variable_count(); ++i) {
    const RandomVariable& v = g.variable(i);
    auto it = r.find(v.name);
    if (it == r.end()) {
      throw Error(ErrorCode::IncompleteAssignment, "no value for variable " + quoted(v.name));
    }
    auto idx = v.value_index(it->second);
    if (!idx) {
      throw Error(ErrorCode::MissingValue, "variable " + quoted(v.name) + " has no value " +
                                               quoted(it->second));
    }
    state[i] = *idx;
  }
  for (const auto& [name, value] : r) {
    if (!g.find_variable(name)) {
      throw Error(ErrorCode::UnknownVariable, "assignment names unknown variable " + quoted(name));
    }
  }
  return state;
}

Assignment to_assignment(const FactorGraph& g, std::span<const std::size_t> state) {
  Assignment r;
  for (std::size_t i = 0; i < g.variable_count(); ++i) {
    r.emplace(g.variable(i).name, g.variable(i).range.at(state[i]));
  }
  return r;
}

std::size_t row_index(const Factor& f, std::span<const std::size_t> state) noexcept {
  std::size_t row = 0;
  for (std::size_t a = 0; a < f.args.size(); ++a) row += state[f.args[a]] * f.strides[a];
  return row;
}

std::size_t row_index(const FactorGraph& g, const Factor& f, const Assignment& r) {
  std::size_t row = 0;
  for (std::size_t a = 0; a < f.args.size(); ++a) {
    const RandomVariable& v = g.variable(f.args[a]);
    auto it = r.find(v.name);
    if (it == r.end()) {
      throw Error(ErrorCode::MissingValue,
                  "factor " + quoted(f.name) + ": no value for argument " + quoted(v.name));
    }
    auto idx = v.value_index(it->second);
    if (!idx) {
      throw Error(ErrorCode::MissingValue, "factor " + quoted(f.name) + ": variable " +
                                               quoted(v.name) + " has no value " +
                                               quoted(it->second));
    }
    row += *idx * f.strides[a];
  }
  return row;
}

std::vector<std::size_t> row_values(const Factor& f, std::size_t row) {
  if (row >= f.dimension()) {
    throw Error(ErrorCode::InvalidArgument,
                "factor " + quoted(f.name) + ": row " + std::to_string(row) + " out of range");
  }
  std::vector<std::size_t> values(f.args.size());
  for (std::size_t a = 0; a < f.args.size(); ++a) {
    values[a] = row / f.strides[a];
    row %= f.strides[a];
  }
  return values;
}

double joint_potential(const FactorGraph& g, const Assignment& r) {
  return joint_potential(g, to_state(g, r));
}

double joint_potential(const FactorGraph& g, std::span<const std::size_t> state) {
  double psi = 1.0;
  for (const Factor& f : g.factors()) psi *= f.table[row_index(f, state)];
  return psi;
}

double log_joint_potential(const FactorGraph& g, std::span<const std::size_t> state) {
  double acc = 0.0;
  for (const Factor& f : g.factors()) acc += std::log(f.table[row_index(f, state)]);
  return acc;
}

}  // namespace hlift
