#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "hlift/metric.hpp"
#include "hlift/model.hpp"
#include "hlift/planted.hpp"

namespace fixture {

inline const std::vector<std::string> kBool{"true", "false"};

/// Two factors phi1(A,B), phi2(C,B) sharing one table.
inline hlift::FactorGraph two_factor_star(std::vector<double> table = {1.0, 2.0, 3.0, 4.0}) {
  return hlift::build_graph({{"A", kBool}, {"B", kBool}, {"C", kBool}},
                            {{"phi1", {"A", "B"}, table}, {"phi2", {"C", "B"}, table}});
}

/// Positions used for the ten-factor ordering example: factor i carries the
/// table (1, e^{t_i}), so the pairwise distance is e^{|t_i - t_j|} - 1.
inline const std::vector<double> kLadderPositions{0.0,   0.01,  0.05, 0.062, 0.3,
                                                  0.314, 0.38, 1.0,  1.09,  1.48};

inline hlift::DistanceMatrix ladder_matrix() {
  const std::size_t m = kLadderPositions.size();
  std::vector<double> upper;
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = i + 1; j < m; ++j) {
      upper.push_back(std::abs(kLadderPositions[i] - kLadderPositions[j]));
    }
  }
  return hlift::DistanceMatrix(m, std::move(upper), std::vector<std::size_t>(m, 0));
}

/// Ten unary factors on their own variables realising the same ordering.
inline hlift::FactorGraph ladder_model() {
  std::vector<hlift::RandomVariable> vars;
  std::vector<hlift::FactorSpec> factors;
  for (std::size_t i = 0; i < kLadderPositions.size(); ++i) {
    const std::string v = "X" + std::to_string(i + 1);
    vars.push_back({v, kBool});
    factors.push_back({"phi" + std::to_string(i + 1), {v}, {1.0, std::exp(kLadderPositions[i])}});
  }
  return hlift::build_graph(std::move(vars), std::move(factors));
}

/// Hub H with k leaf factors phi_i(L_i, H) sharing `table`.
inline hlift::FactorGraph star(std::size_t k, std::vector<double> table = {1.0, 2.0, 3.0, 4.0}) {
  std::vector<hlift::RandomVariable> vars{{"H", kBool}};
  std::vector<hlift::FactorSpec> factors;
  for (std::size_t i = 0; i < k; ++i) {
    const std::string leaf = "L" + std::to_string(i + 1);
    vars.push_back({leaf, kBool});
    factors.push_back({"phi" + std::to_string(i + 1), {leaf, "H"}, table});
  }
  return hlift::build_graph(std::move(vars), std::move(factors));
}

/// Random graph: n variables with ranges 2..max_range, m factors of arity
/// 1..max_arity, entries log-uniform in [0.1, 10]. Unused variables get a
/// unary factor so the graph is valid.
inline hlift::FactorGraph random_graph(hlift::Rng& rng, std::size_t n, std::size_t m,
                                       std::size_t max_arity = 3, std::size_t max_range = 3) {
  std::vector<hlift::RandomVariable> vars;
  for (std::size_t v = 0; v < n; ++v) {
    hlift::RandomVariable rv{"V" + std::to_string(v), {}};
    const std::size_t size = 2 + rng.below(max_range - 1);
    for (std::size_t k = 0; k < size; ++k) rv.range.push_back("s" + std::to_string(k));
    vars.push_back(std::move(rv));
  }
  std::vector<char> used(n, 0);
  std::vector<hlift::FactorSpec> factors;
  auto add = [&](std::vector<std::size_t> args) {
    hlift::FactorSpec f{"f" + std::to_string(factors.size()), {}, {}};
    std::size_t dim = 1;
    for (std::size_t v : args) {
      f.args.push_back(vars[v].name);
      dim *= vars[v].size();
      used[v] = 1;
    }
    for (std::size_t r = 0; r < dim; ++r) f.table.push_back(std::exp(rng.uniform(-2.3, 2.3)));
    factors.push_back(std::move(f));
  };
  for (std::size_t j = 0; j < m; ++j) {
    const std::size_t arity = 1 + rng.below(std::min(max_arity, n));
    std::vector<std::size_t> args;
    while (args.size() < arity) {
      const std::size_t v = rng.below(n);
      if (std::find(args.begin(), args.end(), v) == args.end()) args.push_back(v);
    }
    add(args);
  }
  for (std::size_t v = 0; v < n; ++v) {
    if (!used[v]) add({v});
  }
  return hlift::build_graph(std::move(vars), std::move(factors));
}

}  // namespace fixture
