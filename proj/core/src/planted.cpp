#include "hlift/planted.hpp"

#include <algorithm>
#include <limits>

#include "hlift/error.hpp"
#include "hlift/metric.hpp"

namespace hlift {

std::size_t Rng::below(std::size_t n) {
  if (n == 0) throw Error(ErrorCode::InvalidArgument, "empty range");
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t x = next();
  while (x >= limit) x = next();
  return static_cast<std::size_t>(x % n);
}

Topology parse_topology(const std::string& name) {
  if (name == "star") return Topology::Star;
  if (name == "chain") return Topology::Chain;
  if (name == "random") return Topology::Random;
  throw Error(ErrorCode::InvalidArgument, "unknown topology \"" + name + "\"");
}

std::string to_string(Topology t) {
  switch (t) {
    case Topology::Star: return "star";
    case Topology::Chain: return "chain";
    case Topology::Random: return "random";
  }
  return "?";
}

namespace {

std::size_t log2_exact(std::size_t d) {
  std::size_t k = 0;
  while ((std::size_t{1} << k) < d) ++k;
  if (d < 2 || (std::size_t{1} << k) != d) {
    throw Error(ErrorCode::InvalidArgument, "table dimension must be a power of two >= 2");
  }
  return k;
}

}  // namespace

PlantedModel generate_planted(const PlantedSpec& spec) {
  if (spec.num_groups == 0 || spec.factors_per_group == 0) {
    throw Error(ErrorCode::InvalidArgument, "need at least one group with one factor");
  }
  if (!(spec.noise >= 0.0 && spec.noise < 0.5)) {
    throw Error(ErrorCode::InvalidArgument, "noise must lie in [0, 0.5)");
  }
  if (!(spec.base_low > 0.0 && spec.base_high >= spec.base_low)) {
    throw Error(ErrorCode::InvalidArgument, "base range must be positive and ordered");
  }
  const std::size_t arity = log2_exact(spec.table_dimension);
  const std::size_t m = spec.num_groups * spec.factors_per_group;
  Rng rng(spec.seed);

  // group bases, rejection-sampled to respect the gap
  std::vector<std::vector<double>> bases;
  for (std::size_t g = 0; g < spec.num_groups; ++g) {
    std::vector<double> base(spec.table_dimension);
    bool ok = false;
    for (int attempt = 0; attempt < 10000 && !ok; ++attempt) {
      for (double& x : base) x = rng.uniform(spec.base_low, spec.base_high);
      ok = std::all_of(bases.begin(), bases.end(),
                       [&](const auto& other) { return odeed(base, other) >= spec.min_gap; });
    }
    if (!ok) throw Error(ErrorCode::InvalidArgument, "could not place group bases with the requested gap");
    bases.push_back(base);
  }

  // shuffled group label per factor position
  std::vector<std::size_t> label(m);
  for (std::size_t j = 0; j < m; ++j) label[j] = j / spec.factors_per_group;
  for (std::size_t j = m; j-- > 1;) std::swap(label[j], label[rng.below(j + 1)]);

  std::vector<FactorSpec> factors(m);
  for (std::size_t j = 0; j < m; ++j) {
    factors[j].name = "f" + std::to_string(j + 1);
    for (double b : bases[label[j]]) {
      factors[j].table.push_back(b * rng.uniform(1.0 - spec.noise, 1.0 + spec.noise));
    }
  }

  // argument lists by variable number
  std::vector<std::vector<std::size_t>> args(m);
  std::size_t n = 0;
  switch (spec.topology) {
    case Topology::Star:
      n = 1;
      for (auto& a : args) {
        a.push_back(0);
        for (std::size_t k = 1; k < arity; ++k) a.push_back(n++);
      }
      break;
    case Topology::Chain:
      n = m + arity - 1;
      for (std::size_t j = 0; j < m; ++j) {
        for (std::size_t k = 0; k < arity; ++k) args[j].push_back(j + k);
      }
      break;
    case Topology::Random: {
      n = spec.num_variables == 0 ? std::max(m, arity) : spec.num_variables;
      if (n < arity) throw Error(ErrorCode::InvalidArgument, "fewer variables than the arity");
      for (auto& a : args) {
        while (a.size() < arity) {
          const std::size_t v = rng.below(n);
          if (std::find(a.begin(), a.end(), v) == a.end()) a.push_back(v);
        }
      }
      break;
    }
  }

  // drop unused variables and number the rest in order of appearance
  std::vector<std::size_t> renumber(n, std::numeric_limits<std::size_t>::max());
  std::size_t used = 0;
  for (const auto& a : args) {
    for (std::size_t v : a) {
      if (renumber[v] == std::numeric_limits<std::size_t>::max()) renumber[v] = used++;
    }
  }
  std::vector<RandomVariable> variables(used);
  for (std::size_t v = 0; v < used; ++v) {
    variables[v] = {"X" + std::to_string(v + 1), {"true", "false"}};
  }
  for (std::size_t j = 0; j < m; ++j) {
    for (std::size_t v : args[j]) factors[j].args.push_back(variables[renumber[v]].name);
  }

  PlantedModel out;
  out.model = build_graph(std::move(variables), std::move(factors));
  std::vector<std::vector<std::size_t>> groups(spec.num_groups);
  for (std::size_t j = 0; j < m; ++j) groups[label[j]].push_back(j);
  std::sort(groups.begin(), groups.end());
  out.groups = std::move(groups);
  return out;
}

}  // namespace hlift
