#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "hlift/model.hpp"

namespace hlift {

/// std::mt19937_64 with explicitly defined draws, so sequences are the same
/// on every standard library.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }
  /// (x >> 11) * 2^-53, in [0, 1).
  double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }
  /// Unbiased integer in [0, n) by rejection.
  std::size_t below(std::size_t n);

 private:
  std::mt19937_64 engine_;
};

enum class Topology { Star, Chain, Random };

Topology parse_topology(const std::string& name);
std::string to_string(Topology t);

struct PlantedSpec {
  std::uint64_t seed = 1;
  std::size_t num_groups = 3;
  std::size_t factors_per_group = 4;
  std::size_t table_dimension = 4;  // power of two; factors over binary variables
  double base_low = 0.5;
  double base_high = 5.0;
  /// Every entry of a member table is the group base entry times a draw
  /// from [1 - noise, 1 + noise].
  double noise = 0.0;
  /// Lower bound on the distance between two group bases of equal shape.
  double min_gap = 0.0;
  Topology topology = Topology::Star;
  std::size_t num_variables = 0;  // random topology only; 0 picks the factor count
};

struct PlantedModel {
  FactorGraph model;
  /// Planted factor groups, members ascending, ordered by smallest member.
  std::vector<std::vector<std::size_t>> groups;
};

/// Deterministic given the spec. Group labels are shuffled across factor
/// positions. Throws InvalidArgument for an invalid spec or when no bases
/// with the requested gap are found.
PlantedModel generate_planted(const PlantedSpec& spec);

}  // namespace hlift
