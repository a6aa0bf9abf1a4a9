#include <cmath>

#include "doctest.h"
#include "fixtures.hpp"
#include "hlift/bounds.hpp"
#include "hlift/colour_passing.hpp"
#include "hlift/error.hpp"
#include "hlift/hierarchy.hpp"
#include "hlift/inference.hpp"
#include "hlift/metric.hpp"
#include "oracles.hpp"

using namespace hlift;

namespace {

bool close(double a, double b, double rel) { return std::abs(a - b) <= rel * std::max(std::abs(a), std::abs(b)); }

}  // namespace

TEST_CASE("partition function") {
  const FactorGraph one = build_graph({{"X", fixture::kBool}}, {{"phi", {"X"}, {2.5, 4.0}}});
  CHECK(partition_function(one) == doctest::Approx(6.5).epsilon(1e-14));
  CHECK(partition_function(one, Method::VariableElimination) == doctest::Approx(6.5).epsilon(1e-14));

  const FactorGraph g = fixture::two_factor_star({1, 2, 3, 4});
  // sum over b of (sum over a phi(a, b))^2 = (1+3)^2 + (2+4)^2
  CHECK(partition_function(g) == doctest::Approx(52.0).epsilon(1e-14));
  CHECK(partition_function(g, Method::VariableElimination) == doctest::Approx(52.0).epsilon(1e-14));
}

TEST_CASE("elimination agrees with enumeration") {
  Rng rng(61);
  for (int trial = 0; trial < 40; ++trial) {
    const FactorGraph g = fixture::random_graph(rng, 2 + rng.below(7), 2 + rng.below(8));
    const double ve = log_partition_function(g, Method::VariableElimination);
    const double en = log_partition_function(g, Method::Enumeration);
    CHECK(close(ve, en, 1e-9));
    CHECK(close(std::exp(en), oracle::partition(g), 1e-9));
  }
}

TEST_CASE("queries") {
  SUBCASE("two-factor star marginal of the hub") {
    const std::vector<double> t{1.5, 2.0, 3.5, 4.0};
    const FactorGraph g = fixture::two_factor_star(t);
    const double z = partition_function(g);
    const QueryResult r = query(g, "B");
    CHECK(r.distribution[0] == doctest::Approx((t[0] + t[2]) * (t[0] + t[2]) / z).epsilon(1e-13));
  }
  SUBCASE("uniform tables") {
    const FactorGraph g = fixture::two_factor_star({1, 1, 1, 1});
    const QueryResult r = query(g, "A", {{"C", "false"}});
    CHECK(r.distribution[0] == doctest::Approx(0.5).epsilon(1e-15));
  }
  SUBCASE("random graphs with evidence") {
    Rng rng(67);
    for (int trial = 0; trial < 40; ++trial) {
      const FactorGraph g = fixture::random_graph(rng, 6, 5);
      const std::size_t q = rng.below(6);
      std::size_t e1 = rng.below(6);
      while (e1 == q) e1 = rng.below(6);
      std::size_t e2 = rng.below(6);
      while (e2 == q || e2 == e1) e2 = rng.below(6);
      const std::size_t x1 = rng.below(g.variable(e1).size());
      const std::size_t x2 = rng.below(g.variable(e2).size());
      const Assignment ev{{g.variable(e1).name, g.variable(e1).range[x1]},
                          {g.variable(e2).name, g.variable(e2).range[x2]}};
      const auto expected = oracle::conditional(g, q, {{e1, x1}, {e2, x2}});
      const QueryResult ve = query(g, g.variable(q).name, ev);
      const QueryResult en = query(g, g.variable(q).name, ev, Method::Enumeration);
      double total = 0.0;
      for (std::size_t k = 0; k < expected.size(); ++k) {
        CHECK(close(ve.distribution[k], expected[k], 1e-9));
        CHECK(close(en.distribution[k], expected[k], 1e-9));
        total += ve.distribution[k];
      }
      CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
  SUBCASE("errors") {
    const FactorGraph g = fixture::two_factor_star();
    CHECK_THROWS_AS(query(g, "Z"), Error);
    CHECK_THROWS_AS(query(g, "A", {{"A", "true"}}), Error);
    CHECK_THROWS_AS(query(g, "A", {{"B", "maybe"}}), Error);
    InferenceOptions tiny;
    tiny.enum_budget = 4;
    try {
      query(g, "A", {}, Method::Enumeration, tiny);
      FAIL("expected a budget error");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::StateSpaceTooLarge);
    }
  }
}

TEST_CASE("chan-darwiche distance") {
  const FactorGraph g = fixture::two_factor_star({1, 2, 3, 4});
  CHECK(dcd_distance(g, g) == 0.0);
  const FactorGraph scaled = g.with_tables({{2, 4, 6, 8}, {1, 2, 3, 4}});
  CHECK(dcd_distance(g, scaled) == doctest::Approx(0.0).epsilon(1e-14));

  const FactorGraph perturbed = g.with_tables({{1, 2, 3, 4}, {1.1, 2.2, 2.7, 4.4}});
  const CompressedModel cm = hacp_compress(perturbed, build_hierarchy(distance_matrix(perturbed)), 1);
  const double d = dcd_distance(perturbed, cm.model);
  CHECK(d == doctest::Approx(oracle::dcd(perturbed, cm.model)).epsilon(1e-12));
  CHECK(d == doctest::Approx(dcd_distance(cm.model, perturbed)).epsilon(1e-12));
  CHECK(d <= dcd_bound_sharp(cm.eps, 2));

  const FactorGraph other = build_graph({{"X", fixture::kBool}}, {{"phi", {"X"}, {1, 2}}});
  CHECK_THROWS_AS(dcd_distance(g, other), Error);
}

TEST_CASE("distance between different factor layouts") {
  Rng rng(71);
  for (int trial = 0; trial < 10; ++trial) {
    const FactorGraph g = fixture::random_graph(rng, 4, 3);
    // same variables, one unary factor per variable
    std::vector<RandomVariable> vars(g.variables().begin(), g.variables().end());
    std::vector<FactorSpec> fs;
    for (const auto& v : vars) {
      std::vector<double> t;
      for (std::size_t k = 0; k < v.size(); ++k) t.push_back(rng.uniform(0.5, 2));
      fs.push_back({"u" + v.name, {v.name}, t});
    }
    const FactorGraph h = build_graph(vars, fs);
    CHECK(dcd_distance(g, h) == doctest::Approx(oracle::dcd(g, h)).epsilon(1e-12));
  }
}

TEST_CASE("query deviation scan") {
  Rng rng(73);
  for (int trial = 0; trial < 15; ++trial) {
    const FactorGraph g = fixture::random_graph(rng, 5, 4, 2, 2);
    std::vector<std::vector<double>> tables;
    for (const Factor& f : g.factors()) {
      std::vector<double> t(f.table);
      for (double& x : t) x *= rng.uniform(0.8, 1.2);
      tables.push_back(t);
    }
    const FactorGraph h = g.with_tables(tables);
    const DeviationReport same = max_query_deviation(g, g, 1);
    CHECK(same.pmax == 0.0);
    CHECK(same.dcd == 0.0);

    const DeviationReport rep = max_query_deviation(g, h, 2);
    CHECK(rep.pmax <= pmax_bound(rep.dcd) + 1e-12);
    double worst = 0.0;
    for (const QueryDeviation& q : rep.queries) {
      const Interval iv = cd_interval(q.p, rep.dcd);
      CHECK(q.p_compressed <= iv.upper + 1e-12);
      CHECK(q.p_compressed >= iv.lower - 1e-12);
      worst = std::max(worst, q.abs_dev);
    }
    CHECK(rep.pmax == worst);
    CHECK(rep.queries[rep.argmax].abs_dev == rep.pmax);

    // spot-check against the enumeration oracle
    const QueryDeviation& q = rep.queries[rep.argmax];
    const std::size_t qv = g.variable_index(q.variable);
    std::vector<std::pair<std::size_t, std::size_t>> ev;
    for (const auto& [name, value] : q.evidence) {
      const std::size_t v = g.variable_index(name);
      ev.emplace_back(v, *g.variable(v).value_index(value));
    }
    const std::size_t x = *g.variable(qv).value_index(q.value);
    CHECK(q.p == doctest::Approx(oracle::conditional(g, qv, ev)[x]).epsilon(1e-10));
    CHECK(q.p_compressed == doctest::Approx(oracle::conditional(h, qv, ev)[x]).epsilon(1e-10));
  }
}

TEST_CASE("marginal scan covers every variable and value") {
  const FactorGraph g = fixture::two_factor_star();
  const DeviationReport rep = max_query_deviation(g, g, 0);
  CHECK(rep.queries.size() == 6);
  const DeviationReport one = max_query_deviation(g, g, 1);
  // marginals plus 3 variables x 2 other evidence variables x 2 evidence values x 2 query values
  CHECK(one.queries.size() == 6 + 24);
}

TEST_CASE("lifted marginal on the two-factor star") {
  const std::vector<double> t{1.5, 2.0, 3.5, 4.0};
  const FactorGraph g = fixture::two_factor_star(t);
  const CompressedModel cm = hacp_compress(g, build_hierarchy(distance_matrix(g)), 1);
  const LiftedResult lifted = lifted_marginal(cm, "B");
  const LiftedResult ground = star_marginal(g, "B");
  const double z = partition_function(g);
  CHECK(lifted.result.distribution[0] == doctest::Approx((t[0] + t[2]) * (t[0] + t[2]) / z).epsilon(1e-13));
  CHECK(std::abs(lifted.result.distribution[0] - query(g, "B").distribution[0]) <= 1e-12);
  CHECK(ground.summation_ops == 2 * lifted.summation_ops);
}

TEST_CASE("lifted marginal on stars") {
  for (std::size_t k = 1; k <= 6; ++k) {
    const FactorGraph g = fixture::star(k, {0.7, 1.9, 2.3, 0.4});
    const CompressedModel cm = hacp_compress(g, build_hierarchy(distance_matrix(g)), k - 1);
    const LiftedResult lifted = lifted_marginal(cm, "H");
    const LiftedResult ground = star_marginal(g, "H");
    const QueryResult exact = query(g, "H");
    for (std::size_t v = 0; v < 2; ++v) {
      CHECK(std::abs(lifted.result.distribution[v] - exact.distribution[v]) <= 1e-12);
      CHECK(std::abs(ground.result.distribution[v] - exact.distribution[v]) <= 1e-12);
    }
    CHECK(ground.summation_ops == k * lifted.summation_ops);
  }
}

TEST_CASE("lifted marginal rejects other patterns") {
  const FactorGraph g = fixture::star(3);
  const CompressedModel cm = hacp_compress(g, build_hierarchy(distance_matrix(g)), 2);
  auto code = [&](auto&& fn) {
    try {
      fn();
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::InvalidArgument;
  };
  CHECK(code([&] { lifted_marginal(cm, "L1"); }) == ErrorCode::PatternNotLiftable);
  CHECK(code([&] { lifted_marginal(cm, "H", {{"L2", "true"}}); }) == ErrorCode::PatternNotLiftable);
  // a block whose members differ is not liftable
  const FactorGraph mixed = fixture::star(2).with_tables({{1, 2, 3, 4}, {1, 2, 3, 5}});
  CompressedModel fake;
  fake.model = mixed;
  fake.grouping.blocks = {{0, 1}};
  CHECK(code([&] { lifted_marginal(fake, "H"); }) == ErrorCode::PatternNotLiftable);
}
