#include <cstdio>
#include <limits>
#include <sstream>

#include "doctest.h"
#include "fixtures.hpp"
#include "hlift/error.hpp"
#include "hlift/formats.hpp"
#include "hlift/hierarchy.hpp"

using namespace hlift;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::InvalidArgument;
}

std::string message_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.what();
  }
  return {};
}

void check_same(const FactorGraph& a, const FactorGraph& b) {
  REQUIRE(a.variable_count() == b.variable_count());
  REQUIRE(a.factor_count() == b.factor_count());
  for (std::size_t i = 0; i < a.variable_count(); ++i) {
    CHECK(a.variable(i).name == b.variable(i).name);
    CHECK(a.variable(i).range == b.variable(i).range);
  }
  for (std::size_t j = 0; j < a.factor_count(); ++j) {
    CHECK(a.factor(j).name == b.factor(j).name);
    CHECK(a.factor(j).args == b.factor(j).args);
    CHECK(a.factor(j).table == b.factor(j).table);
  }
}

}  // namespace

TEST_CASE("numbers round-trip exactly") {
  Rng rng(83);
  for (int i = 0; i < 1000; ++i) {
    const double x = std::exp(rng.uniform(-30, 30));
    CHECK(std::stod(format_number(x)) == x);
  }
  CHECK(format_number(0.5) == "0.5");
  CHECK(format_number(2.0) == "2");
}

TEST_CASE("model round trip") {
  Rng rng(89);
  for (int trial = 0; trial < 30; ++trial) {
    const FactorGraph g = fixture::random_graph(rng, 1 + rng.below(6), 1 + rng.below(6));
    const std::string text = write_model(g);
    const FactorGraph back = parse_model(text);
    check_same(g, back);
    CHECK(write_model(back) == text);
  }
}

TEST_CASE("canonical model layout") {
  const FactorGraph g = build_graph({{"A", fixture::kBool}}, {{"phi", {"A"}, {1, 2.5}}});
  CHECK(write_model(g) ==
        "{\n"
        "  \"variables\": [\n"
        "    {\"name\": \"A\", \"range\": [\"true\", \"false\"]}\n"
        "  ],\n"
        "  \"factors\": [\n"
        "    {\"name\": \"phi\", \"args\": [\"A\"], \"table\": [1, 2.5]}\n"
        "  ]\n"
        "}\n");
}

TEST_CASE("model schema errors") {
  const std::string bad_table = R"({
  "variables": [{"name": "A", "range": ["true", "false"]}, {"name": "B", "range": ["true", "false"]}],
  "factors": [{"name": "phi_bad", "args": ["A", "B"], "table": [1, 2, 3]}]
})";
  CHECK(code_of([&] { parse_model(bad_table); }) == ErrorCode::SchemaError);
  CHECK(message_of([&] { parse_model(bad_table); }).find("phi_bad") != std::string::npos);

  CHECK(code_of([] { parse_model("{\"variables\": [,]}"); }) == ErrorCode::SchemaError);
  CHECK(message_of([] { parse_model("{\n\"variables\": [,]}"); }).find("line 2") != std::string::npos);
  CHECK(code_of([] { parse_model(R"({"variables": []})"); }) == ErrorCode::SchemaError);
  CHECK(code_of([] {
          parse_model(R"({"variables": [{"name": "A", "range": ["t", "f"]}],
                          "factors": [{"name": "p", "args": ["A"], "table": [1, "x"]}]})");
        }) == ErrorCode::SchemaError);
  CHECK(code_of([] {
          parse_model(R"({"variables": [{"name": "A", "range": ["t", "f"]}],
                          "factors": [{"name": "p", "args": ["Q"], "table": [1, 2]}]})");
        }) == ErrorCode::SchemaError);
  CHECK(code_of([] {
          parse_model(R"({"variables": [{"name": "A", "range": ["t", "f"]}],
                          "factors": [{"name": "p", "args": ["A"], "table": [0, 2]}]})");
        }) == ErrorCode::SchemaError);
}

TEST_CASE("zero clamping on parse") {
  const std::string doc = R"({"variables": [{"name": "A", "range": ["t", "f"]}],
                              "factors": [{"name": "p", "args": ["A"], "table": [0, 2]}]})";
  const FactorGraph g = parse_model(doc, {true});
  CHECK(g.factor(0).table[0] > 0.0);
  CHECK(g.warnings().size() == 1);
}

TEST_CASE("hierarchy round trip") {
  const MergeTree tree = build_hierarchy(fixture::ladder_matrix());
  const std::string text = export_tree(tree);
  CHECK(parse_tree(text) == tree);
  CHECK(export_tree(parse_tree(text)) == text);

  const double inf = std::numeric_limits<double>::infinity();
  const MergeTree forest = build_hierarchy(DistanceMatrix(4, {inf, 0.5, inf, inf, 0.25, inf}, {0, 1, 0, 1}));
  CHECK(parse_tree(export_tree(forest)) == forest);

  const MergeTree single = build_hierarchy(DistanceMatrix(1, {}, {0}));
  CHECK(parse_tree(export_tree(single)) == single);
  CHECK(export_tree(single).find("\"leaf\": 1") != std::string::npos);
}

TEST_CASE("hierarchy schema errors") {
  CHECK(code_of([] { parse_tree("{}"); }) == ErrorCode::SchemaError);
  CHECK(code_of([] { parse_tree(R"({"m": 2, "tree": {"id": 3, "eps": 0.1, "children": [{"leaf": 1}, {"leaf": 1}]}})"); }) ==
        ErrorCode::SchemaError);
  CHECK(code_of([] {
          parse_tree(R"({"m": 2, "epsilons": [0.2], "tree": {"id": 3, "eps": 0.1, "children": [{"leaf": 1}, {"leaf": 2}]}})");
        }) == ErrorCode::SchemaError);
  CHECK(parse_tree(R"({"m": 2, "tree": {"id": 3, "eps": 0.1, "children": [{"leaf": 1}, {"leaf": 2}]}})").level_count() == 1);
}

TEST_CASE("compressed model round trip") {
  PlantedSpec spec;
  spec.noise = 0.1;
  const FactorGraph g = generate_planted(spec).model;
  const MergeTree tree = build_hierarchy(distance_matrix(g));
  for (std::size_t l : {std::size_t{0}, std::size_t{5}, tree.level_count()}) {
    const CompressedModel cm = hacp_compress(g, tree, l);
    const std::string text = write_compressed(cm);
    const CompressedModel back = parse_compressed(text);
    check_same(cm.model, back.model);
    CHECK(back.grouping.blocks == cm.grouping.blocks);
    CHECK(back.initial_blocks == cm.initial_blocks);
    CHECK(back.level == cm.level);
    CHECK(back.eps == cm.eps);
    CHECK(write_compressed(back) == text);
    // the compressed file is also a plain model document
    check_same(parse_model(text), cm.model);
  }
}

TEST_CASE("compressed grouping must hold identical tables") {
  const FactorGraph g = fixture::two_factor_star();
  CompressedModel cm = compress_groups(g, {{0, 1}});
  const std::string good = write_compressed(cm);
  CHECK_NOTHROW(parse_compressed(good));
  cm.model = g.with_tables({{1, 2, 3, 4}, {1, 2, 3, 5}});
  CHECK(code_of([&] { parse_compressed(write_compressed(cm)); }) == ErrorCode::SchemaError);
  CHECK(code_of([&] { parse_compressed(write_model(g)); }) == ErrorCode::SchemaError);
}

// the report carries 9 significant digits
double nine_digits(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", x);
  return std::stod(buf);
}

TEST_CASE("report round trip") {
  const MergeTree tree = build_hierarchy(fixture::ladder_matrix());
  std::vector<ReportRow> rows = report_rows(tree, 10);
  REQUIRE(rows.size() == 10);
  CHECK(rows[0].eps == 0.0);
  CHECK(rows[4].group_sizes == "4(1) 2(1) 1(4)");
  CHECK(rows[9].num_groups == 1);
  CHECK(rows[9].max_group_size == 10);
  rows[2].measured_dcd = 0.0123;
  rows[2].measured_pmax = 0.003;
  std::ostringstream out;
  write_report(out, rows);
  const auto back = parse_report(out.str());
  REQUIRE(back.size() == rows.size());
  for (std::size_t k = 0; k < rows.size(); ++k) {
    CHECK(back[k].level == rows[k].level);
    CHECK(back[k].num_groups == rows[k].num_groups);
    CHECK(back[k].max_group_size == rows[k].max_group_size);
    CHECK(back[k].eps == nine_digits(rows[k].eps));
    CHECK(back[k].d2 == nine_digits(rows[k].d2));
    CHECK(back[k].d3 == nine_digits(rows[k].d3));
    CHECK(back[k].d4.has_value() == rows[k].d4.has_value());
    CHECK(back[k].pmax_d2 == nine_digits(rows[k].pmax_d2));
    CHECK(back[k].measured_dcd.has_value() == rows[k].measured_dcd.has_value());
    CHECK(back[k].group_sizes == rows[k].group_sizes);
  }
  CHECK(*back[2].measured_dcd == 0.0123);
}

TEST_CASE("empty report is just the header") {
  const MergeTree tree = build_hierarchy(DistanceMatrix(1, {}, {0}));
  std::ostringstream out;
  write_report(out, report_rows(tree, 1));
  const std::string text = out.str();
  CHECK(text.rfind("level,eps,num_groups,max_group_size,d2,d3,d4,pmax_d2,measured_dcd,measured_pmax,group_sizes", 0) == 0);
  CHECK(parse_report(text).size() == report_rows(tree, 1).size());
  CHECK(code_of([] { parse_report("nonsense\n"); }) == ErrorCode::SchemaError);
}

TEST_CASE("bounds table") {
  std::ostringstream out;
  write_bounds_csv(out, {bound_chain(0.1, 2)});
  const std::string text = out.str();
  CHECK(text.rfind("eps,m,d2,d3,d4,pmax_d2,pmax_d3,pmax_d4\n", 0) == 0);
  CHECK(text.find("0.1,2,0.19062") != std::string::npos);
}

TEST_CASE("deviation table") {
  const FactorGraph g = fixture::two_factor_star();
  const FactorGraph h = g.with_tables({{1, 2, 3, 4}, {1.1, 2, 3, 4}});
  const DeviationReport rep = max_query_deviation(g, h, 1);
  std::ostringstream out;
  write_deviation_csv(out, g, rep, bound_chain(0.1, 2, rep.dcd));
  const std::string text = out.str();
  CHECK(text.rfind("query_var,evidence,p_original,p_compressed,abs_dev\n", 0) == 0);
  CHECK(text.find("\nmeasured_dcd,,,,") != std::string::npos);
  CHECK(text.find("\nmeasured_pmax,,,,") != std::string::npos);
  CHECK(text.find("\npmax_d2,,,,") != std::string::npos);
  CHECK(text.find("A=true,B=false") != std::string::npos);
}
