#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "hlift/bounds.hpp"
#include "hlift/colour_passing.hpp"
#include "hlift/error.hpp"
#include "hlift/formats.hpp"
#include "hlift/hierarchy.hpp"
#include "hlift/inference.hpp"
#include "hlift/metric.hpp"
#include "hlift/planted.hpp"

namespace hlift::cli {

namespace {

// Relative and absolute slack for comparing measurements with bounds.
constexpr double kTolerance = 1e-12;
// eps cap for --target-pdelta
constexpr double kEpsCap = 1.0 - 1e-9;

struct Globals {
  std::string model;
  std::string out;
  std::uint64_t seed = 1;
  int threads = 0;
  bool clamp_zeros = false;
  std::uint64_t enum_budget = kDefaultEnumBudget;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

// Writes to `path`, or to `fallback` when the path is empty.
void emit(const std::string& path, const std::string& text, std::ostream& fallback) {
  if (path.empty()) {
    fallback << text;
  } else {
    write_file(path, text);
  }
}

FactorGraph load_model(const Globals& g) {
  if (g.model.empty()) throw std::runtime_error("--model is required");
  BuildOptions opts;
  opts.clamp_zeros = g.clamp_zeros;
  return parse_model(read_file(g.model), opts);
}

bool within(double value, double bound) {
  return value <= bound + kTolerance * std::max(1.0, std::abs(bound));
}

std::vector<double> parse_grid(const std::string& text) {
  std::vector<double> out;
  if (text.find(':') != std::string::npos) {
    // lo:step:hi
    std::vector<double> parts;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ':')) parts.push_back(std::stod(item));
    if (parts.size() != 3 || !(parts[1] > 0.0) || parts[2] < parts[0]) {
      throw std::runtime_error("grid range must be lo:step:hi with step > 0");
    }
    const auto n = static_cast<std::size_t>(std::floor((parts[2] - parts[0]) / parts[1] + 1e-9));
    for (std::size_t k = 0; k <= n; ++k) out.push_back(parts[0] + static_cast<double>(k) * parts[1]);
    return out;
  }
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(std::stod(item));
  }
  if (out.empty()) throw std::runtime_error("empty grid");
  return out;
}

std::vector<std::size_t> parse_counts(const std::string& text) {
  std::vector<std::size_t> out;
  for (double x : parse_grid(text)) {
    if (x < 1.0 || x != std::floor(x)) throw std::runtime_error("factor counts must be positive integers");
    out.push_back(static_cast<std::size_t>(x));
  }
  return out;
}

// bound_chain, extended to eps >= 1 with an infinite ratio bound.
BoundChain chain_for(double eps, std::size_t m, std::optional<double> measured = std::nullopt) {
  if (eps < 1.0) return bound_chain(eps, m, measured);
  BoundChain b;
  b.eps = eps;
  b.m = m;
  b.d2 = dcd_bound_sharp(eps, m);
  b.d3 = 2.0 * static_cast<double>(m) * std::log1p(eps);
  b.d4 = std::numeric_limits<double>::infinity();
  b.pmax_d2 = pmax_bound(b.d2);
  b.pmax_d3 = pmax_bound(b.d3);
  b.pmax_d4 = 1.0;
  if (measured) {
    b.d1 = *measured;
    b.pmax_d1 = pmax_bound(*measured);
  }
  return b;
}

// ---- order ----------------------------------------------------------------

struct OrderArgs {
  std::string report;
  std::string distances;
  std::size_t evidence_budget = 0;
};

int cmd_order(const Globals& g, const OrderArgs& a, std::ostream& out, std::ostream& err) {
  const FactorGraph model = load_model(g);
  const DistanceMatrix dm = distance_matrix(model, {g.threads});
  const MergeTree tree = build_hierarchy(dm);
  if (!a.distances.empty()) {
    std::ofstream f(a.distances);
    if (!f) throw std::runtime_error("cannot write " + a.distances);
    write_distance_csv(f, dm);
  }
  emit(g.out, export_tree(tree), out);

  std::ostream& log = g.out.empty() ? err : out;
  log << "level,eps,blocks\n";
  log << "0,0," << model.factor_count() << '\n';
  for (std::size_t l = 1; l <= tree.level_count(); ++l) {
    log << l << ',' << format_number(tree.epsilons()[l - 1]) << ','
        << model.factor_count() - l << '\n';
  }

  if (!a.report.empty()) {
    std::vector<ReportRow> rows = report_rows(tree, model.factor_count());
    if (model.state_count() <= g.enum_budget) {
      const InferenceOptions inf{g.enum_budget, g.threads};
      for (ReportRow& row : rows) {
        const CompressedModel cm = hacp_compress(model, tree, row.level);
        const DeviationReport dev = max_query_deviation(model, cm.model, a.evidence_budget, inf);
        row.measured_dcd = dev.dcd;
        row.measured_pmax = dev.pmax;
      }
    }
    std::ofstream f(a.report);
    if (!f) throw std::runtime_error("cannot write " + a.report);
    write_report(f, rows);
  }
  return kOk;
}

// ---- compress ---------------------------------------------------------------

struct CompressArgs {
  std::string hierarchy;
  std::optional<std::size_t> level;
  std::optional<double> eps;
  std::optional<double> target_pdelta;
};

int cmd_compress(const Globals& g, const CompressArgs& a, std::ostream& out, std::ostream& err) {
  const FactorGraph model = load_model(g);
  if (a.hierarchy.empty()) throw std::runtime_error("--hierarchy is required");
  const MergeTree tree = parse_tree(read_file(a.hierarchy));
  const int selectors = (a.level ? 1 : 0) + (a.eps ? 1 : 0) + (a.target_pdelta ? 1 : 0);
  if (selectors != 1) {
    throw std::runtime_error("give exactly one of --level, --eps, --target-pdelta");
  }
  std::size_t level = 0;
  if (a.level) {
    level = *a.level;
  } else if (a.eps) {
    level = level_for_epsilon(tree, *a.eps);
  } else {
    const double eps1 = eps_for_target(*a.target_pdelta, model.factor_count());
    level = level_for_epsilon(tree, std::min(eps1, kEpsCap));
    err << "target " << format_number(*a.target_pdelta) << ": eps " << format_number(eps1)
        << ", capped " << format_number(std::min(eps1, kEpsCap)) << '\n';
  }
  const CompressedModel cm = hacp_compress(model, tree, level);
  emit(g.out, write_compressed(cm), out);
  std::ostream& log = g.out.empty() ? err : out;
  log << "level " << cm.level << ", eps " << format_number(cm.eps) << ", blocks "
      << cm.block_count() << " (" << cm.initial_blocks.size() << " before refinement)\n";
  return kOk;
}

// ---- eval -------------------------------------------------------------------

struct EvalArgs {
  std::string compressed;
  std::size_t evidence_budget = 1;
};

int cmd_eval(const Globals& g, const EvalArgs& a, std::ostream& out, std::ostream& err) {
  const FactorGraph model = load_model(g);
  if (a.compressed.empty()) throw std::runtime_error("--compressed is required");
  BuildOptions opts;
  opts.clamp_zeros = g.clamp_zeros;
  const CompressedModel cm = parse_compressed(read_file(a.compressed), opts);
  const InferenceOptions inf{g.enum_budget, g.threads};
  const DeviationReport dev = max_query_deviation(model, cm.model, a.evidence_budget, inf);

  const std::size_t m = model.factor_count();
  const BoundChain chain = chain_for(cm.eps, m, dev.dcd);
  std::ostringstream csv;
  write_deviation_csv(csv, model, dev, chain);
  emit(g.out, csv.str(), out);

  std::vector<std::string> violations;
  if (!within(dev.dcd, chain.d2)) {
    violations.push_back("measured D_CD " + format_number(dev.dcd) + " exceeds bound " +
                         format_number(chain.d2));
  }
  const double pb = pmax_bound(dev.dcd);
  if (!within(dev.pmax, pb)) {
    violations.push_back("measured query shift " + format_number(dev.pmax) + " exceeds " +
                         format_number(pb));
  }
  for (const QueryDeviation& q : dev.queries) {
    const Interval iv = cd_interval(q.p, dev.dcd);
    if (!within(q.p_compressed, iv.upper) || !within(iv.lower, q.p_compressed)) {
      violations.push_back("query " + q.variable + "=" + q.value + " leaves its interval");
      break;
    }
  }
  for (const std::string& v : violations) err << "bound violation: " << v << '\n';
  return violations.empty() ? kOk : kBoundViolation;
}

// ---- bounds -----------------------------------------------------------------

struct BoundsArgs {
  std::string eps_grid;
  std::string pdelta_grid;
  std::string m_list = "2";
};

int cmd_bounds(const Globals& g, const BoundsArgs& a, std::ostream& out) {
  if (a.eps_grid.empty() == a.pdelta_grid.empty()) {
    throw std::runtime_error("give exactly one of --eps-grid, --pdelta-grid");
  }
  const std::vector<std::size_t> ms = parse_counts(a.m_list);
  std::ostringstream csv;
  if (!a.eps_grid.empty()) {
    std::vector<BoundChain> rows;
    for (std::size_t m : ms) {
      for (double eps : parse_grid(a.eps_grid)) rows.push_back(chain_for(eps, m));
    }
    write_bounds_csv(csv, rows);
  } else {
    csv << "p_delta,m,d,eps\n";
    char buf[64];
    for (std::size_t m : ms) {
      for (double p : parse_grid(a.pdelta_grid)) {
        std::snprintf(buf, sizeof buf, "%.9g", p);
        csv << buf << ',' << m << ',';
        std::snprintf(buf, sizeof buf, "%.9g", dcd_for_pmax(p));
        csv << buf << ',';
        std::snprintf(buf, sizeof buf, "%.9g", eps_for_target(p, m));
        csv << buf << '\n';
      }
    }
  }
  emit(g.out, csv.str(), out);
  return kOk;
}

// ---- gen --------------------------------------------------------------------

struct GenArgs {
  PlantedSpec spec;
  std::string topology = "star";
  std::string groups_out;
};

int cmd_gen(const Globals& g, GenArgs a, std::ostream& out) {
  a.spec.seed = g.seed;
  a.spec.topology = parse_topology(a.topology);
  const PlantedModel planted = generate_planted(a.spec);
  emit(g.out, write_model(planted.model), out);

  std::string sidecar = a.groups_out;
  if (sidecar.empty() && !g.out.empty()) sidecar = g.out + ".groups.json";
  if (!sidecar.empty()) {
    std::string text = "{\"seed\": " + std::to_string(g.seed) + ", \"groups\": [";
    for (std::size_t k = 0; k < planted.groups.size(); ++k) {
      if (k) text += ", ";
      text += "[";
      for (std::size_t i = 0; i < planted.groups[k].size(); ++i) {
        if (i) text += ", ";
        text += "\"" + planted.model.factor(planted.groups[k][i]).name + "\"";
      }
      text += "]";
    }
    write_file(sidecar, text + "]}\n");
  }
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Hierarchical lifted compression of factor graphs", "hlift"};
  app.require_subcommand(1);
  app.fallthrough();

  Globals globals;
  app.add_option("--model", globals.model, "Model JSON file");
  app.add_option("--out", globals.out, "Output file (default: standard output)");
  app.add_option("--seed", globals.seed, "Random seed");
  app.add_option("--threads", globals.threads, "Thread cap (0: all)");
  app.add_flag("--clamp-zeros", globals.clamp_zeros, "Replace zero potentials by 1e-9");
  app.add_option("--enum-budget", globals.enum_budget, "Largest joint state count to enumerate");

  OrderArgs order;
  auto* order_cmd = app.add_subcommand("order", "Build the eps hierarchy of a model");
  order_cmd->add_option("--report", order.report, "Per-level bound report CSV");
  order_cmd->add_option("--distances", order.distances, "Pairwise distance CSV");
  order_cmd->add_option("--evidence-budget", order.evidence_budget,
                        "Evidence set size for measured report columns");

  CompressArgs compress;
  auto* compress_cmd = app.add_subcommand("compress", "Compress a model at one hierarchy level");
  compress_cmd->add_option("--hierarchy", compress.hierarchy, "Hierarchy JSON from 'order'");
  compress_cmd->add_option("--level", compress.level, "Hierarchy level");
  compress_cmd->add_option("--eps", compress.eps, "Largest level whose eps is at most this");
  compress_cmd->add_option("--target-pdelta", compress.target_pdelta,
                           "Largest level keeping every query shift below this");

  EvalArgs eval;
  auto* eval_cmd = app.add_subcommand("eval", "Measure query deviations of a compressed model");
  eval_cmd->add_option("--compressed", eval.compressed, "Compressed model JSON");
  eval_cmd->add_option("--evidence-budget", eval.evidence_budget, "Largest evidence set size");

  BoundsArgs bounds;
  auto* bounds_cmd = app.add_subcommand("bounds", "Tabulate the distance and query bounds");
  bounds_cmd->add_option("--eps-grid", bounds.eps_grid, "eps values: a,b,c or lo:step:hi");
  bounds_cmd->add_option("--pdelta-grid", bounds.pdelta_grid, "Query shift targets");
  bounds_cmd->add_option("--m-list", bounds.m_list, "Factor counts");

  GenArgs gen;
  auto* gen_cmd = app.add_subcommand("gen", "Generate a model with planted factor groups");
  gen_cmd->add_option("--groups", gen.spec.num_groups, "Number of groups");
  gen_cmd->add_option("--per-group", gen.spec.factors_per_group, "Factors per group");
  gen_cmd->add_option("--dimension", gen.spec.table_dimension, "Table rows (power of two)");
  gen_cmd->add_option("--base-low", gen.spec.base_low, "Smallest base potential");
  gen_cmd->add_option("--base-high", gen.spec.base_high, "Largest base potential");
  gen_cmd->add_option("--noise", gen.spec.noise, "Multiplicative noise in [0, 0.5)");
  gen_cmd->add_option("--min-gap", gen.spec.min_gap, "Smallest distance between group bases");
  gen_cmd->add_option("--topology", gen.topology, "star, chain or random");
  gen_cmd->add_option("--variables", gen.spec.num_variables, "Variable count (random topology)");
  gen_cmd->add_option("--groups-out", gen.groups_out, "Ground-truth grouping JSON");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kFailure;
  }

  try {
    if (*order_cmd) return cmd_order(globals, order, out, err);
    if (*compress_cmd) return cmd_compress(globals, compress, out, err);
    if (*eval_cmd) return cmd_eval(globals, eval, out, err);
    if (*bounds_cmd) return cmd_bounds(globals, bounds, out);
    if (*gen_cmd) return cmd_gen(globals, gen, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    switch (e.code()) {
      case ErrorCode::SchemaError: return kSchemaError;
      case ErrorCode::StateSpaceTooLarge: return kBudgetExceeded;
      default: return kFailure;
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kFailure;
  }
  return kFailure;
}

}  // namespace hlift::cli
