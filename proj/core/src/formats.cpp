#include "hlift/formats.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <map>
#include <ostream>
#include <sstream>

#include "hlift/error.hpp"
#include "json.hpp"

namespace hlift {

namespace {

using nlohmann::json;

std::string json_string(std::string_view s) { return json(std::string(s)).dump(); }

std::size_t line_at(std::string_view doc, std::size_t offset) {
  offset = std::min(offset, doc.size());
  return 1 + static_cast<std::size_t>(std::count(doc.begin(), doc.begin() + static_cast<long>(offset), '\n'));
}

// Line of the first `"name": "<entity>"` after `section`, 0 if not found.
std::size_t entity_line(std::string_view doc, std::string_view section, std::string_view entity) {
  const std::size_t from = doc.find("\"" + std::string(section) + "\"");
  if (from == std::string_view::npos) return 0;
  const std::string needle = json_string(entity);
  std::size_t at = doc.find(needle, from);
  while (at != std::string_view::npos) {
    // accept only occurrences used as a "name" value
    std::size_t k = at;
    while (k > 0 && (doc[k - 1] == ' ' || doc[k - 1] == '\t' || doc[k - 1] == '\n')) --k;
    if (k > 0 && doc[k - 1] == ':') {
      std::size_t e = k - 1;
      while (e > 0 && (doc[e - 1] == ' ' || doc[e - 1] == '\t' || doc[e - 1] == '\n')) --e;
      if (e >= 6 && doc.substr(e - 6, 6) == "\"name\"") return line_at(doc, at);
    }
    at = doc.find(needle, at + 1);
  }
  return 0;
}

[[noreturn]] void schema_error(const std::string& message) {
  throw Error(ErrorCode::SchemaError, message);
}

json parse_json(std::string_view document) {
  try {
    return json::parse(document.begin(), document.end());
  } catch (const json::parse_error& e) {
    const std::size_t line = line_at(document, e.byte == 0 ? 0 : e.byte - 1);
    const std::size_t start = document.rfind('\n', e.byte == 0 ? 0 : e.byte - 1);
    const std::size_t column = e.byte - (start == std::string_view::npos ? 0 : start + 1);
    schema_error("line " + std::to_string(line) + ", column " + std::to_string(column) +
                 ": malformed JSON");
  }
}

const json& field(const json& obj, const char* key, const std::string& where) {
  if (!obj.is_object()) schema_error(where + ": expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) schema_error(where + ": missing field \"" + key + "\"");
  return *it;
}

std::string string_at(const json& v, const std::string& where) {
  if (!v.is_string()) schema_error(where + ": expected a string");
  return v.get<std::string>();
}

double number_at(const json& v, const std::string& where) {
  if (!v.is_number()) schema_error(where + ": expected a number");
  return v.get<double>();
}

std::size_t index_at(const json& v, const std::string& where) {
  if (!v.is_number_unsigned()) schema_error(where + ": expected a non-negative integer");
  return v.get<std::size_t>();
}

const json& array_at(const json& v, const std::string& where) {
  if (!v.is_array()) schema_error(where + ": expected an array");
  return v;
}

FactorGraph graph_from_json(const json& doc, std::string_view text, const BuildOptions& options) {
  const json& vars = array_at(field(doc, "variables", "document"), "variables");
  const json& facs = array_at(field(doc, "factors", "document"), "factors");

  std::vector<RandomVariable> variables;
  for (std::size_t i = 0; i < vars.size(); ++i) {
    const std::string where = "variables[" + std::to_string(i) + "]";
    RandomVariable v;
    v.name = string_at(field(vars[i], "name", where), where + ".name");
    const json& range = array_at(field(vars[i], "range", where), where + ".range");
    for (std::size_t k = 0; k < range.size(); ++k) {
      v.range.push_back(string_at(range[k], where + ".range[" + std::to_string(k) + "] (variable " +
                                                json_string(v.name) + ")"));
    }
    variables.push_back(std::move(v));
  }
  std::vector<FactorSpec> factors;
  for (std::size_t j = 0; j < facs.size(); ++j) {
    const std::string where = "factors[" + std::to_string(j) + "]";
    FactorSpec f;
    f.name = string_at(field(facs[j], "name", where), where + ".name");
    const std::string named = where + " (factor " + json_string(f.name) + ")";
    const json& args = array_at(field(facs[j], "args", named), named + ".args");
    for (std::size_t a = 0; a < args.size(); ++a) {
      f.args.push_back(string_at(args[a], named + ".args[" + std::to_string(a) + "]"));
    }
    const json& table = array_at(field(facs[j], "table", named), named + ".table");
    f.table.reserve(table.size());
    for (std::size_t r = 0; r < table.size(); ++r) {
      f.table.push_back(number_at(table[r], named + ".table[" + std::to_string(r) + "]"));
    }
    factors.push_back(std::move(f));
  }

  try {
    return build_graph(std::move(variables), std::move(factors), options);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::SchemaError) throw;
    // point at the offending entity when the message names one
    std::string msg = e.what();
    std::size_t line = 0;
    for (const char* section : {"factors", "variables"}) {
      const std::string kind = std::string(section) == "factors" ? "factor \"" : "variable \"";
      const std::size_t at = msg.find(kind);
      if (at == std::string::npos) continue;
      const std::size_t begin = at + kind.size() - 1;
      const std::size_t end = msg.find('"', begin + 1);
      if (end == std::string::npos) continue;
      line = entity_line(text, section, msg.substr(begin + 1, end - begin - 1));
      if (line) break;
    }
    schema_error((line ? "line " + std::to_string(line) + ": " : std::string()) + msg);
  }
}

void append_number(std::string& out, double x) { out += format_number(x); }

void append_model_body(std::string& out, const FactorGraph& g) {
  out += "{\n  \"variables\": [\n";
  for (std::size_t i = 0; i < g.variable_count(); ++i) {
    const RandomVariable& v = g.variable(i);
    out += "    {\"name\": " + json_string(v.name) + ", \"range\": [";
    for (std::size_t k = 0; k < v.size(); ++k) {
      if (k) out += ", ";
      out += json_string(v.range[k]);
    }
    out += i + 1 < g.variable_count() ? "]},\n" : "]}\n";
  }
  out += "  ],\n  \"factors\": [\n";
  for (std::size_t j = 0; j < g.factor_count(); ++j) {
    const Factor& f = g.factor(j);
    out += "    {\"name\": " + json_string(f.name) + ", \"args\": [";
    for (std::size_t a = 0; a < f.args.size(); ++a) {
      if (a) out += ", ";
      out += json_string(g.variable(f.args[a]).name);
    }
    out += "], \"table\": [";
    for (std::size_t r = 0; r < f.table.size(); ++r) {
      if (r) out += ", ";
      append_number(out, f.table[r]);
    }
    out += j + 1 < g.factor_count() ? "]},\n" : "]}\n";
  }
  out += "  ]";
}

std::string name_blocks(const FactorGraph& g, const std::vector<std::vector<std::size_t>>& blocks) {
  std::string out = "[";
  for (std::size_t k = 0; k < blocks.size(); ++k) {
    if (k) out += ", ";
    out += "[";
    for (std::size_t i = 0; i < blocks[k].size(); ++i) {
      if (i) out += ", ";
      out += json_string(g.factor(blocks[k][i]).name);
    }
    out += "]";
  }
  return out + "]";
}

std::vector<std::vector<std::size_t>> blocks_from_names(const FactorGraph& g, const json& v,
                                                        const std::string& where) {
  std::vector<std::vector<std::size_t>> out;
  std::vector<char> seen(g.factor_count(), 0);
  for (std::size_t k = 0; k < array_at(v, where).size(); ++k) {
    const std::string bw = where + "[" + std::to_string(k) + "]";
    const json& block = array_at(v[k], bw);
    if (block.empty()) schema_error(bw + ": empty block");
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < block.size(); ++i) {
      const std::string name = string_at(block[i], bw + "[" + std::to_string(i) + "]");
      auto j = g.find_factor(name);
      if (!j) schema_error(bw + ": unknown factor " + json_string(name));
      if (seen[*j]) schema_error(bw + ": factor " + json_string(name) + " appears twice");
      seen[*j] = 1;
      members.push_back(*j);
    }
    std::sort(members.begin(), members.end());
    out.push_back(std::move(members));
  }
  for (std::size_t j = 0; j < g.factor_count(); ++j) {
    if (!seen[j]) schema_error(where + ": factor " + json_string(g.factor(j).name) + " is in no block");
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::string sig9(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", x);
  return buf;
}

std::string opt9(const std::optional<double>& x) { return x ? sig9(*x) : std::string(); }

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out(1);
  bool in_quotes = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (in_quotes) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        out.back() += '"';
        ++i;
      } else if (c == '"') {
        in_quotes = false;
      } else {
        out.back() += c;
      }
    } else if (c == '"') {
      in_quotes = true;
    } else if (c == ',') {
      out.emplace_back();
    } else if (c != '\r') {
      out.back() += c;
    }
  }
  return out;
}

constexpr const char* kReportHeader =
    "level,eps,num_groups,max_group_size,d2,d3,d4,pmax_d2,measured_dcd,measured_pmax,group_sizes";

}  // namespace

std::string format_number(double x) {
  if (!std::isfinite(x)) throw Error(ErrorCode::InvalidArgument, "cannot serialise a non-finite number");
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
  (void)ec;
  return std::string(buf, end);
}

FactorGraph parse_model(std::string_view document, const BuildOptions& options) {
  return graph_from_json(parse_json(document), document, options);
}

std::string write_model(const FactorGraph& g) {
  std::string out;
  append_model_body(out, g);
  return out + "\n}\n";
}

std::string export_tree(const MergeTree& tree) {
  const std::size_t m = tree.leaf_count();
  std::string out = "{\n  \"m\": " + std::to_string(m) + ",\n  \"epsilons\": [";
  const auto& ladder = tree.epsilons();
  for (std::size_t l = 0; l < ladder.size(); ++l) {
    if (l) out += ", ";
    out += format_number(ladder[l]);
  }
  out += "],\n  \"tree\": ";
  auto render = [&](auto&& self, std::size_t node) -> std::string {
    if (tree.is_leaf(node)) return "{\"leaf\": " + std::to_string(node + 1) + "}";
    const Merge& mg = tree.merges()[node - m];
    return "{\"id\": " + std::to_string(node + 1) + ", \"eps\": " + format_number(mg.eps) +
           ", \"children\": [" + self(self, mg.left) + ", " + self(self, mg.right) + "]}";
  };
  const auto roots = tree.roots();
  if (roots.size() == 1) {
    out += render(render, roots.front());
  } else {
    out += "[";
    for (std::size_t r = 0; r < roots.size(); ++r) {
      if (r) out += ", ";
      out += render(render, roots[r]);
    }
    out += "]";
  }
  out += ",\n  \"levels\": [\n";
  for (std::size_t l = 0; l <= tree.level_count(); ++l) {
    const LevelPartition cut = partition_at_level(tree, l);
    out += "    {\"level\": " + std::to_string(l) +
           ", \"eps\": " + format_number(l == 0 ? 0.0 : ladder[l - 1]) + ", \"groups\": [";
    for (std::size_t k = 0; k < cut.groups.size(); ++k) {
      if (k) out += ", ";
      out += "[";
      for (std::size_t i = 0; i < cut.groups[k].size(); ++i) {
        if (i) out += ", ";
        out += std::to_string(cut.groups[k][i] + 1);
      }
      out += "]";
    }
    out += l < tree.level_count() ? "]},\n" : "]}\n";
  }
  return out + "  ]\n}\n";
}

MergeTree parse_tree(std::string_view document) {
  const json doc = parse_json(document);
  const std::size_t m = index_at(field(doc, "m", "document"), "m");
  const json& tree = field(doc, "tree", "document");

  std::map<std::size_t, Merge> by_id;  // internal node id -> merge
  std::vector<char> leaf_seen(m, 0);
  auto walk = [&](auto&& self, const json& node, const std::string& where) -> std::size_t {
    if (!node.is_object()) schema_error(where + ": expected a node object");
    if (node.contains("leaf")) {
      const std::size_t id = index_at(node["leaf"], where + ".leaf");
      if (id == 0 || id > m) schema_error(where + ": leaf " + std::to_string(id) + " outside 1..m");
      if (leaf_seen[id - 1]) schema_error(where + ": leaf " + std::to_string(id) + " repeated");
      leaf_seen[id - 1] = 1;
      return id - 1;
    }
    const std::size_t id = index_at(field(node, "id", where), where + ".id");
    if (id <= m || id >= 2 * m) {
      schema_error(where + ": node id " + std::to_string(id) + " outside m+1..2m-1");
    }
    const double eps = number_at(field(node, "eps", where), where + ".eps");
    const json& children = array_at(field(node, "children", where), where + ".children");
    if (children.size() != 2) schema_error(where + ": a merge node needs two children");
    const std::size_t left = self(self, children[0], where + ".children[0]");
    const std::size_t right = self(self, children[1], where + ".children[1]");
    if (!by_id.emplace(id - 1, Merge{left, right, eps}).second) {
      schema_error(where + ": node id " + std::to_string(id) + " repeated");
    }
    return id - 1;
  };
  if (m > 0) {
    if (tree.is_array()) {
      for (std::size_t r = 0; r < tree.size(); ++r) walk(walk, tree[r], "tree[" + std::to_string(r) + "]");
    } else {
      walk(walk, tree, "tree");
    }
  }
  for (std::size_t f = 0; f < m; ++f) {
    if (!leaf_seen[f]) schema_error("tree: leaf " + std::to_string(f + 1) + " is missing");
  }
  std::vector<Merge> merges;
  for (const auto& [id, mg] : by_id) {
    if (id != m + merges.size()) {
      schema_error("tree: node ids must be consecutive from m+1, missing " +
                   std::to_string(m + merges.size() + 1));
    }
    merges.push_back(mg);
  }
  MergeTree out = [&] {
    try {
      return MergeTree(m, std::move(merges));
    } catch (const Error& e) {
      schema_error(std::string("tree: ") + e.what());
    }
  }();

  if (doc.contains("epsilons")) {
    const json& eps = array_at(doc["epsilons"], "epsilons");
    if (eps.size() != out.level_count()) schema_error("epsilons: length differs from the tree");
    for (std::size_t l = 0; l < eps.size(); ++l) {
      if (number_at(eps[l], "epsilons[" + std::to_string(l) + "]") != out.epsilons()[l]) {
        schema_error("epsilons[" + std::to_string(l) + "]: differs from the tree");
      }
    }
  }
  if (doc.contains("levels")) {
    const json& levels = array_at(doc["levels"], "levels");
    for (std::size_t i = 0; i < levels.size(); ++i) {
      const std::string where = "levels[" + std::to_string(i) + "]";
      const std::size_t l = index_at(field(levels[i], "level", where), where + ".level");
      if (l > out.level_count()) schema_error(where + ": level outside the tree");
      const json& groups = array_at(field(levels[i], "groups", where), where + ".groups");
      std::vector<std::vector<std::size_t>> parsed;
      for (const json& grp : groups) {
        std::vector<std::size_t> members;
        for (const json& id : array_at(grp, where + ".groups")) {
          const std::size_t v = index_at(id, where + ".groups");
          if (v == 0) schema_error(where + ": factor ids are 1-based");
          members.push_back(v - 1);
        }
        parsed.push_back(std::move(members));
      }
      if (parsed != partition_at_level(out, l).groups) {
        schema_error(where + ": groups differ from the tree");
      }
    }
  }
  return out;
}

std::string write_compressed(const CompressedModel& cm) {
  std::string out;
  append_model_body(out, cm.model);
  out += ",\n  \"grouping\": {\"level\": " + std::to_string(cm.level) +
         ", \"eps\": " + format_number(cm.eps) +
         ",\n    \"blocks\": " + name_blocks(cm.model, cm.grouping.blocks) +
         ",\n    \"initial_blocks\": " + name_blocks(cm.model, cm.initial_blocks) + "}\n}\n";
  return out;
}

CompressedModel parse_compressed(std::string_view document, const BuildOptions& options) {
  const json doc = parse_json(document);
  CompressedModel out;
  out.model = graph_from_json(doc, document, options);
  const json& grouping = field(doc, "grouping", "document");
  out.level = index_at(field(grouping, "level", "grouping"), "grouping.level");
  out.eps = number_at(field(grouping, "eps", "grouping"), "grouping.eps");
  out.grouping.blocks = blocks_from_names(out.model, field(grouping, "blocks", "grouping"),
                                          "grouping.blocks");
  if (grouping.contains("initial_blocks")) {
    out.initial_blocks =
        blocks_from_names(out.model, grouping["initial_blocks"], "grouping.initial_blocks");
  } else {
    out.initial_blocks = out.grouping.blocks;
  }
  out.grouping.factor_colour.assign(out.model.factor_count(), 0);
  for (std::size_t k = 0; k < out.grouping.blocks.size(); ++k) {
    const auto& block = out.grouping.blocks[k];
    const Factor& rep = out.model.factor(block.front());
    for (std::size_t j : block) {
      if (out.model.factor(j).table != rep.table) {
        schema_error("grouping.blocks[" + std::to_string(k) + "]: factor " +
                     json_string(out.model.factor(j).name) + " has a different table than " +
                     json_string(rep.name));
      }
      out.grouping.factor_colour[j] = k;
    }
    out.grouping.block_colour.push_back(k);
    out.shared_tables.push_back(rep.table);
  }
  return out;
}

std::string group_size_summary(const std::vector<std::vector<std::size_t>>& groups) {
  std::map<std::size_t, std::size_t, std::greater<>> counts;
  for (const auto& g : groups) ++counts[g.size()];
  std::string out;
  for (const auto& [size, n] : counts) {
    if (!out.empty()) out += ' ';
    out += std::to_string(size) + "(" + std::to_string(n) + ")";
  }
  return out;
}

std::vector<ReportRow> report_rows(const MergeTree& tree, std::size_t m) {
  std::vector<ReportRow> rows;
  for (std::size_t l = 0; l <= tree.level_count(); ++l) {
    const LevelPartition cut = partition_at_level(tree, l);
    ReportRow row;
    row.level = l;
    row.eps = l == 0 ? 0.0 : tree.epsilons()[l - 1];
    row.num_groups = cut.groups.size();
    for (const auto& g : cut.groups) row.max_group_size = std::max(row.max_group_size, g.size());
    row.d2 = dcd_bound_sharp(row.eps, m);
    row.d3 = 2.0 * static_cast<double>(m) * std::log1p(row.eps);
    if (row.eps < 1.0) row.d4 = dcd_bounds_loose(row.eps, m).d4;
    row.pmax_d2 = pmax_bound(row.d2);
    row.group_sizes = group_size_summary(cut.groups);
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_report(std::ostream& out, const std::vector<ReportRow>& rows) {
  out << kReportHeader << '\n';
  for (const ReportRow& r : rows) {
    out << r.level << ',' << sig9(r.eps) << ',' << r.num_groups << ',' << r.max_group_size << ','
        << sig9(r.d2) << ',' << sig9(r.d3) << ',' << opt9(r.d4) << ',' << sig9(r.pmax_d2) << ','
        << opt9(r.measured_dcd) << ',' << opt9(r.measured_pmax) << ',' << csv_field(r.group_sizes)
        << '\n';
  }
}

std::vector<ReportRow> parse_report(std::string_view document) {
  std::istringstream in{std::string(document)};
  std::string line;
  std::getline(in, line);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kReportHeader) schema_error("line 1: unexpected report header");
  std::vector<ReportRow> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto cells = split_csv_line(line);
    const std::string where = "line " + std::to_string(line_no);
    if (cells.size() != 11) schema_error(where + ": expected 11 columns");
    auto num = [&](std::size_t c) {
      try {
        std::size_t used = 0;
        const double v = std::stod(cells[c], &used);
        if (used != cells[c].size()) throw std::invalid_argument("trailing");
        return v;
      } catch (const std::exception&) {
        schema_error(where + ": column " + std::to_string(c + 1) + " is not a number");
      }
    };
    auto opt = [&](std::size_t c) -> std::optional<double> {
      if (cells[c].empty()) return std::nullopt;
      return num(c);
    };
    ReportRow r;
    r.level = static_cast<std::size_t>(num(0));
    r.eps = num(1);
    r.num_groups = static_cast<std::size_t>(num(2));
    r.max_group_size = static_cast<std::size_t>(num(3));
    r.d2 = num(4);
    r.d3 = num(5);
    r.d4 = opt(6);
    r.pmax_d2 = num(7);
    r.measured_dcd = opt(8);
    r.measured_pmax = opt(9);
    r.group_sizes = cells[10];
    rows.push_back(std::move(r));
  }
  return rows;
}

void write_deviation_csv(std::ostream& out, const FactorGraph& g, const DeviationReport& report,
                         const BoundChain& chain) {
  (void)g;
  out << "query_var,evidence,p_original,p_compressed,abs_dev\n";
  for (const QueryDeviation& q : report.queries) {
    std::string evidence;
    for (const auto& [name, value] : q.evidence) {
      if (!evidence.empty()) evidence += ';';
      evidence += name + "=" + value;
    }
    out << csv_field(q.variable + "=" + q.value) << ',' << csv_field(evidence) << ','
        << sig9(q.p) << ',' << sig9(q.p_compressed) << ',' << sig9(q.abs_dev) << '\n';
  }
  auto footer = [&out](const std::string& label, double v) {
    out << label << ",,,," << sig9(v) << '\n';
  };
  footer("measured_dcd", report.dcd);
  footer("measured_pmax", report.pmax);
  out << "measured_pmax_scope,evidence sets of size <= " << report.evidence_budget << ",,,\n";
  footer("pmax_bound_measured_dcd", pmax_bound(report.dcd));
  footer("eps", chain.eps);
  footer("m", static_cast<double>(chain.m));
  footer("d2", chain.d2);
  footer("d3", chain.d3);
  footer("d4", chain.d4);
  footer("pmax_d2", chain.pmax_d2);
  footer("pmax_d3", chain.pmax_d3);
  footer("pmax_d4", chain.pmax_d4);
}

void write_bounds_csv(std::ostream& out, const std::vector<BoundChain>& rows) {
  out << "eps,m,d2,d3,d4,pmax_d2,pmax_d3,pmax_d4\n";
  for (const BoundChain& b : rows) {
    out << sig9(b.eps) << ',' << b.m << ',' << sig9(b.d2) << ',' << sig9(b.d3) << ','
        << sig9(b.d4) << ',' << sig9(b.pmax_d2) << ',' << sig9(b.pmax_d3) << ','
        << sig9(b.pmax_d4) << '\n';
  }
}

}  // namespace hlift
