#include "hlift/inference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <set>

#include "hlift/error.hpp"
#include "parallel.hpp"

namespace hlift {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr std::uint64_t kChunk = std::uint64_t{1} << 14;

std::string quote(std::string_view s) { return "\"" + std::string(s) + "\""; }

void check_budget(const FactorGraph& g, const InferenceOptions& options) {
  const std::uint64_t states = g.state_count();
  if (states > options.enum_budget) {
    throw Error(ErrorCode::StateSpaceTooLarge,
                "model has " + (states == std::numeric_limits<std::uint64_t>::max()
                                    ? std::string("more than 2^64")
                                    : std::to_string(states)) +
                    " joint states, budget is " + std::to_string(options.enum_budget));
  }
}

std::vector<std::vector<double>> log_tables(const FactorGraph& g) {
  std::vector<std::vector<double>> out;
  out.reserve(g.factor_count());
  for (const Factor& f : g.factors()) {
    std::vector<double> t(f.table.size());
    std::transform(f.table.begin(), f.table.end(), t.begin(), [](double x) { return std::log(x); });
    out.push_back(std::move(t));
  }
  return out;
}

// Online log-sum-exp.
struct LogSum {
  double max = kNegInf;
  double sum = 0.0;

  void add(double l) {
    if (l > max) {
      sum = sum * std::exp(max - l) + 1.0;
      max = l;
    } else {
      sum += std::exp(l - max);
    }
  }
  void merge(const LogSum& o) {
    if (o.max == kNegInf) return;
    if (o.max > max) {
      sum = sum * std::exp(max - o.max) + o.sum;
      max = o.max;
    } else {
      sum += o.sum * std::exp(o.max - max);
    }
  }
  double value() const { return max + std::log(sum); }
};

// Visits joint states in mixed radix (last variable fastest) while keeping
// the table row of every factor of one or more graphs over the same
// variables up to date.
class StateWalker {
 public:
  explicit StateWalker(std::vector<const FactorGraph*> graphs) : graphs_(std::move(graphs)) {
    const FactorGraph& g0 = *graphs_.front();
    const std::size_t n = g0.variable_count();
    radix_.resize(n);
    for (std::size_t v = 0; v < n; ++v) radix_[v] = g0.variable(v).size();
    state_.assign(n, 0);
    touches_.resize(n);
    rows_.resize(graphs_.size());
    for (std::size_t gi = 0; gi < graphs_.size(); ++gi) {
      const FactorGraph& g = *graphs_[gi];
      rows_[gi].assign(g.factor_count(), 0);
      for (std::size_t j = 0; j < g.factor_count(); ++j) {
        const Factor& f = g.factor(j);
        for (std::size_t a = 0; a < f.args.size(); ++a) {
          touches_[f.args[a]].push_back({gi, j, f.strides[a]});
        }
      }
    }
  }

  void seek(std::uint64_t index) {
    for (std::size_t v = state_.size(); v-- > 0;) {
      state_[v] = static_cast<std::size_t>(index % radix_[v]);
      index /= radix_[v];
    }
    for (std::size_t gi = 0; gi < graphs_.size(); ++gi) {
      const FactorGraph& g = *graphs_[gi];
      for (std::size_t j = 0; j < g.factor_count(); ++j) rows_[gi][j] = row_index(g.factor(j), state_);
    }
  }

  void next() {
    for (std::size_t v = state_.size(); v-- > 0;) {
      if (++state_[v] < radix_[v]) {
        for (const Touch& t : touches_[v]) rows_[t.graph][t.factor] += t.stride;
        return;
      }
      for (const Touch& t : touches_[v]) rows_[t.graph][t.factor] -= t.stride * (radix_[v] - 1);
      state_[v] = 0;
    }
  }

  const State& state() const noexcept { return state_; }
  const std::vector<std::size_t>& rows(std::size_t graph) const noexcept { return rows_[graph]; }

 private:
  struct Touch {
    std::size_t graph;
    std::size_t factor;
    std::size_t stride;
  };
  std::vector<const FactorGraph*> graphs_;
  std::vector<std::size_t> radix_;
  State state_;
  std::vector<std::vector<Touch>> touches_;
  std::vector<std::vector<std::size_t>> rows_;
};

double sum_rows(const std::vector<std::vector<double>>& logs, const std::vector<std::size_t>& rows) {
  double acc = 0.0;
  for (std::size_t j = 0; j < logs.size(); ++j) acc += logs[j][rows[j]];
  return acc;
}

// Runs `body(walker, count)` over fixed-size chunks of the state space. The
// chunking does not depend on the thread count, so per-chunk results combined
// in chunk order are reproducible.
template <class PerChunk, class Body>
std::vector<PerChunk> over_chunks(std::vector<const FactorGraph*> graphs, int threads, Body body) {
  const std::uint64_t total = graphs.front()->state_count();
  const std::uint64_t chunks = (total + kChunk - 1) / kChunk;
  std::vector<PerChunk> out(chunks);
#pragma omp parallel for schedule(dynamic, 1) num_threads(detail::thread_count(threads))
  for (long long c = 0; c < static_cast<long long>(chunks); ++c) {
    StateWalker walker(graphs);
    const std::uint64_t begin = static_cast<std::uint64_t>(c) * kChunk;
    walker.seek(begin);
    out[static_cast<std::size_t>(c)] = body(walker, std::min(kChunk, total - begin));
  }
  return out;
}

double log_partition_enumeration(const FactorGraph& g, const InferenceOptions& options) {
  check_budget(g, options);
  const auto logs = log_tables(g);
  auto parts = over_chunks<LogSum>({&g}, options.threads, [&](StateWalker& w, std::uint64_t count) {
    LogSum acc;
    for (std::uint64_t s = 0; s < count; ++s, w.next()) acc.add(sum_rows(logs, w.rows(0)));
    return acc;
  });
  LogSum total;
  for (const auto& p : parts) total.merge(p);
  return total.value();
}

// ---- evidence -------------------------------------------------------------

std::vector<std::optional<std::size_t>> resolve_evidence(const FactorGraph& g,
                                                         const Assignment& evidence) {
  std::vector<std::optional<std::size_t>> out(g.variable_count());
  for (const auto& [name, label] : evidence) {
    const std::size_t v = g.variable_index(name);
    auto idx = g.variable(v).value_index(label);
    if (!idx) {
      throw Error(ErrorCode::MissingValue,
                  "variable " + quote(name) + " has no value " + quote(label));
    }
    out[v] = *idx;
  }
  return out;
}

// ---- variable elimination -------------------------------------------------

struct Table {
  std::vector<std::size_t> vars;  // scope, in layout order (last fastest)
  std::vector<std::size_t> cards;
  std::vector<double> values;
  double log_scale = 0.0;  // represented potential = values * exp(log_scale)
};

// Iterates every assignment of `cards` (last digit fastest), keeping one
// linear index per target; strides[t][d] is target t's stride for digit d.
template <class Fn>
void odometer(const std::vector<std::size_t>& cards,
              const std::vector<std::vector<std::size_t>>& strides, Fn&& fn) {
  std::uint64_t total = 1;
  for (std::size_t c : cards) total *= c;
  std::vector<std::size_t> digits(cards.size(), 0);
  std::vector<std::size_t> idx(strides.size(), 0);
  for (std::uint64_t count = 0; count < total; ++count) {
    fn(idx);
    for (std::size_t d = cards.size(); d-- > 0;) {
      if (++digits[d] < cards[d]) {
        for (std::size_t t = 0; t < idx.size(); ++t) idx[t] += strides[t][d];
        break;
      }
      for (std::size_t t = 0; t < idx.size(); ++t) idx[t] -= strides[t][d] * (cards[d] - 1);
      digits[d] = 0;
    }
  }
}

std::vector<std::size_t> strides_in(const Table& t, const std::vector<std::size_t>& vars) {
  std::vector<std::size_t> own(t.vars.size(), 1);
  for (std::size_t a = t.vars.size(); a-- > 1;) own[a - 1] = own[a] * t.cards[a];
  std::vector<std::size_t> out(vars.size(), 0);
  for (std::size_t d = 0; d < vars.size(); ++d) {
    auto it = std::find(t.vars.begin(), t.vars.end(), vars[d]);
    if (it != t.vars.end()) out[d] = own[static_cast<std::size_t>(it - t.vars.begin())];
  }
  return out;
}

Table slice_factor(const FactorGraph& g, const Factor& f,
                   const std::vector<std::optional<std::size_t>>& evidence) {
  Table t;
  std::size_t base = 0;
  std::vector<std::size_t> kept_strides;
  for (std::size_t a = 0; a < f.args.size(); ++a) {
    const std::size_t v = f.args[a];
    if (evidence[v]) {
      base += *evidence[v] * f.strides[a];
    } else {
      t.vars.push_back(v);
      t.cards.push_back(g.variable(v).size());
      kept_strides.push_back(f.strides[a]);
    }
  }
  std::size_t size = 1;
  for (std::size_t c : t.cards) size *= c;
  t.values.resize(size);
  std::vector<std::size_t> out_strides(t.vars.size(), 1);
  for (std::size_t a = t.vars.size(); a-- > 1;) out_strides[a - 1] = out_strides[a] * t.cards[a];
  odometer(t.cards, {kept_strides, out_strides},
           [&](const std::vector<std::size_t>& idx) { t.values[idx[1]] = f.table[base + idx[0]]; });
  return t;
}

// Product of `inputs`, summing out `eliminate` when it is set. The result is
// rescaled so that its largest entry is 1.
Table combine(const std::vector<const Table*>& inputs, std::optional<std::size_t> eliminate) {
  std::set<std::size_t> scope;
  for (const Table* t : inputs) scope.insert(t->vars.begin(), t->vars.end());
  std::vector<std::size_t> all(scope.begin(), scope.end());
  std::vector<std::size_t> all_cards;
  for (std::size_t v : all) {
    for (const Table* t : inputs) {
      auto it = std::find(t->vars.begin(), t->vars.end(), v);
      if (it != t->vars.end()) {
        all_cards.push_back(t->cards[static_cast<std::size_t>(it - t->vars.begin())]);
        break;
      }
    }
  }
  Table out;
  for (std::size_t d = 0; d < all.size(); ++d) {
    if (eliminate && all[d] == *eliminate) continue;
    out.vars.push_back(all[d]);
    out.cards.push_back(all_cards[d]);
  }
  std::size_t size = 1;
  for (std::size_t c : out.cards) size *= c;
  out.values.assign(size, 0.0);

  std::vector<std::vector<std::size_t>> strides;
  for (const Table* t : inputs) {
    strides.push_back(strides_in(*t, all));
    out.log_scale += t->log_scale;
  }
  strides.push_back(strides_in(out, all));
  const std::size_t result_slot = inputs.size();
  odometer(all_cards, strides, [&](const std::vector<std::size_t>& idx) {
    double p = 1.0;
    for (std::size_t t = 0; t < inputs.size(); ++t) p *= inputs[t]->values[idx[t]];
    out.values[idx[result_slot]] += p;
  });
  const double mx = *std::max_element(out.values.begin(), out.values.end());
  if (mx > 0.0) {
    for (double& x : out.values) x /= mx;
    out.log_scale += std::log(mx);
  }
  return out;
}

// Eliminates every variable in `targets` with a greedy min-degree order
// (ties: smallest index) and returns the remaining tables.
std::vector<Table> eliminate(std::vector<Table> tables, std::set<std::size_t> targets) {
  while (!targets.empty()) {
    std::size_t pick = 0;
    std::size_t best_degree = std::numeric_limits<std::size_t>::max();
    for (std::size_t v : targets) {
      std::set<std::size_t> nb;
      for (const Table& t : tables) {
        if (std::find(t.vars.begin(), t.vars.end(), v) != t.vars.end()) {
          nb.insert(t.vars.begin(), t.vars.end());
        }
      }
      const std::size_t degree = nb.empty() ? 0 : nb.size() - 1;
      if (degree < best_degree) {
        best_degree = degree;
        pick = v;
      }
    }
    targets.erase(pick);
    std::vector<const Table*> touching;
    std::vector<Table> rest;
    std::vector<Table> bucket;
    for (Table& t : tables) {
      if (std::find(t.vars.begin(), t.vars.end(), pick) != t.vars.end()) {
        bucket.push_back(std::move(t));
      } else {
        rest.push_back(std::move(t));
      }
    }
    if (bucket.empty()) continue;
    for (const Table& t : bucket) touching.push_back(&t);
    rest.push_back(combine(touching, pick));
    tables = std::move(rest);
  }
  return tables;
}

std::vector<Table> sliced_tables(const FactorGraph& g,
                                 const std::vector<std::optional<std::size_t>>& evidence) {
  std::vector<Table> tables;
  tables.reserve(g.factor_count());
  for (const Factor& f : g.factors()) tables.push_back(slice_factor(g, f, evidence));
  return tables;
}

double log_partition_elimination(const FactorGraph& g) {
  std::set<std::size_t> all;
  for (std::size_t v = 0; v < g.variable_count(); ++v) all.insert(v);
  std::vector<Table> rest = eliminate(sliced_tables(g, resolve_evidence(g, {})), all);
  std::vector<const Table*> ptrs;
  for (const Table& t : rest) ptrs.push_back(&t);
  Table scalar = combine(ptrs, std::nullopt);
  return scalar.log_scale + std::log(scalar.values.at(0));
}

std::vector<double> normalise(std::vector<double> weights, std::string_view q) {
  double total = 0.0;
  for (double w : weights) total += w;
  if (!(total > 0.0)) {
    throw Error(ErrorCode::InconsistentEvidence,
                "evidence has zero probability mass when querying " + quote(q));
  }
  for (double& w : weights) w /= total;
  return weights;
}

std::vector<double> from_logs(const std::vector<double>& logs, std::string_view q) {
  const double mx = *std::max_element(logs.begin(), logs.end());
  if (mx == kNegInf) return normalise(std::vector<double>(logs.size(), 0.0), q);
  std::vector<double> w(logs.size());
  for (std::size_t k = 0; k < logs.size(); ++k) w[k] = std::exp(logs[k] - mx);
  return normalise(std::move(w), q);
}

// ---- lifted star marginals -------------------------------------------------

LiftedResult star_blocks(const FactorGraph& g, std::string_view q, const Assignment& evidence,
                         const std::vector<std::vector<std::size_t>>& blocks, bool lifted) {
  const std::size_t qv = g.variable_index(q);
  const auto ev = resolve_evidence(g, evidence);
  if (ev[qv]) {
    throw Error(ErrorCode::InvalidArgument, "query variable " + quote(q) + " is observed");
  }
  auto not_liftable = [&](const std::string& why) {
    return Error(ErrorCode::PatternNotLiftable, "query " + quote(q) + ": " + why);
  };

  // every factor connected to q must be a spoke q - leaf(s)
  std::vector<char> in_component(g.factor_count(), 0);
  for (std::size_t j : g.neighbours(qv)) in_component[j] = 1;
  std::vector<std::size_t> q_position(g.factor_count(), 0);
  for (std::size_t j = 0; j < g.factor_count(); ++j) {
    if (!in_component[j]) continue;
    const Factor& f = g.factor(j);
    for (std::size_t a = 0; a < f.args.size(); ++a) {
      const std::size_t v = f.args[a];
      if (v == qv) {
        q_position[j] = a;
        continue;
      }
      if (g.neighbours(v).size() != 1) {
        throw not_liftable("variable " + quote(g.variable(v).name) + " in factor " +
                           quote(f.name) + " is shared with another factor");
      }
      if (ev[v]) {
        throw not_liftable("leaf variable " + quote(g.variable(v).name) + " is observed");
      }
    }
  }

  const std::size_t range = g.variable(qv).size();
  std::vector<double> logs(range, 0.0);
  std::size_t ops = 0;
  for (const auto& block : blocks) {
    std::vector<std::size_t> members;
    for (std::size_t j : block) {
      if (in_component[j]) members.push_back(j);
    }
    if (members.empty()) continue;
    if (members.size() != block.size()) {
      throw not_liftable("block of factor " + quote(g.factor(members.front()).name) +
                         " spans several components");
    }
    const Factor& rep = g.factor(members.front());
    for (std::size_t j : members) {
      const Factor& f = g.factor(j);
      if (q_position[j] != q_position[members.front()] || f.arg_sizes != rep.arg_sizes ||
          f.table != rep.table) {
        throw not_liftable("factors " + quote(rep.name) + " and " + quote(f.name) +
                           " share a block but are not identical spokes");
      }
    }
    const std::size_t stride = rep.strides[q_position[members.front()]];
    const std::size_t size = rep.arg_sizes[q_position[members.front()]];
    const auto exponent = static_cast<double>(members.size());
    for (std::size_t value = 0; value < range; ++value) {
      double s = 0.0;
      for (std::size_t row = 0; row < rep.dimension(); ++row) {
        if ((row / stride) % size != value) continue;
        s += rep.table[row];
        ++ops;
      }
      logs[value] += exponent * std::log(s);
    }
  }
  (void)lifted;

  LiftedResult out;
  out.result.variable = qv;
  out.result.variable_name = std::string(q);
  out.result.evidence = evidence;
  out.result.distribution = from_logs(logs, q);
  out.summation_ops = ops;
  return out;
}

}  // namespace

double log_partition_function(const FactorGraph& g, Method method,
                              const InferenceOptions& options) {
  return method == Method::Enumeration ? log_partition_enumeration(g, options)
                                       : log_partition_elimination(g);
}

double partition_function(const FactorGraph& g, Method method, const InferenceOptions& options) {
  return std::exp(log_partition_function(g, method, options));
}

QueryResult query(const FactorGraph& g, std::string_view q, const Assignment& evidence,
                  Method method, const InferenceOptions& options) {
  const std::size_t qv = g.variable_index(q);
  const auto ev = resolve_evidence(g, evidence);
  if (ev[qv]) {
    throw Error(ErrorCode::InvalidArgument, "query variable " + quote(q) + " is observed");
  }
  QueryResult out;
  out.variable = qv;
  out.variable_name = std::string(q);
  out.evidence = evidence;

  if (method == Method::Enumeration) {
    check_budget(g, options);
    const auto logs = log_tables(g);
    const std::size_t range = g.variable(qv).size();
    auto parts = over_chunks<std::vector<LogSum>>(
        {&g}, options.threads, [&](StateWalker& w, std::uint64_t count) {
          std::vector<LogSum> acc(range);
          for (std::uint64_t s = 0; s < count; ++s, w.next()) {
            const State& st = w.state();
            bool consistent = true;
            for (std::size_t v = 0; v < st.size() && consistent; ++v) {
              consistent = !ev[v] || *ev[v] == st[v];
            }
            if (consistent) acc[st[qv]].add(sum_rows(logs, w.rows(0)));
          }
          return acc;
        });
    std::vector<LogSum> total(range);
    for (const auto& p : parts) {
      for (std::size_t k = 0; k < range; ++k) total[k].merge(p[k]);
    }
    std::vector<double> per_value(range);
    for (std::size_t k = 0; k < range; ++k) {
      per_value[k] = total[k].max == kNegInf ? kNegInf : total[k].value();
    }
    out.distribution = from_logs(per_value, q);
    return out;
  }

  std::set<std::size_t> targets;
  for (std::size_t v = 0; v < g.variable_count(); ++v) {
    if (v != qv && !ev[v]) targets.insert(v);
  }
  std::vector<Table> rest = eliminate(sliced_tables(g, ev), targets);
  std::vector<const Table*> ptrs;
  for (const Table& t : rest) ptrs.push_back(&t);
  Table marginal = combine(ptrs, std::nullopt);
  out.distribution = normalise(marginal.values, q);
  return out;
}

double dcd_distance(const FactorGraph& g, const FactorGraph& g2, const InferenceOptions& options) {
  if (!g.same_variables(g2)) {
    throw Error(ErrorCode::StructureMismatch, "models differ in their variables or ranges");
  }
  check_budget(g, options);
  struct Extremes {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
  };

  bool same_factors = g.factor_count() == g2.factor_count();
  for (std::size_t j = 0; same_factors && j < g.factor_count(); ++j) {
    same_factors = g.factor(j).args == g2.factor(j).args;
  }
  std::vector<Extremes> parts;
  if (same_factors) {
    // per-factor log ratios; exactly zero wherever the tables agree
    auto ratios = log_tables(g2);
    const auto base = log_tables(g);
    for (std::size_t j = 0; j < ratios.size(); ++j) {
      for (std::size_t r = 0; r < ratios[j].size(); ++r) {
        ratios[j][r] = g2.factor(j).table[r] == g.factor(j).table[r] ? 0.0
                                                                     : ratios[j][r] - base[j][r];
      }
    }
    parts = over_chunks<Extremes>({&g}, options.threads, [&](StateWalker& w, std::uint64_t count) {
      Extremes e;
      for (std::uint64_t s = 0; s < count; ++s, w.next()) {
        const double d = sum_rows(ratios, w.rows(0));
        e.lo = std::min(e.lo, d);
        e.hi = std::max(e.hi, d);
      }
      return e;
    });
  } else {
    const auto l1 = log_tables(g);
    const auto l2 = log_tables(g2);
    parts = over_chunks<Extremes>({&g, &g2}, options.threads,
                                  [&](StateWalker& w, std::uint64_t count) {
                                    Extremes e;
                                    for (std::uint64_t s = 0; s < count; ++s, w.next()) {
                                      const double d = sum_rows(l2, w.rows(1)) -
                                                       sum_rows(l1, w.rows(0));
                                      e.lo = std::min(e.lo, d);
                                      e.hi = std::max(e.hi, d);
                                    }
                                    return e;
                                  });
  }
  Extremes total;
  for (const auto& e : parts) {
    total.lo = std::min(total.lo, e.lo);
    total.hi = std::max(total.hi, e.hi);
  }
  return total.hi - total.lo;
}

DeviationReport max_query_deviation(const FactorGraph& g, const FactorGraph& g2,
                                    std::size_t evidence_budget,
                                    const InferenceOptions& options) {
  DeviationReport report;
  report.evidence_budget = evidence_budget;
  report.dcd = dcd_distance(g, g2, options);
  const double z1 = log_partition_enumeration(g, options);
  const double z2 = log_partition_enumeration(g2, options);
  const std::size_t n = g.variable_count();
  const std::size_t k = std::min(evidence_budget, n == 0 ? 0 : n - 1);

  // every evidence set of size <= k, in lexicographic order per size
  std::vector<std::vector<std::size_t>> sets{{}};
  for (std::size_t size = 1; size <= k; ++size) {
    std::vector<std::size_t> pick(size);
    for (std::size_t i = 0; i < size; ++i) pick[i] = i;
    for (;;) {
      sets.push_back(pick);
      std::size_t i = size;
      while (i-- > 0 && pick[i] == n - size + i) {
      }
      if (i == static_cast<std::size_t>(-1)) break;
      ++pick[i];
      for (std::size_t t = i + 1; t < size; ++t) pick[t] = pick[t - 1] + 1;
    }
  }

  struct Slot {
    std::size_t set;
    std::size_t q;
    std::size_t offset;  // into the accumulators
  };
  std::vector<Slot> slots;
  std::size_t cells = 0;
  for (std::size_t s = 0; s < sets.size(); ++s) {
    std::size_t ev_states = 1;
    for (std::size_t v : sets[s]) ev_states *= g.variable(v).size();
    for (std::size_t q = 0; q < n; ++q) {
      if (std::find(sets[s].begin(), sets[s].end(), q) != sets[s].end()) continue;
      slots.push_back({s, q, cells});
      cells += ev_states * g.variable(q).size();
    }
  }
  std::vector<double> acc1(cells, 0.0);
  std::vector<double> acc2(cells, 0.0);

  const auto l1 = log_tables(g);
  const auto l2 = log_tables(g2);
  StateWalker walker({&g, &g2});
  walker.seek(0);
  const std::uint64_t total = g.state_count();
  std::vector<std::size_t> ev_index(sets.size());
  for (std::uint64_t s = 0; s < total; ++s, walker.next()) {
    const State& st = walker.state();
    const double p1 = std::exp(sum_rows(l1, walker.rows(0)) - z1);
    const double p2 = std::exp(sum_rows(l2, walker.rows(1)) - z2);
    for (std::size_t e = 0; e < sets.size(); ++e) {
      std::size_t idx = 0;
      for (std::size_t v : sets[e]) idx = idx * g.variable(v).size() + st[v];
      ev_index[e] = idx;
    }
    for (const Slot& slot : slots) {
      const std::size_t r = g.variable(slot.q).size();
      const std::size_t cell = slot.offset + ev_index[slot.set] * r + st[slot.q];
      acc1[cell] += p1;
      acc2[cell] += p2;
    }
  }

  for (const Slot& slot : slots) {
    const auto& set = sets[slot.set];
    const RandomVariable& qvar = g.variable(slot.q);
    std::size_t ev_states = 1;
    for (std::size_t v : set) ev_states *= g.variable(v).size();
    for (std::size_t e = 0; e < ev_states; ++e) {
      Assignment evidence;
      std::size_t rem = e;
      for (std::size_t i = set.size(); i-- > 0;) {
        const RandomVariable& ev = g.variable(set[i]);
        evidence.emplace(ev.name, ev.range[rem % ev.size()]);
        rem /= ev.size();
      }
      const double* c1 = &acc1[slot.offset + e * qvar.size()];
      const double* c2 = &acc2[slot.offset + e * qvar.size()];
      double m1 = 0.0;
      double m2 = 0.0;
      for (std::size_t v = 0; v < qvar.size(); ++v) {
        m1 += c1[v];
        m2 += c2[v];
      }
      for (std::size_t v = 0; v < qvar.size(); ++v) {
        QueryDeviation dev{qvar.name, qvar.range[v], evidence, c1[v] / m1, c2[v] / m2, 0.0};
        dev.abs_dev = std::abs(dev.p - dev.p_compressed);
        if (report.queries.empty() || dev.abs_dev > report.pmax) {
          report.pmax = dev.abs_dev;
          report.argmax = report.queries.size();
        }
        report.queries.push_back(std::move(dev));
      }
    }
  }
  return report;
}

LiftedResult lifted_marginal(const CompressedModel& cm, std::string_view q,
                             const Assignment& evidence) {
  return star_blocks(cm.model, q, evidence, cm.grouping.blocks, true);
}

LiftedResult star_marginal(const FactorGraph& g, std::string_view q, const Assignment& evidence) {
  std::vector<std::vector<std::size_t>> singletons(g.factor_count());
  for (std::size_t j = 0; j < g.factor_count(); ++j) singletons[j] = {j};
  return star_blocks(g, q, evidence, singletons, false);
}

}  // namespace hlift
