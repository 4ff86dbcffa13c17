// Shared test data: the running example, its hand-built tree, a truth-table
// evaluator and a seeded random problem generator.

#pragma once

#include <cstdint>
#include <cstdlib>
#include <random>
#include <string>
#include <vector>

#include "dpsynth/dpsynth.hpp"

namespace dpsynth::testing {

inline VarId v(std::uint32_t id) { return VarId(id); }

/// X = {1,2,3}, Y = {4,5,6}.
///   c1 = x1 | y4 | !y5        c2 = !x3 | x2 | !y5
///   c3 = !x1 | x2 | y6        c4 = !x3 | x1 | !y4
///   c5 = x1 | !x2 | x3 | y5
inline SynthesisProblem running_example() {
  SynthesisProblem p;
  p.inputs = {v(1), v(2), v(3)};
  p.outputs = {v(4), v(5), v(6)};
  p.clauses = {Clause::from_dimacs({1, 4, -5}), Clause::from_dimacs({-3, 2, -5}),
               Clause::from_dimacs({-1, 2, 6}), Clause::from_dimacs({-3, 1, -4}),
               Clause::from_dimacs({1, -2, 3, 5})};
  return p;
}

/// Node k of the example tree lives at index k - 1. Leaves 1..5 carry clauses
/// c1..c5; 6 = {y4} over 1,4; 7 = {y5} over 5,2,6; 8 = {x3} over 7;
/// 9 = {y6} over 3; 10 = {x1,x2} over 8,9.
inline GradedProjectJoinTree example_tree() {
  GradedProjectJoinTree t;
  for (std::size_t i = 0; i < 5; ++i) t.nodes.push_back(PjNode::make_leaf(i));
  t.nodes.push_back(PjNode::make_internal({v(4)}, {0, 3}, Grade::Y));
  t.nodes.push_back(PjNode::make_internal({v(5)}, {4, 1, 5}, Grade::Y));
  t.nodes.push_back(PjNode::make_internal({v(3)}, {6}, Grade::X));
  t.nodes.push_back(PjNode::make_internal({v(6)}, {2}, Grade::Y));
  t.nodes.push_back(PjNode::make_internal({v(1), v(2)}, {7, 8}, Grade::X));
  t.root = 9;
  return t;
}

constexpr NodeId node_of(std::size_t k) { return k - 1; }

// ---------------------------------------------------------------------------
// Truth tables over a fixed variable list; bit i of a row is vars[i].

struct Table {
  std::vector<VarId> vars;
  std::vector<std::uint8_t> bits; // size 2^|vars|

  [[nodiscard]] std::size_t index(VarId x) const {
    for (std::size_t i = 0; i < vars.size(); ++i)
      if (vars[i] == x) return i;
    std::abort();
  }
  [[nodiscard]] Assignment row(std::uint64_t r) const {
    Assignment a;
    for (std::size_t i = 0; i < vars.size(); ++i) a[vars[i]] = (r >> i) & 1;
    return a;
  }
};

inline Table table_const(const std::vector<VarId> &vars, bool b) {
  return Table{vars, std::vector<std::uint8_t>(std::size_t{1} << vars.size(), b)};
}

inline Table table_clause(const std::vector<VarId> &vars, const Clause &c) {
  Table t = table_const(vars, false);
  for (std::uint64_t r = 0; r < t.bits.size(); ++r)
    for (auto l : c.literals)
      if (((r >> t.index(l.var)) & 1) != static_cast<std::uint64_t>(l.negated)) t.bits[r] = 1;
  return t;
}

inline Table table_and(Table a, const Table &b) {
  for (std::size_t r = 0; r < a.bits.size(); ++r) a.bits[r] &= b.bits[r];
  return a;
}

inline Table table_exists(const Table &a, VarId x) {
  const std::uint64_t mask = std::uint64_t{1} << a.index(x);
  Table out = a;
  for (std::uint64_t r = 0; r < a.bits.size(); ++r)
    out.bits[r] = a.bits[r & ~mask] | a.bits[r | mask];
  return out;
}

/// Table of f over `t.vars`.
inline Table table_of(const BddManager &m, const Bdd &f, const std::vector<VarId> &vars) {
  Table t = table_const(vars, false);
  for (std::uint64_t r = 0; r < t.bits.size(); ++r) t.bits[r] = m.eval(f, t.row(r));
  return t;
}

struct TableValuation {
  std::vector<Table> pre, post; // by node id; unreachable nodes stay empty
};

/// Pre/post valuations of every reachable node, computed on truth tables.
inline TableValuation table_valuations(const SynthesisProblem &p, const GradedProjectJoinTree &t) {
  const auto vars = p.variables();
  TableValuation out;
  out.pre.resize(t.nodes.size());
  out.post.resize(t.nodes.size());
  for (NodeId n : t.postorder()) {
    const auto &nd = t[n];
    if (nd.leaf) {
      out.pre[n] = out.post[n] = table_clause(vars, p.clauses[nd.clause]);
      continue;
    }
    Table pre = table_const(vars, true);
    for (NodeId c : nd.children) pre = table_and(pre, out.post[c]);
    Table post = pre;
    for (auto x : nd.label) post = table_exists(post, x);
    out.pre[n] = std::move(pre);
    out.post[n] = std::move(post);
  }
  return out;
}

/// Inputs (bitmask over p.inputs) for which some output assignment satisfies phi.
inline std::vector<bool> realizable_inputs(const SynthesisProblem &p) {
  const auto vars = p.variables();
  Table phi = table_const(vars, true);
  for (const auto &c : p.clauses) phi = table_and(phi, table_clause(vars, c));
  const std::size_t nx = p.inputs.size();
  std::vector<bool> out(std::size_t{1} << nx, false);
  for (std::uint64_t r = 0; r < phi.bits.size(); ++r)
    if (phi.bits[r]) out[r & ((std::uint64_t{1} << nx) - 1)] = true;
  return out;
}

inline Assignment input_row(const SynthesisProblem &p, std::uint64_t x) {
  Assignment a;
  for (std::size_t i = 0; i < p.inputs.size(); ++i) a[p.inputs[i]] = (x >> i) & 1;
  return a;
}

// ---------------------------------------------------------------------------
// Random instances

inline std::uint64_t test_seed(std::uint64_t fallback = 20240611) {
  if (const char *s = std::getenv("DPSYNTH_SEED")) return std::strtoull(s, nullptr, 10);
  return fallback;
}

struct RandomSpec {
  std::size_t min_x = 1, max_x = 5;
  std::size_t min_y = 1, max_y = 5;
  std::size_t min_clauses = 1, max_clauses = 12;
  std::size_t max_width = 4; // literals per clause
};

inline SynthesisProblem random_problem(std::mt19937_64 &rng, const RandomSpec &s = {}) {
  auto pick = [&](std::size_t lo, std::size_t hi) {
    return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
  };
  const std::size_t nx = pick(s.min_x, s.max_x), ny = pick(s.min_y, s.max_y);
  const std::size_t nv = nx + ny;

  // Interleave the ids so that inputs and outputs are not always contiguous.
  std::vector<std::uint32_t> ids(nv);
  for (std::size_t i = 0; i < nv; ++i) ids[i] = static_cast<std::uint32_t>(i + 1);
  std::shuffle(ids.begin(), ids.end(), rng);
  SynthesisProblem p;
  for (std::size_t i = 0; i < nv; ++i) (i < nx ? p.inputs : p.outputs).push_back(VarId(ids[i]));
  std::sort(p.inputs.begin(), p.inputs.end());
  std::sort(p.outputs.begin(), p.outputs.end());

  const std::size_t nc = pick(s.min_clauses, s.max_clauses);
  for (std::size_t c = 0; c < nc; ++c) {
    const std::size_t w = pick(1, std::min(s.max_width, nv));
    std::vector<std::uint32_t> vs(ids);
    std::shuffle(vs.begin(), vs.end(), rng);
    std::vector<Literal> lits;
    for (std::size_t i = 0; i < w; ++i) lits.push_back(Literal{VarId(vs[i]), pick(0, 1) == 1});
    p.clauses.push_back(Clause::from_literals(std::move(lits)));
  }
  return p;
}

/// A bucket order with the used outputs shuffled, then the used inputs shuffled.
inline std::vector<VarId> random_bucket_order(const SynthesisProblem &p, std::mt19937_64 &rng) {
  std::vector<VarId> ys, xs;
  for (auto x : p.used_variables()) (p.is_output(x) ? ys : xs).push_back(x);
  std::shuffle(ys.begin(), ys.end(), rng);
  std::shuffle(xs.begin(), xs.end(), rng);
  ys.insert(ys.end(), xs.begin(), xs.end());
  return ys;
}

} // namespace dpsynth::testing
