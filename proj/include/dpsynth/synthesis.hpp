/// @file  synthesis.hpp
/// @brief Witness construction: monolithic self-substitution chains, top-down
///        synthesis over a graded tree, and the factored early-quantification
///        baseline

#pragma once

#include <algorithm>
#include <map>
#include <set>
#include <span>
#include <vector>

#include "dpsynth/bdd.hpp"
#include "dpsynth/cnf.hpp"
#include "dpsynth/planner.hpp"
#include "dpsynth/realizability.hpp"

namespace dpsynth {

struct WitnessMap {
  std::map<VarId, Bdd> witnesses;
  std::vector<VarId> synthesis_order;

  void put(VarId y, Bdd w) {
    if (witnesses.insert_or_assign(y, w).second) synthesis_order.push_back(y);
  }
  [[nodiscard]] const Bdd &at(VarId y) const { return witnesses.at(y); }
  [[nodiscard]] std::size_t size() const { return witnesses.size(); }
};

/// g = B[y := 1]. Wherever (exists y. B) holds, B holds with y := g.
inline Bdd witness_single(BddManager &m, const Bdd &b, VarId y) { return m.restrict(b, y, true); }

struct SolveEqnChain {
  std::vector<Bdd> quantified; // B_0 .. B_k, B_k the input, B_{i-1} = exists y_i. B_i
  std::vector<Bdd> primed;     // B'_1 .. B'_k
};

struct SolveEqnResult {
  std::vector<std::pair<VarId, Bdd>> witnesses; // in `ys` order
  SolveEqnChain chain;
};

/// Quantifies ys inside-out (last first), then builds witnesses outside-in:
/// g_1 = B_1[y_1 := 1], g_i = B'_i[y_i := 1] with B'_i = B_i[y_1 := g_1]..[y_{i-1} := g_{i-1}].
inline SolveEqnResult solve_eqn(BddManager &m, const Bdd &b, std::span<const VarId> ys) {
  const std::size_t k = ys.size();
  SolveEqnResult r;
  r.chain.quantified.assign(k + 1, b);
  for (std::size_t i = k; i > 0; --i)
    r.chain.quantified[i - 1] = m.exists(r.chain.quantified[i], {ys[i - 1]});

  for (std::size_t i = 1; i <= k; ++i) {
    Bdd primed = r.chain.quantified[i];
    for (std::size_t j = 0; j + 1 < i; ++j) primed = m.compose(primed, ys[j], r.witnesses[j].second);
    r.chain.primed.push_back(primed);
    r.witnesses.emplace_back(ys[i - 1], witness_single(m, primed, ys[i - 1]));
  }
  return r;
}

/// What dp_synth saw at a node just before solving it.
struct SynthStep {
  NodeId node;
  std::vector<VarId> label;
  std::vector<VarId> pre_support;
};

/// Top-down synthesis over the Y-grade nodes, XLeaves first and then layer by
/// layer. Each node's witnesses come from solve_eqn on its pre-valuation, and
/// are then substituted into the pre-valuations of all its Y-grade
/// descendants. Outputs not in the tree get the constant TRUE.
inline WitnessMap dp_synth(BddManager &m, const SynthesisProblem &p,
                           const GradedProjectJoinTree &t, const RealizabilityOutcome &outcome,
                           std::vector<SynthStep> *trace = nullptr) {
  if (outcome.verdict == Verdict::Nullary) throw NotRealizable();

  std::map<NodeId, Bdd> pre;
  for (NodeId n : t.internal_nodes(Grade::Y)) pre.emplace(n, outcome.valuations.at(n).pre);

  WitnessMap w;
  std::vector<NodeId> layer = x_leaves(t);
  while (!layer.empty()) {
    std::vector<NodeId> next;
    for (NodeId n : layer) {
      const auto &nd = t[n];
      for (NodeId c : nd.children)
        if (!t.is_leaf(c)) next.push_back(c);

      if (trace) trace->push_back(SynthStep{n, nd.label, m.support(pre.at(n))});
      auto solved = solve_eqn(m, pre.at(n), nd.label);
      for (const auto &[y, g] : solved.witnesses) w.put(y, g);

      for (NodeId d : t.descendants(n)) {
        if (t.is_leaf(d)) continue;
        Bdd &b = pre.at(d);
        for (const auto &[y, g] : solved.witnesses) b = m.compose(b, y, g);
      }
    }
    layer = std::move(next);
  }
  for (auto y : p.outputs)
    if (!w.witnesses.count(y)) w.put(y, m.bdd_true());
  return w;
}

struct FactoredResult {
  RealizabilityOutcome outcome;
  WitnessMap witnesses;                   // empty when nullary
  std::vector<std::vector<VarId>> blocks; // Y_1 .. Y_m
  std::vector<Bdd> joined;                // F_j & B_j, j = 1 .. m
  std::size_t width = 0;                  // max live variables over the chain
};

/// Bottom-up half of the early-quantification baseline over single-clause
/// factors F_1..F_m taken in `factor_order`. Y_j holds the outputs of F_j that
/// occur in no earlier factor; B_{j-1} = exists Y_j. (F_j & B_j) with
/// B_m = TRUE, and B_0 is the realizability set.
inline FactoredResult factored_chain(BddManager &m, const SynthesisProblem &p,
                                     std::span<const std::size_t> factor_order) {
  const std::size_t nf = factor_order.size();
  {
    std::vector<std::size_t> sorted(factor_order.begin(), factor_order.end());
    std::sort(sorted.begin(), sorted.end());
    bool perm = nf == p.clauses.size();
    for (std::size_t i = 0; perm && i < nf; ++i) perm = sorted[i] == i;
    if (!perm) throw std::invalid_argument("factor order must be a permutation of clause indices");
  }

  FactoredResult r;
  r.outcome.b_pure_x = m.bdd_true();
  for (auto i : pure_x_clauses(p)) r.outcome.b_pure_x &= m.clause(p.clauses[i]);

  std::vector<Bdd> factors;
  std::set<VarId> seen;
  for (auto ci : factor_order) {
    const auto &c = p.clauses[ci];
    factors.push_back(m.clause(c));
    std::vector<VarId> block;
    for (auto v : c.variables())
      if (p.is_output(v) && seen.insert(v).second) block.push_back(v);
    r.blocks.push_back(std::move(block));
  }

  // Structural width: live variables when each factor is joined.
  {
    std::set<VarId> live;
    for (std::size_t j = nf; j-- > 0;) {
      for (auto v : p.clauses[factor_order[j]].variables()) live.insert(v);
      r.width = std::max(r.width, live.size());
      for (auto y : r.blocks[j]) live.erase(y);
    }
  }

  r.joined.resize(nf);
  Bdd b = m.bdd_true();
  for (std::size_t j = nf; j-- > 0;) {
    r.joined[j] = m.apply_and(factors[j], b);
    b = m.exists(r.joined[j], r.blocks[j]);
  }
  r.outcome.realizability_set = b;
  r.outcome.verdict = classify(b);
  r.outcome.decided_low = true;
  return r;
}

/// Top-down half: witnesses for Y_j come from F_j & B_j after substituting
/// the witnesses of Y_1..Y_{j-1}. Outputs in no clause get TRUE.
inline void factored_witnesses(BddManager &m, const SynthesisProblem &p, FactoredResult &r) {
  if (r.outcome.verdict == Verdict::Nullary) throw NotRealizable();
  std::vector<std::pair<VarId, Bdd>> done;
  for (std::size_t j = 0; j < r.joined.size(); ++j) {
    if (r.blocks[j].empty()) continue;
    Bdd f = r.joined[j];
    auto support = m.support(f);
    for (const auto &[y, g] : done)
      if (std::binary_search(support.begin(), support.end(), y)) f = m.compose(f, y, g);
    auto solved = solve_eqn(m, f, r.blocks[j]);
    for (const auto &[y, g] : solved.witnesses) {
      r.witnesses.put(y, g);
      done.emplace_back(y, g);
    }
  }
  for (auto y : p.outputs)
    if (!r.witnesses.witnesses.count(y)) r.witnesses.put(y, m.bdd_true());
}

/// Chain, then witnesses unless the instance is nullary.
inline FactoredResult factored_baseline(BddManager &m, const SynthesisProblem &p,
                                        std::span<const std::size_t> factor_order) {
  auto r = factored_chain(m, p, factor_order);
  if (r.outcome.verdict != Verdict::Nullary) factored_witnesses(m, p, r);
  return r;
}

inline std::vector<std::size_t> file_order(const SynthesisProblem &p) {
  std::vector<std::size_t> order(p.clauses.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  return order;
}

/// Baseline with factors in file order.
inline FactoredResult factored_baseline(BddManager &m, const SynthesisProblem &p) {
  return factored_baseline(m, p, file_order(p));
}

} // namespace dpsynth
