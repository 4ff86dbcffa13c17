/// @file  realizability.hpp
/// @brief Bottom-up pre/post valuations over a graded project-join tree and
///        the fully / partially / nullary classification

#pragma once

#include <algorithm>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "dpsynth/bdd.hpp"
#include "dpsynth/cnf.hpp"
#include "dpsynth/planner.hpp"

namespace dpsynth {

enum class Verdict { Fully, Partially, Nullary };

inline const char *to_string(Verdict v) {
  switch (v) {
  case Verdict::Fully: return "fully";
  case Verdict::Partially: return "partially";
  case Verdict::Nullary: return "nullary";
  }
  return "?";
}

/// Verdict implied by a realizability set over X.
inline Verdict classify(const Bdd &r) {
  return r.is_true() ? Verdict::Fully : r.is_false() ? Verdict::Nullary : Verdict::Partially;
}

struct NodeValuation {
  Bdd pre;
  Bdd post;
};

/// Per-node pre/post valuations, indexed by node id.
struct NodeValuations {
  std::vector<std::optional<NodeValuation>> table;
  std::vector<NodeId> visit_order; // children before parents

  [[nodiscard]] bool has(NodeId n) const { return n < table.size() && table[n].has_value(); }
  [[nodiscard]] const NodeValuation &at(NodeId n) const {
    if (!has(n)) throw std::out_of_range("no valuation for node " + std::to_string(n));
    return *table[n];
  }
  void set(NodeId n, NodeValuation v) {
    if (n >= table.size()) table.resize(n + 1);
    if (!table[n]) visit_order.push_back(n);
    table[n] = std::move(v);
  }
};

class MissingChildValuation : public std::logic_error {
public:
  MissingChildValuation(NodeId node, NodeId child)
      : std::logic_error("MissingChildValuation: child " + std::to_string(child) + " of node " +
                         std::to_string(node) + " has not been evaluated") {}
};

class NotRealizable : public std::logic_error {
public:
  NotRealizable() : std::logic_error("NotRealizable: synthesis requested on a nullary instance") {}
};

enum class ValuationStatus { Ok, EarlyNullary };

/// Evaluates node n: a leaf takes `leaf_values[clause]`; an internal node
/// conjoins its children's post-valuations in child order and then
/// quantifies its label. A FALSE child or a FALSE partial conjunction sets
/// both valuations of n to FALSE and reports EarlyNullary.
inline ValuationStatus generic_valuation(BddManager &m, const GradedProjectJoinTree &t,
                                         std::span<const Bdd> leaf_values, NodeId n,
                                         NodeValuations &vals) {
  const PjNode &nd = t[n];
  if (nd.leaf) {
    const Bdd &a = leaf_values[nd.clause];
    vals.set(n, {a, a});
    return a.is_false() ? ValuationStatus::EarlyNullary : ValuationStatus::Ok;
  }
  for (NodeId c : nd.children)
    if (!vals.has(c)) throw MissingChildValuation(n, c);

  Bdd pre = m.bdd_true();
  for (NodeId c : nd.children) {
    const Bdd &child_post = vals.at(c).post;
    if (child_post.is_false()) {
      vals.set(n, {m.bdd_false(), m.bdd_false()});
      return ValuationStatus::EarlyNullary;
    }
    pre = m.apply_and(pre, child_post);
    if (pre.is_false()) {
      vals.set(n, {pre, pre});
      return ValuationStatus::EarlyNullary;
    }
  }
  vals.set(n, {pre, m.exists(pre, nd.label)});
  return ValuationStatus::Ok;
}

/// Y-grade internal nodes whose parent is absent or X-grade, ascending.
inline std::vector<NodeId> x_leaves(const GradedProjectJoinTree &t) {
  auto par = t.parents();
  std::vector<NodeId> out;
  for (NodeId n : t.preorder()) {
    const auto &nd = t[n];
    if (nd.leaf || nd.grade != Grade::Y) continue;
    if (!par[n] || t[*par[n]].grade != Grade::Y) out.push_back(n);
  }
  std::sort(out.begin(), out.end());
  return out;
}

/// T_X: the input tree with each XLeaves node turned into a leaf whose value
/// is that node's post-valuation. Node ids are those of the original tree;
/// leaf `clause` fields index `leaf_values`.
struct ReducedTree {
  GradedProjectJoinTree tree;
  std::vector<Bdd> leaf_values;
  std::vector<NodeId> collapsed; // former XLeaves nodes
};

struct RealizabilityOutcome {
  Verdict verdict = Verdict::Nullary;
  Bdd realizability_set;           // over X
  Bdd b_pure_x;                    // conjunction of pure-X clauses
  std::optional<ReducedTree> reduced_tree;
  NodeValuations valuations;       // original tree: leaves and Y-grade nodes
  NodeValuations x_valuations;     // T_X, when the high pass ran
  bool early_nullary = false;      // a FALSE valuation cut the bottom-up pass short
  bool decided_low = true;         // false when the high pass made the call
};

struct HandOff {
  ReducedTree t_x;
  Bdd b_pure_x;
  NodeValuations valuations;
  std::vector<NodeId> xleaves;
};

inline std::vector<Bdd> clause_bdds(BddManager &m, const SynthesisProblem &p) {
  std::vector<Bdd> out;
  out.reserve(p.clauses.size());
  for (const auto &c : p.clauses) out.push_back(m.clause(c));
  return out;
}

/// Low pass: evaluates leaves and Y-grade nodes bottom-up and decides Fully
/// or Nullary when it can; otherwise hands T_X on to high_valuation.
inline std::variant<RealizabilityOutcome, HandOff>
low_valuation(BddManager &m, const SynthesisProblem &p, const GradedProjectJoinTree &t,
              std::span<const Bdd> clause_values) {
  RealizabilityOutcome done;
  done.b_pure_x = m.bdd_true();
  for (auto i : pure_x_clauses(p)) done.b_pure_x = m.apply_and(done.b_pure_x, clause_values[i]);

  auto nullary = [&](bool early) {
    done.verdict = Verdict::Nullary;
    done.realizability_set = m.bdd_false();
    done.early_nullary = early;
    return done;
  };
  if (done.b_pure_x.is_false()) return nullary(false);

  const auto ys = t.internal_nodes(Grade::Y);
  const auto xl = x_leaves(t);
  if (ys.empty() && done.b_pure_x.is_true()) {
    done.verdict = Verdict::Fully;
    done.realizability_set = m.bdd_true();
    return done;
  }

  for (NodeId n : t.postorder()) {
    const auto &nd = t[n];
    if (!nd.leaf && nd.grade != Grade::Y) continue;
    if (generic_valuation(m, t, clause_values, n, done.valuations) == ValuationStatus::EarlyNullary)
      return nullary(true);
  }

  bool all_true = true;
  for (NodeId n : xl) {
    const Bdd &post = done.valuations.at(n).post;
    if (post.is_false()) return nullary(true);
    if (!post.is_true()) all_true = false;
  }
  if (all_true && done.b_pure_x.is_true()) {
    done.verdict = Verdict::Fully;
    done.realizability_set = m.bdd_true();
    return done;
  }

  HandOff h;
  h.b_pure_x = done.b_pure_x;
  h.valuations = std::move(done.valuations);
  h.xleaves = xl;
  h.t_x.tree = t;
  h.t_x.leaf_values.assign(clause_values.begin(), clause_values.end());
  for (NodeId n : xl) {
    PjNode leaf = PjNode::make_leaf(h.t_x.leaf_values.size());
    h.t_x.leaf_values.push_back(h.valuations.at(n).post);
    h.t_x.tree.nodes[n] = std::move(leaf);
    h.t_x.collapsed.push_back(n);
  }
  return h;
}

/// High pass over T_X: evaluates the X-grade nodes; Nullary iff the root's
/// post-valuation is FALSE, else Partially. The realizability set is
/// b_pure_x conjoined with the XLeaves post-valuations.
inline RealizabilityOutcome high_valuation(BddManager &m, HandOff h) {
  RealizabilityOutcome out;
  out.decided_low = false;
  out.b_pure_x = h.b_pure_x;
  out.valuations = std::move(h.valuations);

  const auto &tx = h.t_x.tree;
  bool early = false;
  for (NodeId n : tx.postorder()) {
    if (generic_valuation(m, tx, h.t_x.leaf_values, n, out.x_valuations) ==
        ValuationStatus::EarlyNullary) {
      early = true;
      break;
    }
  }
  const bool root_false = early || out.x_valuations.at(tx.root).post.is_false();

  Bdd r = h.b_pure_x;
  for (NodeId n : h.xleaves) r = m.apply_and(r, out.valuations.at(n).post);
  out.reduced_tree = std::move(h.t_x);
  if (root_false) {
    out.verdict = Verdict::Nullary;
    out.early_nullary = early;
    out.realizability_set = m.bdd_false();
  } else {
    out.verdict = Verdict::Partially;
    out.realizability_set = r;
  }
  return out;
}

/// Low pass, then the high pass when needed.
inline RealizabilityOutcome check_realizability(BddManager &m, const SynthesisProblem &p,
                                                const GradedProjectJoinTree &t,
                                                std::span<const Bdd> clause_values) {
  auto low = low_valuation(m, p, t, clause_values);
  if (auto *done = std::get_if<RealizabilityOutcome>(&low)) return std::move(*done);
  return high_valuation(m, std::get<HandOff>(std::move(low)));
}

inline const Bdd &realizability_set(const RealizabilityOutcome &o) { return o.realizability_set; }

} // namespace dpsynth
