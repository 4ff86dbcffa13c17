/// @file  planner.hpp
/// @brief Gaifman graphs, variable orders, tree decompositions and graded
///        project-join trees

#pragma once

#include <algorithm>
#include <cstddef>
#include <limits>
#include <map>
#include <optional>
#include <queue>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "dpsynth/cnf.hpp"

namespace dpsynth {

// ---------------------------------------------------------------------------
// Gaifman graph

struct GaifmanGraph {
  std::vector<VarId> vertices;                  // ascending
  std::set<std::pair<VarId, VarId>> edges;      // first < second

  void add_edge(VarId u, VarId v) {
    if (u == v) return;
    edges.emplace(std::min(u, v), std::max(u, v));
  }
  [[nodiscard]] bool has_edge(VarId u, VarId v) const {
    return edges.count({std::min(u, v), std::max(u, v)}) != 0;
  }
  [[nodiscard]] std::map<VarId, std::set<VarId>> adjacency() const {
    std::map<VarId, std::set<VarId>> adj;
    for (auto v : vertices) adj[v];
    for (auto [u, v] : edges) {
      adj[u].insert(v);
      adj[v].insert(u);
    }
    return adj;
  }
};

/// One vertex per variable occurring in a clause; an edge between every pair
/// of variables sharing a clause.
inline GaifmanGraph build_gaifman(const SynthesisProblem &p) {
  GaifmanGraph g;
  g.vertices = p.used_variables();
  for (const auto &c : p.clauses) {
    auto vars = c.variables();
    for (std::size_t i = 0; i < vars.size(); ++i)
      for (std::size_t j = i + 1; j < vars.size(); ++j) g.add_edge(vars[i], vars[j]);
  }
  return g;
}

/// Maximum cardinality search. Ties go to the smallest VarId, so the first
/// pick is the smallest vertex.
inline std::vector<VarId> mcs_order(const GaifmanGraph &g) {
  auto adj = g.adjacency();
  std::map<VarId, std::size_t> weight;
  for (auto v : g.vertices) weight[v] = 0;
  std::vector<VarId> order;
  order.reserve(g.vertices.size());
  while (!weight.empty()) {
    auto best = weight.begin();
    for (auto it = weight.begin(); it != weight.end(); ++it)
      if (it->second > best->second) best = it;
    VarId v = best->first;
    weight.erase(best);
    order.push_back(v);
    for (auto u : adj[v])
      if (auto it = weight.find(u); it != weight.end()) ++it->second;
  }
  return order;
}

// ---------------------------------------------------------------------------
// Tree decompositions

struct TreeDecomposition {
  std::vector<std::vector<VarId>> bags; // each ascending
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  int width = -1; // max bag size - 1; -1 when there are no bags
};

/// Problems with a tree decomposition of `g`; empty iff it is valid.
inline std::vector<std::string> check_decomposition(const GaifmanGraph &g,
                                                    const TreeDecomposition &td) {
  std::vector<std::string> out;
  const std::size_t n = td.bags.size();
  if (n > 0 && td.edges.size() != n - 1) out.push_back("bag graph does not have n-1 edges");
  std::vector<std::vector<std::size_t>> adj(n);
  for (auto [a, b] : td.edges) {
    if (a >= n || b >= n) {
      out.push_back("tree edge references missing bag");
      return out;
    }
    adj[a].push_back(b);
    adj[b].push_back(a);
  }
  if (n > 0) {
    std::vector<bool> seen(n, false);
    std::vector<std::size_t> stack{0};
    seen[0] = true;
    std::size_t count = 0;
    while (!stack.empty()) {
      auto b = stack.back();
      stack.pop_back();
      ++count;
      for (auto c : adj[b])
        if (!seen[c]) seen[c] = true, stack.push_back(c);
    }
    if (count != n) out.push_back("bag graph is not connected");
  }
  auto in_bag = [&](std::size_t b, VarId v) {
    return std::binary_search(td.bags[b].begin(), td.bags[b].end(), v);
  };
  for (auto v : g.vertices) {
    std::vector<std::size_t> holders;
    for (std::size_t b = 0; b < n; ++b)
      if (in_bag(b, v)) holders.push_back(b);
    if (holders.empty()) {
      out.push_back("variable " + std::to_string(v.id) + " is in no bag");
      continue;
    }
    // Connectedness of the bags holding v.
    std::set<std::size_t> seen{holders[0]};
    std::vector<std::size_t> stack{holders[0]};
    while (!stack.empty()) {
      auto b = stack.back();
      stack.pop_back();
      for (auto c : adj[b])
        if (in_bag(c, v) && seen.insert(c).second) stack.push_back(c);
    }
    if (seen.size() != holders.size())
      out.push_back("bags containing variable " + std::to_string(v.id) + " are not connected");
  }
  for (auto [u, v] : g.edges) {
    bool covered = false;
    for (std::size_t b = 0; b < n && !covered; ++b) covered = in_bag(b, u) && in_bag(b, v);
    if (!covered)
      out.push_back("edge {" + std::to_string(u.id) + "," + std::to_string(v.id) +
                    "} is in no bag");
  }
  int w = -1;
  for (const auto &b : td.bags) w = std::max(w, static_cast<int>(b.size()) - 1);
  if (w != td.width) out.push_back("reported width does not match bags");
  return out;
}

/// Greedy min-fill elimination. Ties go to the smallest VarId. Bags are the
/// elimination cliques; a bag contained in a neighbouring bag is contracted
/// into it. The bag created last is the last entry of `bags`.
inline TreeDecomposition min_fill_decomposition(const GaifmanGraph &g) {
  auto adj = g.adjacency();
  std::set<VarId> remaining(g.vertices.begin(), g.vertices.end());
  std::vector<VarId> elim;
  std::vector<std::set<VarId>> cliques;

  while (!remaining.empty()) {
    VarId best{};
    std::size_t best_fill = std::numeric_limits<std::size_t>::max();
    for (auto v : remaining) {
      const auto &nb = adj[v];
      std::size_t fill = 0;
      for (auto a = nb.begin(); a != nb.end(); ++a)
        for (auto b = std::next(a); b != nb.end(); ++b)
          if (!adj[*a].count(*b)) ++fill;
      if (fill < best_fill) best_fill = fill, best = v;
    }
    std::set<VarId> clique = adj[best];
    for (auto a : clique)
      for (auto b : clique)
        if (a != b) adj[a].insert(b);
    for (auto a : clique) adj[a].erase(best);
    clique.insert(best);
    adj.erase(best);
    remaining.erase(best);
    elim.push_back(best);
    cliques.push_back(std::move(clique));
  }

  const std::size_t n = elim.size();
  std::map<VarId, std::size_t> position;
  for (std::size_t i = 0; i < n; ++i) position[elim[i]] = i;

  // Elimination tree: bag i hangs below the bag of its earliest-eliminated
  // later neighbour.
  std::vector<std::optional<std::size_t>> parent(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::optional<std::size_t> p;
    for (auto u : cliques[i])
      if (u != elim[i] && (!p || position[u] < *p)) p = position[u];
    parent[i] = p;
  }
  // Separate components become one tree by chaining their roots.
  std::optional<std::size_t> prev_root;
  for (std::size_t i = 0; i < n; ++i) {
    if (parent[i]) continue;
    if (prev_root) parent[*prev_root] = i;
    prev_root = i;
  }

  // Contract subset edges until none remain.
  std::vector<bool> alive(n, true);
  auto subset = [](const std::set<VarId> &a, const std::set<VarId> &b) {
    return std::includes(b.begin(), b.end(), a.begin(), a.end());
  };
  for (bool changed = true; changed;) {
    changed = false;
    for (std::size_t i = 0; i < n && !changed; ++i) {
      if (!alive[i] || !parent[i]) continue;
      std::size_t p = *parent[i];
      if (subset(cliques[i], cliques[p])) {
        // child absorbed into parent
        alive[i] = false;
        for (std::size_t c = 0; c < n; ++c)
          if (alive[c] && parent[c] == i) parent[c] = p;
        changed = true;
      } else if (subset(cliques[p], cliques[i])) {
        // parent absorbed into child; child takes the parent's place
        cliques[p] = cliques[i];
        alive[i] = false;
        for (std::size_t c = 0; c < n; ++c)
          if (alive[c] && parent[c] == i) parent[c] = p;
        changed = true;
      }
    }
  }

  TreeDecomposition td;
  std::vector<std::size_t> index(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    if (!alive[i]) continue;
    index[i] = td.bags.size();
    td.bags.emplace_back(cliques[i].begin(), cliques[i].end());
    td.width = std::max(td.width, static_cast<int>(cliques[i].size()) - 1);
  }
  for (std::size_t i = 0; i < n; ++i)
    if (alive[i] && parent[i]) td.edges.emplace_back(index[i], index[*parent[i]]);
  return td;
}

// ---------------------------------------------------------------------------
// Graded project-join trees

enum class Grade { X, Y };

inline const char *to_string(Grade g) { return g == Grade::X ? "X" : "Y"; }

using NodeId = std::size_t;

struct PjNode {
  bool leaf = false;
  std::size_t clause = 0;       // leaves only
  std::vector<VarId> label;     // internal only, ascending
  std::vector<NodeId> children; // internal only
  Grade grade = Grade::X;       // internal only

  static PjNode make_leaf(std::size_t clause) {
    PjNode n;
    n.leaf = true;
    n.clause = clause;
    return n;
  }
  static PjNode make_internal(std::vector<VarId> label, std::vector<NodeId> children, Grade g) {
    PjNode n;
    std::sort(label.begin(), label.end());
    n.label = std::move(label);
    n.children = std::move(children);
    n.grade = g;
    return n;
  }

  friend bool operator==(const PjNode &, const PjNode &) = default;
};

/// A tree whose leaves carry clause indices and whose internal nodes carry a
/// label and a grade. Node ids are indices into `nodes`; nodes unreachable
/// from `root` are ignored by traversals.
struct GradedProjectJoinTree {
  std::vector<PjNode> nodes;
  NodeId root = 0;

  friend bool operator==(const GradedProjectJoinTree &, const GradedProjectJoinTree &) = default;

  [[nodiscard]] const PjNode &operator[](NodeId n) const { return nodes.at(n); }
  [[nodiscard]] bool is_leaf(NodeId n) const { return nodes.at(n).leaf; }

  [[nodiscard]] std::vector<std::optional<NodeId>> parents() const {
    std::vector<std::optional<NodeId>> par(nodes.size());
    for (NodeId n : preorder())
      for (NodeId c : nodes[n].children) par[c] = n;
    return par;
  }

  /// Nodes reachable from the root, parents first, children in order.
  [[nodiscard]] std::vector<NodeId> preorder() const {
    std::vector<NodeId> out;
    if (root >= nodes.size()) return out;
    std::vector<bool> seen(nodes.size(), false);
    std::vector<NodeId> stack{root};
    while (!stack.empty()) {
      NodeId n = stack.back();
      stack.pop_back();
      if (n >= nodes.size() || seen[n]) continue;
      seen[n] = true;
      out.push_back(n);
      const auto &ch = nodes[n].children;
      for (auto it = ch.rbegin(); it != ch.rend(); ++it) stack.push_back(*it);
    }
    return out;
  }

  /// Children before parents.
  [[nodiscard]] std::vector<NodeId> postorder() const {
    std::vector<NodeId> out;
    if (root >= nodes.size()) return out;
    std::vector<bool> seen(nodes.size(), false);
    std::vector<std::pair<NodeId, std::size_t>> stack{{root, 0}};
    seen[root] = true;
    while (!stack.empty()) {
      auto &[n, i] = stack.back();
      const auto &ch = nodes[n].children;
      if (i < ch.size()) {
        NodeId c = ch[i++];
        if (c < nodes.size() && !seen[c]) {
          seen[c] = true;
          stack.emplace_back(c, 0);
        }
      } else {
        out.push_back(n);
        stack.pop_back();
      }
    }
    return out;
  }

  /// Proper descendants of n, preorder.
  [[nodiscard]] std::vector<NodeId> descendants(NodeId n) const {
    std::vector<NodeId> out;
    std::vector<NodeId> stack(nodes.at(n).children.rbegin(), nodes.at(n).children.rend());
    while (!stack.empty()) {
      NodeId c = stack.back();
      stack.pop_back();
      out.push_back(c);
      const auto &ch = nodes[c].children;
      for (auto it = ch.rbegin(); it != ch.rend(); ++it) stack.push_back(*it);
    }
    return out;
  }

  [[nodiscard]] std::vector<NodeId> internal_nodes(Grade g) const {
    std::vector<NodeId> out;
    for (NodeId n : preorder())
      if (!nodes[n].leaf && nodes[n].grade == g) out.push_back(n);
    std::sort(out.begin(), out.end());
    return out;
  }
};

class PlanError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class InvalidDecomposition : public PlanError {
public:
  explicit InvalidDecomposition(const std::string &what)
      : PlanError("InvalidDecomposition: " + what) {}
};

class OrderViolation : public PlanError {
public:
  explicit OrderViolation(const std::string &what) : PlanError("OrderViolation: " + what) {}
};

/// Bucket elimination along `order`, which must list every used output
/// variable before any input variable.
///
/// For each v in order, all pending subtrees whose free variables contain v
/// are joined under a new node labeled {v}. When the only such subtree is an
/// internal node of the same grade, v is added to its label instead. Inputs
/// that occur in no clause go to the root label; unused outputs stay out of
/// the tree.
inline GradedProjectJoinTree bucket_elimination_tree(const SynthesisProblem &p,
                                                     const std::vector<VarId> &order) {
  std::set<VarId> seen;
  bool in_x_phase = false;
  for (auto v : order) {
    if (!p.is_input(v) && !p.is_output(v))
      throw OrderViolation("variable " + std::to_string(v.id) + " is not in the problem");
    if (!seen.insert(v).second)
      throw OrderViolation("variable " + std::to_string(v.id) + " listed twice");
    if (p.is_input(v)) in_x_phase = true;
    else if (in_x_phase)
      throw OrderViolation("output " + std::to_string(v.id) + " follows an input");
  }
  for (auto v : p.used_variables())
    if (!seen.count(v))
      throw OrderViolation("used variable " + std::to_string(v.id) + " missing from order");

  GradedProjectJoinTree t;
  struct Pending {
    NodeId node;
    std::set<VarId> free;
  };
  std::vector<Pending> pending;
  for (std::size_t i = 0; i < p.clauses.size(); ++i) {
    t.nodes.push_back(PjNode::make_leaf(i));
    auto vars = p.clauses[i].variables();
    pending.push_back(Pending{i, {vars.begin(), vars.end()}});
  }

  std::vector<VarId> leftover_x;
  for (auto v : p.inputs)
    if (!seen.count(v)) leftover_x.push_back(v);

  for (auto v : order) {
    const Grade g = p.is_input(v) ? Grade::X : Grade::Y;
    std::vector<std::size_t> hit;
    for (std::size_t i = 0; i < pending.size(); ++i)
      if (pending[i].free.count(v)) hit.push_back(i);
    if (hit.empty()) {
      if (g == Grade::X) leftover_x.push_back(v);
      continue;
    }
    if (hit.size() == 1) {
      auto &only = pending[hit[0]];
      PjNode &node = t.nodes[only.node];
      if (!node.leaf && node.grade == g) {
        node.label.insert(std::upper_bound(node.label.begin(), node.label.end(), v), v);
        only.free.erase(v);
        continue;
      }
    }
    std::vector<NodeId> children;
    std::set<VarId> free;
    for (auto i : hit) {
      children.push_back(pending[i].node);
      free.insert(pending[i].free.begin(), pending[i].free.end());
    }
    free.erase(v);
    for (auto it = hit.rbegin(); it != hit.rend(); ++it)
      pending.erase(pending.begin() + static_cast<std::ptrdiff_t>(*it));
    t.nodes.push_back(PjNode::make_internal({v}, std::move(children), g));
    pending.push_back(Pending{t.nodes.size() - 1, std::move(free)});
  }

  std::sort(leftover_x.begin(), leftover_x.end());
  if (pending.size() == 1 && !t.nodes[pending[0].node].leaf) {
    PjNode &top = t.nodes[pending[0].node];
    if (leftover_x.empty() || top.grade == Grade::X) {
      top.label.insert(top.label.end(), leftover_x.begin(), leftover_x.end());
      std::sort(top.label.begin(), top.label.end());
      t.root = pending[0].node;
      return t;
    }
  }
  std::vector<NodeId> children;
  for (const auto &pd : pending) children.push_back(pd.node);
  t.nodes.push_back(PjNode::make_internal(leftover_x, std::move(children), Grade::X));
  t.root = t.nodes.size() - 1;
  return t;
}

/// Graded tree guided by a tree decomposition: the decomposition is rooted at
/// its last bag, each variable is keyed by the depth of the shallowest bag
/// holding it, and bucket elimination runs deepest-first over the outputs and
/// then over the inputs.
inline GradedProjectJoinTree decomposition_to_graded_tree(const SynthesisProblem &p,
                                                          const TreeDecomposition &td) {
  const std::size_t n = td.bags.size();
  auto in_bag = [&](std::size_t b, VarId v) {
    return std::binary_search(td.bags[b].begin(), td.bags[b].end(), v);
  };
  for (std::size_t i = 0; i < p.clauses.size(); ++i) {
    auto vars = p.clauses[i].variables();
    if (vars.empty()) continue;
    bool fits = false;
    for (std::size_t b = 0; b < n && !fits; ++b)
      fits = std::all_of(vars.begin(), vars.end(), [&](VarId v) { return in_bag(b, v); });
    if (!fits) throw InvalidDecomposition("clause " + std::to_string(i) + " fits no bag");
  }

  std::vector<std::vector<std::size_t>> adj(n);
  for (auto [a, b] : td.edges) {
    if (a >= n || b >= n) throw InvalidDecomposition("tree edge references missing bag");
    adj[a].push_back(b);
    adj[b].push_back(a);
  }
  std::vector<std::size_t> depth(n, std::numeric_limits<std::size_t>::max());
  for (std::size_t start = n; start-- > 0;) {
    if (depth[start] != std::numeric_limits<std::size_t>::max()) continue;
    depth[start] = 0;
    std::queue<std::size_t> q;
    q.push(start);
    while (!q.empty()) {
      auto b = q.front();
      q.pop();
      for (auto c : adj[b])
        if (depth[c] == std::numeric_limits<std::size_t>::max()) depth[c] = depth[b] + 1, q.push(c);
    }
  }

  auto key = [&](VarId v) {
    std::size_t d = std::numeric_limits<std::size_t>::max();
    for (std::size_t b = 0; b < n; ++b)
      if (in_bag(b, v)) d = std::min(d, depth[b]);
    return d;
  };
  auto phase = [&](const std::vector<VarId> &vars) {
    std::vector<std::pair<std::size_t, VarId>> keyed;
    for (auto v : vars) keyed.emplace_back(key(v), v);
    std::sort(keyed.begin(), keyed.end(), [](const auto &a, const auto &b) {
      return a.first != b.first ? a.first > b.first : a.second < b.second;
    });
    std::vector<VarId> out;
    for (auto &[d, v] : keyed) out.push_back(v);
    return out;
  };

  std::vector<VarId> used_y, used_x;
  for (auto v : p.used_variables()) (p.is_output(v) ? used_y : used_x).push_back(v);
  std::vector<VarId> order = phase(used_y);
  auto xs = phase(used_x);
  order.insert(order.end(), xs.begin(), xs.end());
  return bucket_elimination_tree(p, order);
}

// ---------------------------------------------------------------------------
// Validation and measurement

enum class ViolationKind { Structure, LeafMapping, Partition, Descent, GradeLabel, GradeOrder };

inline const char *to_string(ViolationKind k) {
  switch (k) {
  case ViolationKind::Structure: return "structure";
  case ViolationKind::LeafMapping: return "leaf-mapping";
  case ViolationKind::Partition: return "partition";
  case ViolationKind::Descent: return "descent";
  case ViolationKind::GradeLabel: return "grade-label";
  case ViolationKind::GradeOrder: return "grade-order";
  }
  return "?";
}

struct Violation {
  ViolationKind kind;
  std::string message;
};

/// Empty iff `t` is a valid (X,Y)-graded project-join tree for `p`. Labels
/// must partition X together with the outputs that occur in some clause.
inline std::vector<Violation> validate_tree(const SynthesisProblem &p,
                                            const GradedProjectJoinTree &t) {
  std::vector<Violation> out;
  auto add = [&](ViolationKind k, std::string m) { out.push_back({k, std::move(m)}); };
  const std::size_t n = t.nodes.size();
  if (t.root >= n) {
    add(ViolationKind::Structure, "root is not a node");
    return out;
  }

  // Shape: every node reached exactly once from the root.
  std::vector<int> hits(n, 0);
  std::vector<std::optional<NodeId>> parent(n);
  {
    std::vector<NodeId> stack{t.root};
    hits[t.root] = 1;
    bool broken = false;
    while (!stack.empty() && !broken) {
      NodeId v = stack.back();
      stack.pop_back();
      if (t.nodes[v].leaf && !t.nodes[v].children.empty())
        add(ViolationKind::Structure, "leaf " + std::to_string(v) + " has children");
      for (NodeId c : t.nodes[v].children) {
        if (c >= n) {
          add(ViolationKind::Structure, "node " + std::to_string(v) + " has a missing child");
          continue;
        }
        if (hits[c]++ > 0) {
          add(ViolationKind::Structure, "node " + std::to_string(c) + " has several parents or lies on a cycle");
          broken = true;
          break;
        }
        parent[c] = v;
        stack.push_back(c);
      }
    }
    if (broken) return out;
    for (NodeId v = 0; v < n; ++v)
      if (!hits[v]) add(ViolationKind::Structure, "node " + std::to_string(v) + " is unreachable");
  }

  // gamma is a bijection onto the clauses.
  std::vector<std::optional<NodeId>> leaf_of(p.clauses.size());
  for (NodeId v = 0; v < n; ++v) {
    if (!hits[v] || !t.nodes[v].leaf) continue;
    auto c = t.nodes[v].clause;
    if (c >= p.clauses.size()) {
      add(ViolationKind::LeafMapping, "leaf " + std::to_string(v) + " maps to no clause");
    } else if (leaf_of[c]) {
      add(ViolationKind::LeafMapping, "clause " + std::to_string(c) + " has several leaves");
    } else {
      leaf_of[c] = v;
    }
  }
  for (std::size_t c = 0; c < p.clauses.size(); ++c)
    if (!leaf_of[c]) add(ViolationKind::LeafMapping, "clause " + std::to_string(c) + " has no leaf");

  // Labels partition X and the used outputs.
  std::map<VarId, NodeId> owner;
  for (NodeId v = 0; v < n; ++v) {
    if (!hits[v] || t.nodes[v].leaf) continue;
    for (auto x : t.nodes[v].label) {
      if (!p.is_input(x) && !p.is_output(x))
        add(ViolationKind::Partition, "label of node " + std::to_string(v) +
                                          " has unknown variable " + std::to_string(x.id));
      if (auto [it, fresh] = owner.emplace(x, v); !fresh)
        add(ViolationKind::Partition, "variable " + std::to_string(x.id) + " labels nodes " +
                                          std::to_string(it->second) + " and " + std::to_string(v));
    }
  }
  std::set<VarId> required(p.inputs.begin(), p.inputs.end());
  for (auto y : p.used_outputs()) required.insert(y);
  for (auto v : required)
    if (!owner.count(v)) add(ViolationKind::Partition, "variable " + std::to_string(v.id) + " labels no node");
  for (auto [v, node] : owner)
    if (p.is_output(v) && !required.count(v))
      add(ViolationKind::Partition, "unused output " + std::to_string(v.id) + " is labeled");

  // Every clause mentioning v descends from the node labeling v.
  auto descends = [&](NodeId d, NodeId a) {
    for (std::optional<NodeId> cur = d; cur; cur = parent[*cur])
      if (*cur == a) return true;
    return false;
  };
  for (std::size_t c = 0; c < p.clauses.size(); ++c) {
    if (!leaf_of[c]) continue;
    for (auto v : p.clauses[c].variables()) {
      auto it = owner.find(v);
      if (it != owner.end() && !descends(*leaf_of[c], it->second))
        add(ViolationKind::Descent, "clause " + std::to_string(c) + " is not below node " +
                                        std::to_string(it->second) + " labeling " +
                                        std::to_string(v.id));
    }
  }

  // Grades.
  for (NodeId v = 0; v < n; ++v) {
    if (!hits[v] || t.nodes[v].leaf) continue;
    const auto &nd = t.nodes[v];
    for (auto x : nd.label) {
      bool ok = nd.grade == Grade::X ? p.is_input(x) : p.is_output(x);
      if (!ok)
        add(ViolationKind::GradeLabel, std::string(to_string(nd.grade)) + "-grade node " +
                                           std::to_string(v) + " labels " + std::to_string(x.id));
    }
    if (nd.grade == Grade::X)
      for (auto a = parent[v]; a; a = parent[*a])
        if (t.nodes[*a].grade == Grade::Y) {
          add(ViolationKind::GradeOrder, "X-grade node " + std::to_string(v) +
                                             " is below Y-grade node " + std::to_string(*a));
          break;
        }
  }
  return out;
}

/// Max over internal nodes n of |free(n) ∪ label(n)|, where free(n) is the set
/// of variables still live in the children of n when n is evaluated.
inline std::size_t tree_width(const SynthesisProblem &p, const GradedProjectJoinTree &t) {
  std::vector<std::set<VarId>> live(t.nodes.size()); // variables passed up to the parent
  std::size_t width = 0;
  for (NodeId v : t.postorder()) {
    const auto &nd = t.nodes[v];
    if (nd.leaf) {
      auto vars = p.clauses.at(nd.clause).variables();
      live[v] = {vars.begin(), vars.end()};
      continue;
    }
    std::set<VarId> scope(nd.label.begin(), nd.label.end());
    for (NodeId c : nd.children) scope.insert(live[c].begin(), live[c].end());
    width = std::max(width, scope.size());
    for (auto x : nd.label) scope.erase(x);
    live[v] = std::move(scope);
  }
  return width;
}

// ---------------------------------------------------------------------------
// Export

/// Leaves are boxes with clause text; X-grade nodes are ellipses and Y-grade
/// nodes diamonds, labeled `e: v1,v2`.
inline std::string to_dot(const SynthesisProblem &p, const GradedProjectJoinTree &t) {
  std::ostringstream os;
  os << "digraph pjtree {\n  node [fontname=\"Helvetica\"];\n";
  for (NodeId v : t.preorder()) {
    const auto &nd = t.nodes[v];
    os << "  n" << v << " [";
    if (nd.leaf) {
      std::string text = nd.clause < p.clauses.size() ? clause_text(p, p.clauses[nd.clause]) : "?";
      os << "shape=box, label=\"" << text << "\"";
    } else {
      os << "shape=" << (nd.grade == Grade::X ? "ellipse" : "diamond") << ", label=\"e: ";
      if (nd.label.empty()) os << "∅";
      for (std::size_t i = 0; i < nd.label.size(); ++i)
        os << (i ? "," : "") << var_name(p, nd.label[i]);
      os << "\"";
    }
    os << "];\n";
  }
  for (NodeId v : t.preorder())
    for (NodeId c : t.nodes[v].children) os << "  n" << v << " -> n" << c << ";\n";
  os << "}\n";
  return os.str();
}

inline nlohmann::json to_json(const GradedProjectJoinTree &t) {
  using nlohmann::json;
  json nodes = json::array();
  for (const auto &nd : t.nodes) {
    if (nd.leaf) {
      nodes.push_back(json{{"kind", "leaf"}, {"clause", nd.clause}});
    } else {
      json label = json::array();
      for (auto v : nd.label) label.push_back(v.id);
      nodes.push_back(json{{"kind", "internal"},
                           {"grade", to_string(nd.grade)},
                           {"label", label},
                           {"children", nd.children}});
    }
  }
  return json{{"root", t.root}, {"nodes", nodes}};
}

inline GradedProjectJoinTree tree_from_json(const nlohmann::json &j) {
  GradedProjectJoinTree t;
  t.root = j.at("root").get<NodeId>();
  for (const auto &nd : j.at("nodes")) {
    const auto kind = nd.at("kind").get<std::string>();
    if (kind == "leaf") {
      t.nodes.push_back(PjNode::make_leaf(nd.at("clause").get<std::size_t>()));
    } else if (kind == "internal") {
      std::vector<VarId> label;
      for (auto v : nd.at("label")) label.emplace_back(v.get<std::uint32_t>());
      const auto g = nd.at("grade").get<std::string>();
      if (g != "X" && g != "Y") throw std::invalid_argument("grade must be X or Y");
      t.nodes.push_back(PjNode::make_internal(std::move(label),
                                              nd.at("children").get<std::vector<NodeId>>(),
                                              g == "X" ? Grade::X : Grade::Y));
    } else {
      throw std::invalid_argument("node kind must be leaf or internal");
    }
  }
  return t;
}

} // namespace dpsynth
