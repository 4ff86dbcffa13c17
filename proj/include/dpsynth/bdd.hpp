/// @file  bdd.hpp
/// @brief Reduced ordered binary decision diagrams without complement edges

#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "dpsynth/cnf.hpp"

namespace dpsynth {

using NodeIndex = std::uint32_t;
using Assignment = std::map<VarId, bool>;

class BddError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class UnknownVariable : public BddError {
public:
  explicit UnknownVariable(VarId v)
      : BddError("UnknownVariable: variable " + std::to_string(v.id) +
                 " is not in the manager's order"),
        var_(v) {}
  [[nodiscard]] VarId var() const noexcept { return var_; }

private:
  VarId var_;
};

class ManagerMismatch : public BddError {
public:
  ManagerMismatch() : BddError("ManagerMismatch: operands belong to different managers") {}
};

class IncompleteAssignment : public BddError {
public:
  explicit IncompleteAssignment(VarId v)
      : BddError("IncompleteAssignment: no value for variable " + std::to_string(v.id)),
        var_(v) {}
  [[nodiscard]] VarId var() const noexcept { return var_; }

private:
  VarId var_;
};

/// Raised from inside BDD operations once the manager's deadline has passed.
class Timeout : public std::runtime_error {
public:
  Timeout() : std::runtime_error("Timeout: deadline exceeded") {}
};

class BddManager;

/// Handle to a node of a BddManager. Two handles of one manager are equal iff
/// they denote the same Boolean function.
class Bdd {
public:
  Bdd() = default;

  [[nodiscard]] BddManager *manager() const noexcept { return mgr_; }
  [[nodiscard]] NodeIndex id() const noexcept { return id_; }
  [[nodiscard]] bool valid() const noexcept { return mgr_ != nullptr; }
  [[nodiscard]] bool is_false() const noexcept { return id_ == 0; }
  [[nodiscard]] bool is_true() const noexcept { return id_ == 1; }
  [[nodiscard]] bool is_const() const noexcept { return id_ <= 1; }

  friend bool operator==(const Bdd &, const Bdd &) = default;

  Bdd operator&(const Bdd &rhs) const;
  Bdd operator|(const Bdd &rhs) const;
  Bdd operator^(const Bdd &rhs) const;
  Bdd operator~() const;
  Bdd &operator&=(const Bdd &rhs) { return *this = *this & rhs; }
  Bdd &operator|=(const Bdd &rhs) { return *this = *this | rhs; }

private:
  friend class BddManager;
  Bdd(BddManager *m, NodeIndex id) : mgr_(m), id_(id) {}

  BddManager *mgr_ = nullptr;
  NodeIndex id_ = 0;
};

/// Node store, unique table and computed cache for one fixed variable order.
///
/// Entry 0 is the FALSE terminal, entry 1 the TRUE terminal. Nodes are never
/// freed, so peak_nodes() is the number of nodes ever allocated. A manager and
/// its handles must not be used from two threads at once.
class BddManager {
public:
  static constexpr std::uint32_t kTerminalLevel = std::numeric_limits<std::uint32_t>::max();

  struct Node {
    std::uint32_t level;
    NodeIndex low;
    NodeIndex high;
  };

  /// `order[i]` is the variable at level i. `cache_limit` = 0 leaves the
  /// computed cache unbounded; otherwise it is flushed when it reaches the cap.
  explicit BddManager(std::vector<VarId> order, std::size_t cache_limit = 0)
      : order_(std::move(order)), cache_limit_(cache_limit) {
    for (std::uint32_t i = 0; i < order_.size(); ++i) {
      if (order_[i].id == 0 || !level_of_.emplace(order_[i], i).second)
        throw std::invalid_argument("variable order must list distinct positive ids");
    }
    nodes_.push_back(Node{kTerminalLevel, 0, 0});
    nodes_.push_back(Node{kTerminalLevel, 1, 1});
  }

  BddManager(const BddManager &) = delete;
  BddManager &operator=(const BddManager &) = delete;

  [[nodiscard]] const std::vector<VarId> &order() const noexcept { return order_; }
  [[nodiscard]] bool has_var(VarId v) const { return level_of_.count(v) != 0; }
  [[nodiscard]] std::uint32_t level(VarId v) const {
    auto it = level_of_.find(v);
    if (it == level_of_.end()) throw UnknownVariable(v);
    return it->second;
  }
  [[nodiscard]] VarId var_at(std::uint32_t level) const { return order_.at(level); }
  [[nodiscard]] const Node &node(NodeIndex i) const { return nodes_.at(i); }
  [[nodiscard]] const Node &node(const Bdd &f) const { return nodes_.at(f.id()); }

  [[nodiscard]] Bdd constant(bool b) { return Bdd(this, b ? 1 : 0); }
  [[nodiscard]] Bdd bdd_true() { return constant(true); }
  [[nodiscard]] Bdd bdd_false() { return constant(false); }
  [[nodiscard]] Bdd var(VarId v) { return Bdd(this, mk(level(v), 0, 1)); }
  [[nodiscard]] Bdd literal(Literal l) {
    auto lv = level(l.var);
    return Bdd(this, l.negated ? mk(lv, 1, 0) : mk(lv, 0, 1));
  }
  [[nodiscard]] Bdd clause(const Clause &c) {
    Bdd r = bdd_false();
    // Build from the bottom of the order up so each disjunction is a single mk.
    std::vector<Literal> lits = c.literals;
    std::sort(lits.begin(), lits.end(),
              [&](Literal a, Literal b) { return level(a.var) > level(b.var); });
    for (auto l : lits) r = apply_or(literal(l), r);
    return r;
  }
  /// Conjunction of positive literals.
  [[nodiscard]] Bdd cube(std::span<const VarId> vars) {
    std::vector<std::uint32_t> levels;
    for (auto v : vars) levels.push_back(level(v));
    std::sort(levels.begin(), levels.end(), std::greater<>());
    levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
    NodeIndex r = 1;
    for (auto lv : levels) r = mk(lv, 0, r);
    return Bdd(this, r);
  }

  [[nodiscard]] Bdd apply_and(const Bdd &f, const Bdd &g) {
    check(f, g);
    return Bdd(this, and_rec(f.id(), g.id()));
  }
  [[nodiscard]] Bdd apply_or(const Bdd &f, const Bdd &g) {
    check(f, g);
    return Bdd(this, or_rec(f.id(), g.id()));
  }
  [[nodiscard]] Bdd apply_xor(const Bdd &f, const Bdd &g) {
    check(f, g);
    return Bdd(this, xor_rec(f.id(), g.id()));
  }
  /// XOR against TRUE.
  [[nodiscard]] Bdd negate(const Bdd &f) {
    check(f);
    return Bdd(this, xor_rec(f.id(), 1));
  }
  [[nodiscard]] Bdd ite(const Bdd &f, const Bdd &g, const Bdd &h) {
    check(f, g);
    check(h);
    return Bdd(this, ite_rec(f.id(), g.id(), h.id()));
  }

  [[nodiscard]] Bdd exists(const Bdd &f, std::span<const VarId> vars) {
    check(f);
    Bdd c = cube(vars);
    return Bdd(this, exists_rec(f.id(), c.id()));
  }
  [[nodiscard]] Bdd exists(const Bdd &f, std::initializer_list<VarId> vars) {
    return exists(f, std::span<const VarId>(vars.begin(), vars.size()));
  }
  [[nodiscard]] Bdd forall(const Bdd &f, std::span<const VarId> vars) {
    return negate(exists(negate(f), vars));
  }

  /// Cofactor f[v := b].
  [[nodiscard]] Bdd restrict(const Bdd &f, VarId v, bool b) {
    check(f);
    return Bdd(this, restrict_rec(f.id(), level(v), b));
  }

  /// f[v := g].
  [[nodiscard]] Bdd compose(const Bdd &f, VarId v, const Bdd &g) {
    check(f, g);
    return Bdd(this, compose_rec(f.id(), level(v), g.id()));
  }

  [[nodiscard]] bool eval(const Bdd &f, const Assignment &a) const {
    check(f);
    NodeIndex n = f.id();
    while (n > 1) {
      const Node &nd = nodes_[n];
      VarId v = order_[nd.level];
      auto it = a.find(v);
      if (it == a.end()) throw IncompleteAssignment(v);
      n = it->second ? nd.high : nd.low;
    }
    return n == 1;
  }

  /// Variables f depends on, in ascending VarId order.
  [[nodiscard]] std::vector<VarId> support(const Bdd &f) const {
    check(f);
    std::vector<bool> level_seen(order_.size(), false);
    for (NodeIndex n : reachable(f.id()))
      if (n > 1) level_seen[nodes_[n].level] = true;
    std::vector<VarId> out;
    for (std::uint32_t l = 0; l < level_seen.size(); ++l)
      if (level_seen[l]) out.push_back(order_[l]);
    std::sort(out.begin(), out.end());
    return out;
  }

  /// Nodes reachable from f, terminals included.
  [[nodiscard]] std::size_t node_count(const Bdd &f) const {
    check(f);
    return reachable(f.id()).size();
  }

  /// Total nodes allocated, terminals included. Nondecreasing.
  [[nodiscard]] std::size_t peak_nodes() const noexcept { return nodes_.size(); }
  [[nodiscard]] std::size_t cache_size() const noexcept { return cache_.size(); }
  void clear_cache() { cache_.clear(); }

  /// Lexicographically smallest satisfying assignment over `vars` (0 < 1,
  /// compared along the manager's order), or nullopt when f is FALSE.
  /// Variables outside support(f) get 0. `vars` must cover support(f).
  [[nodiscard]] std::optional<Assignment> min_satisfying(const Bdd &f,
                                                         std::span<const VarId> vars) const {
    check(f);
    if (f.is_false()) return std::nullopt;
    Assignment a;
    for (auto v : vars) a[v] = false;
    NodeIndex n = f.id();
    while (n > 1) {
      const Node &nd = nodes_[n];
      VarId v = order_[nd.level];
      if (!a.count(v)) throw IncompleteAssignment(v);
      // In a reduced diagram every non-FALSE node reaches TRUE.
      if (nd.low != 0) {
        n = nd.low;
      } else {
        a[v] = true;
        n = nd.high;
      }
    }
    return a;
  }

  /// Number of assignments to `vars` satisfying f; `vars` must cover support(f).
  [[nodiscard]] double sat_count(const Bdd &f, std::span<const VarId> vars) const {
    check(f);
    std::vector<std::uint32_t> levels;
    for (auto v : vars) levels.push_back(level(v));
    std::sort(levels.begin(), levels.end());
    // rank[l] = number of listed levels strictly below l in the order
    auto rank = [&](std::uint32_t l) {
      return static_cast<int>(std::lower_bound(levels.begin(), levels.end(), l) - levels.begin());
    };
    const int total = static_cast<int>(levels.size());
    std::unordered_map<NodeIndex, double> memo;
    auto rec = [&](auto &&self, NodeIndex n) -> double {
      if (n == 0) return 0.0;
      if (n == 1) return 1.0;
      if (auto it = memo.find(n); it != memo.end()) return it->second;
      const Node &nd = nodes_[n];
      if (!std::binary_search(levels.begin(), levels.end(), nd.level))
        throw IncompleteAssignment(order_[nd.level]);
      auto child = [&](NodeIndex c) {
        int below = c > 1 ? rank(nodes_[c].level) : total;
        return self(self, c) * std::ldexp(1.0, below - rank(nd.level) - 1);
      };
      double r = child(nd.low) + child(nd.high);
      memo.emplace(n, r);
      return r;
    };
    int top = f.id() > 1 ? rank(nodes_[f.id()].level) : total;
    return rec(rec, f.id()) * std::ldexp(1.0, top);
  }

  /// Operations throw Timeout once `deadline` has passed.
  void set_deadline(std::optional<std::chrono::steady_clock::time_point> deadline) {
    deadline_ = deadline;
  }

private:
  enum class Op : std::uint32_t { And, Or, Xor, Ite, Exists, Restrict0, Restrict1, Compose };

  struct Triple {
    std::uint32_t level;
    NodeIndex low, high;
    friend bool operator==(const Triple &, const Triple &) = default;
  };
  struct CacheKey {
    Op op;
    NodeIndex a, b, c;
    friend bool operator==(const CacheKey &, const CacheKey &) = default;
  };
  static std::size_t mix(std::uint64_t h) {
    h ^= h >> 33;
    h *= 0xff51afd7ed558ccdULL;
    h ^= h >> 33;
    h *= 0xc4ceb9fe1a85ec53ULL;
    h ^= h >> 33;
    return static_cast<std::size_t>(h);
  }
  struct TripleHash {
    std::size_t operator()(const Triple &t) const noexcept {
      return mix((std::uint64_t{t.level} << 42) ^ (std::uint64_t{t.low} << 21) ^ t.high ^
                 (std::uint64_t{t.high} << 50));
    }
  };
  struct KeyHash {
    std::size_t operator()(const CacheKey &k) const noexcept {
      return mix(mix((std::uint64_t(k.op) << 32) | k.a) ^
                 ((std::uint64_t{k.b} << 32) | k.c));
    }
  };

  void check(const Bdd &f) const {
    if (f.manager() != this) throw ManagerMismatch();
  }
  void check(const Bdd &f, const Bdd &g) const {
    check(f);
    check(g);
  }

  void tick() {
    if (deadline_ && (++ticks_ & 0xfff) == 0 && std::chrono::steady_clock::now() > *deadline_)
      throw Timeout();
  }

  std::uint32_t lvl(NodeIndex n) const { return nodes_[n].level; }

  NodeIndex mk(std::uint32_t level, NodeIndex low, NodeIndex high) {
    if (low == high) return low;
    Triple t{level, low, high};
    if (auto it = unique_.find(t); it != unique_.end()) return it->second;
    NodeIndex id = static_cast<NodeIndex>(nodes_.size());
    nodes_.push_back(Node{level, low, high});
    unique_.emplace(t, id);
    return id;
  }

  std::optional<NodeIndex> lookup(const CacheKey &k) const {
    if (auto it = cache_.find(k); it != cache_.end()) return it->second;
    return std::nullopt;
  }
  NodeIndex store(const CacheKey &k, NodeIndex r) {
    if (cache_limit_ != 0 && cache_.size() >= cache_limit_) cache_.clear();
    cache_.emplace(k, r);
    return r;
  }

  // Cofactors of n with respect to `level` (n itself if its top is below).
  std::pair<NodeIndex, NodeIndex> cofactors(NodeIndex n, std::uint32_t level) const {
    const Node &nd = nodes_[n];
    if (nd.level == level) return {nd.low, nd.high};
    return {n, n};
  }

  NodeIndex and_rec(NodeIndex f, NodeIndex g) {
    if (f == 0 || g == 0) return 0;
    if (f == 1) return g;
    if (g == 1 || f == g) return f;
    if (f > g) std::swap(f, g);
    CacheKey k{Op::And, f, g, 0};
    if (auto r = lookup(k)) return *r;
    tick();
    std::uint32_t top = std::min(lvl(f), lvl(g));
    auto [f0, f1] = cofactors(f, top);
    auto [g0, g1] = cofactors(g, top);
    NodeIndex lo = and_rec(f0, g0);
    NodeIndex hi = and_rec(f1, g1);
    return store(k, mk(top, lo, hi));
  }

  NodeIndex or_rec(NodeIndex f, NodeIndex g) {
    if (f == 1 || g == 1) return 1;
    if (f == 0) return g;
    if (g == 0 || f == g) return f;
    if (f > g) std::swap(f, g);
    CacheKey k{Op::Or, f, g, 0};
    if (auto r = lookup(k)) return *r;
    tick();
    std::uint32_t top = std::min(lvl(f), lvl(g));
    auto [f0, f1] = cofactors(f, top);
    auto [g0, g1] = cofactors(g, top);
    NodeIndex lo = or_rec(f0, g0);
    NodeIndex hi = or_rec(f1, g1);
    return store(k, mk(top, lo, hi));
  }

  NodeIndex xor_rec(NodeIndex f, NodeIndex g) {
    if (f == g) return 0;
    if (f == 0) return g;
    if (g == 0) return f;
    if (f <= 1 && g <= 1) return f ^ g;
    if (f > g) std::swap(f, g);
    CacheKey k{Op::Xor, f, g, 0};
    if (auto r = lookup(k)) return *r;
    tick();
    std::uint32_t top = std::min(lvl(f), lvl(g));
    auto [f0, f1] = cofactors(f, top);
    auto [g0, g1] = cofactors(g, top);
    NodeIndex lo = xor_rec(f0, g0);
    NodeIndex hi = xor_rec(f1, g1);
    return store(k, mk(top, lo, hi));
  }

  NodeIndex ite_rec(NodeIndex f, NodeIndex g, NodeIndex h) {
    if (f == 1) return g;
    if (f == 0) return h;
    if (g == h) return g;
    if (g == 1 && h == 0) return f;
    if (g == 1) return or_rec(f, h);
    if (h == 0) return and_rec(f, g);
    CacheKey k{Op::Ite, f, g, h};
    if (auto r = lookup(k)) return *r;
    tick();
    std::uint32_t top = std::min({lvl(f), lvl(g), lvl(h)});
    auto [f0, f1] = cofactors(f, top);
    auto [g0, g1] = cofactors(g, top);
    auto [h0, h1] = cofactors(h, top);
    NodeIndex lo = ite_rec(f0, g0, h0);
    NodeIndex hi = ite_rec(f1, g1, h1);
    return store(k, mk(top, lo, hi));
  }

  // `cube` is a positive conjunction: low child FALSE, high child the rest.
  NodeIndex exists_rec(NodeIndex f, NodeIndex cube) {
    while (cube > 1 && lvl(cube) < lvl(f)) cube = nodes_[cube].high;
    if (f <= 1 || cube == 1) return f;
    CacheKey k{Op::Exists, f, cube, 0};
    if (auto r = lookup(k)) return *r;
    tick();
    const Node nd = nodes_[f];
    NodeIndex r;
    if (nd.level == lvl(cube)) {
      NodeIndex rest = nodes_[cube].high;
      NodeIndex lo = exists_rec(nd.low, rest);
      r = lo == 1 ? 1 : or_rec(lo, exists_rec(nd.high, rest));
    } else {
      NodeIndex lo = exists_rec(nd.low, cube);
      NodeIndex hi = exists_rec(nd.high, cube);
      r = mk(nd.level, lo, hi);
    }
    return store(k, r);
  }

  NodeIndex restrict_rec(NodeIndex f, std::uint32_t level, bool b) {
    if (lvl(f) > level) return f;
    const Node nd = nodes_[f];
    if (nd.level == level) return b ? nd.high : nd.low;
    CacheKey k{b ? Op::Restrict1 : Op::Restrict0, f, level, 0};
    if (auto r = lookup(k)) return *r;
    tick();
    NodeIndex lo = restrict_rec(nd.low, level, b);
    NodeIndex hi = restrict_rec(nd.high, level, b);
    return store(k, mk(nd.level, lo, hi));
  }

  NodeIndex compose_rec(NodeIndex f, std::uint32_t level, NodeIndex g) {
    if (lvl(f) > level) return f;
    const Node nd = nodes_[f];
    if (nd.level == level) return ite_rec(g, nd.high, nd.low);
    CacheKey k{Op::Compose, f, level, g};
    if (auto r = lookup(k)) return *r;
    tick();
    NodeIndex lo = compose_rec(nd.low, level, g);
    NodeIndex hi = compose_rec(nd.high, level, g);
    // g may mention variables above nd.level, so rebuild through ite.
    NodeIndex top = mk(nd.level, 0, 1);
    return store(k, ite_rec(top, hi, lo));
  }

  std::vector<NodeIndex> reachable(NodeIndex root) const {
    std::vector<NodeIndex> out, stack{root};
    std::vector<bool> seen(nodes_.size(), false);
    while (!stack.empty()) {
      NodeIndex n = stack.back();
      stack.pop_back();
      if (seen[n]) continue;
      seen[n] = true;
      out.push_back(n);
      if (n > 1) {
        stack.push_back(nodes_[n].low);
        stack.push_back(nodes_[n].high);
      }
    }
    return out;
  }

  std::vector<VarId> order_;
  std::unordered_map<VarId, std::uint32_t> level_of_;
  std::vector<Node> nodes_;
  std::unordered_map<Triple, NodeIndex, TripleHash> unique_;
  std::unordered_map<CacheKey, NodeIndex, KeyHash> cache_;
  std::size_t cache_limit_ = 0;
  std::optional<std::chrono::steady_clock::time_point> deadline_;
  std::uint64_t ticks_ = 0;
};

inline Bdd Bdd::operator&(const Bdd &rhs) const {
  if (!mgr_) throw ManagerMismatch();
  return mgr_->apply_and(*this, rhs);
}
inline Bdd Bdd::operator|(const Bdd &rhs) const {
  if (!mgr_) throw ManagerMismatch();
  return mgr_->apply_or(*this, rhs);
}
inline Bdd Bdd::operator^(const Bdd &rhs) const {
  if (!mgr_) throw ManagerMismatch();
  return mgr_->apply_xor(*this, rhs);
}
inline Bdd Bdd::operator~() const {
  if (!mgr_) throw ManagerMismatch();
  return mgr_->negate(*this);
}

} // namespace dpsynth
