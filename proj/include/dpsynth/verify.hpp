/// @file  verify.hpp
/// @brief Enumeration oracle for realizability and a BDD-level witness check

#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "dpsynth/bdd.hpp"
#include "dpsynth/cnf.hpp"
#include "dpsynth/realizability.hpp"
#include "dpsynth/synthesis.hpp"

namespace dpsynth {

class TooLarge : public std::runtime_error {
public:
  TooLarge(std::size_t vars, std::size_t bound)
      : std::runtime_error("TooLarge: " + std::to_string(vars) +
                           " variables exceed the enumeration bound " + std::to_string(bound)) {}
};

class SupportViolation : public std::runtime_error {
public:
  SupportViolation(VarId y, VarId offender)
      : std::runtime_error("SupportViolation: witness for " + std::to_string(y.id) +
                           " depends on output " + std::to_string(offender.id)) {}
};

inline constexpr std::size_t kDefaultOracleBound = 20;

struct OracleResult {
  Verdict verdict = Verdict::Nullary;
  std::set<Assignment> realizable_inputs;
  std::uint64_t input_space = 0; // 2^|X|
};

namespace detail {

/// Clause evaluation over bitmask assignments; bit i is variable vars[i].
class ClauseMatrix {
public:
  ClauseMatrix(const SynthesisProblem &p, const std::vector<VarId> &vars) {
    for (const auto &c : p.clauses) {
      std::uint64_t pos = 0, neg = 0;
      for (auto l : c.literals) {
        auto it = std::find(vars.begin(), vars.end(), l.var);
        std::uint64_t bit = std::uint64_t{1} << (it - vars.begin());
        (l.negated ? neg : pos) |= bit;
      }
      clauses_.emplace_back(pos, neg);
    }
  }
  [[nodiscard]] bool eval(std::uint64_t a) const {
    for (auto [pos, neg] : clauses_)
      if ((a & pos) == 0 && (~a & neg) == 0) return false;
    return true;
  }

private:
  std::vector<std::pair<std::uint64_t, std::uint64_t>> clauses_;
};

inline Assignment unpack(const std::vector<VarId> &vars, std::uint64_t bits) {
  Assignment a;
  for (std::size_t i = 0; i < vars.size(); ++i) a[vars[i]] = (bits >> i) & 1;
  return a;
}

} // namespace detail

/// Realizability by full enumeration of 2^(|X|+|Y|) assignments.
inline OracleResult oracle_realizability(const SynthesisProblem &p,
                                         std::size_t bound = kDefaultOracleBound) {
  const std::size_t nx = p.inputs.size(), ny = p.outputs.size();
  if (nx + ny > bound || nx + ny > 62) throw TooLarge(nx + ny, bound);
  auto vars = p.variables(); // inputs occupy the low bits
  detail::ClauseMatrix matrix(p, vars);

  OracleResult r;
  r.input_space = std::uint64_t{1} << nx;
  for (std::uint64_t x = 0; x < r.input_space; ++x) {
    for (std::uint64_t y = 0; y < (std::uint64_t{1} << ny); ++y) {
      if (matrix.eval(x | (y << nx))) {
        r.realizable_inputs.insert(detail::unpack(p.inputs, x));
        break;
      }
    }
  }
  r.verdict = r.realizable_inputs.empty()                    ? Verdict::Nullary
              : r.realizable_inputs.size() == r.input_space ? Verdict::Fully
                                                             : Verdict::Partially;
  return r;
}

struct WitnessReport {
  bool ok = false;
  std::optional<Assignment> counterexample; // over X
  std::uint64_t checked_count = 0;          // inputs in R covered by the check
  bool enumerated = false;                  // enumeration cross-check ran
};

/// Composes every witness into phi and checks that R implies the result.
/// The counterexample, if any, is the smallest failing input in the
/// manager's order. Within `enumeration_bound`, every input of R is also
/// replayed against the clauses directly.
inline WitnessReport verify_witnesses(BddManager &m, const SynthesisProblem &p, const Bdd &r,
                                      const WitnessMap &w,
                                      std::size_t enumeration_bound = kDefaultOracleBound) {
  for (auto y : p.outputs)
    if (!w.witnesses.count(y))
      throw std::invalid_argument("no witness for output " + std::to_string(y.id));
  for (const auto &[y, g] : w.witnesses)
    for (auto v : m.support(g))
      if (!p.is_input(v)) throw SupportViolation(y, v);

  Bdd f = m.bdd_true();
  for (const auto &c : p.clauses) f &= m.clause(c);
  for (const auto &[y, g] : w.witnesses) f = m.compose(f, y, g);
  Bdd bad = m.apply_and(r, m.negate(f));

  WitnessReport rep;
  rep.ok = bad.is_false();
  if (!rep.ok) rep.counterexample = m.min_satisfying(bad, p.inputs);
  rep.checked_count = static_cast<std::uint64_t>(m.sat_count(r, p.inputs));

  const std::size_t nx = p.inputs.size();
  if (nx + p.outputs.size() <= enumeration_bound && nx <= 62) {
    rep.enumerated = true;
    auto vars = p.variables();
    detail::ClauseMatrix matrix(p, vars);
    bool enum_ok = true;
    for (std::uint64_t x = 0; x < (std::uint64_t{1} << nx); ++x) {
      Assignment a = detail::unpack(p.inputs, x);
      if (!m.eval(r, a)) continue;
      std::uint64_t bits = x;
      std::size_t i = nx;
      for (auto y : p.outputs) {
        if (m.eval(w.at(y), a)) bits |= std::uint64_t{1} << i;
        ++i;
      }
      if (!matrix.eval(bits)) {
        enum_ok = false;
        break;
      }
    }
    if (enum_ok != rep.ok)
      throw std::logic_error("witness check disagrees with enumeration");
  }
  return rep;
}

inline nlohmann::json to_json(const WitnessReport &r) {
  nlohmann::json j{{"ok", r.ok}, {"checked_count", r.checked_count}, {"enumerated", r.enumerated}};
  if (r.counterexample) {
    nlohmann::json cx = nlohmann::json::object();
    for (const auto &[v, b] : *r.counterexample) cx[std::to_string(v.id)] = b ? 1 : 0;
    j["counterexample"] = cx;
  } else {
    j["counterexample"] = nullptr;
  }
  return j;
}

} // namespace dpsynth
