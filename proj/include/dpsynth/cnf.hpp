#pragma once

#include <algorithm>
#include <cctype>
#include <compare>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace dpsynth {

/// 1-based variable identifier, DIMACS convention.
struct VarId {
  std::uint32_t id = 0;

  constexpr VarId() = default;
  constexpr explicit VarId(std::uint32_t v) : id(v) {}

  friend constexpr auto operator<=>(VarId, VarId) = default;
};

struct Literal {
  VarId var;
  bool negated = false;

  friend constexpr auto operator<=>(const Literal &, const Literal &) = default;

  /// Signed DIMACS encoding.
  [[nodiscard]] std::int64_t dimacs() const {
    return negated ? -static_cast<std::int64_t>(var.id) : var.id;
  }
  [[nodiscard]] bool satisfied_by(bool value) const { return value != negated; }
};

/// A disjunction of literals, sorted by (variable, polarity) with no duplicates.
struct Clause {
  std::vector<Literal> literals;

  friend bool operator==(const Clause &, const Clause &) = default;

  [[nodiscard]] std::vector<VarId> variables() const {
    std::vector<VarId> out;
    for (auto l : literals)
      if (out.empty() || out.back() != l.var) out.push_back(l.var);
    return out;
  }
  [[nodiscard]] bool empty() const { return literals.empty(); }
  [[nodiscard]] bool tautological() const {
    for (std::size_t i = 1; i < literals.size(); ++i)
      if (literals[i].var == literals[i - 1].var) return true;
    return false;
  }

  static Clause from_literals(std::vector<Literal> lits) {
    std::sort(lits.begin(), lits.end());
    lits.erase(std::unique(lits.begin(), lits.end()), lits.end());
    return Clause{std::move(lits)};
  }
  static Clause from_dimacs(std::initializer_list<int> lits) {
    std::vector<Literal> v;
    for (int l : lits)
      v.push_back(Literal{VarId(static_cast<std::uint32_t>(std::abs(l))), l < 0});
    return from_literals(std::move(v));
  }
};

/// phi(X, Y): a CNF over inputs X and outputs Y.
struct SynthesisProblem {
  std::vector<VarId> inputs;   // sorted
  std::vector<VarId> outputs;  // sorted
  std::vector<Clause> clauses; // file order; index is the leaf identity

  friend bool operator==(const SynthesisProblem &, const SynthesisProblem &) = default;

  [[nodiscard]] bool is_input(VarId v) const {
    return std::binary_search(inputs.begin(), inputs.end(), v);
  }
  [[nodiscard]] bool is_output(VarId v) const {
    return std::binary_search(outputs.begin(), outputs.end(), v);
  }
  /// All variables, inputs first then outputs.
  [[nodiscard]] std::vector<VarId> variables() const {
    std::vector<VarId> all = inputs;
    all.insert(all.end(), outputs.begin(), outputs.end());
    return all;
  }
  /// Variables that occur in at least one clause, ascending.
  [[nodiscard]] std::vector<VarId> used_variables() const {
    std::set<VarId> s;
    for (const auto &c : clauses)
      for (auto l : c.literals) s.insert(l.var);
    return {s.begin(), s.end()};
  }
  [[nodiscard]] std::vector<VarId> used_outputs() const {
    std::vector<VarId> out;
    for (auto v : used_variables())
      if (is_output(v)) out.push_back(v);
    return out;
  }

  /// Checks the partition and closure invariants; throws std::invalid_argument.
  void check() const {
    auto sorted_unique = [](const std::vector<VarId> &v) {
      return std::is_sorted(v.begin(), v.end()) &&
             std::adjacent_find(v.begin(), v.end()) == v.end();
    };
    if (!sorted_unique(inputs) || !sorted_unique(outputs))
      throw std::invalid_argument("variable lists must be sorted and unique");
    for (auto v : inputs)
      if (v.id == 0 || is_output(v))
        throw std::invalid_argument("variable " + std::to_string(v.id) +
                                    " is both input and output");
    for (const auto &c : clauses)
      for (auto l : c.literals)
        if (!is_input(l.var) && !is_output(l.var))
          throw std::invalid_argument("clause mentions unquantified variable " +
                                      std::to_string(l.var.id));
  }
};

enum class ParseErrc { MalformedHeader, QuantifierOrderViolation, UndeclaredVariable };

class ParseError : public std::runtime_error {
public:
  ParseError(ParseErrc code, std::size_t line, const std::string &what)
      : std::runtime_error(name(code) + " (line " + std::to_string(line) + "): " + what),
        code_(code), line_(line) {}

  [[nodiscard]] ParseErrc code() const noexcept { return code_; }
  [[nodiscard]] std::size_t line() const noexcept { return line_; }

  static std::string name(ParseErrc c) {
    switch (c) {
    case ParseErrc::MalformedHeader: return "MalformedHeader";
    case ParseErrc::QuantifierOrderViolation: return "QuantifierOrderViolation";
    case ParseErrc::UndeclaredVariable: return "UndeclaredVariable";
    }
    return "ParseError";
  }

private:
  ParseErrc code_;
  std::size_t line_;
};

namespace detail {

inline bool parse_int(std::string_view tok, std::int64_t &out) {
  if (tok.empty()) return false;
  std::size_t i = 0;
  bool neg = false;
  if (tok[0] == '-' || tok[0] == '+') {
    neg = tok[0] == '-';
    i = 1;
  }
  if (i == tok.size()) return false;
  std::int64_t v = 0;
  for (; i < tok.size(); ++i) {
    if (tok[i] < '0' || tok[i] > '9') return false;
    v = v * 10 + (tok[i] - '0');
    if (v > (std::int64_t{1} << 40)) return false;
  }
  out = neg ? -v : v;
  return true;
}

inline std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    std::size_t j = i;
    while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

} // namespace detail

/// Parses a 2QBF in QDIMACS form (at most one `a` block, then at most one `e`
/// block). Free variables become inputs. Tautologies are dropped and reported
/// through `warnings` when given.
inline SynthesisProblem parse_qdimacs(std::string_view text,
                                      std::vector<std::string> *warnings = nullptr) {
  auto warn = [&](std::string msg) {
    if (warnings) warnings->push_back(std::move(msg));
  };

  std::int64_t nvars = -1, nclauses = -1;
  enum class Stage { Header, Prefix, Matrix } stage = Stage::Header;
  bool seen_a = false, seen_e = false;
  std::set<VarId> universal, existential;
  std::vector<Clause> clauses;
  std::vector<Literal> current;
  bool clause_open = false;
  std::size_t read_clauses = 0;

  std::size_t lineno = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++lineno;

    auto toks = detail::split_ws(line);
    if (toks.empty()) {
      if (end == text.size()) break;
      continue;
    }
    if (toks[0][0] == 'c') continue;

    if (toks[0] == "p") {
      if (stage != Stage::Header)
        throw ParseError(ParseErrc::MalformedHeader, lineno, "duplicate problem line");
      if (toks.size() != 4 || toks[1] != "cnf" || !detail::parse_int(toks[2], nvars) ||
          !detail::parse_int(toks[3], nclauses) || nvars < 0 || nclauses < 0)
        throw ParseError(ParseErrc::MalformedHeader, lineno,
                         "expected `p cnf <nvars> <nclauses>`");
      stage = Stage::Prefix;
      continue;
    }
    if (stage == Stage::Header)
      throw ParseError(ParseErrc::MalformedHeader, lineno, "content before problem line");

    auto read_var = [&](std::string_view tok, std::int64_t &v) {
      if (!detail::parse_int(tok, v))
        throw ParseError(ParseErrc::MalformedHeader, lineno,
                         "bad integer `" + std::string(tok) + "`");
      if (std::abs(v) > nvars)
        throw ParseError(ParseErrc::UndeclaredVariable, lineno,
                         "variable " + std::to_string(std::abs(v)) + " exceeds nvars " +
                             std::to_string(nvars));
    };

    if (toks[0] == "a" || toks[0] == "e") {
      bool is_a = toks[0] == "a";
      if (stage == Stage::Matrix)
        throw ParseError(ParseErrc::QuantifierOrderViolation, lineno,
                         "quantifier block after clauses");
      if (is_a && (seen_a || seen_e))
        throw ParseError(ParseErrc::QuantifierOrderViolation, lineno,
                         seen_e ? "universal block after existential block"
                                : "more than one universal block");
      if (!is_a && seen_e)
        throw ParseError(ParseErrc::QuantifierOrderViolation, lineno,
                         "more than one existential block");
      (is_a ? seen_a : seen_e) = true;
      bool terminated = false;
      for (std::size_t i = 1; i < toks.size(); ++i) {
        std::int64_t v;
        read_var(toks[i], v);
        if (v == 0) {
          terminated = i + 1 == toks.size();
          if (!terminated)
            throw ParseError(ParseErrc::MalformedHeader, lineno,
                             "tokens after quantifier terminator");
          break;
        }
        if (v < 0)
          throw ParseError(ParseErrc::MalformedHeader, lineno, "negative quantified variable");
        VarId id(static_cast<std::uint32_t>(v));
        if (universal.count(id) || existential.count(id))
          throw ParseError(ParseErrc::QuantifierOrderViolation, lineno,
                           "variable " + std::to_string(v) + " quantified twice");
        (is_a ? universal : existential).insert(id);
      }
      if (!terminated)
        throw ParseError(ParseErrc::MalformedHeader, lineno, "quantifier line lacks 0");
      continue;
    }

    stage = Stage::Matrix;
    for (auto tok : toks) {
      std::int64_t v;
      read_var(tok, v);
      if (v == 0) {
        ++read_clauses;
        Clause c = Clause::from_literals(std::move(current));
        current.clear();
        clause_open = false;
        if (c.tautological()) {
          warn("dropped tautological clause #" + std::to_string(read_clauses));
        } else {
          clauses.push_back(std::move(c));
        }
        continue;
      }
      clause_open = true;
      current.push_back(Literal{VarId(static_cast<std::uint32_t>(std::abs(v))), v < 0});
    }
  }

  if (stage == Stage::Header)
    throw ParseError(ParseErrc::MalformedHeader, lineno, "missing problem line");
  if (clause_open)
    throw ParseError(ParseErrc::MalformedHeader, lineno, "last clause lacks terminating 0");
  if (static_cast<std::int64_t>(read_clauses) != nclauses)
    warn("header declares " + std::to_string(nclauses) + " clauses, found " +
         std::to_string(read_clauses));

  SynthesisProblem p;
  p.outputs.assign(existential.begin(), existential.end());
  std::set<VarId> inputs = universal;
  std::size_t free_count = 0;
  for (std::uint32_t v = 1; v <= static_cast<std::uint32_t>(nvars); ++v) {
    VarId id(v);
    if (!universal.count(id) && !existential.count(id)) {
      inputs.insert(id);
      ++free_count;
    }
  }
  if (free_count > 0)
    warn(std::to_string(free_count) + " free variable(s) treated as inputs");
  p.inputs.assign(inputs.begin(), inputs.end());
  p.clauses = std::move(clauses);
  return p;
}

/// QDIMACS text for `p`, newline-terminated.
inline std::string to_qdimacs(const SynthesisProblem &p, std::string_view comment = {}) {
  std::ostringstream os;
  if (!comment.empty()) {
    std::istringstream lines{std::string(comment)};
    for (std::string l; std::getline(lines, l);) os << "c " << l << '\n';
  }
  std::uint32_t maxvar = 0;
  for (auto v : p.inputs) maxvar = std::max(maxvar, v.id);
  for (auto v : p.outputs) maxvar = std::max(maxvar, v.id);
  os << "p cnf " << maxvar << ' ' << p.clauses.size() << '\n';
  if (!p.inputs.empty()) {
    os << 'a';
    for (auto v : p.inputs) os << ' ' << v.id;
    os << " 0\n";
  }
  if (!p.outputs.empty()) {
    os << 'e';
    for (auto v : p.outputs) os << ' ' << v.id;
    os << " 0\n";
  }
  for (const auto &c : p.clauses) {
    for (auto l : c.literals) os << l.dimacs() << ' ';
    os << "0\n";
  }
  return os.str();
}

/// Indices of clauses whose variables all lie in X.
inline std::vector<std::size_t> pure_x_clauses(const SynthesisProblem &p) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < p.clauses.size(); ++i) {
    const auto &lits = p.clauses[i].literals;
    if (std::all_of(lits.begin(), lits.end(), [&](Literal l) { return p.is_input(l.var); }))
      out.push_back(i);
  }
  return out;
}

/// `x3`/`y5` naming by role; used in DOT output and diagnostics.
inline std::string var_name(const SynthesisProblem &p, VarId v) {
  return (p.is_output(v) ? "y" : "x") + std::to_string(v.id);
}

inline std::string clause_text(const SynthesisProblem &p, const Clause &c) {
  if (c.empty()) return "⊥";
  std::string s;
  for (std::size_t i = 0; i < c.literals.size(); ++i) {
    if (i) s += " ∨ ";
    if (c.literals[i].negated) s += "¬";
    s += var_name(p, c.literals[i].var);
  }
  return s;
}

} // namespace dpsynth

template <> struct std::hash<dpsynth::VarId> {
  std::size_t operator()(dpsynth::VarId v) const noexcept { return std::hash<std::uint32_t>{}(v.id); }
};
