#pragma once

#include <stdexcept>
#include <string>
#include <unordered_map>

#include <json.hpp>

#include "dpsynth/bdd.hpp"

namespace dpsynth {

/// Expression tree for f: {"type":"const","value":b}, {"type":"var","var":v},
/// {"type":"not","arg":e} or {"type":"ite","var":v,"hi":e,"lo":e}.
/// Shared subdiagrams are expanded.
inline nlohmann::json to_expr_json(const BddManager &m, const Bdd &f) {
  using nlohmann::json;
  std::unordered_map<NodeIndex, json> memo;
  auto rec = [&](auto &&self, NodeIndex n) -> json {
    if (n <= 1) return json{{"type", "const"}, {"value", n == 1}};
    if (auto it = memo.find(n); it != memo.end()) return it->second;
    const auto &nd = m.node(n);
    auto v = m.var_at(nd.level).id;
    json out;
    if (nd.low == 0 && nd.high == 1)
      out = json{{"type", "var"}, {"var", v}};
    else if (nd.low == 1 && nd.high == 0)
      out = json{{"type", "not"}, {"arg", json{{"type", "var"}, {"var", v}}}};
    else
      out = json{{"type", "ite"}, {"var", v}, {"hi", self(self, nd.high)}, {"lo", self(self, nd.low)}};
    memo.emplace(n, out);
    return out;
  };
  return rec(rec, f.id());
}

/// Inverse of to_expr_json; also accepts "and"/"or" nodes with an "args" array.
inline Bdd from_expr_json(BddManager &m, const nlohmann::json &e) {
  const std::string type = e.at("type").get<std::string>();
  if (type == "const") return m.constant(e.at("value").get<bool>());
  if (type == "var") return m.var(VarId(e.at("var").get<std::uint32_t>()));
  if (type == "not") return m.negate(from_expr_json(m, e.at("arg")));
  if (type == "ite")
    return m.ite(m.var(VarId(e.at("var").get<std::uint32_t>())), from_expr_json(m, e.at("hi")),
                 from_expr_json(m, e.at("lo")));
  if (type == "and" || type == "or") {
    Bdd acc = m.constant(type == "and");
    for (const auto &a : e.at("args"))
      acc = type == "and" ? m.apply_and(acc, from_expr_json(m, a))
                          : m.apply_or(acc, from_expr_json(m, a));
    return acc;
  }
  throw std::invalid_argument("unknown expression node type `" + type + "`");
}

} // namespace dpsynth
