/// @file  pipeline.hpp
/// @brief Plan -> realizability -> synthesis -> verification, with timings

#pragma once

#include <chrono>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "dpsynth/bdd.hpp"
#include "dpsynth/bdd_io.hpp"
#include "dpsynth/cnf.hpp"
#include "dpsynth/planner.hpp"
#include "dpsynth/realizability.hpp"
#include "dpsynth/synthesis.hpp"
#include "dpsynth/verify.hpp"

namespace dpsynth {

enum class PlannerKind { TreeDecomposition, Bucket };
enum class EngineKind { DpSynth, Baseline };

inline const char *to_string(PlannerKind k) {
  return k == PlannerKind::TreeDecomposition ? "treedecomp" : "bucket";
}
inline const char *to_string(EngineKind k) {
  return k == EngineKind::DpSynth ? "dpsynth" : "baseline";
}

/// MCS order of the Gaifman graph, then the unused variables ascending.
inline std::vector<VarId> bdd_variable_order(const SynthesisProblem &p) {
  auto order = mcs_order(build_gaifman(p));
  std::set<VarId> placed(order.begin(), order.end());
  for (auto v : p.variables())
    if (!placed.count(v)) order.push_back(v);
  return order;
}

/// Reverse MCS restricted to the used outputs, then to the used inputs.
inline std::vector<VarId> bucket_order(const SynthesisProblem &p) {
  auto mcs = mcs_order(build_gaifman(p));
  std::vector<VarId> order;
  for (auto it = mcs.rbegin(); it != mcs.rend(); ++it)
    if (p.is_output(*it)) order.push_back(*it);
  for (auto it = mcs.rbegin(); it != mcs.rend(); ++it)
    if (p.is_input(*it)) order.push_back(*it);
  return order;
}

inline GradedProjectJoinTree make_plan(const SynthesisProblem &p, PlannerKind k) {
  if (k == PlannerKind::Bucket) return bucket_elimination_tree(p, bucket_order(p));
  return decomposition_to_graded_tree(p, min_fill_decomposition(build_gaifman(p)));
}

struct SolveOptions {
  PlannerKind planner = PlannerKind::TreeDecomposition;
  EngineKind engine = EngineKind::DpSynth;
  bool verify = false;
  std::size_t max_oracle_vars = kDefaultOracleBound;
  std::optional<double> timeout_seconds;
  std::optional<GradedProjectJoinTree> plan; // overrides the planner
};

struct SolveStats {
  std::string instance;
  std::string planner;
  std::string engine;
  std::size_t width = 0;
  double plan_ms = 0, compile_ms = 0, realizability_ms = 0, synthesis_ms = 0, total_ms = 0;
  std::size_t peak_nodes = 0;
  std::string verdict;
  std::string verification = "skipped"; // skipped | ok | failed
  std::size_t r_support = 0;
  std::size_t r_nodes = 0;
};

inline nlohmann::json to_json(const SolveStats &s) {
  return nlohmann::json{{"instance", s.instance},
                        {"planner", s.planner},
                        {"engine", s.engine},
                        {"width", s.width},
                        {"plan_ms", s.plan_ms},
                        {"compile_ms", s.compile_ms},
                        {"realizability_ms", s.realizability_ms},
                        {"synthesis_ms", s.synthesis_ms},
                        {"total_ms", s.total_ms},
                        {"peak_nodes", s.peak_nodes},
                        {"verdict", s.verdict},
                        {"verification", s.verification},
                        {"r_support", s.r_support},
                        {"r_nodes", s.r_nodes}};
}

struct SolveResult {
  std::unique_ptr<BddManager> manager; // owns every Bdd below
  SolveStats stats;
  Verdict verdict = Verdict::Nullary;
  Bdd realizability_set;
  std::optional<GradedProjectJoinTree> tree; // dpsynth engine only
  std::optional<WitnessMap> witnesses;       // absent when nullary
  std::optional<WitnessReport> report;       // when verification ran
};

/// Runs the whole pipeline on one problem. Throws Timeout when the deadline
/// passes inside a BDD operation.
inline SolveResult solve(const SynthesisProblem &p, const SolveOptions &opt,
                         const std::string &name = {}) {
  using clock = std::chrono::steady_clock;
  auto ms = [](clock::duration d) { return std::chrono::duration<double, std::milli>(d).count(); };
  const auto start = clock::now();

  SolveResult res;
  res.stats.instance = name;
  res.stats.engine = to_string(opt.engine);
  res.stats.planner = opt.engine == EngineKind::Baseline ? "chain"
                      : opt.plan                         ? "given"
                                                         : to_string(opt.planner);

  auto t0 = clock::now();
  auto order = bdd_variable_order(p);
  if (opt.engine == EngineKind::DpSynth) {
    res.tree = opt.plan ? *opt.plan : make_plan(p, opt.planner);
    if (opt.plan) {
      auto problems = validate_tree(p, *res.tree);
      if (!problems.empty()) throw PlanError("supplied plan is invalid: " + problems.front().message);
    }
    res.stats.width = tree_width(p, *res.tree);
  }
  res.stats.plan_ms = ms(clock::now() - t0);

  res.manager = std::make_unique<BddManager>(order);
  BddManager &m = *res.manager;
  if (opt.timeout_seconds)
    m.set_deadline(start + std::chrono::duration_cast<clock::duration>(
                               std::chrono::duration<double>(*opt.timeout_seconds)));

  if (opt.engine == EngineKind::DpSynth) {
    t0 = clock::now();
    auto clauses = clause_bdds(m, p);
    res.stats.compile_ms = ms(clock::now() - t0);

    t0 = clock::now();
    auto outcome = check_realizability(m, p, *res.tree, clauses);
    res.stats.realizability_ms = ms(clock::now() - t0);
    res.verdict = outcome.verdict;
    res.realizability_set = outcome.realizability_set;

    if (outcome.verdict != Verdict::Nullary) {
      t0 = clock::now();
      res.witnesses = dp_synth(m, p, *res.tree, outcome);
      res.stats.synthesis_ms = ms(clock::now() - t0);
    }
  } else {
    t0 = clock::now();
    auto fr = factored_chain(m, p, file_order(p));
    res.stats.realizability_ms = ms(clock::now() - t0);
    res.stats.width = fr.width;
    res.verdict = fr.outcome.verdict;
    res.realizability_set = fr.outcome.realizability_set;
    if (res.verdict != Verdict::Nullary) {
      t0 = clock::now();
      factored_witnesses(m, p, fr);
      res.stats.synthesis_ms = ms(clock::now() - t0);
      res.witnesses = std::move(fr.witnesses);
    }
  }

  if (opt.verify && res.witnesses) {
    res.report = verify_witnesses(m, p, res.realizability_set, *res.witnesses, opt.max_oracle_vars);
    res.stats.verification = res.report->ok ? "ok" : "failed";
  }

  res.stats.total_ms = ms(clock::now() - start);
  res.stats.peak_nodes = m.peak_nodes();
  res.stats.verdict = to_string(res.verdict);
  res.stats.r_support = m.support(res.realizability_set).size();
  res.stats.r_nodes = m.node_count(res.realizability_set);
  return res;
}

/// {"inputs": [...], "outputs": [...], "witnesses": {"<y>": expr}}
inline nlohmann::json witness_json(const SynthesisProblem &p, const BddManager &m,
                                   const WitnessMap &w) {
  nlohmann::json ins = nlohmann::json::array(), outs = nlohmann::json::array();
  for (auto v : p.inputs) ins.push_back(v.id);
  for (auto v : p.outputs) outs.push_back(v.id);
  nlohmann::json ws = nlohmann::json::object();
  for (const auto &[y, g] : w.witnesses) ws[std::to_string(y.id)] = to_expr_json(m, g);
  return nlohmann::json{{"inputs", ins}, {"outputs", outs}, {"witnesses", ws}};
}

/// Reads a witness file back into `m`.
inline WitnessMap witnesses_from_json(BddManager &m, const nlohmann::json &j) {
  WitnessMap w;
  for (const auto &[key, expr] : j.at("witnesses").items())
    w.put(VarId(static_cast<std::uint32_t>(std::stoul(key))), from_expr_json(m, expr));
  return w;
}

} // namespace dpsynth
