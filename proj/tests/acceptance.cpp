// Acceptance checks. One line per criterion; nonzero exit if any fails.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>

#include "support/fixtures.hpp"

using namespace dpsynth;
using namespace dpsynth::testing;
namespace fs = std::filesystem;

namespace {

struct Check {
  bool ok = true;
  std::string detail;

  void fail(const std::string &why) {
    if (ok) detail = why;
    ok = false;
  }
};

bool same_table(const BddManager &m, const Bdd &f, const Table &t) {
  return table_of(m, f, t.vars).bits == t.bits;
}

// AC1: example tree on the running example, exact witness BDDs, under 1 s.
Check golden_running_example() {
  Check c;
  const auto start = std::chrono::steady_clock::now();
  auto p = running_example();
  SolveOptions opt;
  opt.plan = example_tree();
  auto r = solve(p, opt, "running_example");
  BddManager &m = *r.manager;
  Bdd x1 = m.var(v(1)), x2 = m.var(v(2)), x3 = m.var(v(3));
  if (r.verdict != Verdict::Fully) c.fail("verdict " + std::string(to_string(r.verdict)));
  if (!r.realizability_set.is_true()) c.fail("R is not TRUE");
  if (!r.witnesses) return c.fail("no witnesses"), c;
  if (!r.witnesses->at(v(6)).is_true()) c.fail("W_y6 != 1");
  if (r.witnesses->at(v(5)) != ((x1 & x2) | ~x3)) c.fail("W_y5 != (x1 & x2) | !x3");
  if (r.witnesses->at(v(4)) != (x1 | ~x3)) c.fail("W_y4 != x1 | !x3");
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (secs >= 1.0) c.fail("took " + std::to_string(secs) + " s");
  c.detail = c.ok ? "verdict fully, 3 witnesses exact" : c.detail;
  return c;
}

// AC2 and AC3 share the random corpus.
struct RandomRun {
  Check realizability, witnesses;
  std::size_t instances = 0, verified = 0;
};

RandomRun random_corpus(std::size_t count) {
  RandomRun out;
  std::mt19937_64 rng(test_seed(7331));
  const RandomSpec spec{1, 6, 1, 6, 1, 30, 4};
  std::size_t by_verdict[3] = {0, 0, 0};
  for (std::size_t i = 0; i < count; ++i) {
    auto p = random_problem(rng, spec);
    const auto truth = realizable_inputs(p);
    std::size_t realizable = 0;
    for (bool b : truth) realizable += b;
    const Verdict expect = realizable == 0                ? Verdict::Nullary
                           : realizable == truth.size() ? Verdict::Fully
                                                        : Verdict::Partially;
    ++by_verdict[static_cast<int>(expect)];
    for (auto engine : {EngineKind::DpSynth, EngineKind::Baseline})
      for (auto planner : {PlannerKind::TreeDecomposition, PlannerKind::Bucket}) {
        if (engine == EngineKind::Baseline && planner == PlannerKind::Bucket) continue;
        SolveOptions opt;
        opt.engine = engine;
        opt.planner = planner;
        SolveResult r;
        try {
          r = solve(p, opt);
        } catch (const std::exception &e) {
          out.realizability.fail(std::string("exception: ") + e.what());
          continue;
        }
        const std::string tag = std::string(to_string(engine)) + "/" + to_string(planner) +
                                " instance " + std::to_string(i);
        if (r.verdict != expect) out.realizability.fail(tag + ": wrong verdict");
        for (std::uint64_t x = 0; x < truth.size(); ++x)
          if (r.manager->eval(r.realizability_set, input_row(p, x)) != truth[x]) {
            out.realizability.fail(tag + ": R differs at input " + std::to_string(x));
            break;
          }
        if (expect == Verdict::Nullary) {
          if (r.witnesses) out.witnesses.fail(tag + ": witnesses on a nullary instance");
          continue;
        }
        if (!r.witnesses) {
          out.witnesses.fail(tag + ": no witnesses");
          continue;
        }
        try {
          auto rep = verify_witnesses(*r.manager, p, r.realizability_set, *r.witnesses,
                                      kDefaultOracleBound);
          if (!rep.ok || !rep.enumerated) out.witnesses.fail(tag + ": witness check failed");
          ++out.verified;
        } catch (const std::exception &e) {
          out.witnesses.fail(tag + ": " + e.what());
        }
      }
    ++out.instances;
  }
  std::ostringstream os;
  os << out.instances << " instances (fully " << by_verdict[0] << ", partially " << by_verdict[1]
     << ", nullary " << by_verdict[2] << "), 3 configurations each";
  if (out.realizability.ok) out.realizability.detail = os.str();
  if (out.witnesses.ok)
    out.witnesses.detail = std::to_string(out.verified) + " witness sets verified by BDD and enumeration";
  return out;
}

// AC4: named post-valuations on the example tree, then truth-table valuations
// on random trees.
Check valuations() {
  Check c;
  {
    auto p = running_example();
    auto t = example_tree();
    BddManager m(bdd_variable_order(p));
    auto out = check_realizability(m, p, t, clause_bdds(m, p));
    Bdd x1 = m.var(v(1)), x3 = m.var(v(3)), y5 = m.var(v(5));
    if (out.valuations.at(node_of(6)).post != (x1 | ~y5 | ~x3)) c.fail("post(6)");
    if (!out.valuations.at(node_of(7)).post.is_true()) c.fail("post(7)");
    if (!out.valuations.at(node_of(9)).post.is_true()) c.fail("post(9)");
  }
  std::mt19937_64 rng(test_seed(4242));
  std::size_t trees = 0, nodes = 0;
  while (trees < 200) {
    auto p = random_problem(rng, RandomSpec{1, 6, 1, 6, 1, 20, 4});
    auto t = trees % 2 ? bucket_elimination_tree(p, random_bucket_order(p, rng))
                       : make_plan(p, PlannerKind::TreeDecomposition);
    BddManager m(bdd_variable_order(p));
    auto out = check_realizability(m, p, t, clause_bdds(m, p));
    auto tables = table_valuations(p, t);
    ++trees;
    if (out.early_nullary) continue;
    for (NodeId n : t.postorder()) {
      const NodeValuation *val = nullptr;
      if (out.valuations.has(n)) val = &out.valuations.at(n);
      else if (out.x_valuations.has(n) && !t.is_leaf(n)) val = &out.x_valuations.at(n);
      if (!val) continue;
      ++nodes;
      if (!same_table(m, val->pre, tables.pre[n]) || !same_table(m, val->post, tables.post[n]))
        c.fail("tree " + std::to_string(trees) + " node " + std::to_string(n));
    }
  }
  if (c.ok)
    c.detail = "post(6), post(7), post(9) exact; " + std::to_string(nodes) + " nodes on " +
               std::to_string(trees) + " random trees";
  return c;
}

// AC5: on the criterion-2 corpus, each Y-grade node's pre-valuation mentions
// only outputs labeled at the node or above it. Once synthesis has substituted
// the ancestors' witnesses, only the node's own label is left, and every
// witness depends on inputs alone.
Check top_down_support(std::size_t count) {
  Check c;
  std::mt19937_64 rng(test_seed(7331));
  const RandomSpec spec{1, 6, 1, 6, 1, 30, 4};
  std::size_t steps = 0, trees = 0;
  auto check_tree = [&](const SynthesisProblem &p, const GradedProjectJoinTree &t) {
    BddManager m(bdd_variable_order(p));
    auto out = check_realizability(m, p, t, clause_bdds(m, p));
    if (out.verdict == Verdict::Nullary) return;
    std::vector<SynthStep> trace;
    auto w = dp_synth(m, p, t, out, &trace);
    ++trees;
    const auto par = t.parents();
    for (const auto &s : trace) {
      ++steps;
      std::set<VarId> own(t[s.node].label.begin(), t[s.node].label.end());
      std::set<VarId> upward = own;
      for (auto a = par[s.node]; a; a = par[*a]) upward.insert(t[*a].label.begin(), t[*a].label.end());
      for (auto x : m.support(out.valuations.at(s.node).pre))
        if (p.is_output(x) && !upward.count(x))
          c.fail("pre(" + std::to_string(s.node) + ") mentions output " + std::to_string(x.id));
      for (auto x : s.pre_support)
        if (p.is_output(x) && !own.count(x))
          c.fail("substituted pre(" + std::to_string(s.node) + ") mentions output " +
                 std::to_string(x.id));
    }
    for (const auto &[y, g] : w.witnesses)
      for (auto x : m.support(g))
        if (!p.is_input(x)) c.fail("witness for " + std::to_string(y.id) + " mentions an output");
  };
  check_tree(running_example(), example_tree());
  for (std::size_t i = 0; i < count; ++i) {
    auto p = random_problem(rng, spec);
    check_tree(p, make_plan(p, PlannerKind::TreeDecomposition));
    check_tree(p, make_plan(p, PlannerKind::Bucket));
  }
  if (c.ok) c.detail = std::to_string(steps) + " synthesis steps on " + std::to_string(trees) + " trees";
  return c;
}

// AC6: BDD operations against truth tables, plus canonicity under random orders.
Check bdd_operations() {
  Check c;
  std::mt19937_64 rng(test_seed(6161));
  std::size_t ops = 0;
  auto bits_of = [&](std::size_t n) {
    std::vector<std::uint8_t> b(std::size_t{1} << n);
    for (auto &x : b) x = rng() & 1;
    return b;
  };
  std::function<Bdd(BddManager &, const std::vector<VarId> &, const std::vector<std::uint8_t> &,
                    std::size_t, std::uint64_t)>
      build = [&](BddManager &m, const std::vector<VarId> &vs, const std::vector<std::uint8_t> &b,
                  std::size_t d, std::uint64_t pre) -> Bdd {
    if (d == vs.size()) return m.constant(b[pre]);
    return m.ite(m.var(vs[d]), build(m, vs, b, d + 1, pre | (std::uint64_t{1} << d)),
                 build(m, vs, b, d + 1, pre));
  };

  while (ops < 10000) {
    const std::size_t n = 1 + rng() % 6;
    std::vector<VarId> vs;
    for (std::uint32_t i = 1; i <= n; ++i) vs.push_back(v(i));
    std::vector<VarId> order = vs;
    std::shuffle(order.begin(), order.end(), rng);
    BddManager m(order);
    auto fa = bits_of(n), fb = bits_of(n);
    Bdd a = build(m, vs, fa, 0, 0), b = build(m, vs, fb, 0, 0);
    const VarId q = vs[rng() % n];
    const std::uint64_t qm = std::uint64_t{1} << (q.id - 1);
    Bdd results[] = {a & b, a | b, a ^ b, ~a, m.exists(a, {q}), m.compose(a, q, b),
                     m.restrict(a, q, true), m.ite(a, b, ~b)};
    for (std::uint64_t r = 0; r < fa.size(); ++r) {
      Assignment asg;
      for (std::size_t i = 0; i < n; ++i) asg[vs[i]] = (r >> i) & 1;
      const bool A = fa[r], B = fb[r];
      const bool want[] = {A && B, A || B, A != B, !A, fa[r & ~qm] || fa[r | qm],
                           static_cast<bool>(fa[B ? (r | qm) : (r & ~qm)]),
                           static_cast<bool>(fa[r | qm]), A ? B : !B};
      for (std::size_t k = 0; k < std::size(want); ++k)
        if (m.eval(results[k], asg) != want[k]) c.fail("op " + std::to_string(k) + " wrong");
    }
    ops += std::size(results);

    // Canonicity: rebuilding gives the same node; equal tables give equal ids.
    if (build(m, vs, fa, 0, 0) != a) c.fail("rebuild is not canonical");
    if ((fa == fb) != (a == b)) c.fail("equality disagrees with tables");
    if (~~a != a) c.fail("double negation");
    // Ordering: every edge goes strictly down in level.
    std::vector<NodeIndex> stack{a.id()};
    std::set<NodeIndex> seen;
    while (!stack.empty()) {
      auto i = stack.back();
      stack.pop_back();
      if (i <= 1 || !seen.insert(i).second) continue;
      const auto &nd = m.node(i);
      for (auto ch : {nd.low, nd.high})
        if (ch > 1 && m.node(ch).level <= nd.level) c.fail("edge does not descend");
      if (nd.low == nd.high) c.fail("redundant node");
      stack.push_back(nd.low);
      stack.push_back(nd.high);
    }
    ops += 3;
  }
  if (c.ok) c.detail = std::to_string(ops) + " operation instances on up to 6 variables";
  return c;
}

// AC7: both engines complete on the bundled corpus and report their numbers;
// the example tree has width 4.
Check benchmark_corpus() {
  Check c;
  std::vector<fs::path> files;
  for (const auto &e : fs::directory_iterator(fs::path(DPSYNTH_FIXTURES) / "bench"))
    if (e.path().extension() == ".qdimacs") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  if (files.size() < 10) c.fail("only " + std::to_string(files.size()) + " bench instances");
  std::size_t runs = 0;
  for (const auto &f : files) {
    std::ifstream in(f);
    std::stringstream ss;
    ss << in.rdbuf();
    auto p = parse_qdimacs(ss.str());
    Verdict first{};
    for (auto engine : {EngineKind::DpSynth, EngineKind::Baseline}) {
      SolveOptions opt;
      opt.engine = engine;
      opt.verify = true;
      opt.timeout_seconds = 60;
      try {
        auto r = solve(p, opt, f.filename().string());
        if (r.stats.width == 0 || r.stats.peak_nodes == 0 || r.stats.total_ms <= 0)
          c.fail(f.filename().string() + ": missing statistics");
        if (r.stats.verification == "failed") c.fail(f.filename().string() + ": witness check failed");
        if (engine == EngineKind::DpSynth) first = r.verdict;
        else if (r.verdict != first) c.fail(f.filename().string() + ": engines disagree");
        ++runs;
      } catch (const std::exception &e) {
        c.fail(f.filename().string() + " [" + to_string(engine) + "]: " + e.what());
      }
    }
  }
  const auto w = tree_width(running_example(), example_tree());
  if (w != 4) c.fail("example tree width " + std::to_string(w));
  if (c.ok)
    c.detail = std::to_string(runs) + " runs on " + std::to_string(files.size()) +
               " instances; example tree width 4";
  return c;
}

} // namespace

int main() {
  bool all = true;
  auto report = [&](const char *id, const char *what, const Check &c) {
    std::cout << (c.ok ? "PASS " : "FAIL ") << id << ' ' << what << ": " << c.detail << '\n';
    all = all && c.ok;
  };
  report("AC1", "running example with the example tree", golden_running_example());
  auto corpus = random_corpus(500);
  report("AC2", "realizability sets match enumeration", corpus.realizability);
  report("AC3", "synthesized witnesses verify", corpus.witnesses);
  report("AC4", "pre/post valuations match their definition", valuations());
  report("AC5", "pre-valuations only mention outputs at or above their node", top_down_support(500));
  report("AC6", "BDD operations are exact and canonical", bdd_operations());
  report("AC7", "benchmark corpus completes with both engines", benchmark_corpus());
  return all ? 0 : 1;
}
