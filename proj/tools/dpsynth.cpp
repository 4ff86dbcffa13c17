// dpsynth: command-line front end (plan / solve / bench).

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "dpsynth/dpsynth.hpp"

namespace fs = std::filesystem;
using namespace dpsynth;

namespace {

constexpr int kExitFully = 0;
constexpr int kExitError = 1;
constexpr int kExitParse = 2;
constexpr int kExitPartially = 10;
constexpr int kExitNullary = 20;
constexpr int kExitTimeout = 30;

int exit_code(Verdict v) {
  switch (v) {
  case Verdict::Fully: return kExitFully;
  case Verdict::Partially: return kExitPartially;
  case Verdict::Nullary: return kExitNullary;
  }
  return kExitError;
}

std::string slurp(const fs::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path &path, const std::string &text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

SynthesisProblem load(const fs::path &path, bool quiet = false) {
  std::vector<std::string> warnings;
  auto p = parse_qdimacs(slurp(path), &warnings);
  if (!quiet)
    for (const auto &w : warnings) std::cerr << "warning: " << w << '\n';
  return p;
}

PlannerKind planner_from(const std::string &s) {
  return s == "bucket" ? PlannerKind::Bucket : PlannerKind::TreeDecomposition;
}

struct PlanArgs {
  std::string file;
  std::string planner = "treedecomp";
  std::string dot;
  std::string json;
};

int run_plan(const PlanArgs &a) {
  auto p = load(a.file);
  auto t = make_plan(p, planner_from(a.planner));
  auto problems = validate_tree(p, t);
  if (!a.dot.empty()) write_file(a.dot, to_dot(p, t));
  if (!a.json.empty()) write_file(a.json, to_json(t).dump(2) + "\n");
  std::cout << "planner: " << a.planner << '\n'
            << "nodes: " << t.nodes.size() << '\n'
            << "width: " << tree_width(p, t) << '\n'
            << "valid: " << (problems.empty() ? "yes" : "no") << '\n';
  for (const auto &v : problems) std::cout << "  " << to_string(v.kind) << ": " << v.message << '\n';
  return problems.empty() ? 0 : kExitError;
}

struct SolveArgs {
  std::string file;
  std::string planner = "treedecomp";
  std::string engine = "dpsynth";
  std::string tree;
  std::string witnesses;
  std::string stats;
  bool verify = false;
  std::size_t max_oracle_vars = kDefaultOracleBound;
  double timeout = 0;
};

int run_solve(const SolveArgs &a) {
  auto p = load(a.file);
  SolveOptions opt;
  opt.planner = planner_from(a.planner);
  opt.engine = a.engine == "baseline" ? EngineKind::Baseline : EngineKind::DpSynth;
  opt.verify = a.verify;
  opt.max_oracle_vars = a.max_oracle_vars;
  if (a.timeout > 0) opt.timeout_seconds = a.timeout;
  if (!a.tree.empty()) opt.plan = tree_from_json(nlohmann::json::parse(slurp(a.tree)));

  SolveResult r;
  try {
    r = solve(p, opt, fs::path(a.file).filename().string());
  } catch (const Timeout &) {
    std::cout << "verdict: timeout\n";
    if (!a.stats.empty())
      write_file(a.stats, nlohmann::json{{"instance", fs::path(a.file).filename().string()},
                                         {"verdict", "timeout"}}
                                  .dump(2) + "\n");
    return kExitTimeout;
  }

  std::cout << "verdict: " << r.stats.verdict << '\n'
            << "engine: " << r.stats.engine << '\n'
            << "width: " << r.stats.width << '\n'
            << "peak_nodes: " << r.stats.peak_nodes << '\n';
  if (r.witnesses) std::cout << "witnesses: " << r.witnesses->size() << '\n';
  if (r.report) {
    std::cout << "verification: " << (r.report->ok ? "ok" : "failed") << '\n';
    if (r.report->counterexample) {
      std::cout << "counterexample:";
      for (const auto &[v, b] : *r.report->counterexample) std::cout << ' ' << v.id << '=' << b;
      std::cout << '\n';
    }
  }
  if (!a.witnesses.empty() && r.witnesses)
    write_file(a.witnesses, witness_json(p, *r.manager, *r.witnesses).dump(2) + "\n");
  if (!a.stats.empty()) {
    auto j = to_json(r.stats);
    if (r.report) j["report"] = to_json(*r.report);
    write_file(a.stats, j.dump(2) + "\n");
  }
  if (r.report && !r.report->ok) return kExitError;
  return exit_code(r.verdict);
}

struct BenchArgs {
  std::string dir;
  std::string engines = "both";
  std::string planner = "treedecomp";
  std::string csv;
  double timeout = 0;
  bool verify = false;
};

const std::vector<std::string> kEngineColumns = {
    "status",  "planner",          "width",        "plan_ms",    "compile_ms", "realizability_ms",
    "synthesis_ms", "total_ms",    "peak_nodes",   "verdict",    "verified"};

std::vector<std::string> stats_cells(const SolveStats &s) {
  auto num = [](double v) {
    std::ostringstream os;
    os.setf(std::ios::fixed);
    os.precision(3);
    os << v;
    return os.str();
  };
  return {"ok",
          s.planner,
          std::to_string(s.width),
          num(s.plan_ms),
          num(s.compile_ms),
          num(s.realizability_ms),
          num(s.synthesis_ms),
          num(s.total_ms),
          std::to_string(s.peak_nodes),
          s.verdict,
          s.verification};
}

int run_bench(const BenchArgs &a) {
  std::vector<EngineKind> engines;
  if (a.engines == "both" || a.engines == "dpsynth") engines.push_back(EngineKind::DpSynth);
  if (a.engines == "both" || a.engines == "baseline") engines.push_back(EngineKind::Baseline);

  std::vector<fs::path> files;
  for (const auto &e : fs::directory_iterator(a.dir)) {
    auto ext = e.path().extension().string();
    if (e.is_regular_file() && (ext == ".qdimacs" || ext == ".cnf")) files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());

  std::ostringstream csv;
  csv << "instance";
  for (auto eng : engines)
    for (const auto &c : kEngineColumns) csv << ',' << to_string(eng) << '_' << c;
  csv << '\n';

  for (const auto &f : files) {
    csv << f.filename().string();
    SynthesisProblem p;
    bool parsed = true;
    try {
      p = load(f, true);
    } catch (const std::exception &e) {
      std::cerr << f.filename().string() << ": " << e.what() << '\n';
      parsed = false;
    }
    for (auto eng : engines) {
      std::vector<std::string> cells(kEngineColumns.size());
      if (!parsed) {
        cells[0] = "error";
      } else {
        SolveOptions opt;
        opt.engine = eng;
        opt.planner = planner_from(a.planner);
        opt.verify = a.verify;
        if (a.timeout > 0) opt.timeout_seconds = a.timeout;
        try {
          cells = stats_cells(solve(p, opt, f.filename().string()).stats);
        } catch (const Timeout &) {
          cells[0] = "timeout";
        } catch (const std::exception &e) {
          std::cerr << f.filename().string() << " [" << to_string(eng) << "]: " << e.what() << '\n';
          cells[0] = "error";
        }
      }
      for (const auto &c : cells) csv << ',' << c;
    }
    csv << '\n';
  }

  if (a.csv.empty())
    std::cout << csv.str();
  else
    write_file(a.csv, csv.str());
  return 0;
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"Boolean realizability checking and witness synthesis over graded project-join trees"};
  app.require_subcommand(1);

  PlanArgs plan_args;
  auto *plan = app.add_subcommand("plan", "Build and validate a graded project-join tree");
  plan->add_option("file", plan_args.file, "QDIMACS input")->required();
  plan->add_option("--planner", plan_args.planner)->check(CLI::IsMember({"treedecomp", "bucket"}));
  plan->add_option("--dot", plan_args.dot, "Write the tree as DOT");
  plan->add_option("--json", plan_args.json, "Write the tree as JSON");

  SolveArgs solve_args;
  auto *solve_cmd = app.add_subcommand("solve", "Decide realizability and synthesize witnesses");
  solve_cmd->add_option("file", solve_args.file, "QDIMACS input")->required();
  solve_cmd->add_option("--planner", solve_args.planner)->check(CLI::IsMember({"treedecomp", "bucket"}));
  solve_cmd->add_option("--engine", solve_args.engine)->check(CLI::IsMember({"dpsynth", "baseline"}));
  solve_cmd->add_option("--tree", solve_args.tree, "Use this JSON tree as the plan");
  solve_cmd->add_option("--witnesses", solve_args.witnesses, "Write witnesses as JSON");
  solve_cmd->add_option("--stats", solve_args.stats, "Write solve statistics as JSON");
  solve_cmd->add_flag("--verify", solve_args.verify, "Check the witnesses");
  solve_cmd->add_option("--max-oracle-vars", solve_args.max_oracle_vars,
                        "Enumeration cross-check bound");
  solve_cmd->add_option("--timeout", solve_args.timeout, "Seconds; exit 30 when exceeded");

  BenchArgs bench_args;
  auto *bench = app.add_subcommand("bench", "Run both engines over a directory of instances");
  bench->add_option("dir", bench_args.dir, "Directory of .qdimacs files")
      ->required()
      ->check(CLI::ExistingDirectory);
  bench->add_option("--engines", bench_args.engines)
      ->check(CLI::IsMember({"both", "dpsynth", "baseline"}));
  bench->add_option("--planner", bench_args.planner)->check(CLI::IsMember({"treedecomp", "bucket"}));
  bench->add_option("--timeout", bench_args.timeout, "Seconds per solve");
  bench->add_option("--csv", bench_args.csv, "Write the table here instead of stdout");
  bench->add_flag("--verify", bench_args.verify, "Check witnesses");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*plan) return run_plan(plan_args);
    if (*solve_cmd) return run_solve(solve_args);
    if (*bench) return run_bench(bench_args);
  } catch (const ParseError &e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitParse;
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitError;
  }
  return kExitError;
}
