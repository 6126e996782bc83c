// Command-line front end: single capacity solves, seeded verification
// suites, counterexample reports, and CSV merging.
//
// Exit codes: 0 success, 2 malformed input, 3 non-certified numerics,
// 4 invariant violation (the offending instance is serialized for replay).

#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "bicap/bidisc.hpp"
#include "bicap/capacity.hpp"
#include "bicap/instances.hpp"
#include "bicap/io.hpp"
#include "bicap/parallel.hpp"
#include "bicap/rearrangement.hpp"
#include "bicap/sci.hpp"
#include "bicap/staircase.hpp"

namespace {

using namespace bicap;

constexpr int kOk = 0;
constexpr int kInputError = 2;
constexpr int kNotCertified = 3;
constexpr int kInvariantViolation = 4;

struct RunConfig {
  int depth = 5;
  double tol = 1e-8;
  int max_iters = 10000;
  std::uint64_t seed = 1;
  int count = 50;
  int base = 20;
  int steps = 40;
  double lambda = 9.0;
  double delta = 1.0;
  std::string out;

  Json json(const std::string& command) const {
    return Json{{"command", command}, {"depth", depth},   {"tol", tol},
                {"max_iters", max_iters}, {"seed", seed}, {"count", count},
                {"base", base},       {"steps", steps},   {"lambda", lambda},
                {"delta", delta}};
  }
};

Rng instance_rng(const RunConfig& cfg, std::size_t i) {
  return Rng(cfg.seed * 1000003ULL + 0x9e3779b97f4a7c15ULL * (i + 1));
}

class CsvWriter {
 public:
  explicit CsvWriter(const std::string& path) {
    if (!path.empty()) {
      file_.open(path);
      if (!file_) throw std::invalid_argument("cannot write " + path);
    }
  }
  std::ostream& out() { return file_.is_open() ? file_ : std::cout; }
  void comment(const Json& j) { out() << "# config " << j.dump() << "\n"; }
  void line(const std::string& s) { out() << s << "\n"; }

 private:
  std::ofstream file_;
};

void dump_violation(const RunConfig& cfg, const std::string& command, const Json& instance) {
  std::string path = (cfg.out.empty() ? command : cfg.out) + ".violation.json";
  save_json(path, Json{{"config", cfg.json(command)}, {"instance", instance}});
  std::cerr << "invariant violation; replay artifact written to " << path << "\n";
}

// ---------------------------------------------------------------------------

int run_cap(const std::string& in, RunConfig& cfg, bool tol_set, bool iters_set) {
  Json j = load_json(in);
  CapacityProblem p = problem_from_json(j);
  if (tol_set) p.tol = cfg.tol;
  if (iters_set) p.max_iters = cfg.max_iters;
  auto r = capacity(p);
  Json out = to_json(r);
  out["config"] = cfg.json("cap");
  if (cfg.out.empty())
    std::cout << out.dump(2) << "\n";
  else
    save_json(cfg.out, out);
  return r.certified ? kOk : kNotCertified;
}

int run_oracles(const RunConfig& cfg) {
  struct Row {
    std::string kind;
    std::size_t size = 0;
    double ref = 0, dual = 0, relerr = 0;
    Json replay;
  };
  std::vector<Row> rows(std::size_t(cfg.count) * 2);

  parallel_for(std::size_t(cfg.count), [&](std::size_t i) {
    Rng g = instance_rng(cfg, i);
    // 1-D: conductance recursion against the dual solver
    TreeShape s(uniform_int(g, 2, std::max(2, cfg.depth)));
    auto leaves = random_leaf_set1(g, s, uniform_int(g, 1, 20));
    auto exact = capacity_tree_exact(leaves, s);
    auto dual = capacity1(leaves, s, cfg.tol, cfg.max_iters);
    Row r;
    r.kind = "tree-recursion";
    r.size = leaves.size();
    r.ref = exact.cap;
    r.dual = dual.cap;
    r.relerr = std::abs(dual.cap - exact.cap) / std::max(exact.cap, 1e-300);
    if (!dual.certified || r.relerr > 1e-7) {
      Json inst = Json::array();
      for (auto l : leaves) inst.push_back(to_json(l));
      r.replay = Json{{"kind", r.kind}, {"depth", s.depth}, {"leaves", inst}};
    }
    rows[i] = r;

    // deep sparse points: atomic Gram solve against the dual solver
    Rng g2 = instance_rng(cfg, i + 7919);
    auto pts = random_deep_points(g2, uniform_int(g2, 2, 12), 1000000);
    auto atomic = capacity_atomic(pts);
    std::size_t m = pts.size();
    std::vector<double> K(m * m);
    for (std::size_t a = 0; a < m; ++a)
      for (std::size_t b = a; b < m; ++b)
        K[a * m + b] = K[b * m + a] = meet_count2(pts[a], pts[b]);
    auto apply = [&](const std::vector<double>& mu, std::vector<double>& out) {
      for (std::size_t a = 0; a < m; ++a) {
        double sum = 0;
        for (std::size_t b = 0; b < m; ++b) sum += K[a * m + b] * mu[b];
        out[a] = sum;
      }
    };
    auto st = dual_ascent(m, apply, cfg.tol, cfg.max_iters);
    double cap_dual = 0;
    for (double v : st.mu) cap_dual += v;
    Row r2;
    r2.kind = "atomic-deep";
    r2.size = m;
    r2.ref = atomic.cap;
    r2.dual = cap_dual;
    r2.relerr = std::abs(cap_dual - atomic.cap) / std::max(atomic.cap, 1e-300);
    if (!st.certified || !atomic.certified || r2.relerr > 1e-7)
      r2.replay = Json{{"kind", r2.kind}, {"points", int(m)}, {"instance", int(i)}};
    rows[std::size_t(cfg.count) + i] = r2;
  });

  CsvWriter csv(cfg.out);
  csv.comment(cfg.json("suite oracles"));
  csv.line("instance,kind,size,cap_ref,cap_dual,relerr");
  int violations = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    std::ostringstream os;
    os << i << ',' << r.kind << ',' << r.size << ',' << std::setprecision(17) << r.ref << ','
       << r.dual << ',' << r.relerr;
    csv.line(os.str());
    if (!r.replay.is_null()) {
      ++violations;
      dump_violation(cfg, "oracles", r.replay);
    }
  }
  return violations == 0 ? kOk : kInvariantViolation;
}

int run_sci(const RunConfig& cfg) {
  std::vector<SciReport> reps(std::size_t(cfg.count));
  parallel_for(std::size_t(cfg.count), [&](std::size_t i) {
    Rng g = instance_rng(cfg, i);
    TreeShape s(cfg.depth);
    Function2 f = random_function2(g, s, uniform_int(g, 2, cfg.depth + 4), 0.25, 2.0);
    reps[i] = sci_ratio(f, false, cfg.tol, cfg.max_iters);
  });

  CsvWriter csv(cfg.out);
  csv.comment(cfg.json("suite sci"));
  csv.line("instance,L,k,cap_Ek,term,cumulative,norm_sq_f,ratio");
  double max_ratio = 0;
  bool certified = true;
  for (std::size_t i = 0; i < reps.size(); ++i) {
    const auto& rep = reps[i];
    certified = certified && rep.certified;
    double cum = 0;
    for (const auto& e : rep.family.entries) {
      cum += std::exp2(2.0 * e.k) * e.cap;
      std::ostringstream os;
      os << i << ',' << cfg.depth << ',' << e.k << ',' << std::setprecision(17) << e.cap << ','
         << std::exp2(2.0 * e.k) * e.cap << ',' << cum << ',' << rep.norm_sq << ',' << rep.ratio;
      csv.line(os.str());
    }
    max_ratio = std::max(max_ratio, rep.ratio);
  }
  std::ostringstream os;
  os << "max," << cfg.depth << ",0,0,0,0,0," << std::setprecision(17) << max_ratio;
  csv.line(os.str());
  return certified ? kOk : kNotCertified;
}

int run_rearrange(const RunConfig& cfg) {
  struct Row {
    std::size_t exceed = 0;
    double min_hardy = 0, norm = 0, restricted = 0, ratio = 0;
    bool ok = true;
    Json replay;
  };
  std::vector<Row> rows(std::size_t(cfg.count));
  parallel_for(std::size_t(cfg.count), [&](std::size_t i) {
    Rng g = instance_rng(cfg, i);
    TreeShape s(cfg.depth);
    Measure2 mu = random_boundary_measure(g, s, uniform_int(g, 3, 12), 0.25, 2.0);
    auto r = rearrange_2d(mu, cfg.delta, cfg.lambda);
    Row row;
    row.exceed = r.exceed_set.size();
    row.min_hardy = r.exceed_set.empty() ? 0.0 : r.min_hardy_on_exceed;
    row.norm = r.phi_norm_sq;
    row.restricted = r.restricted_energy;
    row.ratio = r.cert_ratio;
    if (!r.exceed_set.empty() && r.min_hardy_on_exceed < cfg.lambda * (1 - 1e-12)) {
      row.ok = false;
      row.replay = Json{{"mu", to_json(mu)},
                        {"delta", cfg.delta},
                        {"lambda", cfg.lambda},
                        {"depth", cfg.depth}};
    }
    rows[i] = row;
  });

  CsvWriter csv(cfg.out);
  csv.comment(cfg.json("suite rearrange"));
  csv.line(
      "instance,L,delta,lambda,exceed_count,min_hardy,phi_norm_sq,restricted_energy,cert_ratio");
  int violations = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    std::ostringstream os;
    os << i << ',' << cfg.depth << ',' << cfg.delta << ',' << cfg.lambda << ',' << r.exceed << ','
       << std::setprecision(17) << r.min_hardy << ',' << r.norm << ',' << r.restricted << ','
       << r.ratio;
    csv.line(os.str());
    if (!r.ok) {
      ++violations;
      dump_violation(cfg, "rearrange", r.replay);
    }
  }
  return violations == 0 ? kOk : kInvariantViolation;
}

int run_maxprinciple(const RunConfig& cfg) {
  auto r = build_staircase({cfg.base, cfg.steps});
  Json rep = to_json(r);
  rep["config"] = cfg.json("suite maxprinciple");
  // hand-anchored small case rides along
  auto small = build_staircase({2, 2});
  rep["hand_case"] = Json{{"cap", small.cap}, {"v_at_anchor", small.v_at_anchor}};

  bool ok = r.certified;
  for (double v : r.v_on_support) ok = ok && v <= 1.0 + 1e-9;
  if (cfg.base == 20) {
    ok = ok && r.v_at_anchor >= 9.0 * cfg.steps / 50.0;
    ok = ok && r.sup_inf_ratio <= 5.0;
    ok = ok && r.offdiag_row_max_over_k <= 1.0 / 9.0;
  }
  ok = ok && std::abs(small.cap - 5.0 / 12.0) <= 1e-9 &&
       std::abs(small.v_at_anchor - 5.0 / 3.0) <= 1e-9;
  if (cfg.out.empty())
    std::cout << rep.dump(2) << "\n";
  else
    save_json(cfg.out, rep);
  if (!ok) {
    dump_violation(cfg, "maxprinciple", rep);
    return kInvariantViolation;
  }
  return r.certified ? kOk : kNotCertified;
}

// Single atom-list report: both constants plus the per-strategy collections.
int run_carleson_atoms(const RunConfig& cfg, const std::string& atoms_path) {
  auto atoms = atoms_from_json(load_json(atoms_path));
  TreeShape s(cfg.depth);
  Measure2 nu = pullback_measure(atoms, s);
  if (nu.empty()) throw std::invalid_argument("atom list carries no mass");
  Json strategies = Json::array();
  SubcapResult best;
  for (auto strat : {SubcapStrategy::kSingleBox, SubcapStrategy::kRandomCollections}) {
    auto r = subcap_constant(nu, strat, s, cfg.seed, cfg.count, nullptr, cfg.tol);
    Json coll = Json::array();
    for (const auto& n : r.best_collection) coll.push_back(to_json(n));
    strategies.push_back(
        Json{{"strategy", strat == SubcapStrategy::kSingleBox ? "single-box" : "random-collections"},
             {"constant", r.constant},
             {"collection", coll}});
    if (r.constant > best.constant) best = r;
  }
  auto rep = carleson_test(atoms, s, {SubcapStrategy::kSingleBox,
                                      SubcapStrategy::kRandomCollections},
                           cfg.seed, cfg.count, nullptr, cfg.tol);
  Json out{{"config", cfg.json("suite carleson")},
           {"total_mass", rep.total_mass},
           {"norm_sq", rep.trace.norm_sq},
           {"norm_converged", rep.trace.converged},
           {"subcap_constant", best.constant},
           {"per_strategy", strategies},
           {"ratio", rep.ratio},
           {"exact_direction_ok", rep.exact_direction_ok}};
  if (cfg.out.empty())
    std::cout << out.dump(2) << "\n";
  else
    save_json(cfg.out, out);
  if (!rep.exact_direction_ok) {
    dump_violation(cfg, "carleson", Json{{"atoms", to_json(atoms)}});
    return kInvariantViolation;
  }
  return rep.trace.converged ? kOk : kNotCertified;
}

int run_carleson(const RunConfig& cfg) {
  struct Row {
    std::string name;
    int L = 0;
    double mass = 0, norm = 0, subcap = 0, ratio = 0;
    bool ok = true;
  };
  std::vector<Row> rows;

  int top = std::min(cfg.depth, 6);
  for (int L = 3; L <= top; ++L) {
    TreeShape s(L);
    std::vector<BidiscAtom> grid;
    int n = 1 << L;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        grid.push_back({1.0, 2 * std::numbers::pi * (i + 0.5) / n, 1.0,
                        2 * std::numbers::pi * (j + 0.5) / n, 1.0 / double(n) / double(n)});
    auto rep = carleson_test(
        grid, s, {SubcapStrategy::kSingleBox, SubcapStrategy::kRandomCollections}, cfg.seed, 40,
        nullptr, cfg.tol);
    rows.push_back({"uniform-grid", L, rep.total_mass, rep.trace.norm_sq, rep.subcap.constant,
                    rep.ratio, rep.exact_direction_ok});
  }
  for (int i = 0; i < cfg.count; ++i) {
    Rng g = instance_rng(cfg, std::size_t(i));
    TreeShape s(std::min(cfg.depth, 6));
    std::vector<BidiscAtom> cloud;
    int atoms = uniform_int(g, 2, 12);
    for (int a = 0; a < atoms; ++a)
      cloud.push_back({uniform01(g), uniform(g, 0, 2 * std::numbers::pi), uniform01(g),
                       uniform(g, 0, 2 * std::numbers::pi), uniform(g, 0.1, 1.0)});
    auto rep = carleson_test(
        cloud, s, {SubcapStrategy::kSingleBox, SubcapStrategy::kRandomCollections},
        cfg.seed + std::uint64_t(i), 30, nullptr, cfg.tol);
    rows.push_back({"random-cloud", s.depth, rep.total_mass, rep.trace.norm_sq,
                    rep.subcap.constant, rep.ratio, rep.exact_direction_ok});
  }

  CsvWriter csv(cfg.out);
  csv.comment(cfg.json("suite carleson"));
  csv.line("instance,L,total_mass,norm_sq,subcap,ratio,exact_ok");
  int violations = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    std::ostringstream os;
    os << r.name << '-' << i << ',' << r.L << ',' << std::setprecision(17) << r.mass << ','
       << r.norm << ',' << r.subcap << ',' << r.ratio << ',' << (r.ok ? 1 : 0);
    csv.line(os.str());
    if (!r.ok) ++violations;
  }
  if (violations > 0) {
    dump_violation(cfg, "carleson", Json{{"violations", violations}});
    return kInvariantViolation;
  }
  return kOk;
}

int run_merge(const std::vector<std::string>& paths, const std::string& out) {
  std::string header;
  std::vector<std::pair<std::string, std::vector<std::string>>> files;
  for (const auto& p : paths) {
    std::ifstream in(p);
    if (!in) {
      std::cerr << "cannot open " << p << "\n";
      return kInputError;
    }
    std::string line, h;
    std::vector<std::string> rows;
    while (std::getline(in, line)) {
      if (line.empty() || line[0] == '#') continue;
      if (h.empty())
        h = line;
      else
        rows.push_back(line);
    }
    if (h.empty()) {
      std::cerr << "no header in " << p << "\n";
      return kInputError;
    }
    if (header.empty()) header = h;
    if (h != header) {
      std::cerr << "schema mismatch in " << p << "\n";
      return kInputError;
    }
    files.push_back({std::filesystem::path(p).filename().string(), std::move(rows)});
  }
  CsvWriter csv(out);
  csv.line("source," + header);
  for (const auto& [name, rows] : files)
    for (const auto& r : rows) csv.line(name + "," + r);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"discrete bi-parameter potential theory on truncated bitrees"};
  app.require_subcommand(1);
  RunConfig cfg;

  auto add_common = [&](CLI::App* c) {
    c->add_option("--depth", cfg.depth, "tree depth L");
    c->add_option("--tol", cfg.tol, "relative duality-gap tolerance");
    c->add_option("--max-iters", cfg.max_iters, "solver iteration cap");
    c->add_option("--seed", cfg.seed, "instance seed");
    c->add_option("--count", cfg.count, "number of instances");
    c->add_option("--base", cfg.base, "staircase base");
    c->add_option("--steps", cfg.steps, "staircase steps");
    c->add_option("--lambda", cfg.lambda, "exceedance threshold");
    c->add_option("--delta", cfg.delta, "restriction level");
    c->add_option("--out", cfg.out, "output path (stdout if omitted)");
  };

  std::string in_path;
  auto* cap = app.add_subcommand("cap", "solve one capacity problem from JSON");
  cap->add_option("--in", in_path, "problem JSON")->required();
  add_common(cap);

  std::string suite_name;
  std::string atoms_path;
  auto* suite = app.add_subcommand("suite", "run a verification battery");
  suite->add_option("name", suite_name, "sci|rearrange|maxprinciple|carleson|oracles")
      ->required();
  suite->add_option("--atoms", atoms_path,
                    "bidisc atom list JSON; carleson then reports on it alone");
  add_common(suite);

  auto* cx = app.add_subcommand("counterexample", "staircase counterexample report");
  std::string report_path;
  cx->add_option("--report", report_path, "output JSON path");
  add_common(cx);

  auto* merge = app.add_subcommand("report-merge", "concatenate CSV reports");
  std::vector<std::string> merge_paths;
  merge->add_option("paths", merge_paths, "input CSV files")->required();
  add_common(merge);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : kInputError;
  }

  try {
    if (cap->parsed())
      return run_cap(in_path, cfg, cap->count("--tol") > 0, cap->count("--max-iters") > 0);
    if (suite->parsed()) {
      if (suite_name == "oracles") return run_oracles(cfg);
      if (suite_name == "sci") return run_sci(cfg);
      if (suite_name == "rearrange") return run_rearrange(cfg);
      if (suite_name == "maxprinciple") return run_maxprinciple(cfg);
      if (suite_name == "carleson")
        return atoms_path.empty() ? run_carleson(cfg) : run_carleson_atoms(cfg, atoms_path);
      std::cerr << "unknown suite: " << suite_name << "\n";
      return kInputError;
    }
    if (cx->parsed()) {
      if (!report_path.empty()) cfg.out = report_path;
      return run_maxprinciple(cfg);
    }
    if (merge->parsed()) return run_merge(merge_paths, cfg.out);
  } catch (const std::invalid_argument& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kInputError;
  } catch (const Json::exception& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kInputError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInvariantViolation;
  }
  return kInputError;
}
