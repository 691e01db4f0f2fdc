#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "qsfrac/audit.hpp"
#include "qsfrac/config.hpp"
#include "qsfrac/error.hpp"
#include "qsfrac/hash.hpp"
#include "qsfrac/record_io.hpp"

using namespace qsfrac;

namespace {

enum Exit { kOk = 0, kAuditFailed = 1, kUsage = 2, kNumeric = 3 };

// Run-time overrides shared by the subcommands that build a config.
struct Overrides {
  std::string strategy;
  double dt = 0.0;
  int max_edges = 0;
  std::vector<std::string> tol;  // name=value
  std::vector<std::string> set;  // key=value
};

std::pair<std::string, std::string> split_assignment(const std::string& s, const std::string& flag) {
  const auto eq = s.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError(flag, "expected name=value, got '" + s + "'");
  return {s.substr(0, eq), s.substr(eq + 1)};
}

void apply(RunConfig& c, const Overrides& o) {
  for (const auto& s : o.set) {
    const auto [k, v] = split_assignment(s, "--set");
    c.set(k, v);
  }
  for (const auto& s : o.tol) {
    const auto [k, v] = split_assignment(s, "--tol");
    c.set("tol." + k, v);
  }
  if (!o.strategy.empty()) c.set("strategy.kind", o.strategy);
  if (o.max_edges > 0) c.set("strategy.max_edges", std::to_string(o.max_edges));
  if (o.dt > 0.0) c.set_step(o.dt);
}

std::string default_path(const std::string& config_path, const std::string& ext) {
  std::filesystem::path p(config_path);
  p.replace_extension(ext);
  return p.string();
}

std::string describe(const CrackSet& c) {
  std::ostringstream os;
  os << '{';
  for (std::size_t i = 0; i < c.size(); ++i) os << (i ? "," : "") << c.edges()[i];
  os << '}';
  return os.str();
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write '" + path + "'");
  out << text;
}

// ------------------------------------------------------------------ run

int cmd_run(const std::string& config_path, const Overrides& ov, std::string out, std::string csv) {
  RunConfig c = RunConfig::load(config_path);
  apply(c, ov);
  if (out.empty()) out = c.get("output.record");
  if (out.empty()) out = std::filesystem::path(config_path).stem().string() + ".record";  // in the working directory
  if (csv.empty()) csv = c.get("output.csv");
  if (csv.empty()) csv = default_path(out, ".csv");

  const Mesh mesh = c.build_mesh();
  const EnergyModel model = c.build_model(mesh);
  EvolutionRecord rec = run_evolution(model, mesh, c.build_grid(), c.initial_crack(mesh), c.strategy(),
                                      c.evolution_options());
  stamp_record(rec, c);
  write_record_file(out, rec);
  {
    std::ofstream f(csv);
    if (!f) throw ValidationError("cannot write '" + csv + "'");
    write_csv(f, rec);
  }
  const auto jumps = rec.jump_knots();
  std::printf("record %s\ncsv %s\nknots %zu  strategy %s  certification %s\n", out.c_str(), csv.c_str(),
              rec.knots.size(), to_string(rec.strategy), to_string(rec.certification));
  if (!rec.annotation.empty()) std::printf("note: %s\n", rec.annotation.c_str());
  for (int j : jumps)
    std::printf("jump at knot %d (t = %.17g): crack %s\n", j, rec.knots[j].t, describe(rec.knots[j].crack).c_str());
  std::printf("final energy %.17g\n", rec.knots.back().energy.total());
  if (!rec.complete) {
    std::fprintf(stderr, "error: evolution incomplete: %s\n", rec.failure.c_str());
    return kNumeric;
  }
  return kOk;
}

// ---------------------------------------------------------------- audit

AuditSelection parse_checks(const std::vector<std::string>& names) {
  AuditSelection s{false, false, false, StabilityLevel::Oracle, false, false};
  for (const auto& n : names) {
    if (n == "all") {
      s.irreversibility = s.balance = s.stability = s.structure = s.duality = true;
    } else if (n == "irreversibility") {
      s.irreversibility = true;
    } else if (n == "balance" || n == "energy_balance") {
      s.balance = true;
    } else if (n == "stability" || n == "global_stability") {
      s.stability = true;
    } else if (n == "structure") {
      s.structure = true;
    } else if (n == "duality") {
      s.duality = true;
    } else {
      throw ConfigError("--checks", "unknown check '" + n + "'");
    }
  }
  return s;
}

int cmd_audit(const std::string& record_path, const std::string& config_path, const std::vector<std::string>& checks,
              const std::string& level, const std::vector<std::string>& tols, int max_edges, bool strict,
              const std::string& out) {
  LoadedRecord lr = read_record_file(record_path);
  if (!config_path.empty()) {
    const RunConfig given = RunConfig::load(config_path);
    if (given.hash() != lr.record.config_hash)
      throw ValidationError("config '" + config_path + "' does not match the record (hash " + hex_digest(given.hash()) +
                            " vs " + hex_digest(lr.record.config_hash) + ")");
  }
  RunConfig tc = lr.config;
  for (const auto& s : tols) {
    const auto [k, v] = split_assignment(s, "--tol");
    tc.set("tol." + k, v);
  }
  AuditTolerances tol = tc.tolerances();
  if (max_edges > 0) tol.max_oracle_edges = max_edges;
  AuditSelection sel = parse_checks(checks);
  sel.level = stability_level_from_string(level);

  const AuditReport rep = run_audit(lr.record, lr.model, *lr.mesh, sel, tol);
  std::cout << rep.to_text();
  const bool ok = rep.passed(strict);
  if (strict) std::cout << "strict: " << (ok ? "PASS" : "FAIL") << '\n';
  if (!out.empty()) write_text(out, rep.to_json() + "\n");
  return ok ? kOk : kAuditFailed;
}

// ------------------------------------------------------------- envelope

void print_knots(const char* label, const std::vector<int>& c) {
  std::printf("%s{", label);
  for (std::size_t i = 0; i < c.size(); ++i) std::printf("%s%d", i ? ", " : "", c[i]);
  std::printf("}\n");
}

int cmd_envelope(const std::string& record_path, const std::string& side, std::string out) {
  LoadedRecord lr = read_record_file(record_path);
  const SolveOptions so = lr.config.evolution_options().solve;
  print_knots("C = ", lr.record.jump_knots());

  auto finish = [&](EvolutionRecord& r) {
    r.config_text = lr.record.config_text;
    r.config_hash = lr.record.config_hash;
  };
  if (side == "LEFT" || side == "RIGHT") {
    if (out.empty()) out = default_path(record_path, side == "RIGHT" ? ".right.record" : ".left.record");
    EnvelopeResult env = side == "LEFT" ? left_envelope(lr.record, lr.model, *lr.mesh, so)
                                        : right_envelope(lr.record, lr.model, *lr.mesh, so);
    finish(env.record);
    write_record_file(out, env.record);
    print_knots(side == "LEFT" ? "left envelope replaced knots " : "right envelope replaced knots ", env.jump_knots);
    std::printf("record %s\n", out.c_str());
    return kOk;
  }
  // BOTH: left then right from the same input, plus the sandwich summary.
  EnvelopeResult left = left_envelope(lr.record, lr.model, *lr.mesh, so);
  EnvelopeResult right = right_envelope(lr.record, lr.model, *lr.mesh, so);
  finish(left.record);
  finish(right.record);
  const std::string base = out.empty() ? record_path : out;
  const std::string lo = default_path(base, ".left.record"), ro = default_path(base, ".right.record");
  write_record_file(lo, left.record);
  write_record_file(ro, right.record);
  print_knots("left envelope replaced knots ", left.jump_knots);
  print_knots("right envelope replaced knots ", right.jump_knots);
  std::size_t held = 0;
  for (std::size_t i = 0; i < lr.record.knots.size(); ++i)
    held += left.record.knots[i].crack.is_subset_of(lr.record.knots[i].crack) &&
            lr.record.knots[i].crack.is_subset_of(right.record.knots[i].crack);
  std::printf("sandwich left <= record <= right holds at %zu of %zu knots\nrecords %s %s\n", held,
              lr.record.knots.size(), lo.c_str(), ro.c_str());
  return held == lr.record.knots.size() ? kOk : kAuditFailed;
}

// ------------------------------------------------------- oracle-compare

int cmd_oracle_compare(const std::string& config_path, const Overrides& ov, int max_edges) {
  RunConfig c = RunConfig::load(config_path);
  apply(c, ov);
  if (max_edges > 20) throw ConfigError("--max-edges", "the exhaustive search is capped at 20 edges");
  const Mesh mesh = c.build_mesh();
  const std::size_t n = mesh.crackable_edges().size();
  if (static_cast<int>(n) > max_edges)
    throw LimitError("instance too large: " + std::to_string(n) + " crackable edges exceed --max-edges " +
                     std::to_string(max_edges));
  const EnergyModel model = c.build_model(mesh);
  const TimeGrid grid = c.build_grid();
  const EvolutionOptions opts = c.evolution_options();
  std::map<StrategyKind, EvolutionRecord> recs;
  for (StrategyKind k : {StrategyKind::BruteForce, StrategyKind::Greedy, StrategyKind::GreedyWithPairs}) {
    SearchStrategy s = c.strategy();
    s.kind = k;
    s.max_edges = max_edges;
    recs[k] = run_evolution(model, mesh, grid, c.initial_crack(mesh), s, opts);
    if (!recs[k].complete) throw SolverError(std::string(to_string(k)) + ": " + recs[k].failure);
  }
  const auto& b = recs[StrategyKind::BruteForce];
  const auto& g = recs[StrategyKind::Greedy];
  const auto& p = recs[StrategyKind::GreedyWithPairs];
  std::printf("%5s %12s %24s %12s %12s  %s\n", "knot", "t", "E_brute", "gap_greedy", "gap_pairs", "crack differences");
  double worst_g = 0.0, worst_p = 0.0;
  for (std::size_t i = 0; i < b.knots.size(); ++i) {
    const double eb = b.knots[i].energy.total();
    const double dg = g.knots[i].energy.total() - eb, dp = p.knots[i].energy.total() - eb;
    worst_g = std::max(worst_g, dg);
    worst_p = std::max(worst_p, dp);
    std::string diff;
    if (!(g.knots[i].crack == b.knots[i].crack)) diff += "greedy " + describe(g.knots[i].crack) + " ";
    if (!(p.knots[i].crack == b.knots[i].crack)) diff += "pairs " + describe(p.knots[i].crack) + " ";
    if (!diff.empty()) diff += "brute " + describe(b.knots[i].crack);
    std::printf("%5zu %12.6g %24.17g %12.4e %12.4e  %s\n", i, b.knots[i].t, eb, dg, dp, diff.c_str());
  }
  std::printf("max gap: greedy %.6e, greedy_with_pairs %.6e\n", worst_g, worst_p);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Discrete quasistatic brittle fracture runs, audits and envelopes"};
  app.require_subcommand(1);

  std::string config, out, csv, record, level = "ORACLE", side = "LEFT";
  std::vector<std::string> checks{"irreversibility", "balance", "stability", "structure"};
  std::vector<std::string> tols;
  Overrides ov;
  bool strict = false;
  int max_edges = 0, compare_edges = 20;

  auto add_overrides = [&](CLI::App* s) {
    s->add_option("--strategy", ov.strategy, "BRUTE_FORCE, GREEDY or GREEDY_WITH_PAIRS");
    s->add_option("--dt", ov.dt, "uniform step; must divide time.T");
    s->add_option("--tol", ov.tol, "tolerance override name=value (solver, energy, residual, balance, fenchel, jump)");
    s->add_option("--set", ov.set, "config override key=value");
  };

  CLI::App* run = app.add_subcommand("run", "run an evolution and write the record and CSV trace");
  run->add_option("--config,config", config, "config file")->required();
  run->add_option("--out", out, "record path");
  run->add_option("--csv", csv, "CSV path");
  run->add_option("--max-edges", ov.max_edges, "brute-force candidate edge limit");
  add_overrides(run);

  CLI::App* audit = app.add_subcommand("audit", "audit a record");
  audit->add_option("--record,record", record, "record file")->required();
  audit->add_option("--config", config, "config that must match the record");
  audit->add_option("--checks", checks, "irreversibility, balance, stability, structure, duality or all")
      ->delimiter(',');
  audit->add_option("--level", level, "stability level EULER, ONE_EDGE or ORACLE");
  audit->add_option("--tol", tols, "tolerance override name=value");
  audit->add_option("--max-edges", max_edges, "oracle edge limit");
  audit->add_flag("--strict", strict, "count INCONCLUSIVE as failure");
  audit->add_option("--out", out, "JSON report path");

  CLI::App* envelope = app.add_subcommand("envelope", "left or right envelope of a record");
  envelope->add_option("--record,record", record, "record file")->required();
  envelope->add_option("--side", side, "LEFT, RIGHT or BOTH")
      ->check(CLI::IsMember({"LEFT", "RIGHT", "BOTH"}, CLI::ignore_case))
      ->transform([](std::string s) {
        for (char& ch : s) ch = static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
        return s;
      });
  envelope->add_option("--out", out, "output record path");

  CLI::App* compare = app.add_subcommand("oracle-compare", "compare greedy strategies against brute force");
  compare->add_option("--config,config", config, "config file")->required();
  compare->add_option("--max-edges", compare_edges, "largest admissible crackable-edge count (at most 20)");
  add_overrides(compare);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (*run) return cmd_run(config, ov, out, csv);
    if (*audit) return cmd_audit(record, config, checks, level, tols, max_edges, strict, out);
    if (*envelope) return cmd_envelope(record, side, out);
    if (*compare) return cmd_oracle_compare(config, ov, compare_edges);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kUsage;
  } catch (const LimitError& e) {
    std::fprintf(stderr, "refused: %s\nhint: use a smaller instance, a lower stability level (--level ONE_EDGE), "
                         "or a greedy strategy\n", e.what());
    return kUsage;
  } catch (const ValidationError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kUsage;
  } catch (const SolverError& e) {
    std::fprintf(stderr, "numeric failure: %s\n", e.what());
    return kNumeric;
  }
  return kUsage;
}
