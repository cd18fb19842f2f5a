#pragma once

// Command-line front end: parses a CommandSpec, runs the owning module and
// writes one ReportEnvelope as JSON or CSV.
//
// Exit codes: 0 ok, 2 flagged (a finding such as a count mismatch or a
// solver that did not reach its gap), 1 usage or input error.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "disent/io.hpp"
#include "disent/qstate.hpp"
#include "disent/ree.hpp"
#include "disent/separability.hpp"
#include "disent/structures.hpp"

#ifndef DISENT_VERSION
#define DISENT_VERSION "0.1.0"
#endif

namespace disent::cli {

using Json = nlohmann::ordered_json;

inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitFlagged = 2;

enum class Status { ok, flagged };

inline std::string to_string(Status s) { return s == Status::ok ? "ok" : "flagged"; }

inline Status status_from_string(const std::string& s) {
  if (s == "ok") return Status::ok;
  if (s == "flagged") return Status::flagged;
  throw std::invalid_argument("unknown status \"" + s + "\"");
}

/// Everything a run reports. `timing` holds the wall-clock fields, which are
/// the only non-reproducible values; `payload` is deterministic in argv.
struct ReportEnvelope {
  std::string tool_version;
  Json command;
  std::uint64_t seed = 0;
  Status status = Status::ok;
  Json payload;
  Json timing;

  Json to_json() const {
    Json j;
    j["tool_version"] = tool_version;
    j["command"] = command;
    j["seed"] = seed;
    j["status"] = to_string(status);
    j["payload"] = payload;
    j["timing"] = timing;
    return j;
  }

  static ReportEnvelope from_json(const Json& j) {
    ReportEnvelope e;
    e.tool_version = j.at("tool_version").get<std::string>();
    e.command = j.at("command");
    e.seed = j.at("seed").get<std::uint64_t>();
    e.status = status_from_string(j.at("status").get<std::string>());
    e.payload = j.at("payload");
    e.timing = j.at("timing");
    return e;
  }

  friend bool operator==(const ReportEnvelope&, const ReportEnvelope&) = default;
};

struct CommandSpec {
  std::string subcommand;
  int n = 0;
  std::vector<int> n_list;
  std::string target;
  std::string families = "all";
  int trials = 100;
  std::uint64_t seed = 0;
  std::string format = "json";
  std::string output = "-";
  bool include_single_block = false;
  SolverConfig solver;
};

// ---------------------------------------------------------------------------
// payload builders

/// JSON has no infinities; non-finite values travel as strings.
inline Json number(double x) {
  if (std::isfinite(x)) return x;
  if (std::isnan(x)) return "nan";
  return x > 0 ? "inf" : "-inf";
}

inline std::string rational_string(const BigRational& q) {
  return boost::multiprecision::numerator(q).str() + "/" + boost::multiprecision::denominator(q).str();
}

inline Json blocks_json(const std::vector<SetPartition::Block>& blocks) {
  Json arr = Json::array();
  for (const auto& b : blocks) arr.push_back(b);
  return arr;
}

inline Json count_rows_json(const std::vector<CountReport>& rows) {
  Json arr = Json::array();
  for (const auto& r : rows) {
    Json j;
    j["n"] = r.n;
    j["canonical_count"] = r.canonical_count.str();
    j["paper_count"] = r.paper_count ? Json(*r.paper_count) : Json(nullptr);
    j["mismatch"] = r.mismatch();
    if (r.ratio_to_previous) {
      j["ratio_to_previous"] = rational_string(*r.ratio_to_previous);
      j["ratio_decimal"] = number(r.ratio_to_previous->convert_to<double>());
    } else {
      j["ratio_to_previous"] = nullptr;
      j["ratio_decimal"] = nullptr;
    }
    arr.push_back(std::move(j));
  }
  return arr;
}

inline std::vector<CountReport> count_rows(int n) {
  detail::require_range(n, 2, kMaxCountingParties, "count");
  if (n >= 3) return growth_report(n);
  CountReport row;
  row.n = 2;
  row.canonical_count = count_disentangled_terms(2);
  row.paper_count = paper_reported_term_count(2);
  return {row};
}

inline std::vector<StructureFamily> select_families(const std::string& selector, int n) {
  if (selector == "all") return enumerate_disentangled_structures(n);
  if (selector == "fully-product") {
    std::vector<SetPartition::Block> singletons;
    for (int p = 0; p < n; ++p) singletons.push_back({p});
    return {StructureFamily(SetPartition::from_blocks(n, singletons))};
  }
  std::vector<StructureFamily> out;
  std::stringstream ss(selector);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    auto family = StructureFamily::parse(n, item);
    if (std::find(out.begin(), out.end(), family) == out.end()) out.push_back(family);
  }
  if (out.empty()) throw std::invalid_argument("--families: empty selection");
  return out;
}

inline DensityMatrix resolve_target(const std::string& target, int n_flag) {
  if (target.empty()) throw std::invalid_argument("--target is required");
  std::error_code ec;
  if (std::filesystem::is_regular_file(target, ec)) {
    auto rho = load_density(target);
    if (n_flag != 0 && n_flag != rho.n_parties()) {
      throw std::invalid_argument("--n " + std::to_string(n_flag) + " does not match file with n=" +
                                  std::to_string(rho.n_parties()));
    }
    return rho;
  }
  const auto implied = named_state_parties(target);
  int n = n_flag;
  if (implied) {
    if (n != 0 && n != *implied) {
      throw std::invalid_argument("--n " + std::to_string(n) + " incompatible with target " + target);
    }
    n = *implied;
  } else if (n == 0) {
    n = 3;
  }
  return named_state(target, n);
}

inline Json solver_config_json(const SolverConfig& c) {
  Json j;
  j["gap_tolerance"] = c.gap_tolerance;
  j["max_iterations"] = c.max_iterations;
  j["oracle_restarts"] = c.oracle_restarts;
  j["oracle_sweep_tolerance"] = c.oracle_sweep_tolerance;
  j["line_search_tolerance"] = c.line_search_tolerance;
  j["eigen_floor"] = c.eigen_floor;
  return j;
}

inline Json command_json(const CommandSpec& spec) {
  Json j;
  j["subcommand"] = spec.subcommand;
  if (spec.subcommand == "count" || spec.subcommand == "enumerate" || spec.subcommand == "verify-claims") {
    j["n"] = spec.n;
  }
  if (spec.subcommand == "enumerate") j["include_single_block"] = spec.include_single_block;
  if (spec.subcommand == "verify-claims") j["trials"] = spec.trials;
  if (spec.subcommand == "ree") {
    j["target"] = spec.target;
    j["n"] = spec.n == 0 ? Json(nullptr) : Json(spec.n);
    j["families"] = spec.families;
  }
  if (spec.subcommand == "bench") j["n_list"] = spec.n_list;
  if (spec.subcommand == "ree" || spec.subcommand == "bench") j["solver"] = solver_config_json(spec.solver);
  j["format"] = spec.format;
  j["output"] = spec.output;
  return j;
}

inline ReportEnvelope make_envelope(const CommandSpec& spec) {
  ReportEnvelope e;
  e.tool_version = DISENT_VERSION;
  e.command = command_json(spec);
  e.seed = spec.seed;
  e.timing = Json::object();
  return e;
}

inline ReportEnvelope run_count(const CommandSpec& spec) {
  auto e = make_envelope(spec);
  const auto rows = count_rows(spec.n);
  const bool mismatch = std::any_of(rows.begin(), rows.end(), [](const CountReport& r) { return r.mismatch(); });
  e.payload["rows"] = count_rows_json(rows);
  e.payload["mismatch"] = mismatch;
  e.status = mismatch ? Status::flagged : Status::ok;
  return e;
}

inline ReportEnvelope run_enumerate(const CommandSpec& spec) {
  auto e = make_envelope(spec);
  Json families = Json::array();
  const int lo = spec.include_single_block ? 1 : 2;
  detail::require_range(spec.n, lo, kMaxEnumerationParties, "enumerate");
  auto emit = [&](const SetPartition& p) {
    Json j;
    j["rgs"] = p.rgs_string();
    j["notation"] = p.to_string();
    j["blocks"] = blocks_json(p.blocks());
    Json entangled = Json::array();
    for (const auto& b : p.blocks()) {
      if (b.size() >= 2) entangled.push_back(b);
    }
    j["entangled_blocks"] = entangled;
    families.push_back(std::move(j));
  };
  if (spec.include_single_block) {
    for (const auto& p : enumerate_set_partitions(spec.n)) emit(p);
  } else {
    for (const auto& f : enumerate_disentangled_structures(spec.n)) emit(f.partition());
  }
  e.payload["n"] = spec.n;
  e.payload["count"] = families.size();
  e.payload["families"] = std::move(families);
  e.status = Status::ok;
  return e;
}

inline ReportEnvelope run_verify_claims(const CommandSpec& spec) {
  if (spec.n != 3) {
    throw std::out_of_range("verify-claims: the A|BC witnesses are tripartite; --n must be 3");
  }
  if (spec.trials < 1) throw std::out_of_range("verify-claims: --trials must be >= 1");
  auto e = make_envelope(spec);
  const auto claims = verify_claims(spec.trials, spec.seed);

  Json eq5;
  eq5["description"] = claims.eq5_description;
  eq5["max_abs_deviation"] = number(claims.eq5_max_abs_deviation);
  eq5["counterexample_holds"] = claims.eq5_max_abs_deviation <= 1e-12;
  Json pts = Json::array();
  for (double x : claims.eq5_component_min_pt) pts.push_back(number(x));
  eq5["component_min_pt"] = pts;

  Json eq6;
  eq6["trials"] = claims.eq6.trials;
  eq6["samples"] = 2 * claims.eq6.trials;
  eq6["rhs_violations"] = claims.eq6.rhs_violations;
  eq6["lhs_violations"] = claims.eq6.lhs_violations;
  eq6["violations"] = claims.eq6.violations();
  eq6["rhs_min_pt"] = number(claims.eq6.rhs_min_pt);
  eq6["lhs_max_pt"] = number(claims.eq6.lhs_max_pt);

  e.payload["eq5_counterexample"] = std::move(eq5);
  e.payload["eq6_trials"] = std::move(eq6);
  e.payload["counting_comparison"] = count_rows_json(claims.counting_comparison);
  e.payload["count_mismatch"] = claims.count_mismatch();
  // A count mismatch is the expected finding; any witness failure is too.
  const bool flagged = claims.count_mismatch() || claims.eq6.violations() > 0 ||
                       claims.eq5_max_abs_deviation > 1e-12;
  e.status = flagged ? Status::flagged : Status::ok;
  return e;
}

inline ReportEnvelope run_ree(const CommandSpec& spec) {
  auto e = make_envelope(spec);
  const auto rho = resolve_target(spec.target, spec.n);
  const auto families = select_families(spec.families, rho.n_parties());
  SolverConfig config = spec.solver;
  config.seed = spec.seed;
  const auto report = ree_frank_wolfe(rho, families, config);

  Json fams = Json::array();
  for (const auto& f : report.family_set) fams.push_back(f.to_string());
  Json support = Json::array();
  for (const auto& s : report.support) {
    Json j;
    j["weight"] = number(s.weight);
    j["family"] = report.family_set[s.family_index].to_string();
    Json amps = Json::array();
    for (Eigen::Index i = 0; i < s.state.amplitudes().size(); ++i) {
      const Complex z = s.state.amplitudes()(i);
      amps.push_back(Json::array({number(z.real()), number(z.imag())}));
    }
    j["amplitudes"] = std::move(amps);
    support.push_back(std::move(j));
  }
  Json history = Json::array();
  for (double v : report.objective_history) history.push_back(number(v));

  e.payload["n"] = rho.n_parties();
  e.payload["families"] = std::move(fams);
  e.payload["value"] = number(report.value);
  e.payload["final_gap"] = number(report.final_gap);
  e.payload["iterations"] = report.iterations;
  e.payload["converged"] = report.converged;
  e.payload["objective_history"] = std::move(history);
  e.payload["support"] = std::move(support);
  e.timing["wall_time"] = report.wall_time;
  e.status = report.converged ? Status::ok : Status::flagged;
  return e;
}

inline ReportEnvelope run_bench(const CommandSpec& spec) {
  if (spec.n_list.empty()) throw std::invalid_argument("bench: --n-list is required");
  auto e = make_envelope(spec);
  SolverConfig config = spec.solver;
  config.seed = spec.seed;
  const auto rows = scaling_bench(spec.n_list, config);
  Json out = Json::array();
  Json timing = Json::array();
  bool flagged = false;
  for (const auto& r : rows) {
    Json j;
    j["n"] = r.n;
    j["canonical_count"] = r.canonical_count.str();
    j["paper_count"] = r.paper_count ? Json(*r.paper_count) : Json(nullptr);
    j["mismatch"] = r.mismatch();
    Json t;
    t["n"] = r.n;
    t["enumeration_seconds"] = r.enumeration_seconds;
    if (r.solver) {
      j["solver_value"] = number(r.solver->value);
      j["solver_final_gap"] = number(r.solver->final_gap);
      j["solver_iterations"] = r.solver->iterations;
      j["solver_converged"] = r.solver->converged;
      t["solver_seconds"] = r.solver->wall_time;
      flagged = flagged || !r.solver->converged;
    } else {
      j["solver_value"] = nullptr;
      j["solver_final_gap"] = nullptr;
      j["solver_iterations"] = nullptr;
      j["solver_converged"] = nullptr;
      t["solver_seconds"] = nullptr;
    }
    flagged = flagged || r.mismatch();
    out.push_back(std::move(j));
    timing.push_back(std::move(t));
  }
  e.payload["rows"] = std::move(out);
  e.timing["rows"] = std::move(timing);
  e.status = flagged ? Status::flagged : Status::ok;
  return e;
}

// ---------------------------------------------------------------------------
// CSV rendering

inline std::string csv_cell(const Json& v) {
  if (v.is_null()) return "";
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_number_float()) return format_double(v.get<double>());
  if (v.is_number_integer() || v.is_number_unsigned()) return v.dump();
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string quoted = "\"";
    for (char c : s) {
      if (c == '"') quoted += '"';
      quoted += c;
    }
    return quoted + "\"";
  }
  return csv_cell(Json(v.dump()));
}

inline void flatten(const Json& v, const std::string& path, std::vector<std::pair<std::string, Json>>& out) {
  if (v.is_object()) {
    for (auto it = v.begin(); it != v.end(); ++it) flatten(it.value(), path.empty() ? it.key() : path + "." + it.key(), out);
  } else if (v.is_array()) {
    for (std::size_t i = 0; i < v.size(); ++i) flatten(v[i], path + "[" + std::to_string(i) + "]", out);
  } else {
    out.emplace_back(path, v);
  }
}

inline std::string to_csv_table(const Json& rows, const std::vector<std::string>& columns) {
  std::string s;
  for (std::size_t c = 0; c < columns.size(); ++c) s += (c ? "," : "") + columns[c];
  s += '\n';
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < columns.size(); ++c) {
      if (c) s += ',';
      const auto& cell = row.at(columns[c]);
      s += csv_cell(cell.is_array() ? Json(cell.dump()) : cell);
    }
    s += '\n';
  }
  return s;
}

/// Envelope metadata as '#' comment lines, then one table with a header row.
/// count, enumerate and bench render their row lists; verify-claims and ree
/// render the flattened payload as path,value pairs.
inline std::string render_csv(const ReportEnvelope& e) {
  std::string s;
  s += "# tool_version=" + e.tool_version + '\n';
  s += "# command=" + e.command.dump() + '\n';
  s += "# seed=" + std::to_string(e.seed) + '\n';
  s += "# status=" + to_string(e.status) + '\n';
  s += "# timing=" + e.timing.dump() + '\n';
  const auto sub = e.command.at("subcommand").get<std::string>();
  if (sub == "count") {
    s += to_csv_table(e.payload.at("rows"),
                      {"n", "canonical_count", "paper_count", "mismatch", "ratio_to_previous", "ratio_decimal"});
  } else if (sub == "enumerate") {
    s += to_csv_table(e.payload.at("families"), {"rgs", "notation", "entangled_blocks"});
  } else if (sub == "bench") {
    s += to_csv_table(e.payload.at("rows"), {"n", "canonical_count", "paper_count", "mismatch", "solver_value",
                                             "solver_final_gap", "solver_iterations", "solver_converged"});
  } else {
    std::vector<std::pair<std::string, Json>> cells;
    flatten(e.payload, "", cells);
    s += "path,value\n";
    for (const auto& [path, value] : cells) s += csv_cell(Json(path)) + "," + csv_cell(value) + '\n';
  }
  return s;
}

inline std::string render(const ReportEnvelope& e, const std::string& format) {
  if (format == "csv") return render_csv(e);
  return e.to_json().dump(2) + "\n";
}

/// Writes to stdout for "-", otherwise through a temporary file renamed into
/// place.
inline void write_output(const std::string& text, const std::string& output, std::ostream& out) {
  if (output == "-" || output.empty()) {
    out << text;
    out.flush();
    return;
  }
  const std::filesystem::path target(output);
  std::filesystem::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw input_error("cannot write " + tmp.string());
    f << text;
    if (!f.flush()) throw input_error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, target);
}

// ---------------------------------------------------------------------------
// entry point

inline ReportEnvelope dispatch(const CommandSpec& spec) {
  if (spec.subcommand == "count") return run_count(spec);
  if (spec.subcommand == "enumerate") return run_enumerate(spec);
  if (spec.subcommand == "verify-claims") return run_verify_claims(spec);
  if (spec.subcommand == "ree") return run_ree(spec);
  if (spec.subcommand == "bench") return run_bench(spec);
  throw std::invalid_argument("unknown subcommand " + spec.subcommand);
}

namespace detail {

inline void add_common(CLI::App* sub, CommandSpec& spec) {
  sub->add_option("--seed", spec.seed, "Random seed");
  sub->add_option("--format", spec.format, "Output format")->check(CLI::IsMember({"json", "csv"}));
  sub->add_option("--output,-o", spec.output, "Output path, - for standard output");
}

inline void add_solver(CLI::App* sub, SolverConfig& c) {
  sub->add_option("--gap-tolerance", c.gap_tolerance, "Duality-gap stopping threshold (nats)")
      ->check(CLI::PositiveNumber);
  sub->add_option("--max-iterations", c.max_iterations, "Frank-Wolfe iteration cap")->check(CLI::PositiveNumber);
  sub->add_option("--oracle-restarts", c.oracle_restarts, "Random starts per oracle call")
      ->check(CLI::PositiveNumber);
  sub->add_option("--oracle-sweep-tolerance", c.oracle_sweep_tolerance, "Oracle sweep improvement threshold")
      ->check(CLI::PositiveNumber);
  sub->add_option("--line-search-tolerance", c.line_search_tolerance, "Line-search bracket width")
      ->check(CLI::PositiveNumber);
  sub->add_option("--eigen-floor", c.eigen_floor, "Eigenvalue floor for logarithms")->check(CLI::PositiveNumber);
}

}  // namespace detail

/// Runs one command. `args` excludes the program name.
inline int run(const std::vector<std::string>& args, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CommandSpec spec;
  spec.solver.gap_tolerance = 5e-3;

  CLI::App app{"Term families of the general n-way disentangled state, PPT witnesses and relative entropy of "
               "entanglement",
               "disent"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(DISENT_VERSION));

  auto* count = app.add_subcommand("count", "Canonical term counts against the reported counts");
  count->add_option("--n,--n-max", spec.n, "Largest party count")->required();
  detail::add_common(count, spec);

  auto* enumerate = app.add_subcommand("enumerate", "List the term families for n parties");
  enumerate->add_option("--n", spec.n, "Party count")->required();
  enumerate->add_flag("--include-single-block", spec.include_single_block, "Also list the single-block partition");
  detail::add_common(enumerate, spec);

  auto* verify = app.add_subcommand("verify-claims", "Tripartite irreducibility witnesses and count comparison");
  verify->add_option("--n", spec.n, "Party count (must be 3)");
  verify->add_option("--trials", spec.trials, "Random trials per side");
  detail::add_common(verify, spec);

  auto* ree = app.add_subcommand("ree", "Relative entropy of entanglement by Frank-Wolfe");
  ree->add_option("--target", spec.target, "Named state (bell, phi-, psi+, psi-, ghz, w, mixed, basis:<bits>) or "
                                           "density-matrix file")
      ->required();
  ree->add_option("--n", spec.n, "Party count for named states without a fixed size (default 3)");
  ree->add_option("--families", spec.families, "all | fully-product | comma-separated list such as 0/12,1/02");
  detail::add_solver(ree, spec.solver);
  detail::add_common(ree, spec);

  auto* bench = app.add_subcommand("bench", "Term count, enumeration and solver cost against n");
  bench->add_option("--n-list", spec.n_list, "Comma-separated party counts")->delimiter(',')->required();
  detail::add_solver(bench, spec.solver);
  detail::add_common(bench, spec);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << (app.get_subcommands().empty() ? app.help() : app.get_subcommands().front()->help());
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << DISENT_VERSION << '\n';
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitError;
  }
  spec.subcommand = app.get_subcommands().front()->get_name();
  if (spec.subcommand == "verify-claims" && verify->get_option("--n")->count() == 0) spec.n = 3;

  try {
    const auto envelope = dispatch(spec);
    write_output(render(envelope, spec.format), spec.output, out);
    return envelope.status == Status::ok ? kExitOk : kExitFlagged;
  } catch (const std::exception& e) {
    std::string msg = e.what();
    std::replace(msg.begin(), msg.end(), '\n', ' ');
    err << "error: " << msg << '\n';
    return kExitError;
  }
}

}  // namespace disent::cli
