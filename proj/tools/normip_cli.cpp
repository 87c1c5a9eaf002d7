#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "normip/harness.hpp"
#include "normip/io.hpp"
#include "normip/kernels.hpp"
#include "normip/norms.hpp"
#include "normip/polytopes.hpp"
#include "normip/serialize.hpp"
#include "normip/verify.hpp"

using namespace normip;

namespace {

// Inline JSON when the argument starts with '{', otherwise a file path.
Json load_json(const std::string& arg) {
  const auto first = arg.find_first_not_of(" \t\r\n");
  const bool inline_text = first != std::string::npos && (arg[first] == '{' || arg[first] == '[');
  return Json::parse(inline_text ? arg : read_text_file(arg));
}

void emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-")
    std::cout << text << '\n';
  else
    write_text_file(path, text + '\n');
}

struct RunArgs {
  std::string spec, v, w, out, transcript, cell = "run";
  std::uint64_t seed = 7;
  std::size_t trials = 1000;
};

int cmd_run(const RunArgs& a) {
  const ProtocolSpec spec = protocol_from_json(load_json(a.spec));
  const Vector v = read_vector(a.v);
  const Vector w = read_vector(a.w);
  if (v.size() != w.size()) throw std::invalid_argument("v and w differ in length");
  const auto results = protocol_trials(spec, v, w, a.trials, a.seed);
  const TrialReport report = make_report(a.cell, spec, v.size(), results, a.seed, 0);
  emit(a.out, to_json(report).dump(2));

  if (!a.transcript.empty()) {
    Rng rng = make_rng(substream_seed(a.seed, 0, 0));
    write_text_file(a.transcript, run_protocol(spec, v, w, rng).transcript.to_debug());
  }

  const bool bits_ok = report.bits_within_bound();
  const bool contract_ok = report.contract_met();
  std::cerr << "success rate " << report.success_rate << " (target " << 1.0 - report.delta << "), max bits "
            << (report.bits.empty() ? 0 : *std::max_element(report.bits.begin(), report.bits.end()))
            << " / declared " << report.declared_bits << '\n';
  if (!bits_ok) std::cerr << "FAIL: a run exceeded the declared bit bound\n";
  if (!contract_ok) std::cerr << "FAIL: success rate below 1 - delta\n";
  return bits_ok && contract_ok ? 0 : 1;
}

struct SweepArgs {
  std::string config, out, csv;
};

int cmd_sweep(const SweepArgs& a) {
  const SweepResult r = run_sweep(load_json(a.config));
  emit(a.out, r.json.dump(2));
  if (!a.csv.empty()) write_text_file(a.csv, r.summary_csv);
  for (const auto& rep : r.reports)
    if (rep.failure) std::cerr << "quarantined " << rep.cell << ": " << *rep.failure << '\n';
  return r.passed ? 0 : 1;
}

int cmd_verify(const VerifyOptions& options) {
  bool ok = true;
  run_acceptance(options, [&](const CriterionResult& r) {
    ok = ok && r.passed;
    std::cout << format_result(r) << std::endl;
  });
  return ok ? 0 : 1;
}

struct OracleArgs {
  std::string norm, w, v, polytope, slack;
  int budget = 64;
  std::uint64_t seed = 1;
  double tolerance = 1e-6;
};

int cmd_oracle(const OracleArgs& a) {
  Json out;
  bool ok = true;
  if (!a.norm.empty()) {
    if (a.w.empty()) throw std::invalid_argument("--w is required with --norm");
    const NormSpec norm = norm_from_json(load_json(a.norm));
    const Vector w = read_vector(a.w);
    const DualNormValue brute = dual_norm_bruteforce(norm, w, a.budget, a.seed);
    const double closed = eval_norm(NormSpec::dual_of(norm), w);
    out["dual_bruteforce"] = brute.value;
    out["dual_exact"] = brute.exact;
    out["dual_closed_form"] = closed;
    out["difference"] = closed - brute.value;
    // An inexact search only certifies a lower bound.
    ok = brute.exact ? std::abs(closed - brute.value) <= a.tolerance * std::max(1.0, closed)
                     : brute.value <= closed + a.tolerance * std::max(1.0, closed);
    if (!a.v.empty()) {
      const Vector v = read_vector(a.v);
      const double norm_v = eval_norm(norm, v);
      out["norm_v"] = norm_v;
      out["inner_product"] = dot(v, w);
      ok = ok && std::abs(dot(v, w)) <= norm_v * closed * (1.0 + a.tolerance) + a.tolerance;
    }
  }
  if (!a.polytope.empty()) {
    const Polytope P = polytope_from_json(load_json(a.polytope));
    const SlackMatrix S = slack_matrix(P);
    out["slack_rows"] = S.rows;
    out["slack_cols"] = S.cols;
    if (!a.slack.empty()) write_text_file(a.slack, S.to_csv());
  }
  out["passed"] = ok;
  std::cout << out.dump(2) << '\n';
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"normip: inner-product estimation protocols over symmetric norms"};
  app.require_subcommand(1);

  RunArgs run;
  auto* run_cmd = app.add_subcommand("run", "Monte-Carlo trials of one protocol on a fixed (v, w)");
  run_cmd->add_option("--spec", run.spec, "protocol JSON (file or inline)")->required();
  run_cmd->add_option("--v", run.v, "Alice's vector (.csv, or .bin/.f64)")->required();
  run_cmd->add_option("--w", run.w, "Bob's vector")->required();
  run_cmd->add_option("--seed", run.seed);
  run_cmd->add_option("--trials", run.trials)->check(CLI::PositiveNumber);
  run_cmd->add_option("--out", run.out, "report JSON (stdout when omitted)");
  run_cmd->add_option("--transcript", run.transcript, "debug dump of the first trial's messages");
  run_cmd->add_option("--cell", run.cell, "cell name recorded in the report");

  SweepArgs sweep;
  auto* sweep_cmd = app.add_subcommand("sweep", "Run a sweep config");
  sweep_cmd->add_option("--config", sweep.config, "sweep JSON (file or inline)")->required();
  sweep_cmd->add_option("--out", sweep.out, "reports JSON (stdout when omitted)");
  sweep_cmd->add_option("--csv", sweep.csv, "summary CSV");

  VerifyOptions verify;
  auto* verify_cmd = app.add_subcommand("verify", "Run the acceptance criteria");
  verify_cmd->add_option("--seed", verify.seed);
  verify_cmd->add_option("--scale", verify.scale, "trial-count multiplier")->check(CLI::PositiveNumber);
  verify_cmd->add_option("--only", verify.only, "criterion ids (1..10)")->check(CLI::Range(1, 10));

  OracleArgs oracle;
  auto* oracle_cmd = app.add_subcommand("oracle", "Brute-force dual norms and slack matrices");
  oracle_cmd->add_option("--norm", oracle.norm, "norm JSON (file or inline)");
  oracle_cmd->add_option("--w", oracle.w, "dual-side vector");
  oracle_cmd->add_option("--v", oracle.v, "primal-side vector; checks Hoelder");
  oracle_cmd->add_option("--budget", oracle.budget, "random starts for non-polyhedral norms");
  oracle_cmd->add_option("--seed", oracle.seed);
  oracle_cmd->add_option("--tolerance", oracle.tolerance);
  oracle_cmd->add_option("--polytope", oracle.polytope, "polytope JSON");
  oracle_cmd->add_option("--slack", oracle.slack, "slack-matrix CSV output");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*run_cmd) return cmd_run(run);
    if (*sweep_cmd) return cmd_sweep(sweep);
    if (*verify_cmd) return cmd_verify(verify);
    if (*oracle_cmd) {
      if (oracle.norm.empty() && oracle.polytope.empty()) throw std::invalid_argument("give --norm or --polytope");
      return cmd_oracle(oracle);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 1;
}
