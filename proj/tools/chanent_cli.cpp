// chanent: channel entropy / divergence / recovery / verification front end.
// Exit codes: 0 ok, 1 verification failures, 2 usage or parse error,
// 3 semantic input error.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "chanent/suites.hpp"

namespace {

using namespace chanent;

struct Common {
  std::optional<std::uint64_t> seed;
  std::optional<int> restarts;
  std::optional<int> trials;
  std::string config_path;
  std::string out_path;
  unsigned threads = 0;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--seed", c.seed, "RNG seed");
  cmd->add_option("--restarts", c.restarts, "optimizer restarts")->check(CLI::NonNegativeNumber);
  cmd->add_option("--config", c.config_path, "RunConfig JSON file")->check(CLI::ExistingFile);
  cmd->add_option("--out", c.out_path, "output file (default stdout)");
}

RunConfig load_config(const Common& c) {
  RunConfig cfg;
  if (!c.config_path.empty()) cfg = run_config_from_json(read_json_file(c.config_path));
  if (c.seed) cfg.seed = *c.seed;
  if (c.restarts) cfg.optimizer.restarts = *c.restarts;
  if (c.threads) cfg.threads = c.threads;
  if (!c.out_path.empty()) cfg.output_path = c.out_path;
  cfg.optimizer.seed = cfg.seed;
  cfg.tolerances.rank_cutoff = cfg.optimizer.rank_cutoff;
  cfg.validate();
  return cfg;
}

void emit(const std::string& text, const RunConfig& cfg) {
  if (cfg.output_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(cfg.output_path, std::ios::binary);
  if (!f) throw ParseError("cannot write " + cfg.output_path);
  f << text;
}

void emit(const json& j, const RunConfig& cfg) { emit(j.dump(2) + "\n", cfg); }

Matrix load_matrix(const std::string& path) { return matrix_from_json(read_json_file(path)); }

int cmd_entropy(const std::string& channel_file, const RunConfig& cfg) {
  Channel n = channel_from_json(read_json_file(channel_file));
  DivergenceResult r = channel_entropy(n, cfg.optimizer, cfg.tolerances);
  json out = to_json(r);
  out["quantity"] = "channel_entropy";
  emit(out, cfg);
  return 0;
}

int cmd_divergence(const std::string& n_file, const std::string& m_file, const RunConfig& cfg) {
  Channel n = channel_from_json(read_json_file(n_file));
  Channel m = channel_from_json(read_json_file(m_file));
  OptimizerOpts o = cfg.optimizer;
  o.grid_check = o.grid_check || n.dim_in() == 2;
  DivergenceResult r = channel_divergence(n, m, o, cfg.tolerances);
  json out = to_json(r);
  out["quantity"] = "channel_divergence";
  emit(out, cfg);
  return 0;
}

int cmd_apply_super(const std::string& super_file, const std::string& channel_file, const RunConfig& cfg) {
  Superchannel theta = superchannel_from_json(read_json_file(super_file));
  Channel n = channel_from_json(read_json_file(channel_file));
  Channel out = apply_super(theta, n, cfg.tolerances);
  json j = to_json(out);
  j["superchannel_flags"] = to_json(theta)["flags"];
  if (theta.dilation) j["dilation_residual"] = max_abs(apply_super_dilation(theta, n).choi() - out.choi());
  emit(j, cfg);
  return 0;
}

int cmd_recover(const std::string& sigma_file, const std::string& channel_file, const std::string& input_file,
                const std::string& mode, const std::string& original_file, const RunConfig& cfg) {
  Matrix sigma = load_matrix(sigma_file);
  Channel n = channel_from_json(read_json_file(channel_file));
  DensityOperator input(load_matrix(input_file), cfg.tolerances);
  if (input.dim() != n.dim_out()) throw DimensionError("recover: input state does not match channel output");
  std::optional<Matrix> original;
  if (!original_file.empty()) original = DensityOperator(load_matrix(original_file), cfg.tolerances).matrix();

  json out = {{"mode", mode}};
  auto run = [&](const std::string& kind) {
    RecoveryMap r = kind == "petz" ? petz(sigma, n, cfg.tolerances)
                                   : universal_recovery(sigma, n, cfg.quadrature, std::nullopt, cfg.tolerances);
    Matrix rec = hermitian_part(r(input.matrix()));
    json j = {{"state", to_json(rec)}, {"kind", to_string(r.kind)}};
    if (original) j["fidelity"] = fidelity(rec, *original, cfg.tolerances);
    out[kind] = j;
  };
  if (mode == "petz" || mode == "both") run("petz");
  if (mode == "universal" || mode == "both") run("universal");
  emit(out, cfg);
  return 0;
}

int cmd_verify(const std::string& suite, int trials, const RunConfig& cfg) {
  SuiteReport rep = run_suite(suite, trials, cfg);
  emit(to_json(rep), cfg);
  const auto& s = rep.summary;
  std::fprintf(stderr, "%s: %d passed, %d failed, %d skipped, min slack %.3g\n", s.suite.c_str(), s.passes,
               s.failures, s.skipped, s.min_slack);
  return s.failures > 0 ? 1 : 0;
}

int cmd_report(const std::string& report_file, const RunConfig& cfg) {
  json rep = read_json_file(report_file);
  try {
    emit(records_csv(rep), cfg);
  } catch (const json::exception& e) {
    throw ParseError(std::string("report: ") + e.what());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Entropy and divergence of quantum channels under superchannels"};
  app.require_subcommand(1);
  Common common;

  auto* entropy = app.add_subcommand("entropy", "entropy S[N] of a channel");
  std::string ch_file;
  entropy->add_option("channel", ch_file, "channel JSON")->required();
  add_common(entropy, common);

  auto* divergence = app.add_subcommand("divergence", "channel divergence D[N||M]");
  std::string n_file, m_file;
  divergence->add_option("n", n_file, "CPTP channel JSON")->required();
  divergence->add_option("m", m_file, "CP map JSON")->required();
  add_common(divergence, common);

  auto* apply = app.add_subcommand("apply-super", "apply a superchannel to a channel");
  std::string super_file, apply_ch;
  apply->add_option("superchannel", super_file, "superchannel JSON")->required();
  apply->add_option("channel", apply_ch, "channel JSON")->required();
  add_common(apply, common);

  auto* recover = app.add_subcommand("recover", "Petz or universal recovery of a state");
  std::string sigma_file, rec_ch, input_file, mode = "both", original_file;
  recover->add_option("sigma", sigma_file, "reference state sigma (matrix JSON)")->required();
  recover->add_option("channel", rec_ch, "channel JSON")->required();
  recover->add_option("input", input_file, "state to recover (matrix JSON)")->required();
  recover->add_option("--mode", mode, "petz | universal | both")->check(CLI::IsMember({"petz", "universal", "both"}));
  recover->add_option("--original", original_file, "state to compare against for fidelity");
  add_common(recover, common);

  auto* verify = app.add_subcommand("verify", "run a verification suite");
  std::string suite;
  verify->add_option("suite", suite, "suite name")->required();
  verify->add_option("--trials", common.trials, "number of trials")->check(CLI::PositiveNumber);
  verify->add_option("--threads", common.threads, "worker threads");
  add_common(verify, common);

  auto* report = app.add_subcommand("report", "CSV projection of a verify report");
  std::string report_file;
  report->add_option("report", report_file, "report JSON")->required();
  add_common(report, common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    RunConfig cfg = load_config(common);
    if (*entropy) return cmd_entropy(ch_file, cfg);
    if (*divergence) return cmd_divergence(n_file, m_file, cfg);
    if (*apply) return cmd_apply_super(super_file, apply_ch, cfg);
    if (*recover) return cmd_recover(sigma_file, rec_ch, input_file, mode, original_file, cfg);
    if (*verify) return cmd_verify(suite, common.trials.value_or(10), cfg);
    if (*report) return cmd_report(report_file, cfg);
  } catch (const ParseError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const chanent::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
  return 2;
}
