#pragma once

#include <algorithm>
#include <atomic>
#include <functional>
#include <map>
#include <string>
#include <thread>
#include <vector>

#include "bounds.hpp"

namespace chanent {

struct RunConfig {
  Tolerances tolerances;
  double ineq_tol = 1e-3;
  OptimizerOpts optimizer;
  Quadrature quadrature;
  std::uint64_t seed = 0;
  std::string output_path;
  unsigned threads = 1;

  void validate() const {
    const auto& t = tolerances;
    if (!(t.psd_tol > 0 && t.support_cutoff > 0 && t.herm_tol > 0 && ineq_tol > 0))
      throw ParseError("config: tolerances must be positive");
    if (optimizer.restarts < 0 || optimizer.max_evals < 1 || !(optimizer.rank_cutoff > 0))
      throw ParseError("config: optimizer needs restarts >= 0, max_evals >= 1, rank_cutoff > 0");
    try {
      quadrature.validate();
    } catch (const DomainError& e) {
      throw ParseError(std::string("config: ") + e.what());
    }
    if (threads == 0) throw ParseError("config: threads must be >= 1");
  }
};

inline json to_json(const RunConfig& c) {
  return {{"tolerances",
           {{"psd_tol", c.tolerances.psd_tol},
            {"support_cutoff", c.tolerances.support_cutoff},
            {"herm_tol", c.tolerances.herm_tol},
            {"ineq_tol", c.ineq_tol}}},
          {"optimizer",
           {{"restarts", c.optimizer.restarts},
            {"max_evals", c.optimizer.max_evals},
            {"rank_cutoff", c.optimizer.rank_cutoff}}},
          {"quadrature", to_json(c.quadrature)},
          {"seed", c.seed},
          {"output_path", c.output_path},
          {"threads", c.threads}};
}

inline RunConfig run_config_from_json(const json& j) {
  if (!j.is_object()) throw ParseError("config: expected an object");
  RunConfig c;
  try {
    if (j.contains("tolerances")) {
      const json& t = j["tolerances"];
      c.tolerances.psd_tol = t.value("psd_tol", c.tolerances.psd_tol);
      c.tolerances.support_cutoff = t.value("support_cutoff", c.tolerances.support_cutoff);
      c.tolerances.herm_tol = t.value("herm_tol", c.tolerances.herm_tol);
      c.ineq_tol = t.value("ineq_tol", c.ineq_tol);
    }
    if (j.contains("optimizer")) c.optimizer = optimizer_opts_from_json(j["optimizer"], c.optimizer);
    if (j.contains("quadrature")) c.quadrature = quadrature_from_json(j["quadrature"], c.quadrature);
    c.seed = j.value("seed", c.seed);
    c.output_path = j.value("output_path", c.output_path);
    c.threads = j.value("threads", c.threads);
  } catch (const json::exception& e) {
    throw ParseError(std::string("config: ") + e.what());
  }
  c.tolerances.rank_cutoff = c.optimizer.rank_cutoff;
  c.validate();
  return c;
}

// FNV-1a over the canonical dump; stable across platforms. Thread count and
// output path do not change results and are left out.
inline std::string config_hash(const RunConfig& c) {
  json j = to_json(c);
  j.erase("output_path");
  j.erase("threads");
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : j.dump()) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

struct SuiteSummary {
  std::string suite;
  int trials = 0;
  int passes = 0;
  int failures = 0;
  int skipped = 0;
  double min_slack = kInf;
  std::string config_hash;
};

inline json to_json(const SuiteSummary& s) {
  return {{"suite", s.suite},       {"trials", s.trials},
          {"passes", s.passes},     {"failures", s.failures},
          {"skipped", s.skipped},   {"min_slack", number_or_inf(s.min_slack)},
          {"config_hash", s.config_hash}};
}

struct SuiteReport {
  std::vector<VerificationRecord> records;
  SuiteSummary summary;
  RunConfig config;
};

inline json to_json(const SuiteReport& r) {
  json recs = json::array();
  for (const auto& x : r.records) recs.push_back(to_json(x));
  json cfg = to_json(r.config);
  cfg.erase("output_path");
  cfg.erase("threads");
  return {{"records", recs}, {"summary", to_json(r.summary)}, {"config", cfg}};
}

inline SuiteSummary summarize(const std::string& suite, int trials, const std::vector<VerificationRecord>& recs,
                              const RunConfig& cfg) {
  SuiteSummary s;
  s.suite = suite;
  s.trials = trials;
  s.config_hash = config_hash(cfg);
  for (const auto& r : recs) {
    if (r.skipped) {
      ++s.skipped;
      continue;
    }
    r.pass ? ++s.passes : ++s.failures;
    s.min_slack = std::min(s.min_slack, r.slack);
  }
  return s;
}

// ---- instance generators --------------------------------------------------

namespace gen {

inline std::array<double, 4> simplex4(Rng& rng, double floor = 0.0) {
  std::array<double, 4> p;
  double t = 0.0;
  for (auto& x : p) {
    x = floor - std::log(std::max(uniform01(rng), 1e-300));
    t += x;
  }
  for (auto& x : p) x /= t;
  return p;
}

// Pauli channel with the Pauli group attached.
inline Channel pauli(Rng& rng, double floor = 0.0) { return pauli_channel(simplex4(rng, floor)).with_covariance(pauli_group()); }

// N -> sum_i p_i P_j(i) o N o P_k(i): unitary mixture of Pauli sandwiches.
inline Superchannel pauli_mixture_super(Rng& rng, std::size_t terms = 3) {
  auto ps = paulis();
  std::vector<double> probs;
  std::vector<Matrix> us, vs;
  double t = 0.0;
  for (std::size_t i = 0; i < terms; ++i) {
    probs.push_back(0.05 + uniform01(rng));
    t += probs.back();
    us.push_back(ps[uniform_int(rng, 0, 3)]);
    vs.push_back(ps[uniform_int(rng, 0, 3)]);
  }
  for (auto& p : probs) p /= t;
  return random_isometry_super(probs, us, vs);
}

// Random mixture of isometric sandwiches C -> A, B -> D.
inline Superchannel isometry_super(Rng& rng, std::size_t a, std::size_t b, std::size_t c, std::size_t d,
                                   std::size_t terms = 2) {
  std::vector<double> probs;
  std::vector<Matrix> us, vs;
  double t = 0.0;
  for (std::size_t i = 0; i < terms; ++i) {
    probs.push_back(0.05 + uniform01(rng));
    t += probs.back();
    us.push_back(haar_isometry(a, c, rng));
    vs.push_back(haar_isometry(d, b, rng));
  }
  for (auto& p : probs) p /= t;
  return random_isometry_super(probs, us, vs);
}

}  // namespace gen

// T with Kraus sqrt2 |0><0|, |1><1|/sqrt2 is neither trace increasing nor
// decreasing; sigma0 = diag(1.99, -1/5)/1.79 repairs it.
inline std::vector<VerificationRecord> example_b4_records() {
  const double al = std::sqrt(2.0), be = 1.0 / std::sqrt(2.0);
  Matrix k1 = Matrix::Zero(2, 2), k2 = Matrix::Zero(2, 2);
  k1(0, 0) = al;
  k2(1, 1) = be;
  Channel t = Channel::from_kraus({k1, k2});
  Matrix s = Matrix::Zero(2, 2);
  s(0, 0) = 1.99;
  s(1, 1) = -0.2;
  s /= s.trace();
  TpFixedMap fx = tp_fix(t, s);
  json params = {{"alpha", al},
                 {"beta", be},
                 {"sigma0", to_json(fx.sigma0)},
                 {"choi_min_eig", fx.choi_min_eig},
                 {"tp_residual", fx.tp_residual},
                 {"choi", to_json(fx.map.choi())}};
  auto cp = make_record("example_b4_cp", fx.choi_min_eig, 0.0, 1e-10);
  cp.params = params;
  auto tp = make_record("example_b4_tp", 0.0, fx.tp_residual, 1e-12);
  tp.params = params;
  return {cp, tp};
}

// One trial of a named suite; rng is private to the trial.
inline std::vector<VerificationRecord> run_trial(const std::string& suite, Rng& rng, const RunConfig& cfg,
                                                 std::uint64_t trial_seed) {
  const Tolerances& tl = cfg.tolerances;
  OptimizerOpts opts = cfg.optimizer;
  opts.seed = trial_seed;
  const double tol = cfg.ineq_tol;
  std::vector<VerificationRecord> out;

  if (suite == "petz") {
    const std::size_t d = uniform_int(rng, 2, 3), dout = uniform_int(rng, 2, 3);
    const std::size_t env = uniform_int(rng, (d + dout - 1) / dout, 3);
    Matrix sigma = random_state(d, rng);
    Channel n = random_channel(d, dout, env, rng);
    RecoveryMap p = petz(sigma, n, tl);
    double res = trace_norm(p(n(sigma)) - sigma);
    auto r = make_record("petz_exact_recovery", 0.0, res, 1e-8, trial_seed);
    r.params = {{"dim_in", d}, {"dim_out", dout}, {"env", env}};
    r.witnesses = {{"sigma", to_json(sigma)}, {"channel", to_json(n, false)}};
    out.push_back(r);
  } else if (suite == "dpi") {
    Channel n = random_channel(2, 2, 2, rng), m = random_channel(2, 2, 4, rng);
    const std::size_t dd = uniform_int(rng, 2, 3);
    Superchannel th = gen::isometry_super(rng, 2, 2, 2, dd);
    out.push_back(verify_channel_dpi(n, m, th, opts, tol, tl));
  } else if (suite == "thm3") {
    Channel n = gen::pauli(rng);
    Superchannel th = gen::pauli_mixture_super(rng);
    out.push_back(verify_superchannel_entropy_gain(th, n, opts, nullptr, tl).record(tol, trial_seed));
  } else if (suite == "thm4") {
    Channel n = gen::pauli(rng), m = gen::pauli(rng, 0.05);
    Superchannel th = gen::pauli_mixture_super(rng);
    out.push_back(verify_refined_dpi(th, n, m, opts, cfg.quadrature, tol, nullptr, tl));
  } else if (suite == "prop8") {
    Channel n = random_channel(2, 2, 2, rng);
    const std::size_t dd = uniform_int(rng, 2, 3);
    Superchannel th = gen::isometry_super(rng, 2, 2, 2, dd);
    out.push_back(verify_entropy_nondecrease(th, n, opts, tol, nullptr, tl));
  } else if (suite == "entropy-gain") {
    const std::size_t din = uniform_int(rng, 2, 3), dout = uniform_int(rng, 2, 3), nk = uniform_int(rng, 1, 3);
    Channel f = random_cp_map(din, dout, nk, rng);
    Matrix rho = random_state(din, rng);
    auto r = entropy_gain_positive_map(f, rho, 1e-8, false, tl);
    r.seed = trial_seed;
    out.push_back(r);
  } else if (suite == "additivity") {
    Channel n = gen::pauli(rng), m = gen::pauli(rng);
    out.push_back(verify_entropy_additivity(n, m, opts, tl));
  } else if (suite == "super-div") {
    Channel n0 = random_channel(2, 2, 2, rng);
    Channel w = random_channel(4, 4, 2, rng);
    out.push_back(verify_replacer_super_bound(n0, w, 2, 2, opts, tol, tl));
  } else {
    throw ParseError("unknown suite '" + suite + "'");
  }
  for (auto& r : out) r.seed = trial_seed;
  return out;
}

inline const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names{"dpi",          "petz",       "thm3",       "thm4",     "prop8",
                                              "entropy-gain", "additivity", "example-b4", "super-div"};
  return names;
}

// Trial t draws from make_rng(seed, t); records come back in trial order
// whatever the thread count.
inline SuiteReport run_suite(const std::string& suite, int trials, const RunConfig& cfg) {
  if (std::find(suite_names().begin(), suite_names().end(), suite) == suite_names().end())
    throw ParseError("unknown suite '" + suite + "'");
  if (trials < 1) throw ParseError("trials must be >= 1");
  SuiteReport rep;
  rep.config = cfg;
  if (suite == "example-b4") {
    rep.records = example_b4_records();
    rep.summary = summarize(suite, 1, rep.records, cfg);
    return rep;
  }
  std::vector<std::vector<VerificationRecord>> per(static_cast<std::size_t>(trials));
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int t = next++; t < trials; t = next++) {
      Rng rng = make_rng(cfg.seed, static_cast<std::uint64_t>(t));
      const std::uint64_t trial_seed = rng();
      try {
        per[static_cast<std::size_t>(t)] = run_trial(suite, rng, cfg, trial_seed);
      } catch (const Error& e) {
        auto r = make_record(suite, std::numeric_limits<double>::quiet_NaN(), 0.0, cfg.ineq_tol, trial_seed);
        r.note = std::string("error: ") + e.what();
        per[static_cast<std::size_t>(t)] = {r};
      }
    }
  };
  const unsigned nt = std::min<unsigned>(cfg.threads, static_cast<unsigned>(trials));
  std::vector<std::thread> pool;
  for (unsigned i = 1; i < nt; ++i) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  for (auto& v : per)
    for (auto& r : v) rep.records.push_back(std::move(r));
  rep.summary = summarize(suite, trials, rep.records, cfg);
  return rep;
}

// Flat projection for spreadsheets.
inline std::string records_csv(const json& report) {
  std::ostringstream os;
  os << "suite,check_id,lhs,rhs,slack,pass,tolerance,seed,skipped\n";
  const std::string suite = report.at("summary").at("suite").get<std::string>();
  auto cell = [](const json& v) -> std::string {
    if (v.is_null()) return "nan";
    if (v.is_string()) return v.get<std::string>();
    if (v.is_number_float()) {
      char buf[40];
      std::snprintf(buf, sizeof buf, "%.17g", v.get<double>());
      return buf;
    }
    return v.dump();
  };
  for (const auto& r : report.at("records"))
    os << suite << ',' << r.at("check_id").get<std::string>() << ',' << cell(r.at("lhs")) << ',' << cell(r.at("rhs"))
       << ',' << cell(r.at("slack")) << ',' << (r.at("pass").get<bool>() ? "true" : "false") << ','
       << cell(r.at("tolerance")) << ',' << r.at("seed").get<std::uint64_t>() << ','
       << (r.at("skipped").get<bool>() ? "true" : "false") << '\n';
  return os.str();
}

}  // namespace chanent
