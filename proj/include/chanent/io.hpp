#pragma once

#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "recovery.hpp"

namespace chanent {

using json = nlohmann::json;

// Malformed or structurally invalid JSON input. The CLI maps this to exit 2.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ---- matrices --------------------------------------------------------------

inline json to_json(const Matrix& m) {
  json data = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) data.push_back({m(i, j).real(), m(i, j).imag()});
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", data}};
}

inline Matrix matrix_from_json(const json& j) {
  try {
    const auto rows = j.at("rows").get<Eigen::Index>();
    const auto cols = j.at("cols").get<Eigen::Index>();
    const json& data = j.at("data");
    if (rows < 0 || cols < 0 || !data.is_array() || static_cast<Eigen::Index>(data.size()) != rows * cols)
      throw ParseError("matrix: entry count does not match rows * cols");
    Matrix m(rows, cols);
    for (Eigen::Index k = 0; k < rows * cols; ++k) {
      const json& e = data[static_cast<std::size_t>(k)];
      cplx z;
      if (e.is_number())
        z = e.get<double>();
      else if (e.is_array() && e.size() == 2)
        z = cplx(e[0].get<double>(), e[1].get<double>());
      else
        throw ParseError("matrix: entries must be numbers or [re, im] pairs");
      if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) throw ParseError("matrix: non-finite entry");
      m(k / cols, k % cols) = z;
    }
    return m;
  } catch (const json::exception& e) {
    throw ParseError(std::string("matrix: ") + e.what());
  }
}

inline std::vector<Matrix> matrices_from_json(const json& j) {
  if (!j.is_array()) throw ParseError("expected an array of matrices");
  std::vector<Matrix> out;
  for (const auto& e : j) out.push_back(matrix_from_json(e));
  return out;
}

inline json to_json(const std::vector<Matrix>& ms) {
  json a = json::array();
  for (const auto& m : ms) a.push_back(to_json(m));
  return a;
}

// ---- channels --------------------------------------------------------------

inline json to_json(const Certificate& c) {
  json j = {{"verdict", to_string(c.verdict)}};
  j["value"] = std::isfinite(c.value) ? json(c.value) : json(nullptr);
  return j;
}

inline json to_json(const TeleCovariantSpec& s) {
  return {{"unitaries_in", to_json(s.reps_in)}, {"unitaries_out", to_json(s.reps_out)}};
}

inline SpecPtr spec_from_json(const json& j) {
  auto s = std::make_shared<TeleCovariantSpec>();
  try {
    s->reps_in = matrices_from_json(j.at("unitaries_in"));
    s->reps_out = matrices_from_json(j.at("unitaries_out"));
  } catch (const json::exception& e) {
    throw ParseError(std::string("TeleCovariantSpec: ") + e.what());
  }
  s->validate();
  return s;
}

inline json to_json(const Channel& n, bool with_flags = true) {
  json j = {{"dim_in", n.dim_in()}, {"dim_out", n.dim_out()}};
  if (n.kraus())
    j["kraus"] = to_json(*n.kraus());
  else {
    j["choi"] = to_json(n.choi());
    j["normalized"] = false;
  }
  if (n.covariance()) j["covariance"] = to_json(*n.covariance());
  if (with_flags) {
    const auto& f = n.flags();
    j["flags"] = {{"cp", to_json(f.cp)}, {"tp", to_json(f.tp)}, {"unital", to_json(f.unital)},
                  {"subunital", to_json(f.subunital)}};
  }
  return j;
}

// {"kraus": [...]} or {"choi": M, "normalized": bool}; dims optional when
// they can be inferred.
inline Channel channel_from_json(const json& j) {
  if (!j.is_object()) throw ParseError("channel: expected an object");
  Channel n;
  if (j.contains("kraus")) {
    auto ks = matrices_from_json(j.at("kraus"));
    if (ks.empty()) throw ParseError("channel: empty Kraus list");
    n = Channel::from_kraus(std::move(ks));
    if (j.contains("dim_in") && j["dim_in"].get<std::size_t>() != n.dim_in())
      throw DimensionError("channel: dim_in disagrees with Kraus shape");
    if (j.contains("dim_out") && j["dim_out"].get<std::size_t>() != n.dim_out())
      throw DimensionError("channel: dim_out disagrees with Kraus shape");
  } else if (j.contains("choi")) {
    Matrix c = matrix_from_json(j.at("choi"));
    if (c.rows() != c.cols()) throw DimensionError("channel: Choi matrix is not square");
    std::size_t din = 0, dout = 0;
    try {
      if (j.contains("dim_in")) din = j["dim_in"].get<std::size_t>();
      if (j.contains("dim_out")) dout = j["dim_out"].get<std::size_t>();
    } catch (const json::exception& e) {
      throw ParseError(std::string("channel: ") + e.what());
    }
    const auto total = static_cast<std::size_t>(c.rows());
    if (din == 0 && dout == 0) {
      din = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(total))));
      dout = din;
    } else if (din == 0) {
      din = dout ? total / dout : 0;
    } else if (dout == 0) {
      dout = total / din;
    }
    if (din == 0 || din * dout != total) throw DimensionError("channel: Choi size does not factor as dim_in * dim_out");
    if (j.value("normalized", false)) c *= static_cast<double>(din);
    n = Channel::from_choi(std::move(c), din, dout);
  } else {
    throw ParseError("channel: needs \"kraus\" or \"choi\"");
  }
  if (j.contains("covariance")) n = n.with_covariance(spec_from_json(j["covariance"]));
  return n;
}

// ---- superchannels -----------------------------------------------------------

inline json to_json(const Superchannel& s) {
  json j = {{"dims", {s.a, s.b, s.c, s.d}}, {"rep_choi", to_json(s.rep.choi())}};
  if (s.dilation) {
    j["pre"] = to_json(s.dilation->pre, false);
    j["post"] = to_json(s.dilation->post, false);
    j["ref_dim"] = s.dilation->ref_dim;
  }
  j["flags"] = {{"completely_cp_preserving", to_json(s.flags.completely_cp_preserving)},
                {"tp_preserving", to_json(s.flags.tp_preserving)}};
  return j;
}

inline Superchannel superchannel_from_json(const json& j) {
  if (!j.is_object()) throw ParseError("superchannel: expected an object");
  try {
    if (j.contains("pre") && j.contains("post")) {
      Channel pre = channel_from_json(j["pre"]);
      Channel post = channel_from_json(j["post"]);
      auto s = super_from_dilation(pre, post, j.value("ref_dim", std::size_t{1}));
      if (j.contains("dims")) {
        auto d = j["dims"].get<std::vector<std::size_t>>();
        if (d.size() != 4 || d[0] != s.a || d[1] != s.b || d[2] != s.c || d[3] != s.d)
          throw DimensionError("superchannel: dims disagree with the dilation");
      }
      return s;
    }
    if (j.contains("rep_choi")) {
      auto d = j.at("dims").get<std::vector<std::size_t>>();
      if (d.size() != 4) throw ParseError("superchannel: dims must have four entries");
      Matrix c = matrix_from_json(j["rep_choi"]);
      if (static_cast<std::size_t>(c.rows()) != d[0] * d[1] * d[2] * d[3])
        throw DimensionError("superchannel: rep_choi size does not match dims");
      return super_from_rep(Channel::from_choi(std::move(c), d[0] * d[1], d[2] * d[3]), d[0], d[1], d[2], d[3]);
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("superchannel: ") + e.what());
  }
  throw ParseError("superchannel: needs pre/post/ref_dim or dims/rep_choi");
}

inline json to_json(const TpFixedMap& t) {
  return {{"sigma0", to_json(t.sigma0)},     {"choi_min_eig", t.choi_min_eig},
          {"tp_residual", t.tp_residual},    {"is_cptp", t.is_cptp},
          {"candidates", t.candidates},      {"status", t.status},
          {"choi", to_json(t.map.choi())}};
}

// ---- optimizer / results -------------------------------------------------------

inline json to_json(const OptimizerOpts& o) {
  return {{"restarts", o.restarts}, {"max_evals", o.max_evals}, {"seed", o.seed},
          {"rank_cutoff", o.rank_cutoff}, {"grid_check", o.grid_check}};
}

inline OptimizerOpts optimizer_opts_from_json(const json& j, OptimizerOpts o = {}) {
  try {
    o.restarts = j.value("restarts", o.restarts);
    o.max_evals = j.value("max_evals", o.max_evals);
    o.seed = j.value("seed", o.seed);
    o.rank_cutoff = j.value("rank_cutoff", o.rank_cutoff);
    o.grid_check = j.value("grid_check", o.grid_check);
  } catch (const json::exception& e) {
    throw ParseError(std::string("optimizer options: ") + e.what());
  }
  if (o.restarts < 0 || o.max_evals < 1 || !(o.rank_cutoff > 0))
    throw ParseError("optimizer options: restarts >= 0, max_evals >= 1, rank_cutoff > 0 required");
  return o;
}

inline json number_or_inf(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return nullptr;
  return v > 0 ? "inf" : "-inf";
}

inline json to_json(const PureBipartiteState& s) {
  return {{"a_psi", to_json(s.a_psi)}, {"min_singular", s.min_singular}, {"full_rank", s.full_rank}};
}

inline PureBipartiteState pure_state_from_json(const json& j) {
  try {
    return PureBipartiteState::from_a(matrix_from_json(j.at("a_psi")));
  } catch (const json::exception& e) {
    throw ParseError(std::string("pure state: ") + e.what());
  }
}

inline json to_json(const DivergenceResult& r) {
  json per = json::array();
  for (double v : r.per_restart_values) per.push_back(number_or_inf(v));
  json j = {{"value", number_or_inf(r.value)},
            {"infinite", r.infinite},
            {"witness", to_json(r.witness)},
            {"restarts_used", r.restarts_used},
            {"per_restart_values", per},
            {"converged", r.converged},
            {"is_lower_bound", r.is_lower_bound},
            {"negated", r.negated},
            {"method", r.method},
            {"witness_nudged", r.witness_nudged}};
  if (r.grid_value) j["grid_value"] = number_or_inf(*r.grid_value);
  return j;
}

inline json to_json(const Quadrature& q) { return {{"half_width", q.half_width}, {"nodes", q.nodes}}; }

inline Quadrature quadrature_from_json(const json& j, Quadrature q = {}) {
  try {
    q.half_width = j.value("half_width", q.half_width);
    q.nodes = j.value("nodes", q.nodes);
  } catch (const json::exception& e) {
    throw ParseError(std::string("quadrature: ") + e.what());
  }
  try {
    q.validate();
  } catch (const DomainError& e) {
    throw ParseError(e.what());
  }
  return q;
}

inline json to_json(const RecoveryMap& r) {
  json j = {{"kind", to_string(r.kind)},
            {"t", r.t},
            {"choi", to_json(r.map.choi())},
            {"dim_in", r.map.dim_in()},
            {"dim_out", r.map.dim_out()},
            {"xi", to_json(r.xi)},
            {"support_projector", to_json(r.support_projector)}};
  if (r.sigma.size()) j["sigma"] = to_json(r.sigma);
  if (r.quadrature) j["quadrature"] = to_json(*r.quadrature);
  return j;
}

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(path + ": " + e.what());
  }
}

}  // namespace chanent
