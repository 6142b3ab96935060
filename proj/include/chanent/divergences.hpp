#pragma once

#include <optional>
#include <string>
#include <vector>

#include "channels.hpp"
#include "optimize.hpp"

namespace chanent {

// D(rho||sigma) in bits. +inf when the weight of rho outside supp(sigma)
// exceeds leak_tol. rho need not be normalised.
inline double rel_entropy(const Matrix& rho, const Matrix& sigma, const Tolerances& tol = {}) {
  if (rho.rows() != sigma.rows() || rho.cols() != sigma.cols())
    throw DimensionError("rel_entropy: dimension mismatch");
  auto sr = herm_eig(rho, tol.herm_tol);
  auto ss = herm_eig(sigma, tol.herm_tol);
  if (sr.values(0) < -tol.psd_tol || ss.values(0) < -tol.psd_tol)
    throw DomainError("rel_entropy: argument is not PSD");

  // |<a_i|b_j>|^2
  Eigen::MatrixXd ov = (sr.vectors.adjoint() * ss.vectors).cwiseAbs2();
  double leak = 0.0, self = 0.0, cross = 0.0;
  for (Eigen::Index i = 0; i < sr.values.size(); ++i) {
    const double p = sr.values(i);
    if (p < tol.support_cutoff) continue;
    self += p * std::log2(p);
    for (Eigen::Index j = 0; j < ss.values.size(); ++j) {
      const double q = ss.values(j);
      if (q < tol.support_cutoff)
        leak += p * ov(i, j);
      else
        cross += p * ov(i, j) * std::log2(q);
    }
  }
  if (leak > tol.leak_tol) return kInf;
  return self - cross;
}

// D(rho || 2^c y^alpha) with the logarithm taken on the spectrum of y, so
// large alpha does not underflow small eigenvalues. The support is that of y,
// with the cutoff scaled to its largest eigenvalue.
inline double rel_entropy_to_power(const Matrix& rho, const Matrix& y, double alpha, double log2_c,
                                   const Tolerances& tol = {}) {
  if (rho.rows() != y.rows() || rho.cols() != y.cols()) throw DimensionError("rel_entropy_to_power: dimension mismatch");
  auto sr = herm_eig(rho, tol.herm_tol);
  auto sy = herm_eig(y, tol.herm_tol);
  const double top = std::max(1.0, sy.values(sy.values.size() - 1));
  if (sr.values(0) < -tol.psd_tol || sy.values(0) < -tol.psd_tol * top)
    throw DomainError("rel_entropy_to_power: argument is not PSD");
  const double cut = tol.support_cutoff * top;
  Eigen::MatrixXd ov = (sr.vectors.adjoint() * sy.vectors).cwiseAbs2();
  double leak = 0.0, self = 0.0, cross = 0.0;
  for (Eigen::Index i = 0; i < sr.values.size(); ++i) {
    const double p = sr.values(i);
    if (p < tol.support_cutoff) continue;
    self += p * std::log2(p);
    for (Eigen::Index j = 0; j < sy.values.size(); ++j) {
      const double q = sy.values(j);
      if (q < cut)
        leak += p * ov(i, j);
      else
        cross += p * ov(i, j) * (alpha * std::log2(q) + log2_c);
    }
  }
  if (leak > tol.leak_tol) return kInf;
  return self - cross;
}

// -tr(x log2 x) on the support; x PSD, not necessarily normalised.
inline double vn_entropy(const Matrix& x, const Tolerances& tol = {}) {
  auto sd = herm_eig(x, tol.herm_tol);
  if (sd.values(0) < -tol.psd_tol) throw DomainError("vn_entropy: argument is not PSD");
  double s = 0.0;
  for (Eigen::Index i = 0; i < sd.values.size(); ++i) {
    const double p = sd.values(i);
    if (p >= tol.support_cutoff) s -= p * std::log2(p);
  }
  return s;
}

// |Psi> = (A (x) 1) sum_i |ii> on R (x) A, stored through A_Psi (|R| x |A|).
struct PureBipartiteState {
  Matrix a_psi;
  double min_singular = 0.0;
  bool full_rank = false;

  static PureBipartiteState from_a(Matrix a, double rank_cutoff = Tolerances{}.rank_cutoff) {
    const double nrm = a.norm();
    if (!(nrm > 0)) throw DomainError("PureBipartiteState: zero A_Psi");
    PureBipartiteState s;
    s.a_psi = a / nrm;
    Eigen::JacobiSVD<Matrix> svd(s.a_psi);
    const auto& sv = svd.singularValues();
    s.min_singular = (s.a_psi.rows() == s.a_psi.cols() && sv.size()) ? sv(sv.size() - 1) : 0.0;
    s.full_rank = s.min_singular > rank_cutoff;
    return s;
  }

  static PureBipartiteState maximally_entangled(std::size_t d) {
    return from_a(identity(d));
  }

  std::size_t dim_ref() const { return static_cast<std::size_t>(a_psi.rows()); }
  std::size_t dim_in() const { return static_cast<std::size_t>(a_psi.cols()); }

  CVector vector() const {
    CVector v(a_psi.size());
    for (Eigen::Index r = 0; r < a_psi.rows(); ++r)
      for (Eigen::Index i = 0; i < a_psi.cols(); ++i) v(r * a_psi.cols() + i) = a_psi(r, i);
    return v;
  }

  Matrix density() const {
    CVector v = vector();
    return v * v.adjoint();
  }

  // Psi_R = A A^+
  Matrix marginal_ref() const { return a_psi * a_psi.adjoint(); }
  // Psi_A = (A^+ A)^t
  Matrix marginal_in() const { return (a_psi.adjoint() * a_psi).transpose(); }

  // (id (x) N)(Psi) = (A (x) 1) C_N (A (x) 1)^+
  Matrix output(const Channel& n) const {
    if (n.dim_in() != dim_in()) throw DimensionError("PureBipartiteState::output: channel input dim mismatch");
    Matrix k = tensor(a_psi, identity(n.dim_out()));
    return k * n.choi() * k.adjoint();
  }
};

struct OptimizerOpts {
  int restarts = 32;
  int max_evals = 2000;
  std::uint64_t seed = 0;
  double rank_cutoff = 1e-6;
  double step = 0.1;
  bool grid_check = false;
  // Entropy-gain and refined data-processing bounds need full-rank witness marginals.
  bool require_full_rank = false;
  // Extra starting points; each one adds a local search seeded there.
  std::vector<PureBipartiteState> feasible_points;
};

struct DivergenceResult {
  double value = 0.0;
  bool infinite = false;
  PureBipartiteState witness;
  int restarts_used = 0;
  std::vector<double> per_restart_values;
  bool converged = false;
  bool is_lower_bound = true;
  // true when value and per_restart_values hold -D (entropies)
  bool negated = false;
  std::string method = "opt";
  std::optional<double> grid_value;
  // set when a full-rank witness was required and had to be blended
  bool witness_nudged = false;
};

namespace detail {

inline Matrix unpack_a(const std::vector<double>& x, std::size_t r, std::size_t a) {
  Matrix m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(a));
  std::size_t k = 0;
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j, k += 2) m(i, j) = cplx(x[k], x[k + 1]);
  double nrm = m.norm();
  if (nrm > 0) m /= nrm;
  return m;
}

inline std::vector<double> pack_a(const Matrix& m) {
  std::vector<double> x;
  x.reserve(static_cast<std::size_t>(2 * m.size()));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      x.push_back(m(i, j).real());
      x.push_back(m(i, j).imag());
    }
  return x;
}

// Replacer maps have Choi 1 (x) X. Returns X or nothing.
inline std::optional<Matrix> replacer_output(const Channel& n) {
  Matrix x = partial_trace(n.choi(), n.dim_in(), n.dim_out(), Keep::second) / static_cast<double>(n.dim_in());
  double scale = std::max(1.0, max_abs(n.choi()));
  if (max_abs(n.choi() - tensor(identity(n.dim_in()), x)) > 1e-12 * scale) return std::nullopt;
  return x;
}

inline bool share_covariance(const Channel& n, const Channel& m) {
  return n.covariance() && m.covariance() &&
         (n.covariance() == m.covariance() || n.covariance()->same_as(*m.covariance()));
}

// Blend towards the maximally entangled A until min singular value clears
// the cutoff.
inline PureBipartiteState nudge_full_rank(const PureBipartiteState& s, double rank_cutoff) {
  if (s.full_rank) return s;
  const std::size_t d = s.dim_in();
  Matrix me = identity(d) / std::sqrt(static_cast<double>(d));
  for (double t = 1e-4; t <= 1.0; t *= 2.0) {
    auto c = PureBipartiteState::from_a((1.0 - t) * s.a_psi + t * me, rank_cutoff);
    if (c.full_rank) return c;
  }
  return PureBipartiteState::from_a(me, rank_cutoff);
}

}  // namespace detail

// Multi-restart Nelder-Mead maximisation of objective(A_Psi) over normalised
// |R| x |A| matrices. Restart k draws its start from make_rng(seed, k).
template <class Objective>
DivergenceResult maximize_over_pure_states(std::size_t r, std::size_t a, Objective&& objective,
                                           const OptimizerOpts& opts) {
  DivergenceResult res;
  res.value = -kInf;
  std::function<double(const std::vector<double>&)> f = [&](const std::vector<double>& x) {
    return -objective(detail::unpack_a(x, r, a));
  };

  auto run_from = [&](const Matrix& a0) {
    std::vector<double> x = detail::pack_a(a0);
    int budget = opts.max_evals;
    double step = opts.step;
    bool conv = false;
    SimplexResult best{x, f(x), 1, false};
    budget -= 1;
    // restart the simplex around the incumbent with shrinking steps
    for (int stage = 0; stage < 3 && budget > 0; ++stage) {
      SimplexResult sr = nelder_mead(f, best.x, step, budget);
      budget -= sr.evals;
      if (sr.fx <= best.fx) best = sr;
      conv = sr.converged;
      step *= 0.1;
    }
    Matrix abest = detail::unpack_a(best.x, r, a);
    double v = objective(abest);
    res.per_restart_values.push_back(v);
    res.converged = res.converged || conv;
    if (v > res.value || res.per_restart_values.size() == 1) {
      res.value = v;
      res.witness = PureBipartiteState::from_a(abest, opts.rank_cutoff);
    }
  };

  for (int k = 0; k < opts.restarts; ++k) {
    Rng rng = make_rng(opts.seed, static_cast<std::uint64_t>(k));
    run_from(ginibre(r, a, rng));
    if (res.value == kInf) break;
  }
  for (const auto& fp : opts.feasible_points) {
    if (fp.dim_ref() != r || fp.dim_in() != a) throw DimensionError("feasible point has wrong shape");
    run_from(fp.a_psi);
    if (res.value == kInf) break;
  }
  res.restarts_used = static_cast<int>(res.per_restart_values.size());
  if (opts.require_full_rank && !res.witness.full_rank) {
    res.witness = detail::nudge_full_rank(res.witness, opts.rank_cutoff);
    res.witness_nudged = true;
    res.value = objective(res.witness.a_psi);
  }
  res.infinite = res.value == kInf;
  return res;
}

// D((id (x) N)Psi || (id (x) M)Psi)
inline double divergence_at(const Channel& n, const Channel& m, const PureBipartiteState& psi,
                            const Tolerances& tol = {}) {
  return rel_entropy(psi.output(n), psi.output(m), tol);
}

// Dense grid over qubit inputs: every pure Psi on R (x) A with |A| = 2 is
// fixed up to a unitary on R by Psi_A, so a Bloch-ball grid covers all
// values of the objective.
inline double grid_max_qubit(const Channel& n, const Channel& m, int per_axis, const Tolerances& tol = {}) {
  if (n.dim_in() != 2) throw DimensionError("grid_max_qubit: input is not a qubit");
  auto ps = paulis();
  const double pi = std::acos(-1.0);
  double best = -kInf;
  for (int ir = 1; ir <= per_axis; ++ir) {
    const double rad = static_cast<double>(ir) / per_axis;
    for (int it = 0; it <= per_axis; ++it) {
      const double th = pi * it / per_axis;
      for (int ip = 0; ip < per_axis; ++ip) {
        const double ph = 2 * pi * ip / per_axis;
        Matrix rho = 0.5 * (ps[0] + rad * (std::sin(th) * std::cos(ph) * ps[1] +
                                          std::sin(th) * std::sin(ph) * ps[2] + std::cos(th) * ps[3]));
        Matrix a = mat_fn_psd(rho, MatFn::sqrt(), tol).transpose();
        best = std::max(best, divergence_at(n, m, PureBipartiteState::from_a(a), tol));
      }
    }
  }
  return best;
}

// D[N||M] = sup over pure Psi_RA with |R| = |A|.
inline DivergenceResult channel_divergence(const Channel& n, const Channel& m, const OptimizerOpts& opts = {},
                                           const Tolerances& tol = {}) {
  if (n.dim_in() != m.dim_in() || n.dim_out() != m.dim_out())
    throw DimensionError("channel_divergence: dimension mismatch");
  if (!n.is_cptp()) throw DomainError("channel_divergence: first argument is not CPTP");
  if (!m.is_cp()) throw DomainError("channel_divergence: second argument is not CP");
  const std::size_t a = n.dim_in();

  if (detail::share_covariance(n, m)) {
    DivergenceResult r;
    r.witness = PureBipartiteState::maximally_entangled(a);
    r.value = rel_entropy(n.choi_normalized(), m.choi_normalized(), tol);
    r.infinite = r.value == kInf;
    r.per_restart_values = {r.value};
    r.converged = true;
    r.is_lower_bound = false;
    r.method = "telecov";
    return r;
  }
  auto xn = detail::replacer_output(n);
  auto xm = detail::replacer_output(m);
  if (xn && xm) {
    DivergenceResult r;
    r.witness = PureBipartiteState::maximally_entangled(a);
    r.value = rel_entropy(*xn, *xm, tol);
    r.infinite = r.value == kInf;
    r.per_restart_values = {r.value};
    r.converged = true;
    r.is_lower_bound = false;
    r.method = "replacer";
    return r;
  }

  // Support inclusion at a full-rank input decides finiteness for every input.
  auto me = PureBipartiteState::maximally_entangled(a);
  if (divergence_at(n, m, me, tol) == kInf) {
    DivergenceResult r;
    r.witness = me;
    r.value = kInf;
    r.infinite = true;
    r.per_restart_values = {kInf};
    r.restarts_used = 1;
    r.converged = true;
    return r;
  }
  const Matrix ib = identity(n.dim_out());
  auto objective = [&](const Matrix& am) {
    Matrix k = tensor(am, ib);
    return rel_entropy(k * n.choi() * k.adjoint(), k * m.choi() * k.adjoint(), tol);
  };
  auto res = maximize_over_pure_states(a, a, objective, opts);
  if (opts.grid_check && a == 2) res.grid_value = grid_max_qubit(n, m, 21, tol);
  return res;
}

inline DivergenceResult negate(DivergenceResult r) {
  r.value = -r.value;
  for (auto& v : r.per_restart_values) v = -v;
  r.negated = true;
  return r;
}

// S[N] = S(C_N) - log|A|, exact for tele-covariant N.
inline double channel_entropy_telecov(const Channel& n, double residual_tol = 1e-8, const Tolerances& tol = {}) {
  if (!n.covariance()) throw DomainError("channel_entropy_telecov: channel carries no covariance group");
  double res = covariance_residual(n, *n.covariance());
  if (res > residual_tol) throw DomainError("channel_entropy_telecov: covariance residual too large");
  return vn_entropy(n.choi_normalized(), tol) - std::log2(static_cast<double>(n.dim_in()));
}

// S[N] = -D[N||R]. The objective is S((id (x) N)Psi) - S(Psi_R), minimised.
inline DivergenceResult channel_entropy(const Channel& n, const OptimizerOpts& opts = {}, const Tolerances& tol = {}) {
  if (!n.is_cptp()) throw DomainError("channel_entropy: channel is not CPTP");
  const std::size_t a = n.dim_in(), b = n.dim_out();
  if (n.covariance()) {
    DivergenceResult r;
    r.witness = PureBipartiteState::maximally_entangled(a);
    r.value = channel_entropy_telecov(n, 1e-8, tol);
    r.per_restart_values = {r.value};
    r.converged = true;
    r.is_lower_bound = false;
    r.negated = true;
    r.method = "telecov";
    return r;
  }
  if (auto x = detail::replacer_output(n)) {
    DivergenceResult r;
    r.witness = PureBipartiteState::maximally_entangled(a);
    r.value = vn_entropy(*x, tol);
    r.per_restart_values = {r.value};
    r.converged = true;
    r.is_lower_bound = false;
    r.negated = true;
    r.method = "replacer";
    return r;
  }
  auto res = maximize_over_pure_states(
      a, a,
      [&](const Matrix& am) {
        Matrix k = tensor(am, identity(b));
        Matrix out = k * n.choi() * k.adjoint();
        return vn_entropy(am * am.adjoint(), tol) - vn_entropy(out, tol);
      },
      opts);
  if (opts.grid_check && a == 2) res.grid_value = grid_max_qubit(n, depolarizing_R(a, b), 21, tol);
  return negate(std::move(res));
}

// S_beta[N] = -D[N||R^beta]
inline DivergenceResult channel_entropy_beta(const Channel& n, const ThermalMap& thermal, const OptimizerOpts& opts = {},
                                             const Tolerances& tol = {}) {
  if (static_cast<std::size_t>(thermal.hamiltonian.rows()) != n.dim_out())
    throw DimensionError("channel_entropy_beta: Hamiltonian does not act on the output");
  auto r = channel_divergence(n, thermal_map(thermal, n.dim_in(), tol), opts, tol);
  if (r.method == "opt") r.method = "beta";
  return negate(std::move(r));
}

}  // namespace chanent
