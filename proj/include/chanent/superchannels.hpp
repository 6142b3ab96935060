#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "divergences.hpp"

namespace chanent {

// pre: C -> A (x) R, post: B (x) R -> D
struct Dilation {
  Channel pre;
  Channel post;
  std::size_t ref_dim = 1;
};

struct SuperFlags {
  Certificate completely_cp_preserving;
  Certificate tp_preserving;
};

// Supermap L(A,B) -> L(C,D). rep is the representing map
// T: L(A (x) B) -> L(C (x) D) with T(C_N) = C_Theta(N).
struct Superchannel {
  std::size_t a = 0, b = 0, c = 0, d = 0;
  std::optional<Dilation> dilation;
  Channel rep;
  SuperFlags flags;

  std::array<std::size_t, 4> dims() const { return {a, b, c, d}; }
  bool is_superchannel() const { return flags.completely_cp_preserving.yes() && flags.tp_preserving.yes(); }
};

// Choi of Theta(N) through the dilation: post o (N (x) id_R) o pre.
inline Matrix dilation_image(const Dilation& dil, const Channel& n) {
  return choi_from_action(dil.pre.dim_in(), dil.post.dim_out(), [&](const Matrix& y) {
    return dil.post(apply_tensor_id(n, dil.pre(y), dil.ref_dim));
  });
}

// Completely CP preserving iff Choi(T) >= 0. TP preserving iff tr_D T(X)
// depends on X only through tr_B X and sends tr_B X = 1_A to 1_C.
inline void certify_super(Superchannel& s, const Tolerances& tol = {}) {
  s.flags = {};
  const Channel& t = s.rep;
  if (is_hermitian(t.choi(), tol.herm_tol)) {
    double lo = min_eigenvalue(t.choi());
    s.flags.completely_cp_preserving = {lo >= -tol.psd_tol ? Tri::yes : Tri::no, lo};
  } else {
    s.flags.completely_cp_preserving = {Tri::no, std::numeric_limits<double>::quiet_NaN()};
  }
  const std::size_t ab = s.a * s.b;
  auto trd = [&](const Matrix& x) { return partial_trace(t(x), s.c, s.d, Keep::first); };
  double res = max_abs(trd(identity(ab) / static_cast<double>(s.b)) - identity(s.c));
  for (std::size_t p = 0; p < ab; ++p)
    for (std::size_t q = 0; q < ab; ++q) {
      Matrix x = unit(ab, p, q);
      Matrix xa = tensor(partial_trace(x, s.a, s.b, Keep::first), identity(s.b) / static_cast<double>(s.b));
      res = std::max(res, max_abs(trd(x) - trd(xa)));
    }
  s.flags.tp_preserving = {res <= 1e-9 ? Tri::yes : Tri::no, res};
}

inline Superchannel super_from_rep(Channel rep, std::size_t a, std::size_t b, std::size_t c, std::size_t d,
                                   const Tolerances& tol = {}) {
  if (rep.dim_in() != a * b || rep.dim_out() != c * d)
    throw DimensionError("super_from_rep: representing map dims do not match (a,b,c,d)");
  Superchannel s;
  s.a = a;
  s.b = b;
  s.c = c;
  s.d = d;
  s.rep = std::move(rep);
  certify_super(s, tol);
  return s;
}

inline Superchannel super_from_dilation(const Channel& pre, const Channel& post, std::size_t ref_dim,
                                        const Tolerances& tol = {}) {
  if (ref_dim == 0 || pre.dim_out() % ref_dim != 0 || post.dim_in() % ref_dim != 0)
    throw DimensionError("super_from_dilation: reference dimension does not divide pre/post dims");
  if (!pre.is_cptp() || !post.is_cptp()) throw DomainError("super_from_dilation: pre and post must be CPTP");
  Dilation dil{pre, post, ref_dim};
  const std::size_t a = pre.dim_out() / ref_dim, b = post.dim_in() / ref_dim;
  const std::size_t c = pre.dim_in(), d = post.dim_out();
  Matrix rep = choi_from_action(a * b, c * d, [&](const Matrix& x) {
    return dilation_image(dil, Channel::unchecked(x, a, b));
  });
  Superchannel s = super_from_rep(Channel::from_choi(std::move(rep), a * b, c * d, tol), a, b, c, d, tol);
  s.dilation = std::move(dil);
  return s;
}

inline Superchannel identity_super(std::size_t a, std::size_t b) {
  return super_from_dilation(identity_channel(a), identity_channel(b), 1);
}

// N -> V o N o U
inline Superchannel unitary_sandwich(const Matrix& u, const Matrix& v) {
  return super_from_dilation(unitary_channel(u), unitary_channel(v), 1);
}

// N -> sum_i p_i v_i o N o u_i with isometries u_i: C -> A, v_i: B -> D.
// The dilation carries the index i in a classical flag register.
inline Superchannel random_isometry_super(const std::vector<double>& probs, const std::vector<Matrix>& us,
                                          const std::vector<Matrix>& vs, double iso_tol = 1e-10) {
  const std::size_t k = probs.size();
  if (k == 0 || us.size() != k || vs.size() != k)
    throw DimensionError("random_isometry_super: probs, pre and post lists differ in length");
  double total = 0.0;
  for (double p : probs) {
    if (p < 0) throw DomainError("random_isometry_super: negative probability");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-10) throw DomainError("random_isometry_super: probabilities do not sum to 1");
  for (std::size_t i = 0; i < k; ++i) {
    if (us[i].rows() != us[0].rows() || us[i].cols() != us[0].cols() || vs[i].rows() != vs[0].rows() ||
        vs[i].cols() != vs[0].cols())
      throw DimensionError("random_isometry_super: isometries of inconsistent shape");
    if (max_abs(us[i].adjoint() * us[i] - identity(static_cast<std::size_t>(us[i].cols()))) > iso_tol ||
        max_abs(vs[i].adjoint() * vs[i] - identity(static_cast<std::size_t>(vs[i].cols()))) > iso_tol)
      throw DomainError("random_isometry_super: input is not an isometry");
  }
  std::vector<Matrix> pre_k, post_k;
  for (std::size_t i = 0; i < k; ++i) {
    Matrix flag = Matrix::Zero(static_cast<Eigen::Index>(k), 1);
    flag(static_cast<Eigen::Index>(i), 0) = 1.0;
    if (probs[i] > 0) pre_k.push_back(std::sqrt(probs[i]) * tensor(us[i], flag));
    post_k.push_back(tensor(vs[i], flag.transpose()));
  }
  return super_from_dilation(Channel::from_kraus(std::move(pre_k)), Channel::from_kraus(std::move(post_k)), k);
}

inline Channel apply_super(const Superchannel& theta, const Channel& n, const Tolerances& tol = {}) {
  if (n.dim_in() != theta.a || n.dim_out() != theta.b) throw DimensionError("apply_super: channel dims do not match");
  return Channel::from_choi(theta.rep(n.choi()), theta.c, theta.d, tol);
}

inline Channel apply_super_dilation(const Superchannel& theta, const Channel& n, const Tolerances& tol = {}) {
  if (!theta.dilation) throw DomainError("apply_super_dilation: superchannel has no dilation");
  if (n.dim_in() != theta.a || n.dim_out() != theta.b)
    throw DimensionError("apply_super_dilation: channel dims do not match");
  return Channel::from_choi(dilation_image(*theta.dilation, n), theta.c, theta.d, tol);
}

// T*: L(C (x) D) -> L(A (x) B)
inline Channel representing_adjoint(const Superchannel& theta) { return adjoint(theta.rep); }

// Theta*(M) = Gamma_{T*(C_M)}
inline Channel apply_super_adjoint(const Superchannel& theta, const Channel& m) {
  if (m.dim_in() != theta.c || m.dim_out() != theta.d)
    throw DimensionError("apply_super_adjoint: channel dims do not match");
  return Channel::from_choi(representing_adjoint(theta)(m.choi()), theta.a, theta.b);
}

// (id_R (x) Theta)(N) for N: L(R (x) A) -> L(R (x) B).
inline Channel apply_super_with_reference(const Superchannel& theta, const Channel& n, std::size_t r,
                                          const Tolerances& tol = {}) {
  if (n.dim_in() != r * theta.a || n.dim_out() != r * theta.b)
    throw DimensionError("apply_super_with_reference: channel dims do not match");
  Matrix x = permute_subsystems(n.choi(), {r, theta.a, r, theta.b}, {0, 2, 1, 3});
  Matrix y = apply_id_tensor(theta.rep, x, r * r);
  Matrix c = permute_subsystems(y, {r, r, theta.c, theta.d}, {0, 2, 1, 3});
  return Channel::from_choi(std::move(c), r * theta.c, r * theta.d, tol);
}

// Theta2 o Theta1
inline Superchannel compose_supers(const Superchannel& t2, const Superchannel& t1) {
  if (t1.c != t2.a || t1.d != t2.b) throw DimensionError("compose_supers: dims do not chain");
  return super_from_rep(compose(t2.rep, t1.rep), t1.a, t1.b, t2.c, t2.d);
}

// Theta1 (x) Theta2 on L(A1 A2, B1 B2) -> L(C1 C2, D1 D2).
inline Superchannel tensor_supers(const Superchannel& t1, const Superchannel& t2) {
  const Channel joint = tensor_channels(t1.rep, t2.rep, false);
  const std::size_t a = t1.a * t2.a, b = t1.b * t2.b, c = t1.c * t2.c, d = t1.d * t2.d;
  Matrix rep = choi_from_action(a * b, c * d, [&](const Matrix& x) {
    Matrix xs = permute_subsystems(x, {t1.a, t2.a, t1.b, t2.b}, {0, 2, 1, 3});
    Matrix y = joint(xs);
    return permute_subsystems(y, {t1.c, t1.d, t2.c, t2.d}, {0, 2, 1, 3});
  });
  return super_from_rep(Channel::from_choi(std::move(rep), a * b, c * d), a, b, c, d);
}

// ---- trace-preserving repair ---------------------------------------------

// T'(X) = T(X) + [tr X - tr T(X)] sigma0, Choi C_T + (1 - T*(1))^t (x) sigma0.
struct TpFixedMap {
  Channel base;
  Matrix sigma0;
  Channel map;
  double choi_min_eig = 0.0;
  double tp_residual = 0.0;
  bool is_cptp = false;
  int candidates = 0;
  // "certified" or "undecided"; a failed search never proves non-membership
  std::string status = "undecided";
};

inline Matrix adjoint_unit_image(const Channel& t) { return adjoint(t, false)(identity(t.dim_out())); }

inline Matrix trace_completion_choi(const Channel& t, const Matrix& sigma0) {
  Matrix w = (identity(t.dim_in()) - adjoint_unit_image(t)).transpose();
  return t.choi() + tensor(w, sigma0);
}

namespace detail {

inline TpFixedMap finish_tp_fix(const Channel& t, const Matrix& sigma0, int candidates, const Tolerances& tol) {
  TpFixedMap out;
  out.base = t;
  out.sigma0 = sigma0;
  out.candidates = candidates;
  Matrix c = trace_completion_choi(t, sigma0);
  out.map = Channel::from_choi(c, t.dim_in(), t.dim_out(), tol);
  out.choi_min_eig = is_hermitian(c, tol.herm_tol) ? min_eigenvalue(c) : -kInf;
  out.tp_residual = max_abs(partial_trace(c, t.dim_in(), t.dim_out(), Keep::first) - identity(t.dim_in()));
  out.is_cptp = out.choi_min_eig >= -tol.psd_tol && out.tp_residual <= kTpTol;
  out.status = out.is_cptp ? "certified" : "undecided";
  return out;
}

}  // namespace detail

// Without sigma0, searches diagonal sigma0 (trace 1, negative entries
// allowed) in the eigenbasis of the output marginal of the conjugated Choi
// bound, maximising the least eigenvalue of Choi(T'). At most max_candidates
// evaluations.
inline TpFixedMap tp_fix(const Channel& t, const std::optional<Matrix>& sigma0 = std::nullopt,
                         const Tolerances& tol = {}, int max_candidates = 500) {
  const std::size_t n_in = t.dim_in(), n_out = t.dim_out();
  if (sigma0) {
    if (static_cast<std::size_t>(sigma0->rows()) != n_out || sigma0->rows() != sigma0->cols())
      throw DimensionError("tp_fix: sigma0 has wrong size");
    if (std::abs(sigma0->trace().real() - 1.0) > 1e-12 || std::abs(sigma0->trace().imag()) > 1e-12)
      throw DomainError("tp_fix: sigma0 must have unit trace");
    return detail::finish_tp_fix(t, *sigma0, 0, tol);
  }
  const Matrix mixed = identity(n_out) / static_cast<double>(n_out);
  Matrix w = (identity(n_in) - adjoint_unit_image(t)).transpose();
  if (!is_hermitian(w, tol.herm_tol) || !is_hermitian(t.choi(), tol.herm_tol))
    return detail::finish_tp_fix(t, mixed, 1, tol);
  w = hermitian_part(w);
  auto wd = herm_eig(w);
  // trace non-increasing: the maximally mixed state is enough
  if (wd.values(0) >= -tol.psd_tol) return detail::finish_tp_fix(t, mixed, 1, tol);

  Matrix w_isqrt = wd.apply([&](double x) { return std::abs(x) < tol.support_cutoff ? 0.0 : 1.0 / std::sqrt(std::abs(x)); });
  Matrix kc = tensor(w_isqrt, identity(n_out));
  Matrix bound = kc * t.choi() * kc.adjoint();
  Matrix marg = hermitian_part(partial_trace(bound, n_in, n_out, Keep::second));
  const Matrix u = herm_eig(marg).vectors;
  const Matrix ct = hermitian_part(t.choi());

  std::vector<Matrix> wk;  // W (x) u_k u_k^+
  for (std::size_t k = 0; k < n_out; ++k) {
    CVector col = u.col(static_cast<Eigen::Index>(k));
    wk.push_back(tensor(w, col * col.adjoint()));
  }
  int used = 0;
  struct Eval {
    double g;
    CVector v;
  };
  auto evaluate = [&](const RVector& s) {
    ++used;
    Matrix m = ct;
    for (std::size_t k = 0; k < n_out; ++k) m += s(static_cast<Eigen::Index>(k)) * wk[k];
    Eigen::SelfAdjointEigenSolver<Matrix> es(m);
    return Eval{es.eigenvalues()(0), es.eigenvectors().col(0)};
  };
  auto to_sigma = [&](const RVector& s) -> Matrix { return u * s.cast<cplx>().asDiagonal() * u.adjoint(); };

  RVector s = RVector::Constant(static_cast<Eigen::Index>(n_out), 1.0 / static_cast<double>(n_out));
  Eval cur = evaluate(s);
  const double scale = std::max(1.0, max_abs(ct));
  auto grad = [&](const Eval& e) {
    RVector gvec(static_cast<Eigen::Index>(n_out));
    for (std::size_t k = 0; k < n_out; ++k) gvec(static_cast<Eigen::Index>(k)) = (e.v.adjoint() * wk[k] * e.v)(0, 0).real();
    return RVector(gvec.array() - gvec.mean());
  };
  // Try a direction with an expanding then shrinking step; true on improvement.
  auto line_search = [&](const RVector& dir) {
    if (dir.norm() < 1e-15) return false;
    RVector d = dir / dir.norm();
    double step = 0.5;
    bool improved = false;
    while (used < max_candidates) {
      RVector trial = s + step * d;
      Eval e = evaluate(trial);
      if (e.g > cur.g + 1e-15 * scale) {
        s = trial;
        cur = e;
        improved = true;
        step *= 2.0;
      } else if (improved || step < 1e-9) {
        break;
      } else {
        step *= 0.25;
      }
    }
    return improved;
  };

  while (used < max_candidates && cur.g < 0.0) {
    if (line_search(grad(cur))) continue;
    // kink: fall back to pairwise mass transfers
    bool moved = false;
    for (std::size_t i = 0; i < n_out && used < max_candidates; ++i)
      for (std::size_t j = 0; j < n_out && used < max_candidates; ++j) {
        if (i == j) continue;
        RVector dir = RVector::Zero(static_cast<Eigen::Index>(n_out));
        dir(static_cast<Eigen::Index>(i)) = 1.0;
        dir(static_cast<Eigen::Index>(j)) = -1.0;
        moved = line_search(dir) || moved;
      }
    if (!moved) break;
  }
  return detail::finish_tp_fix(t, to_sigma(s), used, tol);
}

inline TpFixedMap tp_fix(const Superchannel& theta, const std::optional<Matrix>& sigma0 = std::nullopt,
                         const Tolerances& tol = {}) {
  if (!theta.flags.completely_cp_preserving.yes())
    throw DomainError("tp_fix: supermap is not completely CP preserving");
  return tp_fix(theta.rep, sigma0, tol);
}

// T'*(Y) = T*(Y) + tr(sigma0 Y)(1 - T*(1)), linear in Y.
inline Channel tp_fix_adjoint(const TpFixedMap& t) {
  const Channel ta = adjoint(t.base, false);
  const Matrix gap = identity(t.base.dim_in()) - ta(identity(t.base.dim_out()));
  return channel_from_action(t.base.dim_out(), t.base.dim_in(), [&](const Matrix& y) {
    return Matrix(ta(y) + (t.sigma0 * y).trace() * gap);
  });
}

struct RSubCheck {
  Certificate verdict;
  double min_eig = 0.0;
  bool is_r_preserving = false;
  double residual = 0.0;
};

// R_{C->D} - Theta(R_{A->B}) has Choi 1_CD - T(1_AB).
inline RSubCheck is_r_subpreserving(const Superchannel& theta, const Tolerances& tol = {}) {
  Matrix diff = identity(theta.c * theta.d) - theta.rep(identity(theta.a * theta.b));
  RSubCheck out;
  out.min_eig = min_eigenvalue(diff);
  out.verdict = {out.min_eig >= -tol.psd_tol ? Tri::yes : Tri::no, out.min_eig};
  out.residual = max_abs(diff);
  out.is_r_preserving = out.residual <= 1e-9;
  return out;
}

// ---- generalized representing map ----------------------------------------

// T_Psi(X) = (A_Psi (x) 1) X (A_Psi (x) 1)^+ on L(A (x) B).
inline Matrix t_psi(const PureBipartiteState& psi, const Matrix& x, std::size_t dout) {
  Matrix k = tensor(psi.a_psi, identity(dout));
  return k * x * k.adjoint();
}

inline Matrix t_psi_inv(const PureBipartiteState& psi, const Matrix& x, std::size_t dout) {
  Matrix k = tensor(psi.a_psi.inverse(), identity(dout));
  return k * x * k.adjoint();
}

struct GeneralizedRepMap {
  PureBipartiteState psi;
  PureBipartiteState phi;
  Channel t_frak;          // T_Phi o T o T_Psi^-1
  Channel t_frak_adjoint;
  double alpha_norm = 0.0; // ||t_frak*(1)||_inf
};

inline GeneralizedRepMap generalized_rep(const Superchannel& theta, const PureBipartiteState& psi,
                                         const PureBipartiteState& phi, const Tolerances& tol = {}) {
  if (psi.dim_ref() != theta.a || psi.dim_in() != theta.a || phi.dim_ref() != theta.c || phi.dim_in() != theta.c)
    throw DimensionError("generalized_rep: witness dims do not match the superchannel");
  if (psi.min_singular <= tol.rank_cutoff || phi.min_singular <= tol.rank_cutoff)
    throw RankError("generalized_rep: witness marginal is rank deficient");
  GeneralizedRepMap g;
  g.psi = psi;
  g.phi = phi;
  g.t_frak = channel_from_action(theta.a * theta.b, theta.c * theta.d, [&](const Matrix& x) {
    return t_psi(phi, theta.rep(t_psi_inv(psi, x, theta.b)), theta.d);
  });
  g.t_frak_adjoint = adjoint(g.t_frak);
  g.alpha_norm = norms(g.t_frak_adjoint(identity(theta.c * theta.d))).op_norm;
  return g;
}

}  // namespace chanent
