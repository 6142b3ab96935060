#pragma once

#include <optional>
#include <string>
#include <vector>

#include "superchannels.hpp"

namespace chanent {

struct Quadrature {
  double half_width = 20.0;
  int nodes = 801;

  void validate() const {
    if (!(half_width > 0)) throw DomainError("Quadrature: half_width must be positive");
    if (nodes < 3 || nodes % 2 == 0) throw DomainError("Quadrature: nodes must be odd and >= 3");
  }
};

// density pi / (2 (cosh(pi t) + 1))
inline double recovery_density(double t) {
  const double pi = std::acos(-1.0);
  return pi / (2.0 * (std::cosh(pi * t) + 1.0));
}

struct QuadratureRule {
  std::vector<double> t;
  std::vector<double> w;  // Simpson weight times density
};

inline QuadratureRule quadrature_rule(const Quadrature& q) {
  q.validate();
  QuadratureRule r;
  const int n = q.nodes;
  const double h = 2.0 * q.half_width / (n - 1);
  for (int k = 0; k < n; ++k) {
    const double t = -q.half_width + k * h;
    double c = (k == 0 || k == n - 1) ? 1.0 : (k % 2 == 1 ? 4.0 : 2.0);
    r.t.push_back(t);
    r.w.push_back(c * h / 3.0 * recovery_density(t));
  }
  return r;
}

struct RecoveryMap {
  enum class Kind { petz, rotated, universal, tilde };
  Kind kind = Kind::petz;
  double t = 0.0;
  Matrix sigma;
  Channel channel;            // forward map N
  Matrix support_projector;   // onto supp N(sigma)
  Matrix xi;
  std::optional<Quadrature> quadrature;
  std::vector<double> weights;
  Channel map;

  Matrix operator()(const Matrix& x) const { return map(x); }
};

inline const char* to_string(RecoveryMap::Kind k) {
  switch (k) {
    case RecoveryMap::Kind::petz: return "petz";
    case RecoveryMap::Kind::rotated: return "rotated";
    case RecoveryMap::Kind::universal: return "universal";
    default: return "tilde";
  }
}

namespace detail {

struct PetzParts {
  SpectralDecomposition s;   // sigma
  SpectralDecomposition ns;  // N(sigma)
  Matrix s_half;
  Matrix ns_isqrt;
  Matrix proj;
  Channel nadj;
};

inline PetzParts petz_parts(const Matrix& sigma, const Channel& n, const Tolerances& tol) {
  if (static_cast<std::size_t>(sigma.rows()) != n.dim_in()) throw DimensionError("petz: sigma does not match channel input");
  DensityOperator rho(sigma, tol);
  if (!n.is_cp() || n.flags().tp.value > 1e-8) throw DomainError("petz: channel is not CPTP");
  PetzParts p;
  p.s = herm_eig(rho.matrix());
  p.ns = herm_eig(hermitian_part(n(rho.matrix())));
  p.s_half = mat_fn_psd(p.s, MatFn::sqrt(), tol.support_cutoff);
  p.ns_isqrt = mat_fn_psd(p.ns, MatFn::inv_sqrt(), tol.support_cutoff);
  p.proj = support_projector(p.ns, tol.support_cutoff);
  p.nadj = adjoint(n, false);
  return p;
}

// X -> sigma^{-it} P(N(sigma)^{it} X N(sigma)^{-it}) sigma^{it}; powers on supports.
inline Matrix rotated_petz_choi(const PetzParts& p, double t, double cutoff) {
  auto ipow = [&](const SpectralDecomposition& sd, double s) {
    return sd.apply([&](double x) { return x < cutoff ? cplx(0.0) : std::exp(cplx(0.0, s * std::log(x))); });
  };
  const bool plain = t == 0.0;
  Matrix ns_p = plain ? Matrix() : ipow(p.ns, t);
  Matrix s_m = plain ? Matrix() : ipow(p.s, -t);
  Matrix left = plain ? p.s_half : Matrix(s_m * p.s_half);
  Matrix inner_l = plain ? p.ns_isqrt : Matrix(p.ns_isqrt * ns_p);
  const std::size_t din = p.nadj.dim_in(), dout = p.nadj.dim_out();
  return choi_from_action(din, dout, [&](const Matrix& x) {
    return Matrix(left * p.nadj(inner_l * x * inner_l.adjoint()) * left.adjoint());
  });
}

}  // namespace detail

// sigma^{1/2} N*(N(sigma)^{-1/2} X N(sigma)^{-1/2}) sigma^{1/2}
inline RecoveryMap petz(const Matrix& sigma, const Channel& n, const Tolerances& tol = {}) {
  auto parts = detail::petz_parts(sigma, n, tol);
  RecoveryMap r;
  r.kind = RecoveryMap::Kind::petz;
  r.sigma = sigma;
  r.channel = n;
  r.support_projector = parts.proj;
  r.xi = identity(n.dim_in()) / static_cast<double>(n.dim_in());
  r.map = Channel::from_choi(detail::rotated_petz_choi(parts, 0.0, tol.support_cutoff), n.dim_out(), n.dim_in(), tol);
  return r;
}

inline RecoveryMap rotated_petz(const Matrix& sigma, const Channel& n, double t, const Tolerances& tol = {}) {
  auto parts = detail::petz_parts(sigma, n, tol);
  RecoveryMap r;
  r.kind = RecoveryMap::Kind::rotated;
  r.t = t;
  r.sigma = sigma;
  r.channel = n;
  r.support_projector = parts.proj;
  r.xi = identity(n.dim_in()) / static_cast<double>(n.dim_in());
  r.map = Channel::from_choi(detail::rotated_petz_choi(parts, t, tol.support_cutoff), n.dim_out(), n.dim_in(), tol);
  return r;
}

// P^R = sum_k w_k P^{t_k/2} + tr((1 - Pi) X) xi, composite Simpson nodes in
// fixed order.
inline RecoveryMap universal_recovery(const Matrix& sigma, const Channel& n, const Quadrature& quad = {},
                                      std::optional<Matrix> xi = std::nullopt, const Tolerances& tol = {}) {
  auto rule = quadrature_rule(quad);
  auto parts = detail::petz_parts(sigma, n, tol);
  const std::size_t a = n.dim_in(), b = n.dim_out();
  Matrix x = xi ? *xi : Matrix(identity(a) / static_cast<double>(a));
  if (static_cast<std::size_t>(x.rows()) != a) throw DimensionError("universal_recovery: xi has wrong size");
  DensityOperator xi_state(x, tol);

  Matrix acc = Matrix::Zero(static_cast<Eigen::Index>(a * b), static_cast<Eigen::Index>(a * b));
  for (std::size_t k = 0; k < rule.t.size(); ++k)
    acc += rule.w[k] * detail::rotated_petz_choi(parts, rule.t[k] / 2.0, tol.support_cutoff);
  acc += tensor((identity(b) - parts.proj).transpose(), x);

  RecoveryMap r;
  r.kind = RecoveryMap::Kind::universal;
  r.sigma = sigma;
  r.channel = n;
  r.support_projector = parts.proj;
  r.xi = x;
  r.quadrature = quad;
  r.weights = rule.w;
  r.map = Channel::from_choi(hermitian_part(acc), b, a, tol);
  return r;
}

// P~(X) = T*(X) + [tr X - tr T*(X)] xi, where t_frak is the forward map T.
inline RecoveryMap tilde_recovery(const Channel& t_frak, const Matrix& xi, const Tolerances& tol = {}) {
  const Channel ta = adjoint(t_frak);
  if (static_cast<std::size_t>(xi.rows()) != ta.dim_out()) throw DimensionError("tilde_recovery: xi has wrong size");
  DensityOperator xs(xi, tol);
  RecoveryMap r;
  r.kind = RecoveryMap::Kind::tilde;
  r.channel = t_frak;
  r.xi = xi;
  r.support_projector = identity(ta.dim_in());
  r.map = Channel::from_choi(hermitian_part(trace_completion_choi(ta, xi)), ta.dim_in(), ta.dim_out(), tol);
  return r;
}

// Theta^R(N~)(X) = tr_A[(X^t (x) 1) T_Psi^-1 P^R(C^Phi_N~)], with P^R the
// universal recovery of sigma = C^Psi_M through the repaired map T'.
struct RecoverySupermap {
  Superchannel theta;
  Channel m_anchor;
  PureBipartiteState psi;
  PureBipartiteState phi;
  GeneralizedRepMap rep;
  TpFixedMap t_fixed;
  RecoveryMap inner_recovery;
  double anchor_residual = 0.0;

  Channel operator()(const Channel& n_tilde, const Tolerances& tol = {}) const {
    if (n_tilde.dim_in() != theta.c || n_tilde.dim_out() != theta.d)
      throw DimensionError("recovery supermap: channel dims do not match");
    Matrix c = t_psi_inv(psi, inner_recovery(t_psi(phi, n_tilde.choi(), theta.d)), theta.b);
    return Channel::from_choi(hermitian_part(c), theta.a, theta.b, tol);
  }
};

inline RecoverySupermap recovery_supermap(const Superchannel& theta, const Channel& m, const PureBipartiteState& psi,
                                          const PureBipartiteState& phi, const Quadrature& quad = {},
                                          const Tolerances& tol = {}) {
  if (!m.is_cptp()) throw DomainError("recovery_supermap: anchor channel is not CPTP");
  RecoverySupermap rs;
  rs.theta = theta;
  rs.m_anchor = m;
  rs.psi = psi;
  rs.phi = phi;
  rs.rep = generalized_rep(theta, psi, phi, tol);
  rs.t_fixed = tp_fix(rs.rep.t_frak, std::nullopt, tol);
  if (!rs.t_fixed.is_cptp) throw DomainError("recovery_supermap: no sigma0 found that makes T' CPTP (repair undecided)");
  Matrix sigma = hermitian_part(t_psi(psi, m.choi(), theta.b));
  rs.inner_recovery = universal_recovery(sigma, rs.t_fixed.map, quad, std::nullopt, tol);
  rs.anchor_residual = max_abs(rs(apply_super(theta, m, tol), tol).choi() - m.choi());
  return rs;
}

}  // namespace chanent
