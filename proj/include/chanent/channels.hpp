#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <utility>
#include <vector>

#include "linalg.hpp"
#include "random.hpp"

namespace chanent {

enum class Tri { yes, no, unverified };

inline const char* to_string(Tri t) {
  switch (t) {
    case Tri::yes: return "yes";
    case Tri::no: return "no";
    default: return "unverified";
  }
}

// verdict plus the number that decided it (min eigenvalue or residual norm)
struct Certificate {
  Tri verdict = Tri::unverified;
  double value = std::numeric_limits<double>::quiet_NaN();

  bool yes() const { return verdict == Tri::yes; }
};

struct ChannelFlags {
  Certificate cp, tp, unital, subunital;
};

inline constexpr double kTpTol = 1e-10;

// Group representation for tele-covariance: N(U_g X U_g^+) = V_g N(X) V_g^+.
struct TeleCovariantSpec {
  std::vector<Matrix> reps_in;
  std::vector<Matrix> reps_out;

  std::size_t group_size() const { return reps_in.size(); }
  std::size_t dim_in() const { return reps_in.empty() ? 0 : static_cast<std::size_t>(reps_in[0].rows()); }
  std::size_t dim_out() const { return reps_out.empty() ? 0 : static_cast<std::size_t>(reps_out[0].rows()); }

  // Throws DomainError unless all reps are unitary and the input twirl is
  // completely depolarizing on every matrix unit.
  void validate(double unitary_tol = 1e-10, double twirl_tol = 1e-8) const {
    if (reps_in.empty() || reps_in.size() != reps_out.size())
      throw DimensionError("TeleCovariantSpec: need equally many input and output unitaries");
    const std::size_t a = dim_in(), b = dim_out();
    auto check_unitary = [&](const Matrix& u, std::size_t d) {
      if (static_cast<std::size_t>(u.rows()) != d || u.rows() != u.cols())
        throw DimensionError("TeleCovariantSpec: unitaries of inconsistent size");
      if (max_abs(u.adjoint() * u - identity(d)) > unitary_tol)
        throw DomainError("TeleCovariantSpec: representation element is not unitary");
    };
    for (const auto& u : reps_in) check_unitary(u, a);
    for (const auto& v : reps_out) check_unitary(v, b);
    const double g = static_cast<double>(group_size());
    for (std::size_t i = 0; i < a; ++i)
      for (std::size_t j = 0; j < a; ++j) {
        Matrix e = unit(a, i, j);
        Matrix tw = Matrix::Zero(e.rows(), e.cols());
        for (const auto& u : reps_in) tw += u * e * u.adjoint();
        tw /= g;
        Matrix want = (i == j ? 1.0 / static_cast<double>(a) : 0.0) * identity(a);
        if (max_abs(tw - want) > twirl_tol)
          throw DomainError("TeleCovariantSpec: input twirl is not completely depolarizing");
      }
  }

  bool same_as(const TeleCovariantSpec& o, double tol = 1e-12) const {
    if (group_size() != o.group_size() || dim_in() != o.dim_in() || dim_out() != o.dim_out())
      return false;
    for (std::size_t g = 0; g < group_size(); ++g)
      if (max_abs(reps_in[g] - o.reps_in[g]) > tol || max_abs(reps_out[g] - o.reps_out[g]) > tol)
        return false;
    return true;
  }
};

using SpecPtr = std::shared_ptr<const TeleCovariantSpec>;

// Linear map L(A) -> L(B) stored as its Choi operator
//   C = sum_ij e_ij (x) N(e_ij)   on A (x) B,
// so N(Q) = tr_A[(Q^t (x) 1) C]. Not every Channel is CP or TP; the flags
// say what was verified.
class Channel {
 public:
  Channel() = default;

  // No certification; flags stay unverified. For intermediate maps.
  static Channel unchecked(Matrix choi, std::size_t din, std::size_t dout) {
    Channel n;
    n.set_choi(std::move(choi), din, dout);
    return n;
  }

  static Channel from_choi(Matrix choi, std::size_t din, std::size_t dout, const Tolerances& tol = {}) {
    Channel n = unchecked(std::move(choi), din, dout);
    n.certify(tol);
    return n;
  }

  static Channel from_kraus(std::vector<Matrix> kraus, const Tolerances& tol = {}) {
    if (kraus.empty()) throw DimensionError("channel_from_kraus: empty Kraus list");
    const auto dout = static_cast<std::size_t>(kraus[0].rows());
    const auto din = static_cast<std::size_t>(kraus[0].cols());
    for (const auto& k : kraus)
      if (static_cast<std::size_t>(k.rows()) != dout || static_cast<std::size_t>(k.cols()) != din)
        throw DimensionError("channel_from_kraus: inconsistent Kraus shapes");
    Matrix c = Matrix::Zero(static_cast<Eigen::Index>(din * dout), static_cast<Eigen::Index>(din * dout));
    for (const auto& k : kraus) {
      CVector v(c.rows());
      for (std::size_t i = 0; i < din; ++i)
        for (std::size_t o = 0; o < dout; ++o)
          v(static_cast<Eigen::Index>(i * dout + o)) = k(static_cast<Eigen::Index>(o), static_cast<Eigen::Index>(i));
      c += v * v.adjoint();
    }
    Channel n = unchecked(std::move(c), din, dout);
    n.kraus_ = std::move(kraus);
    n.certify(tol);
    n.flags_.cp.verdict = Tri::yes;
    return n;
  }

  std::size_t dim_in() const { return din_; }
  std::size_t dim_out() const { return dout_; }
  const Matrix& choi() const { return choi_; }
  Matrix choi_normalized() const { return choi_ / static_cast<double>(din_); }
  const std::optional<std::vector<Matrix>>& kraus() const { return kraus_; }
  const ChannelFlags& flags() const { return flags_; }
  const SpecPtr& covariance() const { return spec_; }

  bool is_cp() const { return flags_.cp.yes(); }
  bool is_tp() const { return flags_.tp.yes(); }
  bool is_cptp() const { return is_cp() && is_tp(); }
  bool is_hermiticity_preserving(double tol = Tolerances{}.herm_tol) const { return is_hermitian(choi_, tol); }

  Matrix apply(const Matrix& x) const {
    if (static_cast<std::size_t>(x.rows()) != din_ || static_cast<std::size_t>(x.cols()) != din_)
      throw DimensionError("apply: input has wrong dimension");
    const auto o = static_cast<Eigen::Index>(dout_);
    Matrix out = Matrix::Zero(o, o);
    for (Eigen::Index i = 0; i < x.rows(); ++i)
      for (Eigen::Index j = 0; j < x.cols(); ++j) {
        const cplx xij = x(i, j);
        if (xij != cplx(0.0)) out.noalias() += xij * choi_.block(i * o, j * o, o, o);
      }
    return out;
  }

  Matrix operator()(const Matrix& x) const { return apply(x); }

  // Attaches a covariance group after checking the residual.
  Channel with_covariance(SpecPtr spec, double tol = 1e-8) const;

  void certify(const Tolerances& tol = {}) {
    flags_ = {};
    const bool herm = is_hermitian(choi_, tol.herm_tol);
    if (herm) {
      double lo = min_eigenvalue(choi_);
      flags_.cp = {lo >= -tol.psd_tol ? Tri::yes : Tri::no, lo};
    } else {
      flags_.cp = {Tri::no, std::numeric_limits<double>::quiet_NaN()};
    }
    Matrix marg = partial_trace(choi_, din_, dout_, Keep::first);
    double tp_res = max_abs(marg - identity(din_));
    flags_.tp = {tp_res <= kTpTol ? Tri::yes : Tri::no, tp_res};
    Matrix img = apply(identity(din_));
    double un_res = max_abs(img - identity(dout_));
    flags_.unital = {un_res <= kTpTol ? Tri::yes : Tri::no, un_res};
    if (herm) {
      double lo = min_eigenvalue(identity(dout_) - img);
      flags_.subunital = {lo >= -tol.psd_tol ? Tri::yes : Tri::no, lo};
    }
  }

 private:
  void set_choi(Matrix choi, std::size_t din, std::size_t dout) {
    if (din == 0 || dout == 0) throw DimensionError("Channel: zero dimension");
    if (static_cast<std::size_t>(choi.rows()) != din * dout || choi.rows() != choi.cols())
      throw DimensionError("Channel: Choi size does not match dim_in * dim_out");
    if (!choi.allFinite()) throw DomainError("Channel: non-finite Choi entries");
    choi_ = std::move(choi);
    din_ = din;
    dout_ = dout;
  }

  Matrix choi_;
  std::size_t din_ = 0, dout_ = 0;
  std::optional<std::vector<Matrix>> kraus_;
  ChannelFlags flags_;
  SpecPtr spec_;
};

inline Matrix apply(const Channel& n, const Matrix& x) { return n.apply(x); }

// Choi operator of the linear map f: L(din) -> L(dout).
template <class F>
Matrix choi_from_action(std::size_t din, std::size_t dout, F&& f) {
  const auto o = static_cast<Eigen::Index>(dout);
  Matrix c = Matrix::Zero(static_cast<Eigen::Index>(din * dout), static_cast<Eigen::Index>(din * dout));
  for (std::size_t i = 0; i < din; ++i)
    for (std::size_t j = 0; j < din; ++j) {
      Matrix y = f(unit(din, i, j));
      if (y.rows() != o || y.cols() != o) throw DimensionError("choi_from_action: output has wrong size");
      c.block(static_cast<Eigen::Index>(i) * o, static_cast<Eigen::Index>(j) * o, o, o) = y;
    }
  return c;
}

template <class F>
Channel channel_from_action(std::size_t din, std::size_t dout, F&& f, bool certify = true) {
  Matrix c = choi_from_action(din, dout, std::forward<F>(f));
  return certify ? Channel::from_choi(std::move(c), din, dout) : Channel::unchecked(std::move(c), din, dout);
}

inline Channel channel_from_kraus(std::vector<Matrix> kraus) { return Channel::from_kraus(std::move(kraus)); }

// Kraus operators from the spectral decomposition of a CP Choi operator.
inline std::vector<Matrix> kraus_from_choi(const Channel& n, const Tolerances& tol = {}) {
  auto sd = herm_eig(n.choi(), tol.herm_tol);
  if (sd.values(0) < -tol.psd_tol) throw DomainError("kraus_from_choi: map is not CP");
  std::vector<Matrix> ks;
  const auto din = static_cast<Eigen::Index>(n.dim_in()), dout = static_cast<Eigen::Index>(n.dim_out());
  for (Eigen::Index k = sd.values.size(); k-- > 0;) {
    double lam = sd.values(k);
    if (lam <= tol.support_cutoff) break;
    Matrix kr(dout, din);
    for (Eigen::Index i = 0; i < din; ++i)
      for (Eigen::Index o = 0; o < dout; ++o) kr(o, i) = std::sqrt(lam) * sd.vectors(i * dout + o, k);
    ks.push_back(std::move(kr));
  }
  return ks;
}

// N* with <P, N(Q)> = <N*(P), Q>.
inline Channel adjoint(const Channel& n, bool certify = true) {
  const std::size_t a = n.dim_in(), b = n.dim_out();
  if (n.kraus() && certify) {
    std::vector<Matrix> ks;
    for (const auto& k : *n.kraus()) ks.push_back(k.adjoint());
    return Channel::from_kraus(std::move(ks));
  }
  // C*[(k,i),(l,j)] = conj(C[(i,k),(j,l)])
  std::vector<std::size_t> dims{a, b};
  Matrix c = permute_subsystems(n.choi(), dims, {1, 0}).conjugate();
  return certify ? Channel::from_choi(std::move(c), b, a) : Channel::unchecked(std::move(c), b, a);
}

inline Channel compose(const Channel& n2, const Channel& n1, bool certify = true) {
  if (n1.dim_out() != n2.dim_in()) throw DimensionError("compose: dim_out(n1) != dim_in(n2)");
  if (certify && n1.kraus() && n2.kraus() && n1.kraus()->size() * n2.kraus()->size() <= 256) {
    std::vector<Matrix> ks;
    for (const auto& k2 : *n2.kraus())
      for (const auto& k1 : *n1.kraus()) ks.push_back(k2 * k1);
    return Channel::from_kraus(std::move(ks));
  }
  return channel_from_action(n1.dim_in(), n2.dim_out(), [&](const Matrix& x) { return n2(n1(x)); }, certify);
}

// N (x) M acting on A1 A2 -> B1 B2.
inline Channel tensor_channels(const Channel& n, const Channel& m, bool certify = true) {
  if (certify && n.kraus() && m.kraus() && n.kraus()->size() * m.kraus()->size() <= 256) {
    std::vector<Matrix> ks;
    for (const auto& kn : *n.kraus())
      for (const auto& km : *m.kraus()) ks.push_back(tensor(kn, km));
    return Channel::from_kraus(std::move(ks));
  }
  std::vector<std::size_t> dims{n.dim_in(), n.dim_out(), m.dim_in(), m.dim_out()};
  Matrix c = permute_subsystems(tensor(n.choi(), m.choi()), dims, {0, 2, 1, 3});
  const std::size_t din = n.dim_in() * m.dim_in(), dout = n.dim_out() * m.dim_out();
  return certify ? Channel::from_choi(std::move(c), din, dout) : Channel::unchecked(std::move(c), din, dout);
}

// (N (x) id_R)(Z) for Z on A (x) R.
inline Matrix apply_tensor_id(const Channel& n, const Matrix& z, std::size_t ref_dim) {
  const auto a = static_cast<Eigen::Index>(n.dim_in()), b = static_cast<Eigen::Index>(n.dim_out());
  const auto r = static_cast<Eigen::Index>(ref_dim);
  if (z.rows() != a * r || z.cols() != a * r) throw DimensionError("apply_tensor_id: wrong input size");
  Matrix out = Matrix::Zero(b * r, b * r);
  for (Eigen::Index p = 0; p < r; ++p)
    for (Eigen::Index q = 0; q < r; ++q) {
      Matrix blk(a, a);
      for (Eigen::Index i = 0; i < a; ++i)
        for (Eigen::Index j = 0; j < a; ++j) blk(i, j) = z(i * r + p, j * r + q);
      Matrix img = n(blk);
      for (Eigen::Index k = 0; k < b; ++k)
        for (Eigen::Index l = 0; l < b; ++l) out(k * r + p, l * r + q) = img(k, l);
    }
  return out;
}

// (id_W (x) N)(X) for X on W (x) A.
inline Matrix apply_id_tensor(const Channel& n, const Matrix& x, std::size_t w) {
  const auto a = static_cast<Eigen::Index>(n.dim_in()), b = static_cast<Eigen::Index>(n.dim_out());
  const auto ww = static_cast<Eigen::Index>(w);
  if (x.rows() != a * ww || x.cols() != a * ww) throw DimensionError("apply_id_tensor: wrong input size");
  Matrix out(b * ww, b * ww);
  for (Eigen::Index p = 0; p < ww; ++p)
    for (Eigen::Index q = 0; q < ww; ++q) out.block(p * b, q * b, b, b) = n(x.block(p * a, q * a, a, a));
  return out;
}

inline cplx channel_inner_product(const Channel& n, const Channel& m) {
  if (n.dim_in() != m.dim_in() || n.dim_out() != m.dim_out())
    throw DimensionError("channel_inner_product: dimension mismatch");
  return (n.choi().adjoint() * m.choi()).trace();
}

// ---- standard maps -------------------------------------------------------

inline Channel identity_channel(std::size_t d) { return Channel::from_kraus({identity(d)}); }

inline Channel unitary_channel(const Matrix& u) { return Channel::from_kraus({u}); }

// R(X) = tr(X) 1_B. Not trace preserving unless dout = 1.
inline Channel depolarizing_R(std::size_t din, std::size_t dout) {
  return Channel::from_choi(identity(din * dout), din, dout);
}

// R~(X) = tr(X) 1_B / |B|.
inline Channel depolarizing_tilde(std::size_t din, std::size_t dout) {
  return Channel::from_choi(identity(din * dout) / static_cast<double>(dout), din, dout);
}

// X -> tr(X) sigma0
inline Channel replacer(std::size_t din, const Matrix& sigma0) {
  require_square(sigma0, "replacer");
  return Channel::from_choi(tensor(identity(din), sigma0), din, static_cast<std::size_t>(sigma0.rows()));
}

// (1-p) rho + p tr(rho) 1/d
inline Channel depolarizing(std::size_t d, double p) {
  return Channel::from_choi((1.0 - p) * choi_from_action(d, d, [](const Matrix& x) { return x; }) +
                                p * identity(d * d) / static_cast<double>(d),
                            d, d);
}

inline std::array<Matrix, 4> paulis() {
  Matrix i = identity(2), x(2, 2), y(2, 2), z(2, 2);
  x << 0, 1, 1, 0;
  y << 0, cplx(0, -1), cplx(0, 1), 0;
  z << 1, 0, 0, -1;
  return {i, x, y, z};
}

inline Channel pauli_channel(const std::array<double, 4>& p) {
  auto ps = paulis();
  std::vector<Matrix> ks;
  for (int k = 0; k < 4; ++k)
    if (p[k] < 0) throw DomainError("pauli_channel: negative probability");
  for (int k = 0; k < 4; ++k)
    if (p[k] > 0) ks.push_back(std::sqrt(p[k]) * ps[k]);
  return Channel::from_kraus(std::move(ks));
}

// (1-p) rho + p Z rho Z
inline Channel dephasing(double p) { return pauli_channel({1.0 - p, 0.0, 0.0, p}); }

struct ThermalMap {
  Matrix hamiltonian;
  double beta = 0.0;
};

// exp(-beta H) with the natural exponential.
inline Matrix thermal_operator(const ThermalMap& spec, const Tolerances& tol = {}) {
  if (spec.beta < 0) throw DomainError("thermal_map: negative beta");
  auto sd = herm_eig(spec.hamiltonian, tol.herm_tol);
  if (sd.values(0) < -tol.psd_tol) throw DomainError("thermal_map: Hamiltonian has negative energy");
  return sd.apply([&](double e) { return std::exp(-spec.beta * e); });
}

// R^beta(X) = tr(X) exp(-beta H)
inline Channel thermal_map(const ThermalMap& spec, std::size_t din, const Tolerances& tol = {}) {
  return replacer(din, thermal_operator(spec, tol));
}

// Stinespring with a Haar isometry A -> B (x) E.
inline Channel random_channel(std::size_t din, std::size_t dout, std::size_t env, Rng& rng) {
  if (env == 0) throw DimensionError("random_channel: env_dim must be >= 1");
  if (dout * env < din) throw DimensionError("random_channel: dout * env < din, no isometry exists");
  Matrix v = haar_isometry(dout * env, din, rng);
  std::vector<Matrix> ks;
  for (std::size_t e = 0; e < env; ++e) {
    Matrix k(static_cast<Eigen::Index>(dout), static_cast<Eigen::Index>(din));
    for (std::size_t o = 0; o < dout; ++o) k.row(static_cast<Eigen::Index>(o)) = v.row(static_cast<Eigen::Index>(o * env + e));
    ks.push_back(std::move(k));
  }
  return Channel::from_kraus(std::move(ks));
}

inline Channel random_channel(std::size_t din, std::size_t dout, std::size_t env, std::uint64_t seed) {
  Rng rng = make_rng(seed);
  return random_channel(din, dout, env, rng);
}

// CP map with i.i.d. Ginibre Kraus operators; no trace condition.
inline Channel random_cp_map(std::size_t din, std::size_t dout, std::size_t nkraus, Rng& rng) {
  std::vector<Matrix> ks;
  for (std::size_t k = 0; k < nkraus; ++k) ks.push_back(ginibre(dout, din, rng));
  return Channel::from_kraus(std::move(ks));
}

// ---- covariance ------------------------------------------------------------

inline SpecPtr pauli_group() {
  auto s = std::make_shared<TeleCovariantSpec>();
  for (const auto& p : paulis()) {
    s->reps_in.push_back(p);
    s->reps_out.push_back(p);
  }
  return s;
}

// X^a Z^b for a, b in Z_d, same representation on input and output.
inline SpecPtr weyl_heisenberg_group(std::size_t d) {
  auto s = std::make_shared<TeleCovariantSpec>();
  Matrix x = Matrix::Zero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
  Matrix z = Matrix::Zero(x.rows(), x.cols());
  const double pi = std::acos(-1.0);
  for (std::size_t k = 0; k < d; ++k) {
    x(static_cast<Eigen::Index>((k + 1) % d), static_cast<Eigen::Index>(k)) = 1.0;
    z(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k)) = std::polar(1.0, 2.0 * pi * static_cast<double>(k) / static_cast<double>(d));
  }
  Matrix xa = identity(d);
  for (std::size_t a = 0; a < d; ++a) {
    Matrix zb = identity(d);
    for (std::size_t b = 0; b < d; ++b) {
      s->reps_in.push_back(xa * zb);
      s->reps_out.push_back(xa * zb);
      zb = zb * z;
    }
    xa = xa * x;
  }
  return s;
}

// Product group G1 x G2 acting on the tensor product.
inline SpecPtr tensor_spec(const TeleCovariantSpec& s1, const TeleCovariantSpec& s2) {
  auto s = std::make_shared<TeleCovariantSpec>();
  for (std::size_t g = 0; g < s1.group_size(); ++g)
    for (std::size_t h = 0; h < s2.group_size(); ++h) {
      s->reps_in.push_back(tensor(s1.reps_in[g], s2.reps_in[h]));
      s->reps_out.push_back(tensor(s1.reps_out[g], s2.reps_out[h]));
    }
  return s;
}

// max_g || Choi(N o U_g) - Choi(V_g o N) ||
inline double covariance_residual(const Channel& n, const TeleCovariantSpec& spec) {
  if (spec.dim_in() != n.dim_in() || spec.dim_out() != n.dim_out())
    throw DimensionError("covariance_residual: spec dims do not match channel");
  double worst = 0.0;
  for (std::size_t g = 0; g < spec.group_size(); ++g) {
    const Matrix& u = spec.reps_in[g];
    const Matrix& v = spec.reps_out[g];
    Matrix lhs = choi_from_action(n.dim_in(), n.dim_out(), [&](const Matrix& x) { return n(u * x * u.adjoint()); });
    Matrix rhs = choi_from_action(n.dim_in(), n.dim_out(), [&](const Matrix& x) { return Matrix(v * n(x) * v.adjoint()); });
    worst = std::max(worst, max_abs(lhs - rhs));
  }
  return worst;
}

inline Channel Channel::with_covariance(SpecPtr spec, double tol) const {
  if (!spec) throw DomainError("with_covariance: null spec");
  spec->validate();
  double res = covariance_residual(*this, *spec);
  if (res > tol) throw DomainError("with_covariance: covariance residual " + std::to_string(res) + " too large");
  Channel out = *this;
  out.spec_ = std::move(spec);
  return out;
}

// Group twirl |G|^-1 sum_g V_g^+ o N o U_g; the result is covariant.
inline Channel telecov_channel(const SpecPtr& spec, const Channel& base) {
  spec->validate();
  if (spec->dim_in() != base.dim_in() || spec->dim_out() != base.dim_out())
    throw DimensionError("telecov_channel: spec dims do not match channel");
  const double g = static_cast<double>(spec->group_size());
  Matrix c = choi_from_action(base.dim_in(), base.dim_out(), [&](const Matrix& x) {
    Matrix acc = Matrix::Zero(static_cast<Eigen::Index>(base.dim_out()), static_cast<Eigen::Index>(base.dim_out()));
    for (std::size_t k = 0; k < spec->group_size(); ++k) {
      const Matrix& u = spec->reps_in[k];
      const Matrix& v = spec->reps_out[k];
      acc += v.adjoint() * base(u * x * u.adjoint()) * v;
    }
    return Matrix(acc / g);
  });
  return Channel::from_choi(std::move(c), base.dim_in(), base.dim_out()).with_covariance(spec);
}

}  // namespace chanent
