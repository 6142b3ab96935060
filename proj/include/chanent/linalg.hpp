#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/KroneckerProduct>

namespace chanent {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Base for every input error raised by the library. The CLI maps these to
// exit code 3.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

// Input violates a mathematical precondition (Hermitian, PSD, CPTP, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

class RankError : public Error {
 public:
  using Error::Error;
};

struct Tolerances {
  double herm_tol = 1e-9;
  double psd_tol = 1e-9;
  double support_cutoff = 1e-10;
  double leak_tol = 1e-8;
  double trace_tol = 1e-9;
  double rank_cutoff = 1e-6;
};

// Largest entry modulus. Used as the cheap infinity norm for residuals.
inline double max_abs(const Matrix& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

inline Matrix identity(std::size_t d) {
  return Matrix::Identity(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
}

// Matrix unit e_ij of size d.
inline Matrix unit(std::size_t d, std::size_t i, std::size_t j) {
  Matrix e = Matrix::Zero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
  e(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = 1.0;
  return e;
}

inline void require_square(const Matrix& m, const char* what) {
  if (m.rows() != m.cols())
    throw DimensionError(std::string(what) + ": matrix is not square");
}

// tol is relative once entries exceed 1
inline bool is_hermitian(const Matrix& m, double tol) {
  return m.rows() == m.cols() && max_abs(m - m.adjoint()) <= tol * std::max(1.0, max_abs(m));
}

inline Matrix hermitian_part(const Matrix& m) { return 0.5 * (m + m.adjoint()); }

class HermitianOperator {
 public:
  HermitianOperator() = default;
  explicit HermitianOperator(const Matrix& m, double herm_tol = Tolerances{}.herm_tol)
      : tol_(herm_tol) {
    require_square(m, "HermitianOperator");
    if (!is_hermitian(m, herm_tol))
      throw DomainError("HermitianOperator: matrix is not Hermitian within tolerance");
    m_ = hermitian_part(m);
  }

  const Matrix& matrix() const { return m_; }
  std::size_t dim() const { return static_cast<std::size_t>(m_.rows()); }
  double herm_tol() const { return tol_; }

 private:
  Matrix m_;
  double tol_ = Tolerances{}.herm_tol;
};

struct SpectralDecomposition {
  RVector values;   // ascending
  Matrix vectors;   // columns are eigenvectors

  Matrix reconstruct() const {
    return vectors * values.cast<cplx>().asDiagonal() * vectors.adjoint();
  }

  // Applies f to every eigenvalue. f may be complex valued.
  template <class F>
  Matrix apply(F f) const {
    CVector d(values.size());
    for (Eigen::Index i = 0; i < values.size(); ++i) d(i) = cplx(f(values(i)));
    return vectors * d.asDiagonal() * vectors.adjoint();
  }
};

inline SpectralDecomposition herm_eig(const HermitianOperator& h) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(h.matrix());
  if (es.info() != Eigen::Success) throw DomainError("herm_eig: eigensolver failed");
  return {es.eigenvalues(), es.eigenvectors()};
}

inline SpectralDecomposition herm_eig(const Matrix& m, double herm_tol = Tolerances{}.herm_tol) {
  return herm_eig(HermitianOperator(m, herm_tol));
}

struct PsdCheck {
  bool is_psd = false;
  double min_eig = 0.0;
};

inline PsdCheck psd_check(const HermitianOperator& x, double tol) {
  if (x.dim() == 0) return {true, 0.0};
  Eigen::SelfAdjointEigenSolver<Matrix> es(x.matrix(), Eigen::EigenvaluesOnly);
  double lo = es.eigenvalues()(0);
  return {lo >= -tol, lo};
}

inline PsdCheck psd_check(const Matrix& x, double tol, double herm_tol = Tolerances{}.herm_tol) {
  return psd_check(HermitianOperator(x, herm_tol), tol);
}

inline double min_eigenvalue(const Matrix& x) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(hermitian_part(x), Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

class DensityOperator {
 public:
  DensityOperator() = default;
  explicit DensityOperator(const Matrix& m, const Tolerances& tol = {})
      : h_(m, tol.herm_tol) {
    double tr = h_.matrix().trace().real();
    if (std::abs(tr - 1.0) > tol.trace_tol)
      throw DomainError("DensityOperator: trace differs from 1 by " + std::to_string(tr - 1.0));
    auto chk = psd_check(h_, tol.psd_tol);
    if (!chk.is_psd)
      throw DomainError("DensityOperator: negative eigenvalue " + std::to_string(chk.min_eig));
    psd_slack_ = chk.min_eig;
  }

  const Matrix& matrix() const { return h_.matrix(); }
  std::size_t dim() const { return h_.dim(); }
  double psd_slack() const { return psd_slack_; }

 private:
  HermitianOperator h_;
  double psd_slack_ = 0.0;
};

struct MatFn {
  enum class Kind { log2, pow, sqrt, inv_sqrt };
  Kind kind = Kind::pow;
  double alpha = 1.0;

  static MatFn log2() { return {Kind::log2, 0.0}; }
  static MatFn pow(double a) { return {Kind::pow, a}; }
  static MatFn sqrt() { return {Kind::sqrt, 0.5}; }
  static MatFn inv_sqrt() { return {Kind::inv_sqrt, -0.5}; }
};

// Spectral function on the support of a PSD operator. Eigenvalues below the
// cutoff count as exact zeros and map to 0, so inverse powers are
// pseudo-inverses.
inline Matrix mat_fn_psd(const SpectralDecomposition& sd, MatFn fn, double cutoff) {
  return sd.apply([&](double x) -> double {
    if (x < cutoff) return 0.0;
    switch (fn.kind) {
      case MatFn::Kind::log2: return std::log2(x);
      case MatFn::Kind::sqrt: return std::sqrt(x);
      case MatFn::Kind::inv_sqrt: return 1.0 / std::sqrt(x);
      case MatFn::Kind::pow: return std::pow(x, fn.alpha);
    }
    return 0.0;
  });
}

inline Matrix mat_fn_psd(const HermitianOperator& p, MatFn fn, const Tolerances& tol = {}) {
  auto sd = herm_eig(p);
  if (sd.values.size() > 0 && sd.values(0) < -tol.psd_tol)
    throw DomainError("mat_fn_psd: negative eigenvalue " + std::to_string(sd.values(0)));
  return mat_fn_psd(sd, fn, tol.support_cutoff);
}

inline Matrix mat_fn_psd(const Matrix& p, MatFn fn, const Tolerances& tol = {}) {
  return mat_fn_psd(HermitianOperator(p, tol.herm_tol), fn, tol);
}

// 2^H for Hermitian H.
inline Matrix exp2_herm(const Matrix& h, double herm_tol = Tolerances{}.herm_tol) {
  return herm_eig(h, herm_tol).apply([](double x) { return std::exp2(x); });
}

// Projector onto the span of eigenvectors with eigenvalue >= cutoff.
inline Matrix support_projector(const SpectralDecomposition& sd, double cutoff) {
  return sd.apply([&](double x) { return x < cutoff ? 0.0 : 1.0; });
}

inline Matrix tensor(const Matrix& x, const Matrix& y) {
  return Eigen::kroneckerProduct(x, y).eval();
}

inline Matrix tensor(std::initializer_list<Matrix> ms) {
  Matrix out = Matrix::Ones(1, 1);
  for (const auto& m : ms) out = tensor(out, m);
  return out;
}

enum class Keep { first, second };

inline Matrix partial_trace(const Matrix& x, std::size_t d1, std::size_t d2, Keep keep) {
  auto n1 = static_cast<Eigen::Index>(d1), n2 = static_cast<Eigen::Index>(d2);
  if (x.rows() != n1 * n2 || x.cols() != n1 * n2)
    throw DimensionError("partial_trace: matrix size does not match subsystem dims");
  if (keep == Keep::first) {
    Matrix out = Matrix::Zero(n1, n1);
    for (Eigen::Index i = 0; i < n1; ++i)
      for (Eigen::Index j = 0; j < n1; ++j) out(i, j) = x.block(i * n2, j * n2, n2, n2).trace();
    return out;
  }
  Matrix out = Matrix::Zero(n2, n2);
  for (Eigen::Index i = 0; i < n1; ++i) out += x.block(i * n2, i * n2, n2, n2);
  return out;
}

// Reorders tensor factors. Output factor k is input factor perm[k].
inline Matrix permute_subsystems(const Matrix& x, const std::vector<std::size_t>& dims,
                                 const std::vector<std::size_t>& perm) {
  const std::size_t n = dims.size();
  if (perm.size() != n) throw DimensionError("permute_subsystems: perm size mismatch");
  std::vector<bool> seen(n, false);
  for (auto k : perm) {
    if (k >= n || seen[k]) throw DimensionError("permute_subsystems: perm is not a permutation");
    seen[k] = true;
  }
  std::size_t total = 1;
  for (auto d : dims) total *= d;
  if (static_cast<std::size_t>(x.rows()) != total || x.rows() != x.cols())
    throw DimensionError("permute_subsystems: matrix size does not match dims");

  std::vector<std::size_t> in_stride(n), out_dims(n);
  for (std::size_t k = n, s = 1; k-- > 0;) {
    in_stride[k] = s;
    s *= dims[k];
  }
  for (std::size_t k = 0; k < n; ++k) out_dims[k] = dims[perm[k]];

  // new_index -> old_index
  std::vector<Eigen::Index> map(total);
  std::vector<std::size_t> digits(n, 0);
  for (std::size_t idx = 0; idx < total; ++idx) {
    std::size_t old = 0;
    for (std::size_t k = 0; k < n; ++k) old += digits[k] * in_stride[perm[k]];
    map[idx] = static_cast<Eigen::Index>(old);
    for (std::size_t k = n; k-- > 0;) {
      if (++digits[k] < out_dims[k]) break;
      digits[k] = 0;
    }
  }
  Matrix out(x.rows(), x.cols());
  for (std::size_t r = 0; r < total; ++r)
    for (std::size_t c = 0; c < total; ++c)
      out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = x(map[r], map[c]);
  return out;
}

// Partial trace over any set of factors; keep[k] marks the survivors.
inline Matrix partial_trace(const Matrix& x, const std::vector<std::size_t>& dims,
                            const std::vector<bool>& keep) {
  std::vector<std::size_t> perm, kept_dims;
  std::size_t dk = 1, dt = 1;
  for (std::size_t k = 0; k < dims.size(); ++k)
    if (keep[k]) {
      perm.push_back(k);
      dk *= dims[k];
    }
  for (std::size_t k = 0; k < dims.size(); ++k)
    if (!keep[k]) {
      perm.push_back(k);
      dt *= dims[k];
    }
  return partial_trace(permute_subsystems(x, dims, perm), dk, dt, Keep::first);
}

struct Norms {
  double trace_norm = 0.0;
  double frobenius = 0.0;
  double op_norm = 0.0;
};

inline Norms norms(const Matrix& x) {
  if (x.size() == 0) return {};
  Eigen::JacobiSVD<Matrix> svd(x);
  const RVector& s = svd.singularValues();
  return {s.sum(), x.norm(), s.size() ? s(0) : 0.0};
}

inline double trace_norm(const Matrix& x) { return norms(x).trace_norm; }

// F(rho, sigma) = ||sqrt(rho) sqrt(sigma)||_1^2
inline double fidelity(const Matrix& rho, const Matrix& sigma, const Tolerances& tol = {}) {
  if (rho.rows() != sigma.rows() || rho.cols() != sigma.cols())
    throw DimensionError("fidelity: dimension mismatch");
  auto sr = herm_eig(rho, tol.herm_tol), ss = herm_eig(sigma, tol.herm_tol);
  if (sr.values(0) < -tol.psd_tol || ss.values(0) < -tol.psd_tol)
    throw DomainError("fidelity: argument is not PSD");
  Matrix a = mat_fn_psd(sr, MatFn::sqrt(), 0.0) * mat_fn_psd(ss, MatFn::sqrt(), 0.0);
  double f = trace_norm(a);
  return std::max(0.0, f * f);
}

inline Matrix transpose(const Matrix& x) { return x.transpose(); }

}  // namespace chanent
