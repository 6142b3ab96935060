#pragma once

#include <cmath>
#include <functional>
#include <memory>
#include <vector>

#include <gsl/gsl_errno.h>
#include <gsl/gsl_multimin.h>

namespace chanent {

struct SimplexResult {
  std::vector<double> x;
  double fx = 0.0;
  int evals = 0;
  bool converged = false;
};

namespace detail {

struct GslMinimizerDeleter {
  void operator()(gsl_multimin_fminimizer* s) const { gsl_multimin_fminimizer_free(s); }
};
struct GslVectorDeleter {
  void operator()(gsl_vector* v) const { gsl_vector_free(v); }
};

struct SimplexCall {
  const std::function<double(const std::vector<double>&)>* f;
  std::vector<double> buf;
  int evals = 0;
};

inline double simplex_trampoline(const gsl_vector* x, void* p) {
  auto* call = static_cast<SimplexCall*>(p);
  for (std::size_t i = 0; i < call->buf.size(); ++i) call->buf[i] = gsl_vector_get(x, i);
  ++call->evals;
  double v = (*call->f)(call->buf);
  // GSL's simplex cannot cope with non-finite values
  if (!std::isfinite(v)) v = v > 0 ? 1e300 : -1e300;
  return v;
}

}  // namespace detail

// Nelder-Mead (GSL nmsimplex2) minimisation of f from x0. Stops after
// max_evals function evaluations or when the simplex size drops below
// size_tol.
inline SimplexResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                                 const std::vector<double>& x0, double step, int max_evals,
                                 double size_tol = 1e-10) {
  const std::size_t n = x0.size();
  SimplexResult res{x0, 0.0, 0, false};
  if (n == 0) {
    res.fx = f(x0);
    res.evals = 1;
    res.converged = true;
    return res;
  }
  static const bool handler_off = [] {
    gsl_set_error_handler_off();
    return true;
  }();
  (void)handler_off;

  detail::SimplexCall call{&f, std::vector<double>(n), 0};
  gsl_multimin_function fn{&detail::simplex_trampoline, n, &call};
  std::unique_ptr<gsl_vector, detail::GslVectorDeleter> x(gsl_vector_alloc(n)), ss(gsl_vector_alloc(n));
  for (std::size_t i = 0; i < n; ++i) gsl_vector_set(x.get(), i, x0[i]);
  gsl_vector_set_all(ss.get(), step);
  std::unique_ptr<gsl_multimin_fminimizer, detail::GslMinimizerDeleter> s(
      gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, n));
  gsl_multimin_fminimizer_set(s.get(), &fn, x.get(), ss.get());

  while (call.evals < max_evals) {
    if (gsl_multimin_fminimizer_iterate(s.get()) != GSL_SUCCESS) break;
    double size = gsl_multimin_fminimizer_size(s.get());
    if (gsl_multimin_test_size(size, size_tol) == GSL_SUCCESS) {
      res.converged = true;
      break;
    }
  }
  const gsl_vector* best = gsl_multimin_fminimizer_x(s.get());
  for (std::size_t i = 0; i < n; ++i) res.x[i] = gsl_vector_get(best, i);
  res.fx = gsl_multimin_fminimizer_minimum(s.get());
  res.evals = call.evals;
  return res;
}

}  // namespace chanent
