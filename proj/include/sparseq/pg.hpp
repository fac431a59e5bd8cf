#pragma once

#include <cmath>

#include "sparseq/errors.hpp"
#include "sparseq/problem.hpp"
#include "sparseq/prox.hpp"
#include "sparseq/subspace.hpp"

namespace sparseq {

struct PgParams {
  double tau_tilde = 10.0;   // backtracking inflation factor
  double alpha_tilde = 1e-8; // sufficient-decrease modulus
  double mu_min = 1e-20;
  double mu_max = 1e20;
  int max_backtracks = 200;

  void validate() const {
    if (!(tau_tilde > 1.0)) throw InvalidParameter("PgParams: tau_tilde must exceed 1");
    if (!(alpha_tilde > 0.0)) throw InvalidParameter("PgParams: alpha_tilde must be positive");
    if (!(mu_min > 0.0) || !(mu_max >= mu_min))
      throw InvalidParameter("PgParams: need 0 < mu_min <= mu_max");
    if (max_backtracks < 1) throw InvalidParameter("PgParams: max_backtracks < 1");
  }
};

// Barzilai-Borwein trial step from successive iterates and smooth gradients:
// <dx, dg> / ||dx||^2, falling back to 1.0 when the curvature estimate is
// nonpositive or not finite. Clamping to [mu_min, mu_max] is the caller's job
// (the fallback itself may lie outside the admissible range).
inline double bb_stepsize(const Vector& x_prev, const Vector& x,
                          const Vector& g_prev, const Vector& g,
                          const PgParams& params) {
  params.validate();
  const Vector dx = x - x_prev;
  const double denom = dx.squaredNorm();
  if (denom == 0.0) return 1.0;
  const double curv = dx.dot(g - g_prev) / denom;
  if (!(curv > 0.0) || !std::isfinite(curv)) return 1.0;
  return curv;
}

struct PgStepResult {
  Vector x_bar;
  double mu_bar = 0.0;
  int backtracks = 0;
  double F_bar = 0.0;
};

// One monotone proximal-gradient step: starting from trial modulus mu,
// computes x_bar = prox at 1/mu of (x - grad/mu) and inflates mu by tau_tilde
// until F(x_bar) <= F(x) - alpha_tilde/2 ||x_bar - x||^2 (machine slack
// 1e-12 max(1,|F(x)|)). F(x) and the smooth gradient at x are passed in so
// the driver computes each exactly once per iteration.
inline PgStepResult pg_step(const Vector& x, double f_at_x,
                            const Vector& grad_psi_x, double mu,
                            const ProblemInstance& prob, const PgParams& params) {
  params.validate();
  if (x.size() != prob.dim() || grad_psi_x.size() != prob.dim())
    throw DimensionMismatch("pg_step: dimension mismatch");
  if (!(mu > 0.0) || !std::isfinite(mu))
    throw InvalidParameter("pg_step: mu must be positive and finite");

  PgStepResult out;
  for (int bt = 0; bt <= params.max_backtracks; ++bt) {
    const ProxParams prox(mu, prob.lam, prob.q);
    Vector y = x - grad_psi_x / mu;
    out.x_bar = vector_prox(y, prox);
    out.mu_bar = mu;
    out.backtracks = bt;
    out.F_bar = full_objective(out.x_bar, prob);
    const double decrease =
        0.5 * params.alpha_tilde * (out.x_bar - x).squaredNorm();
    const double slack = 1e-12 * std::max(1.0, std::abs(f_at_x));
    if (out.F_bar <= f_at_x - decrease + slack && std::isfinite(out.F_bar))
      return out;
    mu *= params.tau_tilde;
  }
  throw BacktrackExhausted("pg_step: no sufficient decrease within backtrack budget");
}

// Convenience overload that evaluates F(x) and the smooth gradient itself.
inline PgStepResult pg_step(const Vector& x, double mu,
                            const ProblemInstance& prob, const PgParams& params) {
  return pg_step(x, full_objective(x, prob), full_psi_gradient(x, prob), mu,
                 prob, params);
}

}  // namespace sparseq
