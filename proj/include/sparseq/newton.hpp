#pragma once

#include <cmath>

#include "sparseq/errors.hpp"
#include "sparseq/linalg.hpp"
#include "sparseq/subspace.hpp"

namespace sparseq {

struct NewtonParams {
  double sigma = 0.5;        // exponent of the gradient-norm shift term
  double b1 = 1.0 + 1e-8;    // multiplier of the negative-curvature shift
  double b2 = 1e-3;          // multiplier of ||r||^sigma
  double varrho = 1e-4;      // Armijo slope fraction
  double beta = 0.5;         // Armijo step shrink factor
  Index dense_cutoff = kDenseCutoff;
  double cg_rel_tol = 1e-8;
  int max_armijo = 60;
  int max_shift_retries = 5;
  double eig_tol = 1e-6;
  int eig_max_iters = 200;

  void validate() const {
    if (!(sigma > 0.0 && sigma < 1.0)) throw InvalidParameter("NewtonParams: sigma in (0,1)");
    if (!(b1 >= 1.0)) throw InvalidParameter("NewtonParams: b1 must be >= 1");
    if (!(b2 > 0.0)) throw InvalidParameter("NewtonParams: b2 must be positive");
    if (!(varrho > 0.0 && varrho < 0.5)) throw InvalidParameter("NewtonParams: varrho in (0,1/2)");
    if (!(beta > 0.0 && beta < 1.0)) throw InvalidParameter("NewtonParams: beta in (0,1)");
    if (dense_cutoff < 1) throw InvalidParameter("NewtonParams: dense_cutoff < 1");
    if (!(cg_rel_tol > 0.0)) throw InvalidParameter("NewtonParams: cg_rel_tol <= 0");
    if (max_armijo < 1 || max_shift_retries < 0)
      throw InvalidParameter("NewtonParams: nonpositive iteration budget");
  }
};

struct NewtonDirection {
  Vector d;            // regularized Newton direction
  Vector r;            // restricted gradient at u
  double zeta = 0.0;   // negative-curvature shift actually used
  double shift = 0.0;  // b1 * zeta + b2 * ||r||^sigma
  bool used_cg = false;
  int retries = 0;
};

// Builds G = hess F_S(u) + (b1 zeta + b2 ||r||^sigma) I with
// zeta = max(0, -lambda_min(hess)) and solves G d = -r. Supports below the
// dense cutoff assemble the Hessian and use Cholesky; larger ones stay
// matrix-free (Lanczos for the eigenvalue bound, CG for the solve). When the
// solve fails or d is not a descent direction, zeta is inflated
// (zeta <- 2 zeta + b2 ||r||^sigma) and the solve retried a few times.
inline NewtonDirection newton_direction(const SubspaceView& v,
                                        const NewtonParams& params) {
  params.validate();
  NewtonDirection out;
  out.r = subspace_gradient(v);
  const double r_norm = out.r.norm();
  if (r_norm == 0.0)
    throw ZeroGradient("newton_direction: restricted gradient vanishes");
  if (!std::isfinite(r_norm))
    throw SolveFailure("newton_direction: gradient is not finite");

  const Index ns = v.support().size();
  const bool dense = ns < params.dense_cutoff;
  const double grad_term = params.b2 * std::pow(r_norm, params.sigma);

  Matrix h;
  double lambda_min;
  if (dense) {
    h = subspace_hessian_dense(v);
    lambda_min = smallest_eigenvalue(h, params.eig_tol, params.eig_max_iters).value;
  } else {
    lambda_min = smallest_eigenvalue_lanczos(
                     [&v](const Vector& w, Vector& y) { y = subspace_hessian_apply(v, w); },
                     ns, params.eig_tol, params.eig_max_iters)
                     .value;
  }
  double zeta = std::max(0.0, -lambda_min);

  const Vector rhs = -out.r;
  for (int attempt = 0; attempt <= params.max_shift_retries; ++attempt) {
    const double shift = params.b1 * zeta + grad_term;
    out.retries = attempt;
    out.zeta = zeta;
    out.shift = shift;
    bool solved = false;
    if (dense) {
      Matrix g = h;
      g.diagonal().array() += shift;
      try {
        out.d = solve_spd_direct(g, rhs);
        solved = true;
      } catch (const NotPositiveDefinite&) {
        solved = false;
      }
    } else {
      CgResult cg = solve_spd_cg(
          [&v, shift](const Vector& w, Vector& y) {
            y = subspace_hessian_apply(v, w);
            y += shift * w;
          },
          rhs, params.cg_rel_tol);
      out.d = cg.x;
      out.used_cg = true;
      solved = cg.converged;
    }
    if (solved && out.d.allFinite() && out.r.dot(out.d) < 0.0) return out;
    zeta = 2.0 * zeta + grad_term;
  }
  throw SolveFailure("newton_direction: no descent direction after shift retries");
}

struct ArmijoResult {
  double alpha = 1.0;  // accepted step beta^m
  Vector u_next;
  double f_next = 0.0;  // F_S at u_next
  int probes = 0;       // trial evaluations, accepted one included
};

// Backtracking line search on the restricted objective:
//   F_S(u + beta^m d) <= F_S(u) + varrho beta^m <r, d>.
// Trials that would push a coordinate magnitude below 1e-150 are rejected
// outright (the restricted derivatives blow up there). Once beta^m d underflows
// the iterate entirely (u + beta^m d == u in floating point) no later trial can
// move either, so the search gives up: accepting a do-nothing step would freeze
// the outer loop. Throws ArmijoExhausted after max_armijo halvings.
inline ArmijoResult armijo_search(const SubspaceView& v, const Vector& d,
                                  const Vector& r, const NewtonParams& params) {
  params.validate();
  if (d.size() != v.u().size() || r.size() != v.u().size())
    throw DimensionMismatch("armijo_search: direction size mismatch");
  const double slope = r.dot(d);
  if (!(slope < 0.0))
    throw InvalidParameter("armijo_search: not a descent direction");

  const double f_u = v.value();
  const Vector z_d = v.columns().multiply(d);  // image of d, reused per trial
  ArmijoResult out;
  double alpha = 1.0;
  for (int m = 0; m < params.max_armijo; ++m, alpha *= params.beta) {
    ++out.probes;
    Vector u_trial = v.u() + alpha * d;
    if (u_trial == v.u()) break;  // step underflowed; smaller ones will too
    bool valid = true;
    for (Index t = 0; t < u_trial.size(); ++t) {
      if (std::abs(u_trial[t]) < 1e-150) {
        valid = false;
        break;
      }
    }
    if (!valid) continue;
    Vector z_trial = v.z() + alpha * z_d;
    const double f_trial = v.value_at(u_trial, z_trial);
    if (f_trial <= f_u + params.varrho * alpha * slope) {
      out.alpha = alpha;
      out.u_next = std::move(u_trial);
      out.f_next = f_trial;
      return out;
    }
  }
  throw ArmijoExhausted("armijo_search: no acceptable step");
}

}  // namespace sparseq
