#pragma once

#include <algorithm>
#include <cmath>
#include <limits>

#include "sparseq/errors.hpp"
#include "sparseq/sparse_matrix.hpp"

namespace sparseq {

// Parameters of the scalar problem  min_t  gamma/2 (t - s)^2 + lam |t|^q.
struct ProxParams {
  double gamma;
  double lam;
  double q;

  ProxParams(double gamma_, double lam_, double q_)
      : gamma(gamma_), lam(lam_), q(q_) {
    if (!(gamma > 0.0) || !std::isfinite(gamma))
      throw InvalidParameter("ProxParams: gamma must be positive and finite");
    if (!(lam > 0.0) || !std::isfinite(lam))
      throw InvalidParameter("ProxParams: lam must be positive and finite");
    if (!(q > 0.0 && q < 1.0))
      throw InvalidParameter("ProxParams: q must lie in (0, 1)");
  }

  // Every nonzero minimizer has magnitude at least this floor: below it the
  // curvature gamma + lam q (q-1) t^{q-2} of the smooth branch is negative,
  // so no interior stationary point can be a minimum.
  double nonzero_floor() const {
    return std::pow((lam / gamma) * q * (1.0 - q), 1.0 / (2.0 - q));
  }
};

namespace detail {

inline double prox_objective(double t, double s, const ProxParams& p) {
  const double d = t - s;
  return 0.5 * p.gamma * d * d + p.lam * std::pow(std::abs(t), p.q);
}

// Derivative of the smooth branch for t > 0.
inline double prox_deriv_pos(double t, double s, const ProxParams& p) {
  return p.gamma * (t - s) + p.lam * p.q * std::pow(t, p.q - 1.0);
}

inline double prox_second_deriv_pos(double t, const ProxParams& p) {
  return p.gamma + p.lam * p.q * (p.q - 1.0) * std::pow(t, p.q - 2.0);
}

}  // namespace detail

// Exact proximal map of t -> lam |t|^q at prox parameter 1/gamma:
//   scalar_prox(s) = argmin_t gamma/2 (t - s)^2 + lam |t|^q.
// Ties between 0 and the nonzero candidate resolve to 0. The minimizer is
// unique up to that tie; the nonzero branch is located by a safeguarded
// Newton iteration on the derivative, bracketed inside [floor, |s|].
inline double scalar_prox(double s, const ProxParams& p) {
  if (s == 0.0 || std::abs(s) < 1e-300) return 0.0;  // subnormal guard
  const double sign = s > 0.0 ? 1.0 : -1.0;
  const double sa = std::abs(s);

  const double floor = p.nonzero_floor();
  // h'(floor) > 0 means h is increasing on the whole admissible range
  // [floor, inf), so the only candidate is t = 0.
  if (detail::prox_deriv_pos(floor, sa, p) > 0.0) return 0.0;
  // Root of h' lies in [floor, sa]: h'(floor) <= 0 and h'(sa) = lam q sa^{q-1} > 0.
  // The root must come out at machine precision: callers measure prox-map
  // displacements that can be orders of magnitude below |s|, and a sloppy
  // root would masquerade as a fixed point.
  double lo = floor, hi = sa;
  double t = sa;
  const double tol =
      4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, sa);
  for (int it = 0; it < 200; ++it) {
    const double f = detail::prox_deriv_pos(t, sa, p);
    if (f == 0.0) break;
    if (f > 0.0) hi = t; else lo = t;
    const double fp = detail::prox_second_deriv_pos(t, p);
    double t_next = t - f / fp;
    if (t_next < lo || t_next > hi) t_next = 0.5 * (lo + hi);
    if (t_next == t) break;  // proposal below one ulp: t is the root
    if (std::abs(t_next - t) <= tol) {
      t = t_next;
      break;
    }
    t = t_next;
  }

  // Compare the stationary candidate against 0; ties go to 0.
  const double h0 = 0.5 * p.gamma * sa * sa;
  const double ht = detail::prox_objective(t, sa, p);
  if (h0 - ht > 1e-14 * std::max(1.0, h0)) return sign * t;
  return 0.0;
}

// Componentwise prox of y under the separable lam * sum |t_i|^q term.
inline Vector vector_prox(const Vector& y, const ProxParams& p) {
  Vector out(y.size());
  for (Index i = 0; i < y.size(); ++i) out[i] = scalar_prox(y[i], p);
  return out;
}

// Derivative-free reference minimizer: a dense scan over [-2|s|-1, 2|s|+1]
// followed by one golden-section refinement around the best grid cell, with
// t = 0 always kept as an explicit candidate. Slow by design; used to certify
// scalar_prox.
inline double brute_force_prox(double s, const ProxParams& p,
                               long grid_points = 200000) {
  if (grid_points < 100000)
    throw InvalidParameter("brute_force_prox: need at least 1e5 grid points");
  const double half = 2.0 * std::abs(s) + 1.0;
  const double lo = -half, hi = half;
  const double cell = (hi - lo) / static_cast<double>(grid_points - 1);

  double best_t = 0.0;
  double best_h = detail::prox_objective(0.0, s, p);
  for (long i = 0; i < grid_points; ++i) {
    const double t = lo + cell * static_cast<double>(i);
    const double h = detail::prox_objective(t, s, p);
    if (h < best_h) {
      best_h = h;
      best_t = t;
    }
  }

  // Golden-section refinement on the two cells around the best grid point.
  // A short uniform pre-scan guards against the window straddling the kink
  // at zero or a local maximum; we keep the best point ever evaluated.
  {
    const double pre_lo = best_t - cell, pre_hi = best_t + cell;
    for (int i = 0; i <= 64; ++i) {
      const double t = pre_lo + (pre_hi - pre_lo) * static_cast<double>(i) / 64.0;
      const double h = detail::prox_objective(t, s, p);
      if (h < best_h) {
        best_h = h;
        best_t = t;
      }
    }
  }
  double a = best_t - cell / 32.0;
  double b = best_t + cell / 32.0;
  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
  double f1 = detail::prox_objective(x1, s, p);
  double f2 = detail::prox_objective(x2, s, p);
  for (int it = 0; it < 200 && (b - a) > 1e-15 * std::max(1.0, std::abs(s)); ++it) {
    if (f1 < f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - gr * (b - a);
      f1 = detail::prox_objective(x1, s, p);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + gr * (b - a);
      f2 = detail::prox_objective(x2, s, p);
    }
    const double xm = f1 < f2 ? x1 : x2;
    const double fm = std::min(f1, f2);
    if (fm < best_h) {
      best_h = fm;
      best_t = xm;
    }
  }
  // 0 stays preferred on ties, matching the scalar kernel's convention.
  if (detail::prox_objective(0.0, s, p) <= best_h) return 0.0;
  return best_t;
}

}  // namespace sparseq
