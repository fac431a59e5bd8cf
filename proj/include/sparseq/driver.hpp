#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "sparseq/errors.hpp"
#include "sparseq/newton.hpp"
#include "sparseq/pg.hpp"
#include "sparseq/problem.hpp"
#include "sparseq/prox.hpp"
#include "sparseq/subspace.hpp"

namespace sparseq {

enum class SolverKind { hpgsrn, pgls };
enum class StoppingMode { s2, practical, both };
enum class SolveStatus { converged, max_iters, aborted };
enum class StepKind { pg, newton };

inline const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::converged: return "converged";
    case SolveStatus::max_iters: return "max_iters";
    case SolveStatus::aborted: return "aborted";
  }
  return "unknown";
}

inline const char* to_string(StepKind s) {
  return s == StepKind::pg ? "pg" : "newton";
}

inline const char* to_string(SolverKind s) {
  return s == SolverKind::hpgsrn ? "hpgsrn" : "pgls";
}

// One accepted iteration. zeta, alpha and cosine are NaN on pg steps.
struct TraceRecord {
  long k = 0;
  StepKind step = StepKind::pg;
  double f = 0.0;             // objective at the accepted iterate
  double residual_inf = 0.0;  // stopping residual evaluated this iteration
  Index support_size = 0;
  double mu_bar = 0.0;
  double zeta = std::numeric_limits<double>::quiet_NaN();
  double alpha = std::numeric_limits<double>::quiet_NaN();
  int backtracks = 0;
  double cosine = std::numeric_limits<double>::quiet_NaN();
  double elapsed_seconds = 0.0;
};

// Extra per-iteration state handed to an observer callback; used by tests to
// check invariants without reconstructing internal quantities.
struct IterationDetail {
  const TraceRecord& record;
  const Vector& x;       // accepted iterate
  const Vector& x_prev;  // iterate the step started from
  const Vector& x_bar;   // proximal-gradient candidate
  double f_prev;
  double newton_slope;  // <r, d> on newton steps, NaN otherwise
};

struct SolverConfig {
  PgParams pg;
  NewtonParams newton;
  double epsilon = 0.0;         // threshold of the prox-distance stop
  double practical_tol = 1e-3;  // threshold of the fixed-modulus residual stop
  long max_iters = 50000;
  StoppingMode stopping = StoppingMode::practical;
  SolverKind kind = SolverKind::hpgsrn;
  std::uint64_t seed = 0;
  bool record_timing = true;  // elapsed columns are written as 0 when off
  std::function<void(const IterationDetail&)> observer;

  static SolverConfig defaults(SolverKind k) {
    SolverConfig cfg;
    cfg.kind = k;
    // The hybrid solver inflates the PG modulus aggressively because a Newton
    // step usually follows; the pure PG baseline backtracks gently.
    cfg.pg.tau_tilde = k == SolverKind::hpgsrn ? 10.0 : 2.0;
    return cfg;
  }

  void validate() const {
    pg.validate();
    newton.validate();
    if (epsilon < 0.0) throw InvalidParameter("SolverConfig: epsilon < 0");
    if (!(practical_tol > 0.0)) throw InvalidParameter("SolverConfig: practical_tol <= 0");
    if (max_iters < 1) throw InvalidParameter("SolverConfig: max_iters < 1");
  }
};

struct SolveResult {
  Vector x_final;
  double f_final = 0.0;
  long iterations = 0;
  long newton_iterations = 0;
  SolveStatus status = SolveStatus::max_iters;
  std::string abort_reason;
  std::vector<TraceRecord> trace;
  double time_seconds = 0.0;
  double gamma = 0.0;  // modulus of the practical residual (0 when unused)
};

// Switch-to-Newton test. Requires matching sign patterns between the iterate
// and its PG image, then compares the worst-case restricted curvature at x
// against half the modulus at x_bar:
//   mu_bar + lam q (q-1) min|x_i|^{q-2}  >=  1/2 (mu_bar + lam q (q-1) min|xb_i|^{q-2}).
inline bool check_switch(const Vector& x, const Vector& x_bar, double mu_bar,
                         double lam, double q) {
  if (x.size() != x_bar.size()) throw DimensionMismatch("check_switch: size mismatch");
  double x_min = std::numeric_limits<double>::infinity();
  double xb_min = std::numeric_limits<double>::infinity();
  bool any = false;
  for (Index i = 0; i < x.size(); ++i) {
    const int sx = x[i] > 0.0 ? 1 : (x[i] < 0.0 ? -1 : 0);
    const int sb = x_bar[i] > 0.0 ? 1 : (x_bar[i] < 0.0 ? -1 : 0);
    if (sx != sb) return false;
    if (sx != 0) {
      any = true;
      x_min = std::min(x_min, std::abs(x[i]));
      xb_min = std::min(xb_min, std::abs(x_bar[i]));
    }
  }
  if (!any) return false;
  const double curv = lam * q * (q - 1.0);
  const double omega_bar = mu_bar + curv * std::pow(xb_min, q - 2.0);
  const double lhs = mu_bar + curv * std::pow(x_min, q - 2.0);
  return lhs >= 0.5 * omega_bar;
}

// mu_bar * ||x - x_bar||_inf, the prox-distance stopping quantity.
inline double residual_s2(const Vector& x, const Vector& x_bar, double mu_bar) {
  if (x.size() != x_bar.size()) throw DimensionMismatch("residual_s2: size mismatch");
  if (x.size() == 0) return 0.0;
  return mu_bar * (x - x_bar).lpNorm<Eigen::Infinity>();
}

// gamma * ||x - prox at 1/gamma of (x - grad psi(x)/gamma)||_inf with the
// smooth gradient supplied by the caller.
inline double residual_practical(const Vector& x, const ProblemInstance& prob,
                                 double gamma, const Vector& grad_psi_x) {
  if (!(gamma > 0.0)) throw InvalidParameter("residual_practical: gamma <= 0");
  if (x.size() != prob.dim() || grad_psi_x.size() != prob.dim())
    throw DimensionMismatch("residual_practical: size mismatch");
  const ProxParams pp(gamma, prob.lam, prob.q);
  const Vector y = x - grad_psi_x / gamma;
  return gamma * (x - vector_prox(y, pp)).lpNorm<Eigen::Infinity>();
}

inline double residual_practical(const Vector& x, const ProblemInstance& prob,
                                 double gamma) {
  return residual_practical(x, prob, gamma, full_psi_gradient(x, prob));
}

namespace detail {

inline double clamp_mu(double mu, const PgParams& p) {
  return std::min(std::max(mu, p.mu_min), p.mu_max);
}

}  // namespace detail

// Runs the hybrid (or pure proximal-gradient) solver from x0. Every accepted
// iteration appends one trace record; the record count always equals the
// reported iteration count.
inline SolveResult solve(const ProblemInstance& prob, const SolverConfig& cfg,
                         const Vector& x0) {
  cfg.validate();
  if (x0.size() != prob.dim()) throw DimensionMismatch("solve: x0 has wrong size");
  if (!x0.allFinite()) throw InvalidParameter("solve: x0 is not finite");
  const Index n = prob.dim();
  constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

  SolveResult res;
  Vector x = x0;
  double f_x = full_objective(x, prob);

  const bool use_practical = cfg.stopping != StoppingMode::s2;
  const bool use_s2 = cfg.stopping != StoppingMode::practical;
  if (use_practical) {
    const double lip = prob.loss.lipschitz_estimate(prob.A, cfg.seed);
    res.gamma = lip / 0.95;
  }

  const auto t_start = std::chrono::steady_clock::now();
  const auto elapsed = [&]() -> double {
    if (!cfg.record_timing) return 0.0;
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start)
        .count();
  };

  if (!std::isfinite(f_x)) {
    res.x_final = x;
    res.f_final = f_x;
    res.status = SolveStatus::aborted;
    res.abort_reason = "objective not finite at the starting point";
    res.time_seconds = elapsed();
    return res;
  }

  Vector grad = full_psi_gradient(x, prob);
  Vector x_prev, grad_prev;
  bool have_prev = false;
  res.status = SolveStatus::max_iters;

  for (long k = 0; k < cfg.max_iters; ++k) {
    double practical_res = kNaN;
    if (use_practical) {
      practical_res = residual_practical(x, prob, res.gamma, grad);
      if (practical_res <= cfg.practical_tol) {
        res.status = SolveStatus::converged;
        break;
      }
    }

    double mu = have_prev ? bb_stepsize(x_prev, x, grad_prev, grad, cfg.pg) : 1.0;
    mu = detail::clamp_mu(mu, cfg.pg);

    PgStepResult pg;
    try {
      pg = pg_step(x, f_x, grad, mu, prob, cfg.pg);
    } catch (const BacktrackExhausted& e) {
      res.status = SolveStatus::aborted;
      res.abort_reason = e.what();
      break;
    }
    const double rs2 = residual_s2(x, pg.x_bar, pg.mu_bar);
    // An exact fixed point of the prox map stops the run in any mode; no
    // further iteration can move, so looping on would spin forever.
    const bool stop_now = (use_s2 && rs2 <= cfg.epsilon) || rs2 == 0.0;

    StepKind step = StepKind::pg;
    Vector x_next;
    double f_next;
    double zeta = kNaN, alpha = kNaN, cosine = kNaN, slope = kNaN;
    bool took_newton = false;

    if (!stop_now && cfg.kind == SolverKind::hpgsrn &&
        check_switch(x, pg.x_bar, pg.mu_bar, prob.lam, prob.q)) {
      try {
        SupportSet support = SupportSet::of(x);
        SubspaceView view(prob, support, support.gather(x));
        NewtonDirection nd = newton_direction(view, cfg.newton);
        ArmijoResult ar = armijo_search(view, nd.d, nd.r, cfg.newton);
        x_next = support.scatter(ar.u_next, n);
        f_next = full_objective(x_next, prob);
        step = StepKind::newton;
        zeta = nd.zeta;
        alpha = ar.alpha;
        slope = nd.r.dot(nd.d);
        cosine = -slope / (nd.r.norm() * nd.d.norm());
        took_newton = true;
      } catch (const ArmijoExhausted&) {
        took_newton = false;  // keep the PG candidate
      } catch (const ZeroOnSupport&) {
        took_newton = false;
      } catch (const ZeroGradient&) {
        took_newton = false;  // restricted critical point; PG decides from here
      } catch (const SolveFailure& e) {
        res.status = SolveStatus::aborted;
        res.abort_reason = e.what();
        break;
      }
    }
    if (!took_newton) {
      x_next = pg.x_bar;
      f_next = pg.F_bar;
    }
    if (!std::isfinite(f_next) || !x_next.allFinite()) {
      res.status = SolveStatus::aborted;
      res.abort_reason = "iterate became non-finite";
      break;
    }

    TraceRecord rec;
    rec.k = k;
    rec.step = step;
    rec.f = f_next;
    rec.residual_inf = use_practical ? practical_res : rs2;
    rec.support_size = SupportSet::of(x_next).size();
    rec.mu_bar = pg.mu_bar;
    rec.zeta = zeta;
    rec.alpha = alpha;
    rec.backtracks = pg.backtracks;
    rec.cosine = cosine;
    rec.elapsed_seconds = elapsed();
    res.trace.push_back(rec);
    if (took_newton) ++res.newton_iterations;
    if (cfg.observer)
      cfg.observer(IterationDetail{res.trace.back(), x_next, x, pg.x_bar, f_x, slope});

    x_prev = std::move(x);
    grad_prev = std::move(grad);
    x = std::move(x_next);
    f_x = f_next;
    have_prev = true;

    if (stop_now) {
      res.status = SolveStatus::converged;
      break;
    }
    grad = full_psi_gradient(x, prob);
  }

  res.x_final = std::move(x);
  res.f_final = f_x;
  res.iterations = static_cast<long>(res.trace.size());
  res.time_seconds = elapsed();
  return res;
}

inline SolveResult solve(const ProblemInstance& prob, const SolverConfig& cfg) {
  return solve(prob, cfg, Vector::Zero(prob.dim()));
}

struct StationarityEntry {
  double gamma = 0.0;
  double residual = 0.0;
};

struct StationarityReport {
  std::vector<StationarityEntry> entries;
  double min_residual = 0.0;
  double best_gamma = 0.0;
  double subspace_grad_norm = 0.0;  // NaN when the restricted point is degenerate
  Index support_size = 0;
};

// Evaluates the fixed-modulus residual over a gamma grid plus the norm of the
// restricted smooth+regularizer gradient on the support of x.
inline StationarityReport stationarity_report(const Vector& x,
                                              const ProblemInstance& prob,
                                              const std::vector<double>& gammas) {
  if (gammas.empty()) throw InvalidParameter("stationarity_report: empty gamma grid");
  StationarityReport rep;
  const Vector grad = full_psi_gradient(x, prob);
  rep.min_residual = std::numeric_limits<double>::infinity();
  for (double g : gammas) {
    StationarityEntry e;
    e.gamma = g;
    e.residual = residual_practical(x, prob, g, grad);
    if (e.residual < rep.min_residual) {
      rep.min_residual = e.residual;
      rep.best_gamma = g;
    }
    rep.entries.push_back(e);
  }
  SupportSet support = SupportSet::of(x);
  rep.support_size = support.size();
  if (!support.empty()) {
    try {
      SubspaceView view(prob, support, support.gather(x));
      rep.subspace_grad_norm = subspace_gradient(view).norm();
    } catch (const ZeroOnSupport&) {
      rep.subspace_grad_norm = std::numeric_limits<double>::quiet_NaN();
    }
  }
  return rep;
}

}  // namespace sparseq
