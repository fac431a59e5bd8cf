#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include "sparseq/errors.hpp"
#include "sparseq/sparse_matrix.hpp"

namespace sparseq {

// Problems whose subspace dimension stays below this use dense factorizations;
// larger ones switch to matrix-free iterations.
inline constexpr Index kDenseCutoff = 500;

struct EigenEstimate {
  double value = 0.0;
  int iterations = 0;
  bool converged = false;
};

namespace detail {

inline Vector seeded_unit_vector(Index n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector v(n);
  for (Index i = 0; i < n; ++i) v[i] = normal(rng);
  const double nrm = v.norm();
  if (nrm == 0.0) {
    v.setZero();
    v[0] = 1.0;
    return v;
  }
  return v / nrm;
}

}  // namespace detail

// Largest eigenvalue of A^T A (the squared spectral norm of A), by power
// iteration on the m x m operator v -> A (A^T v). Deterministic for a fixed
// seed. Throws ZeroMatrix when every stored entry is zero.
inline EigenEstimate spectral_norm_sq(const SparseColumnMatrix& a,
                                      double tol = 1e-10, int max_iters = 5000,
                                      std::uint64_t seed = 0) {
  if (a.rows() == 0 || a.cols() == 0 || a.nonzeros() == 0 || a.all_zero())
    throw ZeroMatrix("spectral_norm_sq: matrix has no nonzero entries");
  if (tol <= 0.0 || max_iters < 1)
    throw InvalidParameter("spectral_norm_sq: bad tolerance or iteration cap");

  Vector v = detail::seeded_unit_vector(a.rows(), seed);
  double est = 0.0;
  EigenEstimate out;
  std::uint64_t reseed = seed;
  for (int it = 1; it <= max_iters; ++it) {
    Vector w = a.multiply(a.multiply_transpose(v));
    const double rayleigh = v.dot(w);  // v is unit
    const double wn = w.norm();
    out.iterations = it;
    if (wn == 0.0) {
      // v landed in the null space of A^T; restart from a fresh direction.
      v = detail::seeded_unit_vector(a.rows(), ++reseed);
      continue;
    }
    v = w / wn;
    if (it > 1 && std::abs(rayleigh - est) <= tol * std::max(std::abs(rayleigh), 1e-300)) {
      out.value = rayleigh;
      out.converged = true;
      return out;
    }
    est = rayleigh;
  }
  out.value = est;
  out.converged = false;
  return out;
}

// Smallest eigenvalue of a symmetric operator by Lanczos with full
// reorthogonalization (basis capped at 200 vectors). The returned value is
// shifted down by the Ritz residual bound, so callers that negate it to build
// a regularization shift err on the safe side.
inline EigenEstimate smallest_eigenvalue_lanczos(
    const std::function<void(const Vector&, Vector&)>& apply, Index n,
    double tol = 1e-6, int max_iters = 200) {
  if (n <= 0) throw InvalidParameter("smallest_eigenvalue_lanczos: empty operator");
  if (tol <= 0.0 || max_iters < 1)
    throw InvalidParameter("smallest_eigenvalue_lanczos: bad tolerance or cap");
  const int max_basis = static_cast<int>(std::min<Index>({n, 200, max_iters}));

  std::vector<Vector> basis;
  basis.reserve(static_cast<std::size_t>(max_basis));
  std::vector<double> alpha, beta;  // tridiagonal entries; beta[j] couples j, j+1

  Vector q = detail::seeded_unit_vector(n, 0x9e3779b97f4a7c15ULL);
  Vector w(n);
  EigenEstimate out;
  double best = 0.0, residual = 0.0;
  for (int j = 0; j < max_basis; ++j) {
    basis.push_back(q);
    apply(q, w);
    double a_j = q.dot(w);
    w -= a_j * q;
    if (j > 0) w -= beta[static_cast<std::size_t>(j - 1)] * basis[static_cast<std::size_t>(j - 1)];
    // Full reorthogonalization, two passes for stability.
    for (int pass = 0; pass < 2; ++pass)
      for (const Vector& b : basis) w -= b.dot(w) * b;
    alpha.push_back(a_j);
    const double b_j = w.norm();

    // Ritz values of the current tridiagonal section.
    const Index m = static_cast<Index>(alpha.size());
    Eigen::VectorXd diag = Eigen::Map<const Eigen::VectorXd>(alpha.data(), m);
    Eigen::VectorXd sub =
        m > 1 ? Eigen::Map<const Eigen::VectorXd>(beta.data(), m - 1) : Eigen::VectorXd();
    Eigen::SelfAdjointEigenSolver<Matrix> es;
    es.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
    Index which = 0;
    es.eigenvalues().minCoeff(&which);
    best = es.eigenvalues()[which];
    const double scale =
        std::max(1.0, std::max(std::abs(es.eigenvalues()[0]),
                               std::abs(es.eigenvalues()[m - 1])));
    residual = b_j * std::abs(es.eigenvectors()(m - 1, which));
    out.iterations = j + 1;
    if (residual <= tol * scale) {
      out.value = best - residual;
      out.converged = true;
      return out;
    }
    if (b_j <= 1e-13 * scale) {
      // Invariant subspace found; the Ritz values are exact for it.
      out.value = best;
      out.converged = true;
      return out;
    }
    beta.push_back(b_j);
    q = w / b_j;
  }
  out.value = best - residual;  // best available estimate, flagged unconverged
  out.converged = false;
  return out;
}

// Smallest eigenvalue of a dense symmetric matrix. Small orders go through a
// full symmetric eigendecomposition; larger ones fall back to Lanczos.
inline EigenEstimate smallest_eigenvalue(const Matrix& h, double tol = 1e-6,
                                         int max_iters = 200,
                                         Index dense_cutoff = kDenseCutoff) {
  if (h.rows() != h.cols() || h.rows() == 0)
    throw DimensionMismatch("smallest_eigenvalue: matrix must be square and nonempty");
  if (h.rows() <= dense_cutoff) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(h, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success)
      throw SolveFailure("smallest_eigenvalue: dense eigendecomposition failed");
    EigenEstimate out;
    out.value = es.eigenvalues().minCoeff();
    out.iterations = 1;
    out.converged = true;
    return out;
  }
  return smallest_eigenvalue_lanczos(
      [&h](const Vector& x, Vector& y) { y.noalias() = h.selfadjointView<Eigen::Lower>() * x; },
      h.rows(), tol, max_iters);
}

// Cholesky solve of G d = rhs for symmetric positive definite G, with a
// couple of iterative-refinement passes to push the residual toward
// machine level. Throws NotPositiveDefinite when the factorization fails.
inline Vector solve_spd_direct(const Matrix& g, const Vector& rhs) {
  if (g.rows() != g.cols()) throw DimensionMismatch("solve_spd_direct: matrix not square");
  if (g.rows() != rhs.size()) throw DimensionMismatch("solve_spd_direct: rhs size mismatch");
  Eigen::LLT<Matrix> llt(g);
  if (llt.info() != Eigen::Success)
    throw NotPositiveDefinite("solve_spd_direct: Cholesky factorization failed");
  Vector d = llt.solve(rhs);
  for (int pass = 0; pass < 2; ++pass) {
    Vector r = rhs - g.selfadjointView<Eigen::Lower>() * d;
    if (r.norm() <= 1e-14 * std::max(1.0, rhs.norm())) break;
    d += llt.solve(r);
  }
  if (!d.allFinite())
    throw NotPositiveDefinite("solve_spd_direct: solution is not finite");
  return d;
}

struct CgResult {
  Vector x;
  int iterations = 0;
  bool converged = false;
  double residual_norm = 0.0;
};

// Conjugate gradients on a symmetric positive definite operator. Stops when
// the true residual satisfies ||G x - rhs|| <= rel_tol * ||rhs||. Returns the
// best iterate seen with a convergence flag; never throws on slow progress.
inline CgResult solve_spd_cg(const std::function<void(const Vector&, Vector&)>& apply,
                             const Vector& rhs, double rel_tol = 1e-8,
                             int max_iters = 0) {
  const Index n = rhs.size();
  if (n == 0) throw DimensionMismatch("solve_spd_cg: empty right-hand side");
  if (rel_tol <= 0.0) throw InvalidParameter("solve_spd_cg: rel_tol must be positive");
  if (max_iters <= 0) max_iters = static_cast<int>(10 * n);

  CgResult out;
  out.x = Vector::Zero(n);
  const double rhs_norm = rhs.norm();
  if (rhs_norm == 0.0) {
    out.converged = true;
    return out;
  }
  const double target = rel_tol * rhs_norm;

  Vector r = rhs;  // residual of x = 0
  Vector p = r;
  Vector gp(n);
  double rr = r.squaredNorm();
  Vector best_x = out.x;
  double best_res = rhs_norm;

  for (int it = 1; it <= max_iters; ++it) {
    apply(p, gp);
    const double pgp = p.dot(gp);
    if (!(pgp > 0.0) || !std::isfinite(pgp)) break;  // lost positive definiteness
    const double step = rr / pgp;
    out.x += step * p;
    r -= step * gp;
    out.iterations = it;
    const double rn = r.norm();
    if (rn < best_res) {
      best_res = rn;
      best_x = out.x;
    }
    if (rn <= target) {
      // Recompute the true residual; the recurrence can drift.
      apply(out.x, gp);
      const double true_res = (rhs - gp).norm();
      if (true_res <= target) {
        out.converged = true;
        out.residual_norm = true_res;
        return out;
      }
      best_res = std::min(best_res, true_res);
    }
    const double rr_next = r.squaredNorm();
    p = r + (rr_next / rr) * p;
    rr = rr_next;
  }
  out.x = best_x;
  out.residual_norm = best_res;
  out.converged = best_res <= target;
  return out;
}

}  // namespace sparseq
