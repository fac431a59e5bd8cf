#pragma once

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include "sparseq/accum.hpp"
#include "sparseq/errors.hpp"
#include "sparseq/problem.hpp"
#include "sparseq/sparse_matrix.hpp"

namespace sparseq {

// Coordinates where an iterate is allowed to be nonzero, kept sorted.
class SupportSet {
 public:
  SupportSet() = default;

  explicit SupportSet(std::vector<Index> indices) : idx_(std::move(indices)) {
    for (std::size_t t = 0; t < idx_.size(); ++t) {
      if (idx_[t] < 0) throw InvalidParameter("SupportSet: negative index");
      if (t > 0 && idx_[t - 1] >= idx_[t])
        throw InvalidParameter("SupportSet: indices must be strictly ascending");
    }
  }

  static SupportSet of(const Vector& x) {
    std::vector<Index> idx;
    for (Index i = 0; i < x.size(); ++i)
      if (x[i] != 0.0) idx.push_back(i);
    return SupportSet(std::move(idx));
  }

  Index size() const { return static_cast<Index>(idx_.size()); }
  bool empty() const { return idx_.empty(); }
  Index operator[](Index t) const { return idx_[static_cast<std::size_t>(t)]; }
  const std::vector<Index>& indices() const { return idx_; }

  bool contains(Index i) const {
    return std::binary_search(idx_.begin(), idx_.end(), i);
  }

  bool operator==(const SupportSet& other) const { return idx_ == other.idx_; }

  Vector gather(const Vector& x) const {
    Vector u(size());
    for (Index t = 0; t < size(); ++t) u[t] = x[idx_[static_cast<std::size_t>(t)]];
    return u;
  }

  // Embeds u back into R^n; off-support coordinates are exactly zero.
  Vector scatter(const Vector& u, Index n) const {
    if (u.size() != size()) throw DimensionMismatch("scatter: wrong length");
    Vector x = Vector::Zero(n);
    for (Index t = 0; t < size(); ++t) x[idx_[static_cast<std::size_t>(t)]] = u[t];
    return x;
  }

 private:
  std::vector<Index> idx_;
};

// The columns of A restricted to a support, gathered once so repeated
// products during a Newton step touch only |S| columns.
class ColumnBundle {
 public:
  ColumnBundle(const SparseColumnMatrix& a, const SupportSet& s)
      : rows_(a.rows()), cols_(s.size()) {
    col_ptr_.reserve(static_cast<std::size_t>(cols_) + 1);
    col_ptr_.push_back(0);
    for (Index t = 0; t < s.size(); ++t) {
      const Index j = s[t];
      if (j >= a.cols()) throw DimensionMismatch("ColumnBundle: support index out of range");
      const auto rows = a.column_rows(j);
      const auto vals = a.column_values(j);
      row_idx_.insert(row_idx_.end(), rows.begin(), rows.end());
      values_.insert(values_.end(), vals.begin(), vals.end());
      col_ptr_.push_back(static_cast<Index>(row_idx_.size()));
    }
  }

  Index rows() const { return rows_; }
  Index cols() const { return cols_; }

  // z = A_S u
  Vector multiply(const Vector& u) const {
    if (u.size() != cols_) throw DimensionMismatch("ColumnBundle::multiply");
    Vector z = Vector::Zero(rows_);
    for (Index t = 0; t < cols_; ++t) {
      const double ut = u[t];
      if (ut == 0.0) continue;
      for (Index k = col_ptr_[static_cast<std::size_t>(t)];
           k < col_ptr_[static_cast<std::size_t>(t) + 1]; ++k)
        z[row_idx_[static_cast<std::size_t>(k)]] += ut * values_[static_cast<std::size_t>(k)];
    }
    return z;
  }

  // g = A_S^T w
  Vector multiply_transpose(const Vector& w) const {
    if (w.size() != rows_) throw DimensionMismatch("ColumnBundle::multiply_transpose");
    Vector g(cols_);
    for (Index t = 0; t < cols_; ++t) {
      double acc = 0.0;
      for (Index k = col_ptr_[static_cast<std::size_t>(t)];
           k < col_ptr_[static_cast<std::size_t>(t) + 1]; ++k)
        acc += values_[static_cast<std::size_t>(k)] * w[row_idx_[static_cast<std::size_t>(k)]];
      g[t] = acc;
    }
    return g;
  }

  Index column_size(Index t) const {
    return col_ptr_[static_cast<std::size_t>(t) + 1] - col_ptr_[static_cast<std::size_t>(t)];
  }

  Index column_row(Index t, Index k) const {
    return row_idx_[static_cast<std::size_t>(col_ptr_[static_cast<std::size_t>(t)] + k)];
  }

  double column_value(Index t, Index k) const {
    return values_[static_cast<std::size_t>(col_ptr_[static_cast<std::size_t>(t)] + k)];
  }

 private:
  Index rows_;
  Index cols_;
  std::vector<Index> col_ptr_;
  std::vector<Index> row_idx_;
  std::vector<double> values_;
};

// A point u on a fixed support, with z = A_S u cached. All restricted
// derivative evaluations run through one of these so the gathered columns are
// reused across the gradient, the Hessian, and the line search.
class SubspaceView {
 public:
  SubspaceView(const ProblemInstance& prob, SupportSet support, Vector u)
      : prob_(&prob),
        support_(std::move(support)),
        u_(std::move(u)),
        bundle_(prob.A, support_) {
    if (u_.size() != support_.size())
      throw DimensionMismatch("SubspaceView: u does not match support size");
    if (support_.empty()) throw InvalidParameter("SubspaceView: empty support");
    for (Index t = 0; t < u_.size(); ++t)
      if (std::abs(u_[t]) < 1e-150)
        throw ZeroOnSupport("SubspaceView: coordinate too close to zero");
    z_ = bundle_.multiply(u_);
  }

  const ProblemInstance& problem() const { return *prob_; }
  const SupportSet& support() const { return support_; }
  const ColumnBundle& columns() const { return bundle_; }
  const Vector& u() const { return u_; }
  const Vector& z() const { return z_; }  // A_S u

  // F_S at an arbitrary candidate with its image z = A_S u_trial precomputed.
  // One compensated stream covers the loss addends and the regularizer terms;
  // the order (loss first, then supports ascending) matches full_objective
  // bit for bit when supp(x) = S.
  double value_at(const Vector& u_trial, const Vector& z_trial) const {
    const ProblemInstance& p = *prob_;
    detail::CompensatedSum acc;
    p.loss.accumulate_value(z_trial, acc);
    for (Index t = 0; t < u_trial.size(); ++t)
      if (u_trial[t] != 0.0)
        acc.add(p.lam * std::pow(std::abs(u_trial[t]), p.q));
    return acc.total();
  }

  double value() const { return value_at(u_, z_); }

 private:
  const ProblemInstance* prob_;
  SupportSet support_;
  Vector u_;
  ColumnBundle bundle_;
  Vector z_;
};

// F(x) over the full space. Same compensated stream as SubspaceView::value_at.
inline double full_objective(const Vector& x, const ProblemInstance& p) {
  if (x.size() != p.dim()) throw DimensionMismatch("full_objective: x has wrong size");
  detail::CompensatedSum acc;
  p.loss.accumulate_value(p.A.multiply(x), acc);
  for (Index i = 0; i < x.size(); ++i)
    if (x[i] != 0.0) acc.add(p.lam * std::pow(std::abs(x[i]), p.q));
  return acc.total();
}

// Gradient of the smooth part psi(x) = f(A x).
inline Vector full_psi_gradient(const Vector& x, const ProblemInstance& p) {
  if (x.size() != p.dim()) throw DimensionMismatch("full_psi_gradient: x has wrong size");
  return p.A.multiply_transpose(p.loss.gradient(p.A.multiply(x)));
}

// grad F_S(u) = A_S^T grad f(A_S u) + lam q sign(u) |u|^{q-1}
inline Vector subspace_gradient(const SubspaceView& v) {
  const ProblemInstance& p = v.problem();
  Vector g = v.columns().multiply_transpose(p.loss.gradient(v.z()));
  const Vector& u = v.u();
  for (Index t = 0; t < u.size(); ++t) {
    const double sign = u[t] > 0.0 ? 1.0 : -1.0;
    g[t] += p.lam * p.q * sign * std::pow(std::abs(u[t]), p.q - 1.0);
  }
  return g;
}

// hess F_S(u) = A_S^T diag(f'') A_S + lam q (q-1) diag(|u|^{q-2})
inline Matrix subspace_hessian_dense(const SubspaceView& v) {
  const ProblemInstance& p = v.problem();
  const ColumnBundle& b = v.columns();
  const Vector d = p.loss.hessian_diagonal(v.z());
  const Index ns = b.cols();
  Matrix h(ns, ns);
  Vector work = Vector::Zero(b.rows());
  for (Index j = 0; j < ns; ++j) {
    for (Index k = 0; k < b.column_size(j); ++k)
      work[b.column_row(j, k)] = d[b.column_row(j, k)] * b.column_value(j, k);
    for (Index i = 0; i <= j; ++i) {
      double acc = 0.0;
      for (Index k = 0; k < b.column_size(i); ++k)
        acc += b.column_value(i, k) * work[b.column_row(i, k)];
      h(i, j) = acc;
      h(j, i) = acc;  // assigned, not recomputed: symmetry is exact
    }
    for (Index k = 0; k < b.column_size(j); ++k) work[b.column_row(j, k)] = 0.0;
  }
  const Vector& u = v.u();
  for (Index t = 0; t < ns; ++t)
    h(t, t) += p.lam * p.q * (p.q - 1.0) * std::pow(std::abs(u[t]), p.q - 2.0);
  return h;
}

// Matrix-free product hess F_S(u) * w, for supports past the dense cutoff.
inline Vector subspace_hessian_apply(const SubspaceView& v, const Vector& w) {
  const ProblemInstance& p = v.problem();
  const ColumnBundle& b = v.columns();
  if (w.size() != b.cols()) throw DimensionMismatch("subspace_hessian_apply");
  const Vector d = p.loss.hessian_diagonal(v.z());
  Vector zw = b.multiply(w);
  for (Index r = 0; r < zw.size(); ++r) zw[r] *= d[r];
  Vector out = b.multiply_transpose(zw);
  const Vector& u = v.u();
  for (Index t = 0; t < w.size(); ++t)
    out[t] += p.lam * p.q * (p.q - 1.0) * std::pow(std::abs(u[t]), p.q - 2.0) * w[t];
  return out;
}

// F restricted to the support, evaluated at the view's own point.
inline double subspace_value(const SubspaceView& v) { return v.value(); }

// Third derivative of the separable regularizer term along the support,
// lam q (q-1) (q-2) sign(u) |u|^{q-3} componentwise. Only a test-support
// diagnostic: the solver itself never uses third-order information.
inline Vector regularizer_third_derivative(const SubspaceView& v) {
  const ProblemInstance& p = v.problem();
  const Vector& u = v.u();
  Vector out(u.size());
  for (Index t = 0; t < u.size(); ++t) {
    const double sign = u[t] > 0.0 ? 1.0 : -1.0;
    out[t] = p.lam * p.q * (p.q - 1.0) * (p.q - 2.0) * sign *
             std::pow(std::abs(u[t]), p.q - 3.0);
  }
  return out;
}

}  // namespace sparseq
