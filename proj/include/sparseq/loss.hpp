#pragma once

#include <cmath>
#include <functional>
#include <utility>
#include <vector>

#include "sparseq/accum.hpp"
#include "sparseq/errors.hpp"
#include "sparseq/linalg.hpp"
#include "sparseq/sparse_matrix.hpp"

namespace sparseq {

enum class LossKind { least_squares, logistic, custom };

namespace detail {

// log(1 + exp(t)) without overflow for large |t|.
inline double softplus(double t) {
  if (t > 0.0) return t + std::log1p(std::exp(-t));
  return std::log1p(std::exp(t));
}

inline double sigmoid(double t) {
  if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

}  // namespace detail

// Smooth data-fit term f evaluated on z = A x. Two built-in models:
//   least_squares: f(z) = 1/2 ||z - b||^2
//   logistic:      f(z) = sum_i log(1 + exp(-b_i z_i)),  b_i in {-1, +1}
// plus a separable custom hook (per-coordinate phi with an explicit curvature
// bound) used by the one-dimensional diagnostic fixture. A custom loss may be
// a sum of several separable terms; keeping the summands apart lets the
// compensated objective accumulator cancel them against the regularizer
// without shedding the low-order bits first (a custom phi whose value is a
// small residue of O(1) summands would otherwise quantize F to ulps of the
// summands and stall every descent test near a minimizer).
class LossModel {
 public:
  struct Separable {
    std::function<double(double)> value;
    std::function<double(double)> derivative;
    std::function<double(double)> second_derivative;
    double curvature_bound = 0.0;  // sup |phi''|, used for the step bound
    double lower_bound = 0.0;      // known lower bound of sum_i phi(z_i)
  };

  static LossModel least_squares(Vector b) {
    LossModel m;
    m.kind_ = LossKind::least_squares;
    m.b_ = std::move(b);
    return m;
  }

  // Accepts labels in {-1, +1}; labels in {0, 1} are remapped (0 -> -1) and
  // flagged so the caller can surface a warning. Anything else is rejected.
  static LossModel logistic(Vector labels) {
    bool zero_one = false, pm_one = false;
    for (Index i = 0; i < labels.size(); ++i) {
      const double v = labels[i];
      if (v == 0.0 || v == 1.0) zero_one = true;
      if (v == -1.0 || v == 1.0) pm_one = true;
      if (v != 0.0 && v != 1.0 && v != -1.0)
        throw InvalidParameter("logistic labels must be in {-1,+1} or {0,1}");
    }
    LossModel m;
    m.kind_ = LossKind::logistic;
    if (zero_one && labels.minCoeff() == 0.0) {
      for (Index i = 0; i < labels.size(); ++i)
        labels[i] = labels[i] == 0.0 ? -1.0 : 1.0;
      m.labels_remapped_ = true;
    } else if (!pm_one && labels.size() > 0) {
      throw InvalidParameter("logistic labels must be in {-1,+1} or {0,1}");
    }
    m.b_ = std::move(labels);
    return m;
  }

  static LossModel custom_separable(Separable phi, Index m_rows) {
    std::vector<Separable> terms;
    terms.push_back(std::move(phi));
    return custom_separable(std::move(terms), m_rows);
  }

  // phi(z_i) = sum over terms; per-term values are fed to the objective
  // accumulator individually.
  static LossModel custom_separable(std::vector<Separable> terms, Index m_rows) {
    if (terms.empty())
      throw InvalidParameter("custom loss needs at least one term");
    double curvature = 0.0;
    for (const Separable& t : terms) {
      if (!t.value || !t.derivative || !t.second_derivative)
        throw InvalidParameter("custom loss needs value/derivative/second_derivative");
      if (!(t.curvature_bound >= 0.0))
        throw InvalidParameter("custom loss curvature bound must be >= 0");
      curvature += t.curvature_bound;
    }
    if (!(curvature > 0.0))
      throw InvalidParameter("custom loss needs a positive curvature bound");
    LossModel m;
    m.kind_ = LossKind::custom;
    m.b_ = Vector::Zero(m_rows);
    m.phi_ = std::move(terms);
    return m;
  }

  LossKind kind() const { return kind_; }
  Index samples() const { return b_.size(); }
  bool labels_remapped() const { return labels_remapped_; }
  const Vector& targets() const { return b_; }

  double value(const Vector& z) const {
    detail::CompensatedSum acc;
    accumulate_value(z, acc);
    return acc.total();
  }

  // Streams the per-sample (and, for custom losses, per-term) addends of f(z)
  // into acc so callers can keep compensating across the regularizer too.
  void accumulate_value(const Vector& z, detail::CompensatedSum& acc) const {
    check(z);
    switch (kind_) {
      case LossKind::least_squares:
        for (Index i = 0; i < z.size(); ++i) {
          const double r = z[i] - b_[i];
          acc.add(0.5 * r * r);
        }
        return;
      case LossKind::logistic:
        for (Index i = 0; i < z.size(); ++i)
          acc.add(detail::softplus(-b_[i] * z[i]));
        return;
      case LossKind::custom:
        for (Index i = 0; i < z.size(); ++i)
          for (const Separable& t : phi_) acc.add(t.value(z[i]));
        return;
    }
    throw Error("unreachable");
  }

  Vector gradient(const Vector& z) const {
    check(z);
    Vector g(z.size());
    switch (kind_) {
      case LossKind::least_squares:
        g = z - b_;
        break;
      case LossKind::logistic:
        for (Index i = 0; i < z.size(); ++i)
          g[i] = -b_[i] * detail::sigmoid(-b_[i] * z[i]);
        break;
      case LossKind::custom:
        for (Index i = 0; i < z.size(); ++i) {
          double d = 0.0;
          for (const Separable& t : phi_) d += t.derivative(z[i]);
          g[i] = d;
        }
        break;
    }
    return g;
  }

  // Diagonal of the Hessian of f at z (both built-in models are separable).
  Vector hessian_diagonal(const Vector& z) const {
    check(z);
    Vector h(z.size());
    switch (kind_) {
      case LossKind::least_squares:
        h.setOnes();
        break;
      case LossKind::logistic:
        for (Index i = 0; i < z.size(); ++i) {
          const double s = detail::sigmoid(b_[i] * z[i]);
          h[i] = s * (1.0 - s);
        }
        break;
      case LossKind::custom:
        for (Index i = 0; i < z.size(); ++i) {
          double d = 0.0;
          for (const Separable& t : phi_) d += t.second_derivative(z[i]);
          h[i] = d;
        }
        break;
    }
    return h;
  }

  // Upper bound on the Lipschitz modulus of x -> grad f(A x): the curvature
  // bound of f times ||A||^2 from power iteration.
  double lipschitz_estimate(const SparseColumnMatrix& a,
                            std::uint64_t seed = 0) const {
    const double norm_sq = spectral_norm_sq(a, 1e-10, 5000, seed).value;
    return curvature_bound() * norm_sq;
  }

  double curvature_bound() const {
    switch (kind_) {
      case LossKind::least_squares:
        return 1.0;
      case LossKind::logistic:
        return 0.25;
      case LossKind::custom: {
        double c = 0.0;
        for (const Separable& t : phi_) c += t.curvature_bound;
        return c;
      }
    }
    throw Error("unreachable");
  }

  // Known lower bound of f, used only for sanity checks.
  double lower_bound() const {
    if (kind_ != LossKind::custom) return 0.0;
    double lb = 0.0;
    for (const Separable& t : phi_) lb += t.lower_bound;
    return lb;
  }

 private:
  LossModel() = default;

  void check(const Vector& z) const {
    if (z.size() != b_.size())
      throw DimensionMismatch("loss: z has wrong length");
  }

  LossKind kind_ = LossKind::least_squares;
  Vector b_;
  std::vector<Separable> phi_;
  bool labels_remapped_ = false;
};

}  // namespace sparseq
