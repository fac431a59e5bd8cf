#pragma once

#include <cmath>
#include <utility>

#include "sparseq/errors.hpp"
#include "sparseq/loss.hpp"
#include "sparseq/sparse_matrix.hpp"

namespace sparseq {

// The composite problem  min_x F(x) = f(A x) + lam * sum_i |x_i|^q.
struct ProblemInstance {
  SparseColumnMatrix A;
  LossModel loss;
  double lam;
  double q;

  ProblemInstance(SparseColumnMatrix a, LossModel l, double lam_, double q_)
      : A(std::move(a)), loss(std::move(l)), lam(lam_), q(q_) {
    if (!(lam > 0.0) || !std::isfinite(lam))
      throw InvalidParameter("ProblemInstance: lam must be positive and finite");
    if (!(q > 0.0 && q < 1.0))
      throw InvalidParameter("ProblemInstance: q must lie in (0, 1)");
    if (loss.samples() != A.rows())
      throw DimensionMismatch("ProblemInstance: loss targets do not match A rows");
  }

  Index dim() const { return A.cols(); }
  Index samples() const { return A.rows(); }

  // lam * sum_i |x_i|^q over the nonzero coordinates.
  double regularizer(const Vector& x) const {
    double acc = 0.0;
    for (Index i = 0; i < x.size(); ++i)
      if (x[i] != 0.0) acc += std::pow(std::abs(x[i]), q);
    return lam * acc;
  }
};

}  // namespace sparseq
