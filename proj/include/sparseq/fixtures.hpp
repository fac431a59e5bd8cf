#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <vector>

#include "sparseq/driver.hpp"
#include "sparseq/io.hpp"
#include "sparseq/loss.hpp"
#include "sparseq/problem.hpp"

namespace sparseq {

// One-dimensional diagnostic problem with a hand-built piecewise smooth loss.
// With lam = 1 and q = 1/2 the composite objective equals (t-2)^4 on [1, 4),
// so the minimizer sits at t = 2 where the fourth-order flatness makes the
// run long enough to exercise the Newton phase thousands of times. The three
// branches are stitched so that value and derivative are continuous:
//   t < 1:       49/8 t^2 - 67/4 t + 85/8
//   1 <= t < 4:  (t-2)^4 - sqrt(t)
//   t >= 4:      1537/64 t^2 - 5132/32 t + 1085/4
// The middle branch is handed to the loss as its two printed summands,
// (t-2)^4 and -sqrt(t). Near t = 2 the loss is a ~1e-16 residue of the
// -sqrt(t) summand against the sqrt(t) regularizer; folding the summands into
// one double first would quantize F to multiples of ulp(sqrt(2)) and freeze
// every descent test long before |t-2| reaches 1e-4. Kept apart, the
// compensated objective stream resolves F to full precision.
inline LossModel example51_loss() {
  LossModel::Separable poly;  // polynomial part of each branch
  poly.value = [](double t) {
    if (t < 1.0) return 49.0 / 8.0 * t * t - 67.0 / 4.0 * t + 85.0 / 8.0;
    if (t < 4.0) {
      const double d = t - 2.0;
      return d * d * d * d;
    }
    return 1537.0 / 64.0 * t * t - 5132.0 / 32.0 * t + 1085.0 / 4.0;
  };
  poly.derivative = [](double t) {
    if (t < 1.0) return 49.0 / 4.0 * t - 67.0 / 4.0;
    if (t < 4.0) {
      const double d = t - 2.0;
      return 4.0 * d * d * d;
    }
    return 1537.0 / 32.0 * t - 5132.0 / 32.0;
  };
  poly.second_derivative = [](double t) {
    if (t < 1.0) return 49.0 / 4.0;
    if (t < 4.0) {
      const double d = t - 2.0;
      return 12.0 * d * d;
    }
    return 1537.0 / 32.0;
  };
  poly.curvature_bound = 48.75;  // with the sqrt part this sums to the quoted 49
  poly.lower_bound = 0.0;        // each branch's polynomial part is >= 0

  LossModel::Separable root;  // the -t^{1/2} summand of the middle branch,
  // written with pow so it is bit-identical to the regularizer's |t|^q addend
  // and cancels exactly inside the compensated objective stream
  root.value = [](double t) {
    return t >= 1.0 && t < 4.0 ? -std::pow(t, 0.5) : 0.0;
  };
  root.derivative = [](double t) {
    return t >= 1.0 && t < 4.0 ? -0.5 / std::sqrt(t) : 0.0;
  };
  root.second_derivative = [](double t) {
    return t >= 1.0 && t < 4.0 ? 0.25 / (t * std::sqrt(t)) : 0.0;
  };
  root.curvature_bound = 0.25;  // |d^2/dt^2 sqrt(t)| <= 1/4 on [1, 4)
  root.lower_bound = -2.0;      // -sqrt(t) > -2 on [1, 4)

  std::vector<LossModel::Separable> terms;
  terms.push_back(std::move(poly));
  terms.push_back(std::move(root));
  return LossModel::custom_separable(std::move(terms), 1);
}

inline ProblemInstance example51_problem() {
  return ProblemInstance(SparseColumnMatrix::identity(1), example51_loss(), 1.0,
                         0.5);
}

// Solver settings tuned for the 1-D fixture: gentle PG inflation, a large
// floor on the PG modulus, and the prox-distance stop tightened far enough
// that the final iterate lands within 1e-4 of the minimizer.
inline SolverConfig example51_config() {
  SolverConfig cfg = SolverConfig::defaults(SolverKind::hpgsrn);
  cfg.pg.tau_tilde = 2.0;
  cfg.pg.alpha_tilde = 1.0;
  cfg.pg.mu_min = 40.0;
  cfg.newton.sigma = 1.0 / 3.0;
  cfg.newton.b2 = 1.0;
  cfg.stopping = StoppingMode::s2;
  cfg.epsilon = 1e-12;
  return cfg;
}

inline Vector example51_start() {
  Vector x(1);
  x[0] = 2.1;
  return x;
}

struct SyntheticSpec {
  Index m = 100;
  Index n = 500;
  Index k = 10;        // nonzeros in the planted signal
  double noise = 0.01; // std deviation of the additive noise
  std::uint64_t seed = 1;

  void validate() const {
    if (m < 1 || n < 1) throw InvalidParameter("SyntheticSpec: empty shape");
    if (k < 0 || k > n) throw InvalidParameter("SyntheticSpec: bad sparsity");
    if (noise < 0.0) throw InvalidParameter("SyntheticSpec: negative noise");
  }
};

struct SyntheticInstance {
  Dataset data;
  Vector x_true;
};

// Gaussian design with unit-norm columns and a planted k-sparse signal whose
// nonzero magnitudes sit in [0.5, 2]. Least-squares targets get additive
// noise; logistic targets are the noisy signs.
inline SyntheticInstance generate_synthetic(const SyntheticSpec& spec,
                                            LossKind kind) {
  spec.validate();
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> mag(0.5, 2.0);

  Matrix a(spec.m, spec.n);
  for (Index j = 0; j < spec.n; ++j) {
    for (Index i = 0; i < spec.m; ++i) a(i, j) = normal(rng);
    const double nrm = a.col(j).norm();
    if (nrm > 0.0) a.col(j) /= nrm;
  }

  std::vector<Index> order(static_cast<std::size_t>(spec.n));
  std::iota(order.begin(), order.end(), Index{0});
  std::shuffle(order.begin(), order.end(), rng);
  Vector x_true = Vector::Zero(spec.n);
  for (Index t = 0; t < spec.k; ++t) {
    const double sign = (rng() & 1u) ? 1.0 : -1.0;
    x_true[order[static_cast<std::size_t>(t)]] = sign * mag(rng);
  }

  Vector signal = a * x_true;
  for (Index i = 0; i < spec.m; ++i) signal[i] += spec.noise * normal(rng);

  SyntheticInstance out;
  out.data.A = SparseColumnMatrix::from_dense(a);
  out.x_true = std::move(x_true);
  if (kind == LossKind::logistic) {
    out.data.b = Vector(spec.m);
    for (Index i = 0; i < spec.m; ++i)
      out.data.b[i] = signal[i] >= 0.0 ? 1.0 : -1.0;
  } else {
    out.data.b = std::move(signal);
  }
  return out;
}

}  // namespace sparseq
