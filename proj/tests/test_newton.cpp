#include "sparseq/newton.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "sparseq/loss.hpp"
#include "sparseq/problem.hpp"
#include "sparseq/subspace.hpp"

using sparseq::armijo_search;
using sparseq::ArmijoResult;
using sparseq::Index;
using sparseq::LossModel;
using sparseq::Matrix;
using sparseq::newton_direction;
using sparseq::NewtonDirection;
using sparseq::NewtonParams;
using sparseq::ProblemInstance;
using sparseq::SparseColumnMatrix;
using sparseq::subspace_hessian_dense;
using sparseq::SubspaceView;
using sparseq::SupportSet;
using sparseq::Vector;

namespace {

// lam = 1e-300 makes the penalty numerically invisible, so the restricted
// problem behaves like a plain least-squares model; handy for exact algebra.
ProblemInstance tiny_penalty_ls(const Matrix& a, const Vector& b) {
  return ProblemInstance(SparseColumnMatrix::from_dense(a),
                         LossModel::least_squares(b), 1e-300, 0.5);
}

std::vector<Index> iota_support(Index k) {
  std::vector<Index> idx(static_cast<std::size_t>(k));
  for (Index i = 0; i < k; ++i) idx[static_cast<std::size_t>(i)] = i;
  return idx;
}

Vector random_vector(Index n, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> normal(0.0, scale);
  Vector v(n);
  for (Index i = 0; i < n; ++i) v[i] = normal(rng);
  return v;
}

}  // namespace

TEST(NewtonParams, Validation) {
  NewtonParams p;
  EXPECT_NO_THROW(p.validate());
  p.sigma = 1.0;
  EXPECT_THROW(p.validate(), sparseq::InvalidParameter);
  p = NewtonParams{};
  p.b1 = 0.5;
  EXPECT_THROW(p.validate(), sparseq::InvalidParameter);
  p = NewtonParams{};
  p.beta = 1.0;
  EXPECT_THROW(p.validate(), sparseq::InvalidParameter);
}

TEST(NewtonDirection, IdentityHessianClosedForm) {
  // H = I and r = (1, 0) up to 1e-300 noise: zeta stays 0 and
  // d = -r / (1 + b2 ||r||^sigma).
  Matrix a = Matrix::Identity(2, 2);
  Vector u(2), b(2);
  u << 1.0, 1.0;
  b << 0.0, 1.0;
  const ProblemInstance prob = tiny_penalty_ls(a, b);
  SubspaceView view(prob, SupportSet(iota_support(2)), u);
  NewtonParams params;
  const NewtonDirection nd = newton_direction(view, params);
  EXPECT_EQ(nd.zeta, 0.0);
  EXPECT_EQ(nd.retries, 0);
  EXPECT_FALSE(nd.used_cg);
  EXPECT_NEAR(nd.d[0], -1.0 / (1.0 + params.b2), 1e-12);
  EXPECT_NEAR(nd.d[1], 0.0, 1e-12);
}

TEST(NewtonDirection, FrozenIndefiniteCase) {
  // Crafted curvature so the restricted Hessian is exactly diag(-1, 2) and
  // the restricted gradient is (1, 1): with sigma = 1/2, b1 = 1 + 1e-8,
  // b2 = 1e-3 the shift is 1 + 1e-8 + 1e-3 * 2^{1/4} and
  //   d = (-840.8893442453423, -0.3332012504567389).
  LossModel::Separable phi;
  phi.value = [](double) { return 0.0; };  // unused by the direction solve
  phi.derivative = [](double z) {
    return z < 1.5 ? 0.5 : 0.6464466094067263;
  };
  phi.second_derivative = [](double z) {
    return z < 1.5 ? -0.75 : 2.0883883476483184;
  };
  phi.curvature_bound = 3.0;
  ProblemInstance prob(SparseColumnMatrix::identity(2),
                       LossModel::custom_separable(phi, 2), 1.0, 0.5);
  Vector u(2);
  u << 1.0, 2.0;
  SubspaceView view(prob, SupportSet(iota_support(2)), u);

  const Matrix h = subspace_hessian_dense(view);
  EXPECT_NEAR(h(0, 0), -1.0, 1e-13);
  EXPECT_NEAR(h(1, 1), 2.0, 1e-13);
  EXPECT_EQ(h(0, 1), 0.0);

  const NewtonDirection nd = newton_direction(view, NewtonParams{});
  EXPECT_NEAR(nd.zeta, 1.0, 1e-12);
  EXPECT_NEAR(nd.shift, 1.0011892171150027, 1e-12);
  EXPECT_NEAR(nd.d[0], -840.8893442453423, 1e-6);
  EXPECT_NEAR(nd.d[1], -0.3332012504567389, 1e-12);
  // The shifted system is solved to high accuracy.
  Matrix g = h;
  g.diagonal().array() += nd.shift;
  EXPECT_LE((g * nd.d + nd.r).norm(), 1e-10 * nd.r.norm());
}

TEST(NewtonDirection, DescentAndNormBoundOnRandomInstances) {
  std::mt19937_64 rng(29);
  NewtonParams params;
  for (int rep = 0; rep < 30; ++rep) {
    const Index m = 12, k = 6;
    const Matrix a = Matrix::Random(m, k);
    Vector b;
    LossModel loss = LossModel::least_squares(Vector::Zero(0));
    if (rep % 2 == 0) {
      loss = LossModel::least_squares(random_vector(m, rng));
    } else {
      Vector labels(m);
      for (Index i = 0; i < m; ++i) labels[i] = (rng() & 1u) ? 1.0 : -1.0;
      loss = LossModel::logistic(labels);
    }
    ProblemInstance prob(SparseColumnMatrix::from_dense(a), std::move(loss),
                         0.2, 0.5);
    Vector u(k);
    std::uniform_real_distribution<double> mag(0.3, 2.0);
    for (Index t = 0; t < k; ++t) u[t] = ((rng() & 1u) ? 1.0 : -1.0) * mag(rng);
    SubspaceView view(prob, SupportSet(iota_support(k)), u);
    const NewtonDirection nd = newton_direction(view, params);
    EXPECT_LT(nd.r.dot(nd.d), 0.0);
    const double r_norm = nd.r.norm();
    EXPECT_LE(nd.d.norm(), std::pow(r_norm, 1.0 - params.sigma) / params.b2 *
                               (1.0 + 1e-10));
  }
}

TEST(NewtonDirection, CgPathAgreesWithDenseOnWellConditionedInstances) {
  std::mt19937_64 rng(31);
  for (int rep = 0; rep < 10; ++rep) {
    const Index m = 40, k = 12;
    const Matrix a = Matrix::Random(m, k);
    // Tall full-rank design and a tiny lam keep the restricted Hessian
    // positive definite, so zeta = 0 on both the dense and matrix-free paths
    // and the two linear systems are identical.
    ProblemInstance prob(SparseColumnMatrix::from_dense(a),
                         LossModel::least_squares(random_vector(m, rng)), 1e-6,
                         0.5);
    Vector u(k);
    std::uniform_real_distribution<double> mag(0.5, 2.0);
    for (Index t = 0; t < k; ++t) u[t] = ((rng() & 1u) ? 1.0 : -1.0) * mag(rng);
    SubspaceView view(prob, SupportSet(iota_support(k)), u);

    NewtonParams dense_params;
    const NewtonDirection dd = newton_direction(view, dense_params);
    NewtonParams cg_params;
    cg_params.dense_cutoff = 2;  // force the matrix-free path
    const NewtonDirection dc = newton_direction(view, cg_params);
    EXPECT_FALSE(dd.used_cg);
    EXPECT_TRUE(dc.used_cg);
    EXPECT_EQ(dd.zeta, 0.0);
    EXPECT_EQ(dc.zeta, 0.0);
    EXPECT_LE((dd.d - dc.d).norm(), 1e-6 * std::max(1.0, dd.d.norm()));
  }
}

TEST(NewtonDirection, ZeroGradientIsReported) {
  // u = 1, b = 1.5, lam = 1, q = 1/2: the data term contributes -1/2 and the
  // penalty exactly +1/2, so the restricted gradient is identically zero.
  Matrix a = Matrix::Identity(1, 1);
  Vector u(1), b(1);
  u << 1.0;
  b << 1.5;
  ProblemInstance prob(SparseColumnMatrix::from_dense(a),
                       LossModel::least_squares(b), 1.0, 0.5);
  SubspaceView view(prob, SupportSet({0}), u);
  EXPECT_THROW(newton_direction(view, NewtonParams{}), sparseq::ZeroGradient);
}

TEST(ArmijoSearch, FullStepOnExactQuadratic) {
  Matrix a = Matrix::Identity(2, 2);
  Vector u(2), b(2);
  u << 2.0, 2.0;
  b << 1.0, 1.0;
  const ProblemInstance prob = tiny_penalty_ls(a, b);
  SubspaceView view(prob, SupportSet(iota_support(2)), u);
  Vector r = u - b;  // exact restricted gradient up to 1e-300
  Vector d = -r;     // exact Newton step lands on the minimizer
  const ArmijoResult res = armijo_search(view, d, r, NewtonParams{});
  EXPECT_EQ(res.alpha, 1.0);
  EXPECT_EQ(res.probes, 1);
  EXPECT_NEAR(res.f_next, 0.0, 1e-15);
}

TEST(ArmijoSearch, SkipsTrialsThatZeroACoordinate) {
  Matrix a = Matrix::Identity(2, 2);
  Vector u(2), b(2);
  u << 1.0, 1.0;
  b << 0.0, 0.0;
  const ProblemInstance prob = tiny_penalty_ls(a, b);
  SubspaceView view(prob, SupportSet(iota_support(2)), u);
  Vector r = u;  // restricted gradient of 1/2||u||^2
  Vector d(2);
  d << -1.0, -0.5;  // the full step lands exactly on u_1 = 0
  const ArmijoResult res = armijo_search(view, d, r, NewtonParams{});
  EXPECT_EQ(res.probes, 2);
  EXPECT_EQ(res.alpha, 0.5);
  for (Index i = 0; i < 2; ++i) EXPECT_GE(std::abs(res.u_next[i]), 1e-150);
}

TEST(ArmijoSearch, BacktracksOnOverlongDirections) {
  Matrix a = Matrix::Identity(3, 3);
  Vector u(3), b(3);
  u << 1.0, -2.0, 0.5;
  b << 0.2, -0.4, 0.1;
  const ProblemInstance prob = tiny_penalty_ls(a, b);
  SubspaceView view(prob, SupportSet(iota_support(3)), u);
  Vector r = u - b;
  Vector d = -1e6 * r;
  const ArmijoResult res = armijo_search(view, d, r, NewtonParams{});
  EXPECT_LT(res.alpha, 1e-3);
  EXPECT_LT(res.f_next, view.value());
  // The accepted pair satisfies the sufficient-decrease inequality verbatim.
  const NewtonParams params;
  EXPECT_LE(res.f_next, view.value() + params.varrho * res.alpha * r.dot(d));
}

TEST(ArmijoSearch, RejectsAscentDirections) {
  Matrix a = Matrix::Identity(2, 2);
  Vector u(2), b(2);
  u << 1.0, 1.0;
  b << 0.0, 0.0;
  const ProblemInstance prob = tiny_penalty_ls(a, b);
  SubspaceView view(prob, SupportSet(iota_support(2)), u);
  Vector r = u;
  EXPECT_THROW(armijo_search(view, r, r, NewtonParams{}),
               sparseq::InvalidParameter);
}

TEST(ArmijoSearch, ThrowsWhenBudgetTooSmall) {
  Matrix a = Matrix::Identity(2, 2);
  Vector u(2), b(2);
  u << 1.0, 1.0;
  b << 0.0, 0.0;
  const ProblemInstance prob = tiny_penalty_ls(a, b);
  SubspaceView view(prob, SupportSet(iota_support(2)), u);
  Vector r = u;
  Vector d = -1e8 * r;
  NewtonParams params;
  params.max_armijo = 2;
  EXPECT_THROW(armijo_search(view, d, r, params), sparseq::ArmijoExhausted);
}

TEST(ArmijoSearch, GivesUpWhenTrialsUnderflowTheIterate) {
  Matrix a = Matrix::Identity(2, 2);
  Vector u(2), b(2);
  u << 1.0, 1.0;
  b << 0.0, 0.0;
  const ProblemInstance prob = tiny_penalty_ls(a, b);
  SubspaceView view(prob, SupportSet(iota_support(2)), u);
  Vector r = u;
  // A genuine descent direction, but so short that u + alpha d == u bitwise
  // already at alpha = 1 (1e-17 is below half an ulp of 1.0). Without the
  // underflow bail-out every trial would evaluate F at u itself and the weak
  // Armijo inequality would accept a step that moves nothing.
  Vector d = -1e-17 * r;
  ASSERT_TRUE(Vector(u + d) == u);
  EXPECT_THROW(armijo_search(view, d, r, NewtonParams{}),
               sparseq::ArmijoExhausted);
}
