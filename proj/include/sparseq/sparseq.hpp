#pragma once

// Umbrella header for the sparseq library: lq (0 < q < 1) regularized
// composite minimization by a hybrid proximal-gradient / subspace regularized
// Newton method, with a monotone proximal-gradient baseline.

#include "sparseq/driver.hpp"
#include "sparseq/errors.hpp"
#include "sparseq/fixtures.hpp"
#include "sparseq/io.hpp"
#include "sparseq/linalg.hpp"
#include "sparseq/loss.hpp"
#include "sparseq/newton.hpp"
#include "sparseq/pg.hpp"
#include "sparseq/problem.hpp"
#include "sparseq/prox.hpp"
#include "sparseq/sparse_matrix.hpp"
#include "sparseq/subspace.hpp"
