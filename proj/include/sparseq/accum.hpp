#pragma once

#include <cmath>

namespace sparseq::detail {

// Neumaier's compensated summation. Objective values here can be small
// differences of O(1) addends (data-fit terms against the regularizer), and
// the running compensation keeps what a plain left-to-right sum would round
// away. total() folds the compensation back in.
struct CompensatedSum {
  double sum = 0.0;
  double comp = 0.0;

  void add(double x) {
    const double t = sum + x;
    if (std::abs(sum) >= std::abs(x))
      comp += (sum - t) + x;
    else
      comp += (x - t) + sum;
    sum = t;
  }

  double total() const { return sum + comp; }
};

}  // namespace sparseq::detail
