#ifndef QUANTX_CALIBRATION_HPP
#define QUANTX_CALIBRATION_HPP

#include <vector>

#include "quantx/logistic.hpp"

namespace quantx {

/// Bias-corrected temperature scaling: finds the shared temperature and
/// per-class additive bias minimizing the negative log-likelihood of
/// softmax(z / T + b) on held-out logits. The bias stays centered (sums to
/// zero) because the softmax is shift-invariant.
Calibration calibrate_bcts(const Matrix& logits, const std::vector<int>& labels,
                           double tol = 1e-6, int max_iters = 20000);

}  // namespace quantx

#endif
