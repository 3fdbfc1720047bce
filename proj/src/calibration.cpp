#include "quantx/calibration.hpp"

#include <cmath>
#include <set>

namespace quantx {

namespace {

double nll(const Matrix& logits, const std::vector<int>& labels, double log_t, const Vector& b) {
  const double inv_t = std::exp(-log_t);
  double total = 0.0;
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    Eigen::RowVectorXd z = logits.row(i) * inv_t + b.transpose();
    const double m = z.maxCoeff();
    const double lse = m + std::log((z.array() - m).exp().sum());
    total += lse - z(labels[static_cast<std::size_t>(i)]);
  }
  return total / static_cast<double>(logits.rows());
}

}  // namespace

Calibration calibrate_bcts(const Matrix& logits, const std::vector<int>& labels, double tol,
                           int max_iters) {
  const Eigen::Index n = logits.rows();
  const Eigen::Index l = logits.cols();
  if (n == 0) fail(Errc::empty_input, "no calibration instances");
  if (static_cast<std::size_t>(n) != labels.size())
    fail(Errc::length_mismatch, "logit rows must match label count");
  std::set<int> present(labels.begin(), labels.end());
  for (int c = 0; c < static_cast<int>(l); ++c)
    if (!present.count(c))
      fail(Errc::degenerate_labels, "class " + std::to_string(c) + " missing from calibration set");
  for (int y : labels)
    if (y < 0 || y >= static_cast<int>(l)) fail(Errc::degenerate_labels, "label out of range");

  // optimize over log-temperature so the temperature stays positive
  double log_t = 0.0;
  Vector b = Vector::Zero(l);
  double objective = nll(logits, labels, log_t, b);
  double step = 1.0;

  for (int iter = 0; iter < max_iters; ++iter) {
    const double inv_t = std::exp(-log_t);
    Matrix p = softmax_rows((logits * inv_t).rowwise() + b.transpose());
    for (Eigen::Index i = 0; i < n; ++i) p(i, labels[static_cast<std::size_t>(i)]) -= 1.0;
    p /= static_cast<double>(n);
    Vector gb = p.colwise().sum().transpose();
    // d/d(log T) = -inv_t * sum_ij residual_ij * z_ij
    const double g_log_t = -inv_t * (p.array() * logits.array()).sum();

    const double gnorm = std::max(gb.cwiseAbs().maxCoeff(), std::abs(g_log_t));
    if (gnorm <= tol) break;

    bool accepted = false;
    while (step > 1e-16) {
      const double lt_try = log_t - step * g_log_t;
      Vector b_try = b - step * gb;
      const double trial = nll(logits, labels, lt_try, b_try);
      if (trial <= objective - 1e-4 * step * (gb.squaredNorm() + g_log_t * g_log_t)) {
        log_t = lt_try;
        b = std::move(b_try);
        objective = trial;
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;
    step = std::min(step * 2.0, 1024.0);
  }

  Calibration cal;
  cal.temperature = std::exp(log_t);
  cal.bias = std::move(b);
  return cal;
}

}  // namespace quantx
