#ifndef QUANTX_LOGISTIC_HPP
#define QUANTX_LOGISTIC_HPP

#include <optional>
#include <vector>

#include "quantx/dataset.hpp"

namespace quantx {

/// Post-hoc calibration parameters: scores are rescaled by 1/temperature and
/// shifted per class before the softmax.
struct Calibration {
  double temperature = 1.0;
  Vector bias;
};

/// Multinomial logistic model producing posterior distributions over classes.
class SoftClassifier {
 public:
  SoftClassifier(Matrix weights, Vector biases,
                 std::optional<Calibration> calibration = std::nullopt);

  int n_classes() const noexcept { return static_cast<int>(weights_.rows()); }
  Eigen::Index dim() const noexcept { return weights_.cols(); }
  const Matrix& weights() const noexcept { return weights_; }
  const Vector& biases() const noexcept { return biases_; }
  const std::optional<Calibration>& calibration() const noexcept { return calibration_; }
  void set_calibration(std::optional<Calibration> c);

  /// Pre-softmax scores, one row per instance. Calibration is not applied.
  Matrix logits(const Matrix& instances) const;

  /// Posterior rows on the simplex; calibration applied when present.
  Matrix posteriors(const Matrix& instances) const;

  /// Argmax class per instance (ties break toward the lower index).
  std::vector<int> predict(const Matrix& instances) const;

 private:
  Matrix weights_;  // l x d
  Vector biases_;   // l
  std::optional<Calibration> calibration_;
};

struct TrainOptions {
  double l2_lambda = 1e-4;
  int max_iters = 10000;
  double grad_tol = 1e-5;
  double learning_rate = 1.0;  // initial line-search step
  std::uint64_t seed = 0;
};

struct LogregFit {
  SoftClassifier classifier;
  bool converged = false;
  int iterations = 0;
  std::vector<double> loss_history;  // objective after each accepted step
};

/// Fits L2-regularized multinomial cross-entropy by full-batch proximal
/// gradient descent with backtracking (the bias is never regularized).
/// Stops when the objective gradient infinity-norm falls below grad_tol.
/// Non-convergence is reported through the returned flag, not an error.
LogregFit train_logreg(const LabeledDataset& data, const TrainOptions& opts);

/// Row-stable softmax of a score matrix.
Matrix softmax_rows(const Matrix& scores);

/// Deterministic stratified fold assignment: per class, indices are shuffled
/// and dealt cyclically, with the fold cursor carried across classes so tiny
/// classes still spread over distinct folds.
std::vector<int> stratified_folds(const std::vector<int>& labels, int n_classes, int k,
                                  std::uint64_t seed);

/// Out-of-fold posterior for every instance: row i comes from a model whose
/// training folds excluded instance i.
Matrix crossval_posteriors(const LabeledDataset& data, int k, const TrainOptions& opts);

/// Same, but with an externally supplied fold assignment.
Matrix crossval_posteriors_with_folds(const LabeledDataset& data, const std::vector<int>& fold_of,
                                      int k, const TrainOptions& opts);

}  // namespace quantx

#endif
