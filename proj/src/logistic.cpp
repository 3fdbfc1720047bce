#include "quantx/logistic.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

namespace quantx {

SoftClassifier::SoftClassifier(Matrix weights, Vector biases, std::optional<Calibration> calibration)
    : weights_(std::move(weights)), biases_(std::move(biases)), calibration_(std::move(calibration)) {
  if (weights_.rows() != biases_.size())
    fail(Errc::dimension_mismatch, "weight rows must match bias length");
  if (!weights_.allFinite() || !biases_.allFinite())
    fail(Errc::bad_spec, "classifier parameters must be finite");
  if (calibration_) {
    if (!(calibration_->temperature > 0.0))
      fail(Errc::bad_spec, "calibration temperature must be positive");
    if (calibration_->bias.size() != weights_.rows())
      fail(Errc::dimension_mismatch, "calibration bias length must match class count");
  }
}

void SoftClassifier::set_calibration(std::optional<Calibration> c) {
  if (c) {
    if (!(c->temperature > 0.0)) fail(Errc::bad_spec, "calibration temperature must be positive");
    if (c->bias.size() != weights_.rows())
      fail(Errc::dimension_mismatch, "calibration bias length must match class count");
  }
  calibration_ = std::move(c);
}

Matrix softmax_rows(const Matrix& scores) {
  Matrix out(scores.rows(), scores.cols());
  for (Eigen::Index i = 0; i < scores.rows(); ++i) {
    const double m = scores.row(i).maxCoeff();
    out.row(i) = (scores.row(i).array() - m).exp();
    out.row(i) /= out.row(i).sum();
  }
  return out;
}

Matrix SoftClassifier::logits(const Matrix& instances) const {
  if (instances.cols() != weights_.cols())
    fail(Errc::dimension_mismatch, "instance dimension " + std::to_string(instances.cols()) +
                                       " does not match model dimension " +
                                       std::to_string(weights_.cols()));
  return (instances * weights_.transpose()).rowwise() + biases_.transpose();
}

Matrix SoftClassifier::posteriors(const Matrix& instances) const {
  Matrix z = logits(instances);
  if (calibration_) {
    z /= calibration_->temperature;
    z.rowwise() += calibration_->bias.transpose();
  }
  return softmax_rows(z);
}

std::vector<int> SoftClassifier::predict(const Matrix& instances) const {
  Matrix p = posteriors(instances);
  std::vector<int> out(static_cast<std::size_t>(p.rows()));
  for (Eigen::Index i = 0; i < p.rows(); ++i) {
    Eigen::Index best = 0;
    p.row(i).maxCoeff(&best);
    out[static_cast<std::size_t>(i)] = static_cast<int>(best);
  }
  return out;
}

namespace {

double nll_objective(const Matrix& x, const std::vector<int>& y, const Matrix& w, const Vector& b,
                     double lambda) {
  const Eigen::Index n = x.rows();
  Matrix z = (x * w.transpose()).rowwise() + b.transpose();
  double nll = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double m = z.row(i).maxCoeff();
    const double lse = m + std::log((z.row(i).array() - m).exp().sum());
    nll += lse - z(i, y[static_cast<std::size_t>(i)]);
  }
  return nll / static_cast<double>(n) + 0.5 * lambda * w.squaredNorm();
}

}  // namespace

LogregFit train_logreg(const LabeledDataset& data, const TrainOptions& opts) {
  const Eigen::Index n = data.size();
  const Eigen::Index d = data.dim();
  const int l = data.n_classes();
  if (!(opts.grad_tol > 0.0) || !(opts.learning_rate > 0.0) || opts.l2_lambda < 0.0 ||
      opts.max_iters < 1)
    fail(Errc::bad_spec, "invalid training options");

  std::set<int> present(data.labels().begin(), data.labels().end());
  if (present.size() < 2)
    fail(Errc::degenerate_data, "training data contains a single class");

  const Matrix& x = data.instances();
  const std::vector<int>& y = data.labels();

  Matrix w = Matrix::Zero(l, d);
  Vector b = Vector::Zero(l);
  double step = opts.learning_rate;
  double objective = nll_objective(x, y, w, b, opts.l2_lambda);

  LogregFit fit{SoftClassifier(w, b), false, 0, {objective}};

  for (int iter = 0; iter < opts.max_iters; ++iter) {
    Matrix p = softmax_rows((x * w.transpose()).rowwise() + b.transpose());
    for (Eigen::Index i = 0; i < n; ++i) p(i, y[static_cast<std::size_t>(i)]) -= 1.0;
    p /= static_cast<double>(n);
    Matrix gw_data = p.transpose() * x;          // gradient of the data term
    Vector gb = p.colwise().sum().transpose();
    Matrix gw_full = gw_data + opts.l2_lambda * w;

    const double gnorm = std::max(gw_full.cwiseAbs().maxCoeff(), gb.cwiseAbs().maxCoeff());
    if (gnorm <= opts.grad_tol) {
      fit.converged = true;
      break;
    }

    // Proximal step: explicit gradient on the data term, exact shrinkage for
    // the quadratic penalty. Backtrack until the composite objective
    // satisfies the gradient-mapping decrease condition.
    bool accepted = false;
    while (step > 1e-16) {
      Matrix w_try = (w - step * gw_data) / (1.0 + step * opts.l2_lambda);
      Vector b_try = b - step * gb;
      const double trial = nll_objective(x, y, w_try, b_try, opts.l2_lambda);
      const double move = ((w_try - w).squaredNorm() + (b_try - b).squaredNorm()) / step;
      if (trial <= objective - 1e-4 * move) {
        w = std::move(w_try);
        b = std::move(b_try);
        objective = trial;
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    fit.iterations = iter + 1;
    if (!accepted) break;  // step underflow: no further progress possible
    fit.loss_history.push_back(objective);
    step = std::min(step * 2.0, opts.learning_rate * 1024.0);
  }

  fit.classifier = SoftClassifier(std::move(w), std::move(b));
  return fit;
}

std::vector<int> stratified_folds(const std::vector<int>& labels, int n_classes, int k,
                                  std::uint64_t seed) {
  if (k < 2) fail(Errc::too_few_instances, "need at least two folds");
  if (static_cast<std::size_t>(k) > labels.size())
    fail(Errc::too_few_instances, "more folds than instances");
  std::vector<std::vector<std::size_t>> per_class(static_cast<std::size_t>(n_classes));
  for (std::size_t i = 0; i < labels.size(); ++i)
    per_class[static_cast<std::size_t>(labels[i])].push_back(i);

  Rng rng = make_rng(seed, 0xf01d);
  std::vector<int> fold_of(labels.size(), -1);
  int cursor = 0;
  for (auto& members : per_class) {
    if (members.empty()) continue;
    if (members.size() < 2)
      fail(Errc::too_few_instances,
           "a class with a single instance cannot be cross-validated");
    std::shuffle(members.begin(), members.end(), rng);
    for (std::size_t i : members) {
      fold_of[i] = cursor;
      cursor = (cursor + 1) % k;
    }
  }
  return fold_of;
}

Matrix crossval_posteriors_with_folds(const LabeledDataset& data, const std::vector<int>& fold_of,
                                      int k, const TrainOptions& opts) {
  if (fold_of.size() != static_cast<std::size_t>(data.size()))
    fail(Errc::length_mismatch, "fold assignment length mismatch");
  Matrix out(data.size(), data.n_classes());
  for (int f = 0; f < k; ++f) {
    std::vector<Eigen::Index> train_rows, held_rows;
    for (std::size_t i = 0; i < fold_of.size(); ++i) {
      if (fold_of[i] == f)
        held_rows.push_back(static_cast<Eigen::Index>(i));
      else
        train_rows.push_back(static_cast<Eigen::Index>(i));
    }
    if (held_rows.empty()) continue;
    if (train_rows.empty()) fail(Errc::too_few_instances, "a fold holds the entire dataset");
    LabeledDataset part = data.subset(train_rows);
    std::set<int> present(part.labels().begin(), part.labels().end());
    if (static_cast<int>(present.size()) != data.n_classes())
      fail(Errc::too_few_instances, "a training fold is missing a class");
    LogregFit fit = train_logreg(part, opts);
    Matrix held(static_cast<Eigen::Index>(held_rows.size()), data.dim());
    for (std::size_t i = 0; i < held_rows.size(); ++i)
      held.row(static_cast<Eigen::Index>(i)) = data.instances().row(held_rows[i]);
    Matrix p = fit.classifier.posteriors(held);
    for (std::size_t i = 0; i < held_rows.size(); ++i)
      out.row(held_rows[i]) = p.row(static_cast<Eigen::Index>(i));
  }
  return out;
}

Matrix crossval_posteriors(const LabeledDataset& data, int k, const TrainOptions& opts) {
  std::vector<int> fold_of = stratified_folds(data.labels(), data.n_classes(), k, opts.seed);
  return crossval_posteriors_with_folds(data, fold_of, k, opts);
}

}  // namespace quantx
