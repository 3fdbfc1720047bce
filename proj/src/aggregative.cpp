#include "quantx/aggregative.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

namespace quantx {

MisclassificationMatrix::MisclassificationMatrix(Matrix entries) : entries_(std::move(entries)) {
  if (entries_.rows() != entries_.cols())
    fail(Errc::dimension_mismatch, "misclassification matrix must be square");
  if (entries_.rows() < 1) fail(Errc::empty_input, "empty misclassification matrix");
  for (Eigen::Index j = 0; j < entries_.cols(); ++j) {
    double sum = 0.0;
    for (Eigen::Index i = 0; i < entries_.rows(); ++i) {
      const double v = entries_(i, j);
      if (!(v >= 0.0 && v <= 1.0))
        fail(Errc::bad_spec, "misclassification entries must lie in [0,1]");
      sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-9)
      fail(Errc::bad_spec, "misclassification column " + std::to_string(j) + " sums to " +
                               std::to_string(sum));
  }
}

Prevalence project_to_simplex(const Vector& v) {
  if (v.size() == 0) fail(Errc::empty_input, "cannot project an empty vector");
  if (!v.allFinite()) fail(Errc::bad_spec, "cannot project a non-finite vector");
  std::vector<double> sorted(v.data(), v.data() + v.size());
  std::sort(sorted.begin(), sorted.end(), std::greater<double>());
  double cumulative = 0.0;
  double tau = 0.0;
  for (std::size_t k = 0; k < sorted.size(); ++k) {
    cumulative += sorted[k];
    const double candidate = (cumulative - 1.0) / static_cast<double>(k + 1);
    if (sorted[k] - candidate > 0.0) tau = candidate;
  }
  std::vector<double> out(static_cast<std::size_t>(v.size()));
  double sum = 0.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    out[static_cast<std::size_t>(i)] = std::max(v(i) - tau, 0.0);
    sum += out[static_cast<std::size_t>(i)];
  }
  for (double& x : out) x /= sum;  // absorb float drift
  return Prevalence(std::move(out));
}

Prevalence cc_quantify(const SoftClassifier& clf, const Bag& bag) {
  std::vector<int> preds = clf.predict(bag.instances());
  return empirical_prevalence(preds, clf.n_classes());
}

Prevalence pcc_quantify(const SoftClassifier& clf, const Bag& bag) {
  Matrix p = clf.posteriors(bag.instances());
  Eigen::RowVectorXd mean = p.colwise().mean();
  std::vector<double> values(mean.data(), mean.data() + mean.size());
  return normalize_prevalence(values);
}

MisclassificationMatrix confusion_from_predictions(const Matrix& posteriors,
                                                   const std::vector<int>& labels, int n_classes,
                                                   ConfusionMode mode) {
  if (posteriors.rows() != static_cast<Eigen::Index>(labels.size()))
    fail(Errc::length_mismatch, "posterior rows must match label count");
  if (posteriors.cols() != n_classes)
    fail(Errc::dimension_mismatch, "posterior columns must match class count");
  Matrix m = Matrix::Zero(n_classes, n_classes);
  std::vector<double> column_mass(static_cast<std::size_t>(n_classes), 0.0);
  for (Eigen::Index i = 0; i < posteriors.rows(); ++i) {
    const int truth = labels[static_cast<std::size_t>(i)];
    column_mass[static_cast<std::size_t>(truth)] += 1.0;
    if (mode == ConfusionMode::hard) {
      Eigen::Index pred = 0;
      posteriors.row(i).maxCoeff(&pred);
      m(pred, truth) += 1.0;
    } else {
      m.col(truth) += posteriors.row(i).transpose();
    }
  }
  for (int j = 0; j < n_classes; ++j) {
    if (column_mass[static_cast<std::size_t>(j)] == 0.0)
      fail(Errc::class_absent, "no instances of class " + std::to_string(j));
    m.col(j) /= column_mass[static_cast<std::size_t>(j)];
    m.col(j) /= m.col(j).sum();  // exact column mass despite float drift
  }
  return MisclassificationMatrix(std::move(m));
}

MisclassificationMatrix estimate_confusion(const LabeledDataset& data, ConfusionMode mode, int k,
                                           const TrainOptions& opts) {
  Matrix posteriors = crossval_posteriors(data, k, opts);
  return confusion_from_predictions(posteriors, data.labels(), data.n_classes(), mode);
}

Vector confusion_solve(const MisclassificationMatrix& m, const Prevalence& estimate) {
  if (m.n_classes() != static_cast<int>(estimate.size()))
    fail(Errc::dimension_mismatch, "estimate length must match matrix order");
  Vector rhs(estimate.size());
  for (std::size_t i = 0; i < estimate.size(); ++i) rhs(static_cast<Eigen::Index>(i)) = estimate[i];
  Eigen::FullPivLU<Matrix> lu(m.entries());
  if (lu.isInvertible()) return lu.solve(rhs);
  // singular: least-squares solution through the pseudoinverse
  return m.entries().completeOrthogonalDecomposition().solve(rhs);
}

Prevalence acc_quantify(const MisclassificationMatrix& m, const Prevalence& cc_estimate) {
  return project_to_simplex(confusion_solve(m, cc_estimate));
}

Prevalence pacc_quantify(const MisclassificationMatrix& m_soft, const Prevalence& pcc_estimate) {
  return project_to_simplex(confusion_solve(m_soft, pcc_estimate));
}

EmqResult emq_quantify(const Prevalence& train_prior, const Matrix& posteriors,
                       const EmqOptions& opts) {
  const Eigen::Index n = posteriors.rows();
  const Eigen::Index l = posteriors.cols();
  if (static_cast<std::size_t>(l) != train_prior.size())
    fail(Errc::dimension_mismatch, "posterior columns must match prior length");
  if (n == 0) fail(Errc::empty_input, "no posteriors to adjust");
  if (opts.max_iters < 1 || !(opts.tol > 0.0)) fail(Errc::bad_spec, "invalid EMQ options");
  for (std::size_t c = 0; c < train_prior.size(); ++c)
    if (!(train_prior[c] > 0.0))
      fail(Errc::zero_train_prior, "training prior has a zero entry at class " + std::to_string(c));
  for (Eigen::Index i = 0; i < n; ++i) {
    if (posteriors.row(i).minCoeff() < 0.0 || std::abs(posteriors.row(i).sum() - 1.0) > 1e-6)
      fail(Errc::not_a_density, "posterior row " + std::to_string(i) + " is not on the simplex");
  }

  Vector prior(l);
  for (Eigen::Index c = 0; c < l; ++c) prior(c) = train_prior[static_cast<std::size_t>(c)];
  Vector current = prior;

  EmqResult result{train_prior, 0, 0.0};
  for (int iter = 0; iter < opts.max_iters; ++iter) {
    Vector ratio = current.cwiseQuotient(prior);
    Matrix scaled = posteriors.array().rowwise() * ratio.transpose().array();
    Vector row_sums = scaled.rowwise().sum();
    Vector next = (scaled.array().colwise() / row_sums.array()).colwise().mean().transpose();
    result.final_change = (next - current).cwiseAbs().maxCoeff();
    result.iterations = iter + 1;
    current = next;
    if (result.final_change < opts.tol) break;
  }
  std::vector<double> values(current.data(), current.data() + current.size());
  result.prevalence = normalize_prevalence(values);
  return result;
}

std::vector<double> density_histogram(const std::vector<double>& values, int bins) {
  if (bins < 1) fail(Errc::bad_spec, "bin count must be positive");
  if (values.empty()) fail(Errc::empty_input, "cannot histogram an empty value set");
  std::vector<double> h(static_cast<std::size_t>(bins), 0.0);
  for (double v : values) {
    if (!(v >= 0.0 && v <= 1.0))
      fail(Errc::bad_spec, "histogram values must lie in [0,1], got " + std::to_string(v));
    int b = static_cast<int>(v * bins);
    if (b == bins) b = bins - 1;
    h[static_cast<std::size_t>(b)] += 1.0;
  }
  for (double& x : h) x /= static_cast<double>(values.size());
  return h;
}

std::vector<int> default_hdy_bin_counts() {
  std::vector<int> counts;
  for (int b = 10; b <= 110; b += 10) counts.push_back(b);
  return counts;
}

HdyModel HdyModel::from_posteriors(const std::vector<double>& pos_values,
                                   const std::vector<double>& neg_values,
                                   std::vector<int> bin_counts, double grid_step) {
  if (pos_values.empty() || neg_values.empty())
    fail(Errc::class_absent, "both classes need training posteriors");
  if (bin_counts.empty()) fail(Errc::bad_spec, "need at least one bin count");
  if (!(grid_step > 0.0 && grid_step <= 1.0)) fail(Errc::bad_spec, "invalid grid step");
  HdyModel model;
  model.bin_counts = std::move(bin_counts);
  model.grid_step = grid_step;
  for (int bins : model.bin_counts) {
    model.pos_histograms.push_back(density_histogram(pos_values, bins));
    model.neg_histograms.push_back(density_histogram(neg_values, bins));
  }
  return model;
}

double hdy_search(const std::vector<double>& pos_hist, const std::vector<double>& neg_hist,
                  const std::vector<double>& bag_hist, double grid_step) {
  if (pos_hist.size() != neg_hist.size() || pos_hist.size() != bag_hist.size())
    fail(Errc::length_mismatch, "histogram bin counts differ");
  double best_p = 0.0;
  double best_hd = std::numeric_limits<double>::infinity();
  const int steps = static_cast<int>(std::round(1.0 / grid_step));
  std::vector<double> mixture(pos_hist.size());
  for (int s = 0; s <= steps; ++s) {
    const double p = std::min(1.0, s * grid_step);
    for (std::size_t b = 0; b < mixture.size(); ++b)
      mixture[b] = p * pos_hist[b] + (1.0 - p) * neg_hist[b];
    const double hd = hellinger_distance(mixture, bag_hist);
    if (hd < best_hd) {
      best_hd = hd;
      best_p = p;
    }
  }
  return best_p;
}

Prevalence hdy_quantify(const HdyModel& model, const std::vector<double>& bag_pos_posteriors) {
  if (model.pos_histograms.size() != model.bin_counts.size() ||
      model.neg_histograms.size() != model.bin_counts.size())
    fail(Errc::bad_spec, "inconsistent model");
  std::vector<double> argmins;
  for (std::size_t i = 0; i < model.bin_counts.size(); ++i) {
    std::vector<double> bag_hist = density_histogram(bag_pos_posteriors, model.bin_counts[i]);
    argmins.push_back(
        hdy_search(model.pos_histograms[i], model.neg_histograms[i], bag_hist, model.grid_step));
  }
  std::sort(argmins.begin(), argmins.end());
  const double p = argmins[(argmins.size() - 1) / 2];  // lower median
  return Prevalence({1.0 - p, p});
}

namespace {

class CcQuantifier final : public AggregativeQuantifier {
 public:
  CcQuantifier(std::string kind, SoftClassifier clf) : kind_(std::move(kind)), clf_(std::move(clf)) {}
  Prevalence quantify(const Bag& bag) const override { return cc_quantify(clf_, bag); }
  const std::string& kind() const override { return kind_; }
  const SoftClassifier& classifier() const override { return clf_; }

 private:
  std::string kind_;
  SoftClassifier clf_;
};

class PccQuantifier final : public AggregativeQuantifier {
 public:
  PccQuantifier(std::string kind, SoftClassifier clf) : kind_(std::move(kind)), clf_(std::move(clf)) {}
  Prevalence quantify(const Bag& bag) const override { return pcc_quantify(clf_, bag); }
  const std::string& kind() const override { return kind_; }
  const SoftClassifier& classifier() const override { return clf_; }

 private:
  std::string kind_;
  SoftClassifier clf_;
};

class AdjustedQuantifier final : public AggregativeQuantifier {
 public:
  AdjustedQuantifier(std::string kind, SoftClassifier clf, MisclassificationMatrix m, bool soft)
      : kind_(std::move(kind)), clf_(std::move(clf)), m_(std::move(m)), soft_(soft) {}
  Prevalence quantify(const Bag& bag) const override {
    if (soft_) return pacc_quantify(m_, pcc_quantify(clf_, bag));
    return acc_quantify(m_, cc_quantify(clf_, bag));
  }
  const std::string& kind() const override { return kind_; }
  const SoftClassifier& classifier() const override { return clf_; }
  const MisclassificationMatrix& confusion() const { return m_; }

 private:
  std::string kind_;
  SoftClassifier clf_;
  MisclassificationMatrix m_;
  bool soft_;
};

class EmqQuantifier final : public AggregativeQuantifier {
 public:
  EmqQuantifier(std::string kind, SoftClassifier clf, Prevalence prior, EmqOptions opts)
      : kind_(std::move(kind)), clf_(std::move(clf)), prior_(std::move(prior)), opts_(opts) {}
  Prevalence quantify(const Bag& bag) const override {
    return emq_quantify(prior_, clf_.posteriors(bag.instances()), opts_).prevalence;
  }
  const std::string& kind() const override { return kind_; }
  const SoftClassifier& classifier() const override { return clf_; }
  const Prevalence& prior() const { return prior_; }
  const EmqOptions& options() const { return opts_; }

 private:
  std::string kind_;
  SoftClassifier clf_;
  Prevalence prior_;
  EmqOptions opts_;
};

class HdyQuantifier final : public AggregativeQuantifier {
 public:
  HdyQuantifier(std::string kind, SoftClassifier clf, HdyModel model)
      : kind_(std::move(kind)), clf_(std::move(clf)), model_(std::move(model)) {}
  Prevalence quantify(const Bag& bag) const override {
    Matrix p = clf_.posteriors(bag.instances());
    std::vector<double> pos(static_cast<std::size_t>(p.rows()));
    for (Eigen::Index i = 0; i < p.rows(); ++i) pos[static_cast<std::size_t>(i)] = p(i, 1);
    return hdy_quantify(model_, pos);
  }
  const std::string& kind() const override { return kind_; }
  const SoftClassifier& classifier() const override { return clf_; }
  const HdyModel& model() const { return model_; }

 private:
  std::string kind_;
  SoftClassifier clf_;
  HdyModel model_;
};

// Stratified split used when a calibration holdout is requested: returns the
// row indices of the training part and of the holdout.
std::pair<std::vector<Eigen::Index>, std::vector<Eigen::Index>> holdout_split(
    const LabeledDataset& data, double holdout_fraction, std::uint64_t seed) {
  std::vector<std::vector<Eigen::Index>> per_class(static_cast<std::size_t>(data.n_classes()));
  for (Eigen::Index i = 0; i < data.size(); ++i)
    per_class[static_cast<std::size_t>(data.labels()[static_cast<std::size_t>(i)])].push_back(i);
  Rng rng = make_rng(seed, 0xca11);
  std::vector<Eigen::Index> train_rows, held_rows;
  for (auto& members : per_class) {
    std::shuffle(members.begin(), members.end(), rng);
    // keep at least one instance per class on each side
    std::size_t take = static_cast<std::size_t>(
        std::round(holdout_fraction * static_cast<double>(members.size())));
    take = std::min(std::max<std::size_t>(take, 1), members.size() - 1);
    for (std::size_t i = 0; i < members.size(); ++i)
      (i < take ? held_rows : train_rows).push_back(members[i]);
  }
  std::sort(train_rows.begin(), train_rows.end());
  std::sort(held_rows.begin(), held_rows.end());
  return {train_rows, held_rows};
}

}  // namespace

std::unique_ptr<AggregativeQuantifier> fit_aggregative(const std::string& kind,
                                                       const LabeledDataset& data,
                                                       const AggregativeOptions& opts) {
  if (kind == "cc" || kind == "pcc") {
    LogregFit fit = train_logreg(data, opts.classifier);
    if (kind == "cc") return std::make_unique<CcQuantifier>(kind, std::move(fit.classifier));
    return std::make_unique<PccQuantifier>(kind, std::move(fit.classifier));
  }
  if (kind == "acc" || kind == "pacc") {
    LogregFit fit = train_logreg(data, opts.classifier);
    const ConfusionMode mode = kind == "acc" ? ConfusionMode::hard : ConfusionMode::soft;
    MisclassificationMatrix m = estimate_confusion(data, mode, opts.cv_folds, opts.classifier);
    return std::make_unique<AdjustedQuantifier>(kind, std::move(fit.classifier), std::move(m),
                                                mode == ConfusionMode::soft);
  }
  if (kind == "emq" || kind == "emq-bcts") {
    EmqOptions emq = opts.emq;
    emq.use_calibration = kind == "emq-bcts";
    if (!emq.use_calibration) {
      LogregFit fit = train_logreg(data, opts.classifier);
      return std::make_unique<EmqQuantifier>(kind, std::move(fit.classifier), data.prevalence(),
                                             emq);
    }
    auto [train_rows, held_rows] = holdout_split(data, opts.calibration_holdout,
                                                 opts.classifier.seed);
    LabeledDataset train_part = data.subset(train_rows);
    LabeledDataset held_part = data.subset(held_rows);
    LogregFit fit = train_logreg(train_part, opts.classifier);
    Calibration cal =
        calibrate_bcts(fit.classifier.logits(held_part.instances()), held_part.labels());
    fit.classifier.set_calibration(cal);
    return std::make_unique<EmqQuantifier>(kind, std::move(fit.classifier),
                                           train_part.prevalence(), emq);
  }
  if (kind == "hdy") {
    if (data.n_classes() != 2)
      fail(Errc::not_binary, "hdy requires a binary problem");
    LogregFit fit = train_logreg(data, opts.classifier);
    Matrix posteriors = crossval_posteriors(data, opts.cv_folds, opts.classifier);
    std::vector<double> pos, neg;
    for (Eigen::Index i = 0; i < posteriors.rows(); ++i) {
      if (data.labels()[static_cast<std::size_t>(i)] == 1)
        pos.push_back(posteriors(i, 1));
      else
        neg.push_back(posteriors(i, 1));
    }
    HdyModel model =
        HdyModel::from_posteriors(pos, neg, opts.hdy_bin_counts, opts.hdy_grid_step);
    return std::make_unique<HdyQuantifier>(kind, std::move(fit.classifier), std::move(model));
  }
  fail(Errc::bad_config, "unknown aggregative quantifier: " + kind);
}

std::unique_ptr<AggregativeQuantifier> assemble_aggregative(
    const std::string& kind, SoftClassifier clf, std::optional<MisclassificationMatrix> confusion,
    std::optional<Prevalence> train_prior, std::optional<EmqOptions> emq,
    std::optional<HdyModel> hdy) {
  if (kind == "cc") return std::make_unique<CcQuantifier>(kind, std::move(clf));
  if (kind == "pcc") return std::make_unique<PccQuantifier>(kind, std::move(clf));
  if (kind == "acc" || kind == "pacc") {
    if (!confusion) fail(Errc::bad_config, kind + " needs a misclassification matrix");
    return std::make_unique<AdjustedQuantifier>(kind, std::move(clf), std::move(*confusion),
                                                kind == "pacc");
  }
  if (kind == "emq" || kind == "emq-bcts") {
    if (!train_prior) fail(Errc::bad_config, kind + " needs a training prior");
    return std::make_unique<EmqQuantifier>(kind, std::move(clf), std::move(*train_prior),
                                           emq.value_or(EmqOptions{}));
  }
  if (kind == "hdy") {
    if (!hdy) fail(Errc::bad_config, "hdy needs its histograms");
    return std::make_unique<HdyQuantifier>(kind, std::move(clf), std::move(*hdy));
  }
  fail(Errc::bad_config, "unknown aggregative quantifier: " + kind);
}

AggregativeParts aggregative_parts(const AggregativeQuantifier& q) {
  AggregativeParts parts;
  if (const auto* adj = dynamic_cast<const AdjustedQuantifier*>(&q)) {
    parts.confusion = adj->confusion();
  } else if (const auto* emq = dynamic_cast<const EmqQuantifier*>(&q)) {
    parts.train_prior = emq->prior();
    parts.emq = emq->options();
  } else if (const auto* hdy = dynamic_cast<const HdyQuantifier*>(&q)) {
    parts.hdy = hdy->model();
  }
  return parts;
}

}  // namespace quantx
