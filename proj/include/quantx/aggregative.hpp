#ifndef QUANTX_AGGREGATIVE_HPP
#define QUANTX_AGGREGATIVE_HPP

#include <memory>
#include <string>
#include <vector>

#include "quantx/calibration.hpp"
#include "quantx/dataset.hpp"
#include "quantx/logistic.hpp"
#include "quantx/metrics.hpp"

namespace quantx {

/// Column-stochastic matrix of P(predicted class = i | true class = j).
class MisclassificationMatrix {
 public:
  explicit MisclassificationMatrix(Matrix entries);
  int n_classes() const noexcept { return static_cast<int>(entries_.rows()); }
  const Matrix& entries() const noexcept { return entries_; }

 private:
  Matrix entries_;
};

enum class ConfusionMode { hard, soft };

/// Euclidean projection onto the probability simplex (sorted-threshold rule).
Prevalence project_to_simplex(const Vector& v);

/// Classify-and-count: argmax-classify every instance, return normalized counts.
Prevalence cc_quantify(const SoftClassifier& clf, const Bag& bag);

/// Probabilistic classify-and-count: the mean posterior row.
Prevalence pcc_quantify(const SoftClassifier& clf, const Bag& bag);

/// Tabulates a misclassification matrix from out-of-fold predictions.
/// Hard mode counts argmax decisions; soft mode averages posterior rows.
MisclassificationMatrix confusion_from_predictions(const Matrix& posteriors,
                                                   const std::vector<int>& labels, int n_classes,
                                                   ConfusionMode mode);

/// Cross-validated confusion estimate: refits the classifier per fold.
MisclassificationMatrix estimate_confusion(const LabeledDataset& data, ConfusionMode mode, int k,
                                           const TrainOptions& opts);

/// Adjusted classify-and-count: solves M p = cc_estimate (pseudoinverse when
/// singular) and projects the solution onto the simplex.
Prevalence acc_quantify(const MisclassificationMatrix& m, const Prevalence& cc_estimate);

/// Identical contract with a soft matrix and a PCC estimate.
Prevalence pacc_quantify(const MisclassificationMatrix& m_soft, const Prevalence& pcc_estimate);

/// Raw linear-system solution before projection, exposed for testing.
Vector confusion_solve(const MisclassificationMatrix& m, const Prevalence& estimate);

struct EmqOptions {
  int max_iters = 1000;
  double tol = 1e-6;
  bool use_calibration = false;  // recalibrate posteriors before adjusting
};

struct EmqResult {
  Prevalence prevalence;
  int iterations = 0;
  double final_change = 0.0;  // infinity-norm step at termination
};

/// Expectation-maximization prior adjustment: rescales posteriors by the
/// current prior ratio (expectation) and re-estimates the prior as their mean
/// (maximization) until the prior stops moving.
EmqResult emq_quantify(const Prevalence& train_prior, const Matrix& posteriors,
                       const EmqOptions& opts);

/// Density histogram of values in [0,1] over equal-width bins; the value 1.0
/// falls into the last bin.
std::vector<double> density_histogram(const std::vector<double>& values, int bins);

/// Training state of the histogram-matching binary quantifier: one density
/// per configured bin count per class ("positive" is class index 1).
struct HdyModel {
  std::vector<int> bin_counts;
  double grid_step = 0.01;
  std::vector<std::vector<double>> pos_histograms;
  std::vector<std::vector<double>> neg_histograms;

  static HdyModel from_posteriors(const std::vector<double>& pos_values,
                                  const std::vector<double>& neg_values,
                                  std::vector<int> bin_counts, double grid_step);
};

std::vector<int> default_hdy_bin_counts();

/// Grid search for the mixture weight minimizing the Hellinger distance
/// between weight*pos + (1-weight)*neg and the bag histogram.
double hdy_search(const std::vector<double>& pos_hist, const std::vector<double>& neg_hist,
                  const std::vector<double>& bag_hist, double grid_step);

/// Full quantification rule: per bin count, histogram the bag's positive-class
/// posteriors and grid-search the mixture weight; the answer is the median of
/// the per-bin-count minimizers, returned as (1 - p, p).
Prevalence hdy_quantify(const HdyModel& model, const std::vector<double>& bag_pos_posteriors);

/// Options shared by every classical quantifier built on the soft classifier.
struct AggregativeOptions {
  TrainOptions classifier;
  int cv_folds = 5;
  EmqOptions emq;
  std::vector<int> hdy_bin_counts = default_hdy_bin_counts();
  double hdy_grid_step = 0.01;
  double calibration_holdout = 0.2;  // held-out fraction of D used to fit the calibration
};

/// Trained classical quantifier: immutable after fit, safe for concurrent use.
class AggregativeQuantifier {
 public:
  virtual ~AggregativeQuantifier() = default;
  virtual Prevalence quantify(const Bag& bag) const = 0;
  virtual const std::string& kind() const = 0;
  virtual const SoftClassifier& classifier() const = 0;
};

/// Fits one of: cc, pcc, acc, pacc, emq, emq-bcts, hdy.
std::unique_ptr<AggregativeQuantifier> fit_aggregative(const std::string& kind,
                                                       const LabeledDataset& data,
                                                       const AggregativeOptions& opts);

/// Rebuilds a trained quantifier from persisted parts (no refitting).
std::unique_ptr<AggregativeQuantifier> assemble_aggregative(
    const std::string& kind, SoftClassifier clf, std::optional<MisclassificationMatrix> confusion,
    std::optional<Prevalence> train_prior, std::optional<EmqOptions> emq,
    std::optional<HdyModel> hdy);

/// Introspection used by persistence; unset parts are nullopt.
struct AggregativeParts {
  std::optional<MisclassificationMatrix> confusion;
  std::optional<Prevalence> train_prior;
  std::optional<EmqOptions> emq;
  std::optional<HdyModel> hdy;
};
AggregativeParts aggregative_parts(const AggregativeQuantifier& q);

}  // namespace quantx

#endif
