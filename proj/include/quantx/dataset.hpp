#ifndef QUANTX_DATASET_HPP
#define QUANTX_DATASET_HPP

#include <Eigen/Core>
#include <vector>

#include "quantx/common.hpp"
#include "quantx/prevalence.hpp"

namespace quantx {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// An unordered multiset of feature vectors, stored one instance per row.
class Bag {
 public:
  explicit Bag(Matrix instances);

  Eigen::Index size() const noexcept { return instances_.rows(); }
  Eigen::Index dim() const noexcept { return instances_.cols(); }
  const Matrix& instances() const noexcept { return instances_; }

 private:
  Matrix instances_;
};

/// Instances with per-instance class labels ("type D" training data).
class LabeledDataset {
 public:
  LabeledDataset(Matrix instances, std::vector<int> labels, int n_classes);

  Eigen::Index size() const noexcept { return instances_.rows(); }
  Eigen::Index dim() const noexcept { return instances_.cols(); }
  int n_classes() const noexcept { return n_classes_; }
  const Matrix& instances() const noexcept { return instances_; }
  const std::vector<int>& labels() const noexcept { return labels_; }

  Prevalence prevalence() const { return empirical_prevalence(labels_, n_classes_); }

  /// Row indices of every instance of the given class.
  std::vector<Eigen::Index> class_indices(int cls) const;

  LabeledDataset subset(const std::vector<Eigen::Index>& rows) const;

 private:
  Matrix instances_;
  std::vector<int> labels_;
  int n_classes_;
};

/// Bags with per-bag prevalence labels ("type D'" training data).
class BagDataset {
 public:
  BagDataset(std::vector<Bag> bags, std::vector<Prevalence> prevalences, int n_classes);

  std::size_t size() const noexcept { return bags_.size(); }
  int n_classes() const noexcept { return n_classes_; }
  const std::vector<Bag>& bags() const noexcept { return bags_; }
  const std::vector<Prevalence>& prevalences() const noexcept { return prevalences_; }
  const Bag& bag(std::size_t i) const { return bags_[i]; }
  const Prevalence& prevalence(std::size_t i) const { return prevalences_[i]; }

 private:
  std::vector<Bag> bags_;
  std::vector<Prevalence> prevalences_;
  int n_classes_;
};

}  // namespace quantx

#endif
