#include "quantx/dataset.hpp"

#include <cmath>

namespace quantx {

Bag::Bag(Matrix instances) : instances_(std::move(instances)) {
  if (instances_.rows() < 1) fail(Errc::empty_bag, "a bag needs at least one instance");
  if (!instances_.allFinite()) fail(Errc::bad_spec, "bag contains non-finite features");
}

LabeledDataset::LabeledDataset(Matrix instances, std::vector<int> labels, int n_classes)
    : instances_(std::move(instances)), labels_(std::move(labels)), n_classes_(n_classes) {
  if (instances_.rows() == 0) fail(Errc::empty_dataset, "dataset has no instances");
  if (static_cast<std::size_t>(instances_.rows()) != labels_.size())
    fail(Errc::length_mismatch, "instance count does not match label count");
  if (n_classes_ < 1) fail(Errc::bad_spec, "class count must be positive");
  if (!instances_.allFinite()) fail(Errc::bad_spec, "dataset contains non-finite features");
  for (int y : labels_)
    if (y < 0 || y >= n_classes_)
      fail(Errc::bad_spec, "label " + std::to_string(y) + " outside [0," + std::to_string(n_classes_) + ")");
}

std::vector<Eigen::Index> LabeledDataset::class_indices(int cls) const {
  std::vector<Eigen::Index> out;
  for (std::size_t i = 0; i < labels_.size(); ++i)
    if (labels_[i] == cls) out.push_back(static_cast<Eigen::Index>(i));
  return out;
}

LabeledDataset LabeledDataset::subset(const std::vector<Eigen::Index>& rows) const {
  Matrix x(static_cast<Eigen::Index>(rows.size()), instances_.cols());
  std::vector<int> y(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    x.row(static_cast<Eigen::Index>(i)) = instances_.row(rows[i]);
    y[i] = labels_[static_cast<std::size_t>(rows[i])];
  }
  return LabeledDataset(std::move(x), std::move(y), n_classes_);
}

BagDataset::BagDataset(std::vector<Bag> bags, std::vector<Prevalence> prevalences, int n_classes)
    : bags_(std::move(bags)), prevalences_(std::move(prevalences)), n_classes_(n_classes) {
  if (bags_.size() != prevalences_.size())
    fail(Errc::length_mismatch, "bag count does not match prevalence count");
  if (n_classes_ < 1) fail(Errc::bad_spec, "class count must be positive");
  for (const Prevalence& p : prevalences_)
    if (static_cast<int>(p.size()) != n_classes_)
      fail(Errc::length_mismatch, "prevalence length does not match class count");
}

}  // namespace quantx
