#ifndef QUANTX_PREVALENCE_HPP
#define QUANTX_PREVALENCE_HPP

#include <cstddef>
#include <vector>

#include "quantx/common.hpp"

namespace quantx {

/// A point on the probability simplex: non-negative entries summing to one
/// (absolute tolerance 1e-9, checked on every construction).
class Prevalence {
 public:
  static constexpr double sum_tolerance = 1e-9;

  explicit Prevalence(std::vector<double> values);

  std::size_t size() const noexcept { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }
  const std::vector<double>& values() const noexcept { return values_; }

  bool operator==(const Prevalence& other) const noexcept { return values_ == other.values_; }

 private:
  std::vector<double> values_;
};

/// Strict constructor: accepts vectors already on the simplex, silently
/// renormalizing float drift of at most 1e-6 in the total mass.
/// Throws negative_entry / zero_mass / sum_out_of_tolerance.
Prevalence make_prevalence(const std::vector<double>& values);

/// Normalizing constructor: divides any non-negative, non-zero vector by its
/// sum. Throws negative_entry / zero_mass.
Prevalence normalize_prevalence(const std::vector<double>& values);

/// Class frequencies of a label vector: entry j = count(label==j) / n.
Prevalence empirical_prevalence(const std::vector<int>& labels, int n_classes);

Prevalence uniform_prevalence(int n_classes);

}  // namespace quantx

#endif
