#include "quantx/prevalence.hpp"

#include <cmath>
#include <numeric>

namespace quantx {

Prevalence::Prevalence(std::vector<double> values) : values_(std::move(values)) {
  if (values_.empty()) fail(Errc::empty_input, "prevalence must have at least one class");
  double sum = 0.0;
  for (double v : values_) {
    if (!(v >= 0.0 && v <= 1.0))
      fail(Errc::negative_entry, "prevalence entry outside [0,1]: " + std::to_string(v));
    sum += v;
  }
  if (std::abs(sum - 1.0) > sum_tolerance)
    fail(Errc::sum_out_of_tolerance, "prevalence sums to " + std::to_string(sum));
}

static void check_entries(const std::vector<double>& values) {
  if (values.empty()) fail(Errc::empty_input, "empty prevalence vector");
  for (double v : values) {
    if (!std::isfinite(v)) fail(Errc::negative_entry, "non-finite prevalence entry");
    if (v < 0.0) fail(Errc::negative_entry, "negative prevalence entry: " + std::to_string(v));
  }
}

Prevalence make_prevalence(const std::vector<double>& values) {
  check_entries(values);
  double sum = std::accumulate(values.begin(), values.end(), 0.0);
  if (sum == 0.0) fail(Errc::zero_mass, "prevalence vector has zero mass");
  if (std::abs(sum - 1.0) > 1e-6)
    fail(Errc::sum_out_of_tolerance,
         "prevalence mass " + std::to_string(sum) + " deviates from 1 by more than 1e-6");
  std::vector<double> out(values);
  for (double& v : out) v /= sum;
  return Prevalence(std::move(out));
}

Prevalence normalize_prevalence(const std::vector<double>& values) {
  check_entries(values);
  double sum = std::accumulate(values.begin(), values.end(), 0.0);
  if (sum == 0.0) fail(Errc::zero_mass, "prevalence vector has zero mass");
  std::vector<double> out(values);
  for (double& v : out) v /= sum;
  return Prevalence(std::move(out));
}

Prevalence empirical_prevalence(const std::vector<int>& labels, int n_classes) {
  if (labels.empty()) fail(Errc::empty_input, "cannot compute prevalence of an empty label set");
  if (n_classes < 1) fail(Errc::bad_spec, "class count must be positive");
  std::vector<double> counts(static_cast<std::size_t>(n_classes), 0.0);
  for (int y : labels) {
    if (y < 0 || y >= n_classes)
      fail(Errc::bad_spec, "label " + std::to_string(y) + " outside [0," + std::to_string(n_classes) + ")");
    counts[static_cast<std::size_t>(y)] += 1.0;
  }
  const double n = static_cast<double>(labels.size());
  for (double& c : counts) c /= n;
  return Prevalence(std::move(counts));
}

Prevalence uniform_prevalence(int n_classes) {
  if (n_classes < 1) fail(Errc::bad_spec, "class count must be positive");
  return Prevalence(std::vector<double>(static_cast<std::size_t>(n_classes),
                                        1.0 / static_cast<double>(n_classes)));
}

}  // namespace quantx
