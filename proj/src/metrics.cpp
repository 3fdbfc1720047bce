#include "quantx/metrics.hpp"

#include <cmath>

#include "quantx/common.hpp"

namespace quantx {

double absolute_error(const Prevalence& p, const Prevalence& q) {
  if (p.size() != q.size()) fail(Errc::length_mismatch, "prevalence lengths differ");
  double sum = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) sum += std::abs(p[i] - q[i]);
  return sum / static_cast<double>(p.size());
}

double relative_absolute_error(const Prevalence& p, const Prevalence& q, double eps) {
  if (p.size() != q.size()) fail(Errc::length_mismatch, "prevalence lengths differ");
  if (!(eps > 0.0)) fail(Errc::non_positive_epsilon, "smoothing factor must be positive");
  const double l = static_cast<double>(p.size());
  const double denom = l * eps + 1.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double dp = (p[i] + eps) / denom;
    const double dq = (q[i] + eps) / denom;
    sum += std::abs(dp - dq) / dp;
  }
  return sum / l;
}

double rae_epsilon(std::size_t bag_size) {
  if (bag_size == 0) fail(Errc::empty_bag, "bag size must be positive");
  return 1.0 / (2.0 * static_cast<double>(bag_size));
}

double hellinger_distance(const std::vector<double>& h1, const std::vector<double>& h2) {
  if (h1.size() != h2.size()) fail(Errc::length_mismatch, "histogram bin counts differ");
  if (h1.empty()) fail(Errc::empty_input, "empty histograms");
  double s1 = 0.0, s2 = 0.0;
  for (std::size_t i = 0; i < h1.size(); ++i) {
    if (h1[i] < 0.0 || h2[i] < 0.0) fail(Errc::not_a_density, "negative histogram mass");
    s1 += h1[i];
    s2 += h2[i];
  }
  if (std::abs(s1 - 1.0) > 1e-6 || std::abs(s2 - 1.0) > 1e-6)
    fail(Errc::not_a_density, "histograms must sum to 1");
  double acc = 0.0;
  for (std::size_t i = 0; i < h1.size(); ++i) {
    const double d = std::sqrt(h1[i]) - std::sqrt(h2[i]);
    acc += d * d;
  }
  return std::sqrt(acc / 2.0);
}

}  // namespace quantx
