#ifndef QUANTX_METRICS_HPP
#define QUANTX_METRICS_HPP

#include <cstddef>
#include <vector>

#include "quantx/prevalence.hpp"

namespace quantx {

/// Mean absolute per-class deviation between two prevalence vectors.
double absolute_error(const Prevalence& p, const Prevalence& q);

/// Smoothed relative absolute error. Both arguments are smoothed with
/// delta(x) = (x + eps) / (l*eps + 1) and the denominator uses the smoothed
/// first argument, so the measure is not symmetric.
double relative_absolute_error(const Prevalence& p, const Prevalence& q, double eps);

/// Default smoothing factor for a bag of the given size: 1 / (2 * bag_size).
double rae_epsilon(std::size_t bag_size);

/// Hellinger distance between two discrete densities:
/// (1/sqrt(2)) * ||sqrt(h1) - sqrt(h2)||_2, in [0, 1].
double hellinger_distance(const std::vector<double>& h1, const std::vector<double>& h2);

}  // namespace quantx

#endif
