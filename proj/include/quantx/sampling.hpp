#ifndef QUANTX_SAMPLING_HPP
#define QUANTX_SAMPLING_HPP

#include <cstdint>
#include <utility>
#include <vector>

#include "quantx/common.hpp"
#include "quantx/dataset.hpp"

namespace quantx {

struct AppConfig {
  int bag_size = 250;
  int bag_count = 100;
  std::uint64_t seed = 0;
};

struct MixerConfig {
  double real_proportion = 0.5;  // fraction of each batch drawn verbatim from the source
  std::uint64_t seed = 0;
};

/// Uniform draw from the probability simplex: sorts l-1 uniform variates,
/// brackets them with 0 and 1 and returns successive differences.
Prevalence kraemer_sample(int n_classes, Rng& rng);

/// Deterministic core of the Kraemer draw, exposed for testing: `uniforms`
/// holds the l-1 raw variates.
Prevalence kraemer_from_uniforms(int n_classes, std::vector<double> uniforms);

/// Largest-remainder apportionment of `total` units proportional to `shares`.
/// Counts always sum to `total`; remainder ties break toward lower index.
std::vector<int> apportion_counts(int total, const Prevalence& shares);

/// Artificial-prevalence protocol: each bag draws a prevalence uniformly from
/// the simplex, apportions the bag size across classes and samples instances
/// per class with replacement. The stored bag label is the achieved counts
/// divided by the bag size, never the raw simplex draw.
BagDataset app_generate(const LabeledDataset& dataset, const AppConfig& cfg);

/// One training batch for bag-level learners: round(R * batch_size) bags are
/// emitted verbatim from the source, the rest are unions of random halves of
/// two distinct source bags labeled by the size-weighted average of the parent
/// labels (silver labels).
std::vector<std::pair<Bag, Prevalence>> bag_mixer_batch(const BagDataset& source,
                                                        const MixerConfig& cfg, int batch_size,
                                                        Rng& rng);

/// One class of a synthetic Gaussian dataset: diagonal covariance only.
struct GaussianClassSpec {
  std::vector<double> mean;
  std::vector<double> sigma;  // per-dimension standard deviation, broadcast if length 1
  int count = 0;
};

LabeledDataset synth_dataset(const std::vector<GaussianClassSpec>& classes, std::uint64_t seed);

}  // namespace quantx

#endif
