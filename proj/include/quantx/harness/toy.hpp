#ifndef QUANTX_HARNESS_TOY_HPP
#define QUANTX_HARNESS_TOY_HPP

#include "quantx/neural/train.hpp"

namespace quantx {

enum class ToyTarget { avg, median, max };
ToyTarget toy_target_from_string(const std::string& s);
std::string to_string(ToyTarget t);

/// Budget knobs for the statistic-regression experiment; the defaults match
/// the reference setup (64-bin histogram into 32/16 dense layers, vectors of
/// 100 values drawn uniformly from [0, max] with max itself uniform in [0,1]).
struct ToyOptions {
  int values_per_vector = 100;
  int train_vectors = 8000;
  int val_vectors = 1000;
  int test_vectors = 1000;
  int bins = 64;
  int batch_size = 32;
  double learning_rate = 1e-3;
  int patience = 10;
  int max_epochs = 80;
};

struct ToyResult {
  double test_ae = 0.0;  // mean absolute error of the predicted statistic
  int epochs_run = 0;
};

/// Trains a single-histogram network to regress the chosen statistic of a
/// random vector and reports the held-out mean absolute error. The median of
/// an even-length vector is the lower median throughout.
ToyResult toy_histogram_experiment(ToyTarget target, std::uint64_t seed,
                                   const ToyOptions& opts = {});

}  // namespace quantx

#endif
