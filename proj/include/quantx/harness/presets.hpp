#ifndef QUANTX_HARNESS_PRESETS_HPP
#define QUANTX_HARNESS_PRESETS_HPP

#include "quantx/neural/train.hpp"

namespace quantx {

struct NeuralMethodConfig {
  NetworkConfig net;  // input_dim / n_outputs are filled when data is seen
  TrainConfig train;
};

/// Named hyperparameter bundles:
///   lequa-t1a  binary 300-d vector task (lr 1e-4, 32 bins, batch 20, R 0.9,
///              z 300, head 2048x3, dropout 0.5)
///   lequa-t1b  28-class 300-d vector task (lr 5e-4, 64 bins, batch 500,
///              R 0.5, z 512, head 4096, dropout 0.5)
///   desk       small synthetic benchmarks at laptop scale
NeuralMethodConfig neural_preset(const std::string& name);

std::vector<std::string> neural_preset_names();

}  // namespace quantx

#endif
