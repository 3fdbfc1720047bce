#ifndef QUANTX_NEURAL_NETWORK_HPP
#define QUANTX_NEURAL_NETWORK_HPP

#include "quantx/neural/histogram.hpp"
#include "quantx/prevalence.hpp"

namespace quantx {

struct InvariantSpec {
  bool is_histogram = true;
  HistVariant variant = HistVariant::hard;
  int bins = 32;
  PoolKind pool = PoolKind::avg;
  double gamma = 100.0;  // sigmoid-variant gate sharpness
};

/// Architecture of a bag-level network: a per-instance feature stack, one
/// permutation-invariant layer, and a quantification head.
struct NetworkConfig {
  int input_dim = 0;
  std::vector<int> feature_layers;  // hidden widths; the last entry is z (empty = identity map)
  InvariantSpec invariant;
  std::vector<int> head_hidden;
  int n_outputs = 2;
  bool softmax_output = true;
  bool squash_features = true;  // logistic map ahead of histogram layers
  double feature_dropout = 0.0;
  double head_dropout = 0.0;
  double leaky_slope = 0.01;
};

/// A feed-forward bag quantifier. Training mutates the layer caches, so a
/// network being trained is single-threaded; `infer`/`quantify` never touch
/// shared state and are safe to call concurrently on a frozen model.
class QuantNetwork {
 public:
  QuantNetwork(NetworkConfig config, std::uint64_t seed);

  /// Training-mode forward over one bag: dropout active, caches retained.
  Matrix forward(const Matrix& instances, Rng& dropout_rng);
  /// Backward for the most recent forward; accumulates parameter gradients
  /// and returns the gradient with respect to the network input.
  Matrix backward(const Matrix& grad_out);

  /// Inference-mode forward: deterministic, cache-free.
  Matrix infer(const Matrix& instances) const;

  Prevalence quantify(const Bag& bag) const;

  std::vector<Param*> parameters();
  void zero_grads();
  void constrain();
  double kink_gap() const;

  const NetworkConfig& config() const noexcept { return config_; }
  std::size_t n_parameters() const;

  /// Flattened copies of every parameter matrix, in layer order.
  std::vector<std::vector<double>> export_parameters() const;
  void import_parameters(const std::vector<std::vector<double>>& values);

 private:
  NetworkConfig config_;
  std::vector<std::unique_ptr<Layer>> layers_;
  std::vector<Param*> params_;
};

/// Forward pass per the module contract: softmax output as a Prevalence.
/// Training mode keeps dropout active and uses the caching path.
Prevalence network_forward(QuantNetwork& net, const Bag& bag, bool training_mode,
                           Rng& dropout_rng);

}  // namespace quantx

#endif
