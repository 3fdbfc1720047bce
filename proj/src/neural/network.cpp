#include "quantx/neural/network.hpp"

namespace quantx {

QuantNetwork::QuantNetwork(NetworkConfig config, std::uint64_t seed) : config_(std::move(config)) {
  if (config_.input_dim < 1) fail(Errc::bad_spec, "network input dimension must be positive");
  if (config_.n_outputs < 1) fail(Errc::bad_spec, "network output count must be positive");

  Rng init = make_rng(seed, 0x11e7);
  int width = config_.input_dim;
  for (int h : config_.feature_layers) {
    layers_.push_back(std::make_unique<DenseLayer>(width, h, init));
    layers_.push_back(std::make_unique<LeakyReluLayer>(config_.leaky_slope));
    if (config_.feature_dropout > 0.0)
      layers_.push_back(std::make_unique<DropoutLayer>(config_.feature_dropout));
    width = h;
  }

  if (config_.invariant.is_histogram) {
    if (config_.squash_features) layers_.push_back(std::make_unique<SquashLayer>());
    layers_.push_back(std::make_unique<HistogramLayer>(config_.invariant.variant,
                                                       config_.invariant.bins, width,
                                                       config_.invariant.gamma));
    width *= config_.invariant.bins;
  } else {
    layers_.push_back(std::make_unique<PoolingLayer>(config_.invariant.pool));
  }

  for (int h : config_.head_hidden) {
    layers_.push_back(std::make_unique<DenseLayer>(width, h, init));
    layers_.push_back(std::make_unique<LeakyReluLayer>(config_.leaky_slope));
    if (config_.head_dropout > 0.0)
      layers_.push_back(std::make_unique<DropoutLayer>(config_.head_dropout));
    width = h;
  }
  layers_.push_back(std::make_unique<DenseLayer>(width, config_.n_outputs, init));
  if (config_.softmax_output) layers_.push_back(std::make_unique<SoftmaxLayer>());

  for (auto& layer : layers_)
    for (Param* p : layer->params()) params_.push_back(p);
}

Matrix QuantNetwork::forward(const Matrix& instances, Rng& dropout_rng) {
  Matrix x = instances;
  for (auto& layer : layers_) x = layer->forward(x, dropout_rng);
  return x;
}

Matrix QuantNetwork::backward(const Matrix& grad_out) {
  Matrix g = grad_out;
  for (auto it = layers_.rbegin(); it != layers_.rend(); ++it) g = (*it)->backward(g);
  return g;
}

Matrix QuantNetwork::infer(const Matrix& instances) const {
  Matrix x = instances;
  for (const auto& layer : layers_) x = layer->infer(x);
  return x;
}

Prevalence QuantNetwork::quantify(const Bag& bag) const {
  if (!config_.softmax_output)
    fail(Errc::bad_config, "quantify requires a softmax output head");
  Matrix out = infer(bag.instances());
  std::vector<double> values(out.data(), out.data() + out.size());
  return normalize_prevalence(values);
}

std::vector<Param*> QuantNetwork::parameters() { return params_; }

void QuantNetwork::zero_grads() {
  for (Param* p : params_) p->grad.setZero();
}

void QuantNetwork::constrain() {
  for (auto& layer : layers_) layer->constrain();
}

double QuantNetwork::kink_gap() const {
  double gap = std::numeric_limits<double>::infinity();
  for (const auto& layer : layers_) gap = std::min(gap, layer->kink_gap());
  return gap;
}

std::size_t QuantNetwork::n_parameters() const {
  std::size_t total = 0;
  for (const Param* p : params_) total += static_cast<std::size_t>(p->value.size());
  return total;
}

std::vector<std::vector<double>> QuantNetwork::export_parameters() const {
  std::vector<std::vector<double>> out;
  for (const Param* p : params_)
    out.emplace_back(p->value.data(), p->value.data() + p->value.size());
  return out;
}

void QuantNetwork::import_parameters(const std::vector<std::vector<double>>& values) {
  if (values.size() != params_.size())
    fail(Errc::bad_config, "parameter bundle does not match the architecture");
  for (std::size_t i = 0; i < values.size(); ++i) {
    Param* p = params_[i];
    if (values[i].size() != static_cast<std::size_t>(p->value.size()))
      fail(Errc::bad_config, "parameter " + std::to_string(i) + " has the wrong size");
    std::copy(values[i].begin(), values[i].end(), p->value.data());
  }
}

Prevalence network_forward(QuantNetwork& net, const Bag& bag, bool training_mode,
                           Rng& dropout_rng) {
  if (!training_mode) return net.quantify(bag);
  Matrix out = net.forward(bag.instances(), dropout_rng);
  std::vector<double> values(out.data(), out.data() + out.size());
  return normalize_prevalence(values);
}

}  // namespace quantx
