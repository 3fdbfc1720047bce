#include "quantx/harness/presets.hpp"

namespace quantx {

NeuralMethodConfig neural_preset(const std::string& name) {
  NeuralMethodConfig cfg;
  cfg.net.invariant.is_histogram = true;
  cfg.net.invariant.variant = HistVariant::hard;
  cfg.net.softmax_output = true;
  cfg.net.squash_features = true;

  if (name == "lequa-t1a") {
    cfg.net.feature_layers = {512, 300};
    cfg.net.invariant.bins = 32;
    cfg.net.head_hidden = {2048, 2048, 2048};
    cfg.net.feature_dropout = 0.5;
    cfg.net.head_dropout = 0.5;
    cfg.train.loss = LossKind::rae;
    cfg.train.learning_rate = 1e-4;
    cfg.train.weight_decay = 1e-5;
    cfg.train.batch_size = 20;
    cfg.train.real_proportion = 0.9;
    cfg.train.patience = 20;
    cfg.train.max_epochs = 500;
    return cfg;
  }
  if (name == "lequa-t1b") {
    cfg.net.feature_layers = {1024, 512};
    cfg.net.invariant.bins = 64;
    cfg.net.head_hidden = {4096};
    cfg.net.feature_dropout = 0.5;
    cfg.net.head_dropout = 0.5;
    cfg.train.loss = LossKind::rae;
    cfg.train.learning_rate = 5e-4;
    cfg.train.weight_decay = 1e-5;
    cfg.train.batch_size = 500;
    cfg.train.real_proportion = 0.5;
    cfg.train.patience = 20;
    cfg.train.max_epochs = 500;
    return cfg;
  }
  if (name == "desk") {
    cfg.net.feature_layers = {32, 8};
    cfg.net.invariant.bins = 32;
    cfg.net.head_hidden = {64};
    cfg.net.feature_dropout = 0.0;
    cfg.net.head_dropout = 0.1;
    cfg.train.loss = LossKind::ae;
    cfg.train.learning_rate = 1e-3;
    cfg.train.weight_decay = 1e-5;
    cfg.train.batch_size = 20;
    cfg.train.real_proportion = 0.5;
    cfg.train.patience = 20;
    cfg.train.max_epochs = 150;
    return cfg;
  }
  fail(Errc::bad_config, "unknown preset: " + name);
}

std::vector<std::string> neural_preset_names() { return {"lequa-t1a", "lequa-t1b", "desk"}; }

}  // namespace quantx
