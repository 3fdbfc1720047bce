#include "quantx/neural/train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace quantx {

LossKind loss_kind_from_string(const std::string& s) {
  if (s == "ae") return LossKind::ae;
  if (s == "rae") return LossKind::rae;
  fail(Errc::bad_config, "unknown loss: " + s);
}

std::string to_string(LossKind k) { return k == LossKind::ae ? "ae" : "rae"; }

double pair_loss(const Eigen::RowVectorXd& pred, const Prevalence& gold, LossKind kind,
                 double eps) {
  const Eigen::Index l = pred.size();
  if (static_cast<std::size_t>(l) != gold.size())
    fail(Errc::length_mismatch, "prediction length does not match gold length");
  double sum = 0.0;
  if (kind == LossKind::ae) {
    for (Eigen::Index j = 0; j < l; ++j) sum += std::abs(pred(j) - gold[static_cast<std::size_t>(j)]);
  } else {
    if (!(eps > 0.0)) fail(Errc::non_positive_epsilon, "smoothing factor must be positive");
    const double denom = static_cast<double>(l) * eps + 1.0;
    for (Eigen::Index j = 0; j < l; ++j) {
      const double dg = (gold[static_cast<std::size_t>(j)] + eps) / denom;
      const double dp = (pred(j) + eps) / denom;
      sum += std::abs(dg - dp) / dg;
    }
  }
  return sum / static_cast<double>(l);
}

Eigen::RowVectorXd pair_loss_grad(const Eigen::RowVectorXd& pred, const Prevalence& gold,
                                  LossKind kind, double eps) {
  const Eigen::Index l = pred.size();
  Eigen::RowVectorXd grad(l);
  const double inv_l = 1.0 / static_cast<double>(l);
  if (kind == LossKind::ae) {
    for (Eigen::Index j = 0; j < l; ++j) {
      const double d = pred(j) - gold[static_cast<std::size_t>(j)];
      grad(j) = d > 0.0 ? inv_l : (d < 0.0 ? -inv_l : 0.0);
    }
  } else {
    const double denom = static_cast<double>(l) * eps + 1.0;
    for (Eigen::Index j = 0; j < l; ++j) {
      const double dg = (gold[static_cast<std::size_t>(j)] + eps) / denom;
      const double dp = (pred(j) + eps) / denom;
      const double s = dp > dg ? 1.0 : (dp < dg ? -1.0 : 0.0);
      grad(j) = inv_l * s / (dg * denom);
    }
  }
  return grad;
}

double compute_loss(const std::vector<Prevalence>& predicted, const std::vector<Prevalence>& gold,
                    LossKind kind, double eps) {
  if (predicted.size() != gold.size())
    fail(Errc::length_mismatch, "prediction batch does not match gold batch");
  if (predicted.empty()) fail(Errc::empty_input, "empty loss batch");
  double total = 0.0;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    Eigen::RowVectorXd row(static_cast<Eigen::Index>(predicted[i].size()));
    for (std::size_t j = 0; j < predicted[i].size(); ++j)
      row(static_cast<Eigen::Index>(j)) = predicted[i][j];
    total += pair_loss(row, gold[i], kind, eps);
  }
  return total / static_cast<double>(predicted.size());
}

double backward_and_step(QuantNetwork& net, const std::vector<std::pair<Bag, Prevalence>>& batch,
                         LossKind kind, AdamW& optimizer, Rng& dropout_rng) {
  if (batch.empty()) fail(Errc::empty_input, "empty training batch");
  net.zero_grads();
  const double inv_b = 1.0 / static_cast<double>(batch.size());
  double total = 0.0;
  for (const auto& [bag, gold] : batch) {
    Matrix out = net.forward(bag.instances(), dropout_rng);
    const double eps = 1.0 / (2.0 * static_cast<double>(bag.size()));
    total += pair_loss(out.row(0), gold, kind, eps);
    net.backward(pair_loss_grad(out.row(0), gold, kind, eps) * inv_b);
  }
  const double loss = total * inv_b;
  if (!std::isfinite(loss)) fail(Errc::non_finite_loss, "training loss is not finite");
  optimizer.step(net.parameters());
  net.constrain();
  return loss;
}

TrainHistory train_network(QuantNetwork& net, const BagDataset& bags, const TrainConfig& cfg) {
  if (bags.size() == 0) fail(Errc::empty_dataset, "no training bags");
  if (cfg.batch_size < 1 || cfg.max_epochs < 1 || cfg.patience < 0 ||
      cfg.validation_fraction < 0.0 || cfg.validation_fraction >= 1.0)
    fail(Errc::bad_config, "invalid training configuration");

  // train/validation split of the bag collection
  std::vector<std::size_t> order(bags.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng split_rng = make_rng(cfg.seed, 1);
  std::shuffle(order.begin(), order.end(), split_rng);
  std::size_t n_val =
      bags.size() == 1
          ? 0
          : std::clamp<std::size_t>(
                static_cast<std::size_t>(std::lround(cfg.validation_fraction *
                                                     static_cast<double>(bags.size()))),
                1, bags.size() - 1);
  std::vector<std::size_t> val_idx(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_val));
  std::vector<std::size_t> train_idx(order.begin() + static_cast<std::ptrdiff_t>(n_val), order.end());
  if (val_idx.empty()) val_idx = train_idx;  // single-bag corner: validate on the same bag

  std::vector<Bag> train_bags;
  std::vector<Prevalence> train_prevs;
  for (std::size_t i : train_idx) {
    train_bags.push_back(bags.bag(i));
    train_prevs.push_back(bags.prevalence(i));
  }
  BagDataset train_set(std::move(train_bags), std::move(train_prevs), bags.n_classes());

  MixerConfig mixer;
  mixer.real_proportion = cfg.real_proportion;
  mixer.seed = cfg.seed;
  Rng mixer_rng = make_rng(cfg.seed, 2);
  Rng dropout_rng = make_rng(cfg.seed, 3);

  AdamWConfig opt_cfg;
  opt_cfg.learning_rate = cfg.learning_rate;
  opt_cfg.weight_decay = cfg.weight_decay;
  AdamW optimizer(opt_cfg);

  const int steps_per_epoch = static_cast<int>(
      (train_set.size() + static_cast<std::size_t>(cfg.batch_size) - 1) /
      static_cast<std::size_t>(cfg.batch_size));

  auto validation_loss = [&]() {
    double total = 0.0;
    for (std::size_t i : val_idx) {
      Matrix out = net.infer(bags.bag(i).instances());
      const double eps = 1.0 / (2.0 * static_cast<double>(bags.bag(i).size()));
      total += pair_loss(out.row(0), bags.prevalence(i), cfg.loss, eps);
    }
    return total / static_cast<double>(val_idx.size());
  };

  TrainHistory history;
  history.best_val = std::numeric_limits<double>::infinity();
  std::vector<std::vector<double>> best_params = net.export_parameters();
  int no_improve = 0;

  for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    double epoch_loss = 0.0;
    for (int s = 0; s < steps_per_epoch; ++s) {
      auto batch = bag_mixer_batch(train_set, mixer, cfg.batch_size, mixer_rng);
      epoch_loss += backward_and_step(net, batch, cfg.loss, optimizer, dropout_rng);
    }
    history.train_loss.push_back(epoch_loss / static_cast<double>(steps_per_epoch));

    const double val = validation_loss();
    history.val_loss.push_back(val);
    history.epochs_run = epoch;
    if (val < history.best_val) {
      history.best_val = val;
      history.best_epoch = epoch;
      best_params = net.export_parameters();
      no_improve = 0;
    } else {
      ++no_improve;
    }
    if (no_improve >= cfg.patience) break;
  }

  net.import_parameters(best_params);
  return history;
}

GradCheckReport gradient_check(QuantNetwork& net, const Bag& bag, const Prevalence& gold,
                               LossKind kind, bool check_inputs, double fd_step, double kink_tol) {
  if (net.config().feature_dropout > 0.0 || net.config().head_dropout > 0.0)
    fail(Errc::bad_config, "gradient checks need a dropout-free network");
  if (net.config().invariant.is_histogram && net.config().invariant.variant == HistVariant::hard)
    fail(Errc::bad_config,
         "the hard histogram uses a surrogate gradient; finite differences do not apply");

  const double eps = 1.0 / (2.0 * static_cast<double>(bag.size()));
  Rng unused = make_rng(0);
  net.zero_grads();
  Matrix out = net.forward(bag.instances(), unused);
  Matrix input_grad = net.backward(pair_loss_grad(out.row(0), gold, kind, eps));

  GradCheckReport report;
  // loss kinks: the absolute value is not differentiable where the smoothed
  // prediction meets the gold value
  for (Eigen::Index j = 0; j < out.cols(); ++j)
    if (std::abs(out(0, j) - gold[static_cast<std::size_t>(j)]) < kink_tol * 0.1) {
      report.skipped = true;
      return report;
    }
  if (net.kink_gap() < kink_tol) {
    report.skipped = true;
    return report;
  }

  auto fd_loss = [&](const Matrix& instances) {
    Matrix o = net.infer(instances);
    return pair_loss(o.row(0), gold, kind, eps);
  };

  for (Param* p : net.parameters()) {
    for (Eigen::Index i = 0; i < p->value.size(); ++i) {
      double& theta = p->value.data()[i];
      const double saved = theta;
      theta = saved + fd_step;
      const double up = fd_loss(bag.instances());
      theta = saved - fd_step;
      const double down = fd_loss(bag.instances());
      theta = saved;
      const double fd = (up - down) / (2.0 * fd_step);
      const double analytic = p->grad.data()[i];
      const double dev = std::abs(analytic - fd) / std::max({std::abs(analytic), std::abs(fd), 1e-4});
      report.max_rel_dev = std::max(report.max_rel_dev, dev);
      ++report.checked;
    }
  }

  if (check_inputs) {
    Matrix instances = bag.instances();
    for (Eigen::Index i = 0; i < instances.size(); ++i) {
      double& x = instances.data()[i];
      const double saved = x;
      x = saved + fd_step;
      const double up = fd_loss(instances);
      x = saved - fd_step;
      const double down = fd_loss(instances);
      x = saved;
      const double fd = (up - down) / (2.0 * fd_step);
      const double analytic = input_grad.data()[i];
      const double dev = std::abs(analytic - fd) / std::max({std::abs(analytic), std::abs(fd), 1e-4});
      report.max_rel_dev = std::max(report.max_rel_dev, dev);
      ++report.checked;
    }
  }
  return report;
}

}  // namespace quantx
