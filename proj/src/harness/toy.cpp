#include "quantx/harness/toy.hpp"

#include <algorithm>
#include <cmath>

namespace quantx {

ToyTarget toy_target_from_string(const std::string& s) {
  if (s == "avg") return ToyTarget::avg;
  if (s == "median") return ToyTarget::median;
  if (s == "max") return ToyTarget::max;
  fail(Errc::bad_config, "unknown toy target: " + s);
}

std::string to_string(ToyTarget t) {
  switch (t) {
    case ToyTarget::avg: return "avg";
    case ToyTarget::median: return "median";
    case ToyTarget::max: return "max";
  }
  return "?";
}

namespace {

struct ToySample {
  Matrix values;  // n x 1
  double target = 0.0;
};

double statistic(const Matrix& column, ToyTarget target) {
  switch (target) {
    case ToyTarget::avg:
      return column.col(0).mean();
    case ToyTarget::max:
      return column.col(0).maxCoeff();
    case ToyTarget::median: {
      std::vector<double> v(column.col(0).data(), column.col(0).data() + column.rows());
      const std::size_t pick = (v.size() - 1) / 2;  // lower median
      std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(pick), v.end());
      return v[pick];
    }
  }
  return 0.0;
}

std::vector<ToySample> draw_samples(int count, int length, ToyTarget target, Rng& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<ToySample> out(static_cast<std::size_t>(count));
  for (ToySample& s : out) {
    const double top = unit(rng);
    s.values = Matrix(length, 1);
    for (int i = 0; i < length; ++i) s.values(i, 0) = top * unit(rng);
    s.target = statistic(s.values, target);
  }
  return out;
}

double mean_abs_error(QuantNetwork& net, const std::vector<ToySample>& samples) {
  double total = 0.0;
  for (const ToySample& s : samples) total += std::abs(net.infer(s.values)(0, 0) - s.target);
  return total / static_cast<double>(samples.size());
}

}  // namespace

ToyResult toy_histogram_experiment(ToyTarget target, std::uint64_t seed, const ToyOptions& opts) {
  NetworkConfig cfg;
  cfg.input_dim = 1;
  cfg.invariant.is_histogram = true;
  cfg.invariant.variant = HistVariant::hard;
  cfg.invariant.bins = opts.bins;
  cfg.head_hidden = {32, 16};
  cfg.n_outputs = 1;
  cfg.softmax_output = false;
  cfg.squash_features = false;  // inputs already live in [0,1]
  QuantNetwork net(cfg, seed);

  Rng data_rng = make_rng(seed, 0x70f);
  auto train = draw_samples(opts.train_vectors, opts.values_per_vector, target, data_rng);
  auto val = draw_samples(opts.val_vectors, opts.values_per_vector, target, data_rng);
  auto test = draw_samples(opts.test_vectors, opts.values_per_vector, target, data_rng);

  AdamWConfig opt_cfg;
  opt_cfg.learning_rate = opts.learning_rate;
  AdamW optimizer(opt_cfg);
  Rng order_rng = make_rng(seed, 0x0dde);
  Rng drop_rng = make_rng(seed, 0xd0);

  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  ToyResult result;
  double best_val = std::numeric_limits<double>::infinity();
  std::vector<std::vector<double>> best_params = net.export_parameters();
  int no_improve = 0;

  for (int epoch = 1; epoch <= opts.max_epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), order_rng);
    for (std::size_t start = 0; start < order.size();
         start += static_cast<std::size_t>(opts.batch_size)) {
      const std::size_t end =
          std::min(order.size(), start + static_cast<std::size_t>(opts.batch_size));
      net.zero_grads();
      const double inv_b = 1.0 / static_cast<double>(end - start);
      for (std::size_t i = start; i < end; ++i) {
        const ToySample& s = train[order[i]];
        Matrix out = net.forward(s.values, drop_rng);
        const double diff = out(0, 0) - s.target;
        Matrix grad(1, 1);
        grad(0, 0) = (diff > 0.0 ? 1.0 : (diff < 0.0 ? -1.0 : 0.0)) * inv_b;
        net.backward(grad);
      }
      optimizer.step(net.parameters());
      net.constrain();
    }

    const double val_ae = mean_abs_error(net, val);
    result.epochs_run = epoch;
    if (val_ae < best_val) {
      best_val = val_ae;
      best_params = net.export_parameters();
      no_improve = 0;
    } else {
      ++no_improve;
    }
    if (no_improve >= opts.patience) break;
  }

  net.import_parameters(best_params);
  result.test_ae = mean_abs_error(net, test);
  return result;
}

}  // namespace quantx
