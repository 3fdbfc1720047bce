#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "doctest.h"
#include "quantx/neural/train.hpp"

using namespace quantx;

namespace {

Rng dummy_rng() { return make_rng(0); }

Matrix permuted_rows(const Matrix& x, Rng& rng) {
  std::vector<Eigen::Index> order(static_cast<std::size_t>(x.rows()));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::shuffle(order.begin(), order.end(), rng);
  Matrix out(x.rows(), x.cols());
  for (Eigen::Index i = 0; i < x.rows(); ++i) out.row(i) = x.row(order[static_cast<std::size_t>(i)]);
  return out;
}

NetworkConfig small_net(bool histogram, HistVariant variant, PoolKind pool, int input_dim = 3) {
  NetworkConfig cfg;
  cfg.input_dim = input_dim;
  cfg.feature_layers = {5, 3};
  cfg.invariant.is_histogram = histogram;
  cfg.invariant.variant = variant;
  cfg.invariant.bins = 4;
  cfg.invariant.pool = pool;
  cfg.head_hidden = {6};
  cfg.n_outputs = 2;
  return cfg;
}

}  // namespace

TEST_CASE("hard histogram hand values") {
  Rng rng = dummy_rng();
  HistogramLayer layer(HistVariant::hard, 1, 1);
  layer.params()[0]->value(0, 0) = 0.5;  // center
  layer.params()[1]->value(0, 0) = 0.2;  // half-width

  Matrix x(3, 1);
  x << 0.1, 0.5, 0.9;
  Matrix out = layer.forward(x, rng);
  CHECK(out(0, 0) == doctest::Approx(1.0 / 3).epsilon(1e-15));

  layer.params()[1]->value(0, 0) = 0.1;
  Matrix v(1, 1);
  v << 0.7;
  CHECK(layer.forward(v, rng)(0, 0) == 0.0);  // 1.01^(-0.1) < 1
}

TEST_CASE("values at the bin center count fully") {
  Rng rng = dummy_rng();
  for (HistVariant v : {HistVariant::hard, HistVariant::soft, HistVariant::softrbf}) {
    HistogramLayer layer(v, 4, 2);
    // place every instance at the center of bin 1 of both features
    const double mu = layer.centers()(1, 0);
    Matrix x = Matrix::Constant(7, 2, mu);
    Matrix out = layer.forward(x, rng);
    CHECK(out(0, 1) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(out(0, 4 + 1) == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("threshold rule matches the base-1.01 exponential form") {
  Rng rng = make_rng(77);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> width(0.0, 0.5);
  for (int t = 0; t < 1000000; ++t) {
    const double v = unit(rng);
    const double mu = unit(rng);
    const double w = width(rng);
    const bool simplified = std::abs(v - mu) < w;
    const bool exponential = std::pow(1.01, w - std::abs(v - mu)) > 1.0;
    REQUIRE(simplified == exponential);
  }
}

TEST_CASE("histogram output is independent of instance order") {
  Rng rng = make_rng(5);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (HistVariant v :
       {HistVariant::hard, HistVariant::soft, HistVariant::softrbf, HistVariant::sigmoid}) {
    HistogramLayer layer(v, 8, 3);
    Matrix x(40, 3);
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = unit(rng);
    Rng fr = dummy_rng();
    Matrix base = layer.forward(x, fr);
    for (int p = 0; p < 5; ++p) {
      Matrix shuffled = permuted_rows(x, rng);
      Matrix out = layer.forward(shuffled, fr);
      CHECK((out - base).cwiseAbs().maxCoeff() <= 1e-12);
    }
  }
}

TEST_CASE("pooling hand values") {
  Rng rng = dummy_rng();
  Matrix x(3, 1);
  x << 1, 2, 3;
  PoolingLayer avg(PoolKind::avg), med(PoolKind::median), mx(PoolKind::max);
  CHECK(avg.forward(x, rng)(0, 0) == doctest::Approx(2.0));
  CHECK(med.forward(x, rng)(0, 0) == 2.0);
  CHECK(mx.forward(x, rng)(0, 0) == 3.0);

  Matrix x4(4, 1);
  x4 << 1, 2, 3, 4;
  CHECK(med.forward(x4, rng)(0, 0) == 2.0);  // lower median

  Matrix same = Matrix::Constant(5, 3, 1.25);
  for (PoolingLayer* p : {&avg, &med, &mx})
    CHECK(p->forward(same, rng) == Matrix::Constant(1, 3, 1.25));
}

TEST_CASE("network outputs live on the simplex and ignore instance order") {
  Rng data_rng = make_rng(7);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<NetworkConfig> configs;
  for (HistVariant v :
       {HistVariant::hard, HistVariant::soft, HistVariant::softrbf, HistVariant::sigmoid})
    configs.push_back(small_net(true, v, PoolKind::avg));
  for (PoolKind p : {PoolKind::avg, PoolKind::median, PoolKind::max})
    configs.push_back(small_net(false, HistVariant::hard, p));

  for (std::size_t c = 0; c < configs.size(); ++c) {
    QuantNetwork net(configs[c], 100 + c);
    for (int trial = 0; trial < 20; ++trial) {
      Matrix x(15, 3);
      for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = gauss(data_rng);
      Prevalence base = net.quantify(Bag(x));
      double sum = 0.0;
      for (std::size_t j = 0; j < base.size(); ++j) sum += base[j];
      CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
      for (int p = 0; p < 5; ++p) {
        Prevalence shuffled = net.quantify(Bag(permuted_rows(x, data_rng)));
        for (std::size_t j = 0; j < base.size(); ++j)
          CHECK(std::abs(shuffled[j] - base[j]) <= 1e-6);
      }
      // duplicating every instance changes nothing either
      Matrix doubled(x.rows() * 2, x.cols());
      doubled << x, x;
      Prevalence dup = net.quantify(Bag(doubled));
      for (std::size_t j = 0; j < base.size(); ++j) CHECK(std::abs(dup[j] - base[j]) <= 1e-6);
    }
  }
}

TEST_CASE("compute_loss basics") {
  std::vector<Prevalence> gold{Prevalence({0.6, 0.4}), Prevalence({0.3, 0.7})};
  CHECK(compute_loss(gold, gold, LossKind::ae, 0.002) == 0.0);
  CHECK(compute_loss(gold, gold, LossKind::rae, 0.002) == 0.0);

  std::vector<Prevalence> pred{Prevalence({0.7, 0.3})};
  std::vector<Prevalence> target{Prevalence({0.6, 0.4})};
  CHECK(compute_loss(pred, target, LossKind::ae, 0.002) == doctest::Approx(0.1).epsilon(1e-12));

  // the batch loss is the mean of the single-pair losses
  std::vector<Prevalence> p2{Prevalence({0.7, 0.3}), Prevalence({0.3, 0.7})};
  std::vector<Prevalence> g2{Prevalence({0.6, 0.4}), Prevalence({0.3, 0.7})};
  const double a = compute_loss({p2[0]}, {g2[0]}, LossKind::rae, 0.002);
  const double b = compute_loss({p2[1]}, {g2[1]}, LossKind::rae, 0.002);
  CHECK(compute_loss(p2, g2, LossKind::rae, 0.002) == doctest::Approx((a + b) / 2).epsilon(1e-12));
}

TEST_CASE("a zero learning rate leaves parameters bitwise unchanged") {
  for (HistVariant v : {HistVariant::hard, HistVariant::soft}) {
    QuantNetwork net(small_net(true, v, PoolKind::avg), 3);
    auto before = net.export_parameters();
    AdamW opt(AdamWConfig{0.0, 0.9, 0.999, 1e-8, 1e-2});
    Rng rng = make_rng(1);
    std::vector<std::pair<Bag, Prevalence>> batch;
    batch.emplace_back(Bag(Matrix::Random(10, 3)), Prevalence({0.4, 0.6}));
    backward_and_step(net, batch, LossKind::rae, opt, rng);
    auto after = net.export_parameters();
    REQUIRE(before.size() == after.size());
    for (std::size_t i = 0; i < before.size(); ++i) CHECK(before[i] == after[i]);
  }
}

TEST_CASE("training reduces the loss on a learnable target") {
  NetworkConfig cfg;
  cfg.input_dim = 3;
  cfg.feature_layers = {4};
  cfg.invariant.is_histogram = false;
  cfg.invariant.pool = PoolKind::avg;
  cfg.n_outputs = 2;
  QuantNetwork net(cfg, 11);

  // target: prevalence tied linearly to the mean of the first feature
  Rng rng = make_rng(9);
  std::uniform_real_distribution<double> unit(0.1, 0.9);
  std::vector<std::pair<Bag, Prevalence>> batch;
  for (int i = 0; i < 10; ++i) {
    const double p = unit(rng);
    Matrix x = Matrix::Constant(8, 3, p);
    batch.emplace_back(Bag(x), Prevalence({p, 1.0 - p}));
  }
  AdamW opt(AdamWConfig{1e-2, 0.9, 0.999, 1e-8, 0.0});
  Rng drop = make_rng(2);
  double first = 0.0, last = 0.0;
  for (int step = 0; step < 100; ++step) {
    const double loss = backward_and_step(net, batch, LossKind::ae, opt, drop);
    if (step == 0) first = loss;
    last = loss;
  }
  CHECK(last < first * 0.5);
}

TEST_CASE("gradient check: dense layers through average pooling") {
  Rng rng = make_rng(21);
  std::normal_distribution<double> gauss(0.0, 1.0);
  int checked_configs = 0;
  for (std::uint64_t seed = 0; seed < 12 && checked_configs < 5; ++seed) {
    QuantNetwork net(small_net(false, HistVariant::hard, PoolKind::avg), seed);
    Matrix x(6, 3);
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = gauss(rng);
    GradCheckReport report =
        gradient_check(net, Bag(x), Prevalence({0.3, 0.7}), LossKind::rae);
    if (report.skipped) continue;
    ++checked_configs;
    CHECK(report.max_rel_dev < 1e-6);
  }
  CHECK(checked_configs >= 5);
}

TEST_CASE("gradient check: soft and softrbf histogram layers") {
  Rng rng = make_rng(31);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (HistVariant v : {HistVariant::soft, HistVariant::softrbf}) {
    int checked_configs = 0;
    for (std::uint64_t seed = 0; seed < 20 && checked_configs < 5; ++seed) {
      QuantNetwork net(small_net(true, v, PoolKind::avg), seed * 13 + 1);
      Matrix x(6, 3);
      for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = gauss(rng);
      GradCheckReport report =
          gradient_check(net, Bag(x), Prevalence({0.4, 0.6}), LossKind::rae);
      if (report.skipped) continue;
      ++checked_configs;
      CHECK(report.max_rel_dev < 1e-4);
    }
    CHECK(checked_configs >= 5);
  }
}

TEST_CASE("gradient check: sigmoid variant has no histogram parameters") {
  QuantNetwork net(small_net(true, HistVariant::sigmoid, PoolKind::avg), 5);
  // the parameter list holds only dense weights and biases
  for (Param* p : net.parameters()) CHECK(p->value.size() > 0);
  NetworkConfig plain = small_net(true, HistVariant::hard, PoolKind::avg);
  QuantNetwork hard_net(plain, 5);
  CHECK(hard_net.n_parameters() > net.n_parameters());
  CHECK(hard_net.n_parameters() - net.n_parameters() ==
        2u * static_cast<std::size_t>(plain.invariant.bins) * 3u);  // 2 N z

  Rng rng = make_rng(41);
  std::normal_distribution<double> gauss(0.0, 1.0);
  int checked_configs = 0;
  for (std::uint64_t seed = 0; seed < 20 && checked_configs < 3; ++seed) {
    QuantNetwork probe(small_net(true, HistVariant::sigmoid, PoolKind::avg), seed * 7 + 3);
    Matrix x(5, 3);
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = gauss(rng);
    GradCheckReport report =
        gradient_check(probe, Bag(x), Prevalence({0.5, 0.5}), LossKind::ae, true);
    if (report.skipped) continue;
    ++checked_configs;
    CHECK(report.max_rel_dev < 1e-4);
  }
  CHECK(checked_configs >= 3);

  CHECK_THROWS_AS(gradient_check(hard_net, Bag(Matrix::Random(4, 3)), Prevalence({0.5, 0.5}),
                                 LossKind::ae),
                  Error);
}

TEST_CASE("train_network early stopping and restoration") {
  // bags labeled by the mean of their single feature
  Rng rng = make_rng(19);
  std::uniform_real_distribution<double> unit(0.1, 0.9);
  std::vector<Bag> bags;
  std::vector<Prevalence> prevs;
  for (int i = 0; i < 30; ++i) {
    const double p = unit(rng);
    bags.emplace_back(Matrix::Constant(10, 1, p));
    prevs.emplace_back(Prevalence({p, 1.0 - p}));
  }
  BagDataset data(bags, prevs, 2);

  NetworkConfig cfg;
  cfg.input_dim = 1;
  cfg.feature_layers = {4};
  cfg.invariant.is_histogram = false;
  cfg.invariant.pool = PoolKind::avg;
  cfg.n_outputs = 2;

  TrainConfig tc;
  tc.loss = LossKind::ae;
  tc.learning_rate = 1e-2;
  tc.batch_size = 8;
  tc.real_proportion = 1.0;
  tc.patience = 0;
  tc.max_epochs = 50;
  tc.seed = 4;

  QuantNetwork one_epoch(cfg, 6);
  TrainHistory h0 = train_network(one_epoch, data, tc);
  CHECK(h0.epochs_run == 1);
  CHECK(h0.train_loss.size() == 1);
  CHECK(h0.val_loss.size() == 1);

  tc.patience = 5;
  QuantNetwork net(cfg, 6);
  TrainHistory h = train_network(net, data, tc);
  CHECK(h.epochs_run <= tc.max_epochs);
  CHECK(h.best_epoch >= 1);
  CHECK(h.best_val == *std::min_element(h.val_loss.begin(), h.val_loss.end()));

  // training is reproducible for a fixed seed
  QuantNetwork net2(cfg, 6);
  TrainHistory h2 = train_network(net2, data, tc);
  CHECK(h2.val_loss == h.val_loss);
  CHECK(net2.export_parameters() == net.export_parameters());

  CHECK_THROWS_AS(train_network(net, BagDataset({}, {}, 2), tc), Error);
}
