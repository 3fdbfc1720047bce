#include <cmath>
#include <map>
#include <set>

#include "doctest.h"
#include "quantx/sampling.hpp"

using namespace quantx;

namespace {

// Dataset whose single feature equals the class index, so any bag drawn from
// it reveals its own true labels.
LabeledDataset labeled_by_feature(const std::vector<int>& counts) {
  int total = 0;
  for (int c : counts) total += c;
  Matrix x(total, 1);
  std::vector<int> y(static_cast<std::size_t>(total));
  Eigen::Index row = 0;
  for (std::size_t c = 0; c < counts.size(); ++c)
    for (int k = 0; k < counts[c]; ++k, ++row) {
      x(row, 0) = static_cast<double>(c);
      y[static_cast<std::size_t>(row)] = static_cast<int>(c);
    }
  return LabeledDataset(std::move(x), std::move(y), static_cast<int>(counts.size()));
}

Prevalence feature_prevalence(const Bag& bag, int l) {
  std::vector<double> counts(static_cast<std::size_t>(l), 0.0);
  for (Eigen::Index i = 0; i < bag.size(); ++i)
    counts[static_cast<std::size_t>(std::lround(bag.instances()(i, 0)))] += 1.0;
  for (double& c : counts) c /= static_cast<double>(bag.size());
  return Prevalence(std::move(counts));
}

}  // namespace

TEST_CASE("kraemer_from_uniforms hand values") {
  auto one = kraemer_from_uniforms(1, {});
  CHECK(one.size() == 1);
  CHECK(one[0] == 1.0);

  auto two = kraemer_from_uniforms(2, {0.3});
  CHECK(two[0] == doctest::Approx(0.3));
  CHECK(two[1] == doctest::Approx(0.7));

  auto three = kraemer_from_uniforms(3, {0.6, 0.2});
  CHECK(three[0] == doctest::Approx(0.2));
  CHECK(three[1] == doctest::Approx(0.4));
  CHECK(three[2] == doctest::Approx(0.4));
}

TEST_CASE("kraemer_sample is uniform on the simplex") {
  Rng rng = make_rng(123);
  double mean[3] = {0.0, 0.0, 0.0};
  const int draws = 100000;
  for (int t = 0; t < draws; ++t) {
    Prevalence p = kraemer_sample(3, rng);  // construction enforces simplex membership
    for (int j = 0; j < 3; ++j) mean[j] += p[static_cast<std::size_t>(j)];
  }
  for (int j = 0; j < 3; ++j) CHECK(mean[j] / draws == doctest::Approx(1.0 / 3.0).epsilon(0.03));
}

TEST_CASE("apportion_counts uses largest remainders") {
  auto a = apportion_counts(4, Prevalence({0.5, 0.5}));
  CHECK(a == std::vector<int>{2, 2});
  auto b = apportion_counts(5, Prevalence({0.6, 0.4}));
  CHECK(b == std::vector<int>{3, 2});
  auto c = apportion_counts(4, Prevalence({1.0 / 3, 1.0 / 3, 1.0 / 3}));
  CHECK(c[0] + c[1] + c[2] == 4);
}

TEST_CASE("app_generate labels bags by achieved counts") {
  auto data = labeled_by_feature({40, 25, 35});
  AppConfig cfg;
  cfg.bag_size = 17;
  cfg.bag_count = 50;
  cfg.seed = 9;
  BagDataset bags = app_generate(data, cfg);
  REQUIRE(bags.size() == 50);
  for (std::size_t i = 0; i < bags.size(); ++i) {
    CHECK(bags.bag(i).size() == 17);
    Prevalence truth = feature_prevalence(bags.bag(i), 3);
    for (std::size_t j = 0; j < 3; ++j) CHECK(bags.prevalence(i)[j] == truth[j]);
    // counts are integral multiples of 1/m
    for (std::size_t j = 0; j < 3; ++j) {
      const double scaled = bags.prevalence(i)[j] * 17.0;
      CHECK(std::abs(scaled - std::lround(scaled)) < 1e-9);
    }
  }
}

TEST_CASE("app_generate is deterministic and validates input") {
  auto data = labeled_by_feature({10, 10});
  AppConfig cfg;
  cfg.bag_size = 8;
  cfg.bag_count = 5;
  cfg.seed = 77;
  BagDataset a = app_generate(data, cfg);
  BagDataset b = app_generate(data, cfg);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a.bag(i).instances() == b.bag(i).instances());
    CHECK(a.prevalence(i) == b.prevalence(i));
  }

  // a class with no representatives is rejected
  Matrix x(2, 1);
  x << 0.0, 0.0;
  LabeledDataset missing(std::move(x), {0, 0}, 2);
  CHECK_THROWS_AS(app_generate(missing, cfg), Error);

  AppConfig tiny = cfg;
  tiny.bag_size = 1;  // below the class count
  CHECK_THROWS_AS(app_generate(data, tiny), Error);
}

TEST_CASE("bag_mixer_batch with homogeneous parents gives exact silver labels") {
  std::vector<Bag> bags;
  bags.emplace_back(Matrix::Zero(10, 1));
  bags.emplace_back(Matrix::Ones(10, 1));
  BagDataset source({bags[0], bags[1]}, {Prevalence({1.0, 0.0}), Prevalence({0.0, 1.0})}, 2);

  MixerConfig cfg;
  cfg.real_proportion = 0.0;
  Rng rng = make_rng(5);
  auto batch = bag_mixer_batch(source, cfg, 20, rng);
  REQUIRE(batch.size() == 20);
  for (const auto& [bag, silver] : batch) {
    CHECK(bag.size() == 10);
    Prevalence truth = feature_prevalence(bag, 2);
    CHECK(silver[0] == truth[0]);
    CHECK(silver[1] == truth[1]);
    CHECK(silver[0] == 0.5);  // equal-size parents of opposite pure classes
  }
}

TEST_CASE("bag_mixer_batch respects the real proportion") {
  // five source bags, each constant-valued, so mixes always contain two values
  std::vector<Bag> bags;
  std::vector<Prevalence> prevs;
  for (int i = 0; i < 5; ++i) {
    bags.emplace_back(Matrix::Constant(10, 1, static_cast<double>(i)));
    prevs.emplace_back(Prevalence({1.0, 0.0}));
  }
  BagDataset source(bags, prevs, 2);

  MixerConfig cfg;
  cfg.real_proportion = 0.5;
  Rng rng = make_rng(13);
  auto batch = bag_mixer_batch(source, cfg, 5, rng);
  int real = 0;
  for (const auto& [bag, silver] : batch) {
    std::set<double> values;
    for (Eigen::Index i = 0; i < bag.size(); ++i) values.insert(bag.instances()(i, 0));
    if (values.size() == 1) ++real;
  }
  CHECK(real == 3);  // round(0.5 * 5)

  cfg.real_proportion = 1.0;
  Rng rng2 = make_rng(13);
  auto all_real = bag_mixer_batch(source, cfg, 8, rng2);
  for (const auto& [bag, silver] : all_real) {
    std::set<double> values;
    for (Eigen::Index i = 0; i < bag.size(); ++i) values.insert(bag.instances()(i, 0));
    CHECK(values.size() == 1);
    CHECK(silver[0] == 1.0);
  }

  CHECK_THROWS_AS(bag_mixer_batch(BagDataset({}, {}, 2), cfg, 4, rng2), Error);
}

TEST_CASE("bag_mixer_batch silver labels track empirical prevalence on average") {
  // parents at (0.8, 0.2) and (0.2, 0.8), both of size 100
  Matrix xi(100, 1), xj(100, 1);
  std::vector<int> yi, yj;
  for (int i = 0; i < 100; ++i) {
    xi(i, 0) = i < 80 ? 0.0 : 1.0;
    xj(i, 0) = i < 20 ? 0.0 : 1.0;
  }
  BagDataset source({Bag(xi), Bag(xj)}, {Prevalence({0.8, 0.2}), Prevalence({0.2, 0.8})}, 2);

  MixerConfig cfg;
  cfg.real_proportion = 0.0;
  Rng rng = make_rng(21);
  double total_dev = 0.0;
  int mixes = 0;
  for (int round = 0; round < 100; ++round) {
    auto batch = bag_mixer_batch(source, cfg, 100, rng);
    for (const auto& [bag, silver] : batch) {
      Prevalence truth = feature_prevalence(bag, 2);
      CHECK(silver[0] == doctest::Approx(0.5));
      total_dev += std::abs(truth[0] - silver[0]);
      ++mixes;
    }
  }
  CHECK(mixes == 10000);
  CHECK(total_dev / mixes < 0.05);
}

TEST_CASE("synth_dataset draws the requested classes") {
  std::vector<GaussianClassSpec> spec{
      {{-1.0}, {0.1}, 100},
      {{1.0}, {0.1}, 100},
  };
  LabeledDataset data = synth_dataset(spec, 3);
  CHECK(data.size() == 200);
  CHECK(data.n_classes() == 2);
  auto prior = data.prevalence();
  CHECK(prior[0] == 0.5);
  CHECK(prior[1] == 0.5);

  LabeledDataset single = synth_dataset({{{0.0, 0.0}, {1.0}, 10}}, 4);
  for (int y : single.labels()) CHECK(y == 0);

  // widely separated classes are classified near-perfectly by a zero threshold
  std::vector<GaussianClassSpec> big{
      {{-1.0}, {0.1}, 5000},
      {{1.0}, {0.1}, 5000},
  };
  LabeledDataset large = synth_dataset(big, 11);
  int correct = 0;
  for (Eigen::Index i = 0; i < large.size(); ++i) {
    const int pred = large.instances()(i, 0) > 0.0 ? 1 : 0;
    if (pred == large.labels()[static_cast<std::size_t>(i)]) ++correct;
  }
  CHECK(static_cast<double>(correct) / static_cast<double>(large.size()) > 0.999);

  LabeledDataset again = synth_dataset(big, 11);
  CHECK(large.instances() == again.instances());

  CHECK_THROWS_AS(synth_dataset({{{0.0}, {-1.0}, 5}}, 1), Error);
  CHECK_THROWS_AS(synth_dataset({{{0.0}, {1.0}, 0}}, 1), Error);
  CHECK_THROWS_AS(synth_dataset({{{0.0, 1.0}, {1.0}, 5}, {{0.0}, {1.0}, 5}}, 1), Error);
}
