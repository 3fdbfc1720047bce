#include "quantx/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace quantx {

Prevalence kraemer_from_uniforms(int n_classes, std::vector<double> uniforms) {
  if (n_classes < 1) fail(Errc::bad_spec, "class count must be positive");
  if (uniforms.size() != static_cast<std::size_t>(n_classes - 1))
    fail(Errc::length_mismatch, "expected l-1 uniform variates");
  std::sort(uniforms.begin(), uniforms.end());
  std::vector<double> values(static_cast<std::size_t>(n_classes));
  double prev = 0.0;
  for (int j = 0; j + 1 < n_classes; ++j) {
    values[static_cast<std::size_t>(j)] = uniforms[static_cast<std::size_t>(j)] - prev;
    prev = uniforms[static_cast<std::size_t>(j)];
  }
  values[static_cast<std::size_t>(n_classes - 1)] = 1.0 - prev;
  return Prevalence(std::move(values));
}

Prevalence kraemer_sample(int n_classes, Rng& rng) {
  if (n_classes < 1) fail(Errc::bad_spec, "class count must be positive");
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> uniforms(static_cast<std::size_t>(n_classes - 1));
  for (double& u : uniforms) u = unit(rng);
  return kraemer_from_uniforms(n_classes, std::move(uniforms));
}

std::vector<int> apportion_counts(int total, const Prevalence& shares) {
  if (total < 0) fail(Errc::bad_spec, "cannot apportion a negative total");
  const std::size_t l = shares.size();
  std::vector<int> counts(l, 0);
  std::vector<double> remainders(l, 0.0);
  int assigned = 0;
  for (std::size_t j = 0; j < l; ++j) {
    const double exact = shares[j] * static_cast<double>(total);
    counts[j] = static_cast<int>(std::floor(exact));
    remainders[j] = exact - std::floor(exact);
    assigned += counts[j];
  }
  std::vector<std::size_t> order(l);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return remainders[a] > remainders[b]; });
  for (int k = 0; k < total - assigned; ++k) counts[order[static_cast<std::size_t>(k)]] += 1;
  return counts;
}

BagDataset app_generate(const LabeledDataset& dataset, const AppConfig& cfg) {
  const int l = dataset.n_classes();
  if (cfg.bag_size < l)
    fail(Errc::bad_spec, "bag size must be at least the class count");
  if (cfg.bag_count < 1) fail(Errc::bad_spec, "bag count must be positive");

  std::vector<std::vector<Eigen::Index>> pool(static_cast<std::size_t>(l));
  for (int c = 0; c < l; ++c) {
    pool[static_cast<std::size_t>(c)] = dataset.class_indices(c);
    if (pool[static_cast<std::size_t>(c)].empty())
      fail(Errc::missing_class, "class " + std::to_string(c) + " has no instances");
  }

  Rng rng = make_rng(cfg.seed);
  std::vector<Bag> bags;
  std::vector<Prevalence> labels;
  bags.reserve(static_cast<std::size_t>(cfg.bag_count));
  labels.reserve(static_cast<std::size_t>(cfg.bag_count));

  for (int b = 0; b < cfg.bag_count; ++b) {
    const Prevalence target = kraemer_sample(l, rng);
    const std::vector<int> counts = apportion_counts(cfg.bag_size, target);
    Matrix rows(cfg.bag_size, dataset.dim());
    Eigen::Index next = 0;
    std::vector<double> achieved(static_cast<std::size_t>(l), 0.0);
    for (int c = 0; c < l; ++c) {
      const auto& members = pool[static_cast<std::size_t>(c)];
      std::uniform_int_distribution<std::size_t> pick(0, members.size() - 1);
      for (int k = 0; k < counts[static_cast<std::size_t>(c)]; ++k)
        rows.row(next++) = dataset.instances().row(members[pick(rng)]);
      achieved[static_cast<std::size_t>(c)] =
          static_cast<double>(counts[static_cast<std::size_t>(c)]) / static_cast<double>(cfg.bag_size);
    }
    bags.emplace_back(std::move(rows));
    labels.emplace_back(Prevalence(std::move(achieved)));
  }
  return BagDataset(std::move(bags), std::move(labels), l);
}

namespace {

// Distinct random rows of a bag, sampled without replacement (partial
// Fisher-Yates over an index scratch vector).
Matrix random_subset(const Bag& bag, Eigen::Index take, Rng& rng) {
  const Eigen::Index n = bag.size();
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), Eigen::Index{0});
  Matrix out(take, bag.dim());
  for (Eigen::Index k = 0; k < take; ++k) {
    std::uniform_int_distribution<Eigen::Index> pick(k, n - 1);
    std::swap(idx[static_cast<std::size_t>(k)], idx[static_cast<std::size_t>(pick(rng))]);
    out.row(k) = bag.instances().row(idx[static_cast<std::size_t>(k)]);
  }
  return out;
}

}  // namespace

std::vector<std::pair<Bag, Prevalence>> bag_mixer_batch(const BagDataset& source,
                                                        const MixerConfig& cfg, int batch_size,
                                                        Rng& rng) {
  if (source.size() == 0) fail(Errc::empty_source, "mixer source has no bags");
  if (batch_size < 1) fail(Errc::bad_spec, "batch size must be positive");
  if (cfg.real_proportion < 0.0 || cfg.real_proportion > 1.0)
    fail(Errc::bad_spec, "real proportion must lie in [0,1]");

  const int n_real = static_cast<int>(std::lround(cfg.real_proportion * batch_size));
  std::uniform_int_distribution<std::size_t> pick(0, source.size() - 1);

  std::vector<std::pair<Bag, Prevalence>> batch;
  batch.reserve(static_cast<std::size_t>(batch_size));
  for (int k = 0; k < n_real; ++k) {
    const std::size_t i = pick(rng);
    batch.emplace_back(source.bag(i), source.prevalence(i));
  }
  for (int k = n_real; k < batch_size; ++k) {
    const std::size_t i = pick(rng);
    std::size_t j = i;
    if (source.size() > 1)
      while (j == i) j = pick(rng);
    const Bag& bi = source.bag(i);
    const Bag& bj = source.bag(j);
    const Eigen::Index ni = bi.size() / 2;        // floor
    const Eigen::Index nj = (bj.size() + 1) / 2;  // ceil
    Matrix half_i = random_subset(bi, ni, rng);
    Matrix half_j = random_subset(bj, nj, rng);
    Matrix merged(ni + nj, bi.dim());
    merged.topRows(ni) = half_i;
    merged.bottomRows(nj) = half_j;
    const double wi = static_cast<double>(ni);
    const double wj = static_cast<double>(nj);
    std::vector<double> silver(source.prevalence(i).size());
    for (std::size_t c = 0; c < silver.size(); ++c)
      silver[c] = (wi * source.prevalence(i)[c] + wj * source.prevalence(j)[c]) / (wi + wj);
    batch.emplace_back(Bag(std::move(merged)), Prevalence(std::move(silver)));
  }
  return batch;
}

LabeledDataset synth_dataset(const std::vector<GaussianClassSpec>& classes, std::uint64_t seed) {
  if (classes.empty()) fail(Errc::bad_spec, "need at least one class spec");
  const std::size_t dim = classes.front().mean.size();
  if (dim == 0) fail(Errc::bad_spec, "class mean must be non-empty");
  Eigen::Index total = 0;
  for (const auto& spec : classes) {
    if (spec.mean.size() != dim) fail(Errc::bad_spec, "class means must share dimension");
    if (spec.count < 0) fail(Errc::bad_spec, "class count must be non-negative");
    if (spec.sigma.size() != 1 && spec.sigma.size() != dim)
      fail(Errc::bad_spec, "sigma must be scalar or one entry per dimension");
    for (double s : spec.sigma)
      if (!(s > 0.0) || !std::isfinite(s)) fail(Errc::bad_spec, "sigma must be positive and finite");
    total += spec.count;
  }
  if (total == 0) fail(Errc::bad_spec, "all class counts are zero");

  Rng rng = make_rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Matrix x(total, static_cast<Eigen::Index>(dim));
  std::vector<int> y(static_cast<std::size_t>(total));
  Eigen::Index row = 0;
  for (std::size_t c = 0; c < classes.size(); ++c) {
    const auto& spec = classes[c];
    for (int k = 0; k < spec.count; ++k, ++row) {
      for (std::size_t d = 0; d < dim; ++d) {
        const double s = spec.sigma.size() == 1 ? spec.sigma[0] : spec.sigma[d];
        x(row, static_cast<Eigen::Index>(d)) = spec.mean[d] + s * gauss(rng);
      }
      y[static_cast<std::size_t>(row)] = static_cast<int>(c);
    }
  }
  return LabeledDataset(std::move(x), std::move(y), static_cast<int>(classes.size()));
}

}  // namespace quantx
