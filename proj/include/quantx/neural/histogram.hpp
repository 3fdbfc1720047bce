#ifndef QUANTX_NEURAL_HISTOGRAM_HPP
#define QUANTX_NEURAL_HISTOGRAM_HPP

#include "quantx/neural/layers.hpp"

namespace quantx {

enum class HistVariant { hard, soft, softrbf, sigmoid };
enum class PoolKind { avg, median, max };

HistVariant hist_variant_from_string(const std::string& s);
std::string to_string(HistVariant v);
PoolKind pool_kind_from_string(const std::string& s);
std::string to_string(PoolKind k);

/// Per-feature differentiable histogram over an n x z activation matrix.
/// The output row holds all bins of feature k at [k*N, (k+1)*N) and every bin
/// value is the mean membership over the n instances, so bag size factors
/// out and the layer is invariant to instance order and duplication.
///
/// The membership function phi(v; mu, w) depends on the variant:
///   hard     indicator of 1.01^(w - |v-mu|) > 1, i.e. |v-mu| < w, with a
///            straight-through backward that treats the threshold as identity
///            so gradients reach mu and w through the base-1.01 exponential;
///            w is the bin half-width.
///   soft     max(0, 1 - s|v-mu|) with learnable slope s (width = 1/s).
///   softrbf  exp(-((v-mu)/w)^2) with learnable scale w.
///   sigmoid  product of two logistic gates with sharpness gamma, descending
///            at mu+w/2 and ascending at mu-w/2; mu and w stay fixed on an
///            even grid and the layer has no learnable parameters.
class HistogramLayer final : public Layer {
 public:
  HistogramLayer(HistVariant variant, int n_bins, int n_features, double gamma = 100.0);

  Matrix forward(const Matrix& x, Rng& rng) override;
  Matrix infer(const Matrix& x) const override;
  Matrix backward(const Matrix& grad_out) override;
  std::vector<Param*> params() override;
  void constrain() override;
  double kink_gap() const override;
  std::string name() const override { return "histogram_" + to_string(variant_); }

  HistVariant variant() const noexcept { return variant_; }
  int n_bins() const noexcept { return n_bins_; }
  int n_features() const noexcept { return n_features_; }
  double gamma() const noexcept { return gamma_; }
  const Matrix& centers() const noexcept { return centers_.value; }
  const Matrix& scales() const noexcept { return scales_.value; }

 private:
  HistVariant variant_;
  int n_bins_;
  int n_features_;
  double gamma_;
  Param centers_;  // N x z
  Param scales_;   // N x z, semantics per variant
  Matrix input_;
};

/// Column-wise pooling over the bag dimension; median uses the lower median
/// for even bag sizes.
class PoolingLayer final : public Layer {
 public:
  explicit PoolingLayer(PoolKind kind) : kind_(kind) {}
  Matrix forward(const Matrix& x, Rng& rng) override;
  Matrix infer(const Matrix& x) const override;
  Matrix backward(const Matrix& grad_out) override;
  double kink_gap() const override;
  std::string name() const override { return "pool_" + to_string(kind_); }
  PoolKind kind() const noexcept { return kind_; }

 private:
  PoolKind kind_;
  Matrix input_;
  std::vector<Eigen::Index> picked_;  // row chosen per column (median/max)
};

}  // namespace quantx

#endif
