#ifndef QUANTX_NEURAL_LAYERS_HPP
#define QUANTX_NEURAL_LAYERS_HPP

#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "quantx/dataset.hpp"

namespace quantx {

struct Param {
  Matrix value;
  Matrix grad;

  explicit Param(Matrix v) : value(std::move(v)), grad(Matrix::Zero(value.rows(), value.cols())) {}
};

/// One differentiable stage of a network. `forward` caches whatever the
/// matching `backward` needs; `infer` is the pure inference path (no caches,
/// no dropout) and is safe to call concurrently on a frozen network.
class Layer {
 public:
  virtual ~Layer() = default;
  virtual Matrix forward(const Matrix& x, Rng& rng) = 0;
  virtual Matrix infer(const Matrix& x) const = 0;
  virtual Matrix backward(const Matrix& grad_out) = 0;
  virtual std::vector<Param*> params() { return {}; }
  /// Re-establish any parameter constraint after an optimizer step.
  virtual void constrain() {}
  /// Distance of the cached forward to the nearest derivative kink, used by
  /// the finite-difference harness to exclude ill-posed checks.
  virtual double kink_gap() const { return std::numeric_limits<double>::infinity(); }
  virtual std::string name() const = 0;
};

class DenseLayer final : public Layer {
 public:
  DenseLayer(int in_dim, int out_dim, Rng& init_rng);
  Matrix forward(const Matrix& x, Rng& rng) override;
  Matrix infer(const Matrix& x) const override;
  Matrix backward(const Matrix& grad_out) override;
  std::vector<Param*> params() override { return {&weight_, &bias_}; }
  std::string name() const override { return "dense"; }

 private:
  Param weight_;  // in x out
  Param bias_;    // 1 x out
  Matrix input_;
};

class LeakyReluLayer final : public Layer {
 public:
  explicit LeakyReluLayer(double slope = 0.01) : slope_(slope) {}
  Matrix forward(const Matrix& x, Rng& rng) override;
  Matrix infer(const Matrix& x) const override;
  Matrix backward(const Matrix& grad_out) override;
  double kink_gap() const override;
  std::string name() const override { return "leaky_relu"; }

 private:
  double slope_;
  Matrix input_;
};

/// Inverted dropout: activations are scaled at training time so inference is
/// the identity. A fresh mask is drawn on every forward call.
class DropoutLayer final : public Layer {
 public:
  explicit DropoutLayer(double rate);
  Matrix forward(const Matrix& x, Rng& rng) override;
  Matrix infer(const Matrix& x) const override { return x; }
  Matrix backward(const Matrix& grad_out) override;
  std::string name() const override { return "dropout"; }

 private:
  double rate_;
  Matrix mask_;
};

/// Element-wise logistic map into (0,1), applied ahead of histogram layers so
/// their fixed-range bin initialization is meaningful.
class SquashLayer final : public Layer {
 public:
  Matrix forward(const Matrix& x, Rng& rng) override;
  Matrix infer(const Matrix& x) const override;
  Matrix backward(const Matrix& grad_out) override;
  std::string name() const override { return "squash"; }

 private:
  Matrix output_;
};

class SoftmaxLayer final : public Layer {
 public:
  Matrix forward(const Matrix& x, Rng& rng) override;
  Matrix infer(const Matrix& x) const override;
  Matrix backward(const Matrix& grad_out) override;
  std::string name() const override { return "softmax"; }

 private:
  Matrix output_;
};

/// Decoupled-weight-decay adaptive-moment optimizer.
struct AdamWConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.0;
};

class AdamW {
 public:
  explicit AdamW(AdamWConfig cfg) : cfg_(cfg) {}
  void step(const std::vector<Param*>& params);
  const AdamWConfig& config() const noexcept { return cfg_; }

 private:
  AdamWConfig cfg_;
  int t_ = 0;
  std::vector<Matrix> m_, v_;
};

}  // namespace quantx

#endif
