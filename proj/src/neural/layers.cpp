#include "quantx/neural/layers.hpp"

#include <cmath>

namespace quantx {

DenseLayer::DenseLayer(int in_dim, int out_dim, Rng& init_rng)
    : weight_(Matrix(in_dim, out_dim)), bias_(Matrix::Zero(1, out_dim)) {
  if (in_dim < 1 || out_dim < 1) fail(Errc::bad_spec, "dense layer dimensions must be positive");
  const double limit = std::sqrt(6.0 / static_cast<double>(in_dim + out_dim));
  std::uniform_real_distribution<double> uni(-limit, limit);
  for (Eigen::Index i = 0; i < weight_.value.rows(); ++i)
    for (Eigen::Index j = 0; j < weight_.value.cols(); ++j) weight_.value(i, j) = uni(init_rng);
}

Matrix DenseLayer::infer(const Matrix& x) const {
  if (x.cols() != weight_.value.rows())
    fail(Errc::dimension_mismatch, "dense layer expected " + std::to_string(weight_.value.rows()) +
                                       " inputs, got " + std::to_string(x.cols()));
  return (x * weight_.value).rowwise() + bias_.value.row(0);
}

Matrix DenseLayer::forward(const Matrix& x, Rng&) {
  input_ = x;
  return infer(x);
}

Matrix DenseLayer::backward(const Matrix& grad_out) {
  weight_.grad.noalias() += input_.transpose() * grad_out;
  bias_.grad.row(0) += grad_out.colwise().sum();
  return grad_out * weight_.value.transpose();
}

Matrix LeakyReluLayer::infer(const Matrix& x) const {
  return x.cwiseMax(0.0) + slope_ * x.cwiseMin(0.0);
}

Matrix LeakyReluLayer::forward(const Matrix& x, Rng&) {
  input_ = x;
  return infer(x);
}

Matrix LeakyReluLayer::backward(const Matrix& grad_out) {
  return grad_out.cwiseProduct(
      (input_.array() > 0.0).select(Matrix::Ones(input_.rows(), input_.cols()),
                                    Matrix::Constant(input_.rows(), input_.cols(), slope_)));
}

double LeakyReluLayer::kink_gap() const {
  if (input_.size() == 0) return std::numeric_limits<double>::infinity();
  return input_.cwiseAbs().minCoeff();
}

DropoutLayer::DropoutLayer(double rate) : rate_(rate) {
  if (rate_ < 0.0 || rate_ >= 1.0) fail(Errc::bad_spec, "dropout rate must lie in [0,1)");
}

Matrix DropoutLayer::forward(const Matrix& x, Rng& rng) {
  if (rate_ == 0.0) {
    mask_ = Matrix::Ones(x.rows(), x.cols());
    return x;
  }
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double keep = 1.0 - rate_;
  mask_ = Matrix(x.rows(), x.cols());
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    for (Eigen::Index j = 0; j < x.cols(); ++j)
      mask_(i, j) = unit(rng) < keep ? 1.0 / keep : 0.0;
  return x.cwiseProduct(mask_);
}

Matrix DropoutLayer::backward(const Matrix& grad_out) { return grad_out.cwiseProduct(mask_); }

Matrix SquashLayer::infer(const Matrix& x) const {
  return ((-x.array()).exp() + 1.0).inverse().matrix();
}

Matrix SquashLayer::forward(const Matrix& x, Rng&) {
  output_ = infer(x);
  return output_;
}

Matrix SquashLayer::backward(const Matrix& grad_out) {
  return grad_out.cwiseProduct(
      (output_.array() * (1.0 - output_.array())).matrix());
}

Matrix SoftmaxLayer::infer(const Matrix& x) const {
  Matrix out(x.rows(), x.cols());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const double m = x.row(i).maxCoeff();
    out.row(i) = (x.row(i).array() - m).exp();
    out.row(i) /= out.row(i).sum();
  }
  return out;
}

Matrix SoftmaxLayer::forward(const Matrix& x, Rng&) {
  output_ = infer(x);
  return output_;
}

Matrix SoftmaxLayer::backward(const Matrix& grad_out) {
  Matrix grad_in(grad_out.rows(), grad_out.cols());
  for (Eigen::Index i = 0; i < grad_out.rows(); ++i) {
    const double inner = grad_out.row(i).dot(output_.row(i));
    grad_in.row(i) = output_.row(i).cwiseProduct(grad_out.row(i) -
                                                 Eigen::RowVectorXd::Constant(grad_out.cols(), inner));
  }
  return grad_in;
}

void AdamW::step(const std::vector<Param*>& params) {
  if (m_.empty()) {
    for (const Param* p : params) {
      m_.emplace_back(Matrix::Zero(p->value.rows(), p->value.cols()));
      v_.emplace_back(Matrix::Zero(p->value.rows(), p->value.cols()));
    }
  }
  if (m_.size() != params.size()) fail(Errc::internal, "optimizer state does not match parameters");
  ++t_;
  const double bc1 = 1.0 - std::pow(cfg_.beta1, t_);
  const double bc2 = 1.0 - std::pow(cfg_.beta2, t_);
  for (std::size_t i = 0; i < params.size(); ++i) {
    Param& p = *params[i];
    m_[i] = cfg_.beta1 * m_[i] + (1.0 - cfg_.beta1) * p.grad;
    v_[i] = cfg_.beta2 * v_[i].array().matrix() +
            (1.0 - cfg_.beta2) * p.grad.cwiseProduct(p.grad);
    const auto m_hat = m_[i].array() / bc1;
    const auto v_hat = v_[i].array() / bc2;
    p.value.array() -= cfg_.learning_rate * (m_hat / (v_hat.sqrt() + cfg_.eps) +
                                             cfg_.weight_decay * p.value.array());
  }
}

}  // namespace quantx
