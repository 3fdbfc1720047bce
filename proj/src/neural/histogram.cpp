#include "quantx/neural/histogram.hpp"

#include <algorithm>
#include <cmath>

namespace quantx {

namespace {
constexpr double ln_1p01 = 0.00995033085316808285;  // log(1.01)
}

HistVariant hist_variant_from_string(const std::string& s) {
  if (s == "hard") return HistVariant::hard;
  if (s == "soft") return HistVariant::soft;
  if (s == "softrbf") return HistVariant::softrbf;
  if (s == "sigmoid") return HistVariant::sigmoid;
  fail(Errc::bad_config, "unknown histogram variant: " + s);
}

std::string to_string(HistVariant v) {
  switch (v) {
    case HistVariant::hard: return "hard";
    case HistVariant::soft: return "soft";
    case HistVariant::softrbf: return "softrbf";
    case HistVariant::sigmoid: return "sigmoid";
  }
  return "?";
}

PoolKind pool_kind_from_string(const std::string& s) {
  if (s == "avg") return PoolKind::avg;
  if (s == "median") return PoolKind::median;
  if (s == "max") return PoolKind::max;
  fail(Errc::bad_config, "unknown pooling kind: " + s);
}

std::string to_string(PoolKind k) {
  switch (k) {
    case PoolKind::avg: return "avg";
    case PoolKind::median: return "median";
    case PoolKind::max: return "max";
  }
  return "?";
}

HistogramLayer::HistogramLayer(HistVariant variant, int n_bins, int n_features, double gamma)
    : variant_(variant),
      n_bins_(n_bins),
      n_features_(n_features),
      gamma_(gamma),
      centers_(Matrix(n_bins, n_features)),
      scales_(Matrix(n_bins, n_features)) {
  if (n_bins_ < 1 || n_features_ < 1) fail(Errc::bad_spec, "histogram shape must be positive");
  if (!(gamma_ > 0.0)) fail(Errc::bad_spec, "gamma must be positive");
  const double spacing = 1.0 / static_cast<double>(n_bins_);
  for (int b = 0; b < n_bins_; ++b)
    centers_.value.row(b).setConstant((static_cast<double>(b) + 0.5) * spacing);
  switch (variant_) {
    case HistVariant::hard:
      scales_.value.setConstant(0.5 * spacing);  // half-width
      break;
    case HistVariant::soft:
      scales_.value.setConstant(static_cast<double>(n_bins_));  // slope = 1/spacing
      break;
    case HistVariant::softrbf:
      scales_.value.setConstant(spacing);
      break;
    case HistVariant::sigmoid:
      scales_.value.setConstant(spacing);  // fixed full width: gates tile (0,1)
      break;
  }
}

std::vector<Param*> HistogramLayer::params() {
  if (variant_ == HistVariant::sigmoid) return {};
  return {&centers_, &scales_};
}

void HistogramLayer::constrain() {
  if (variant_ == HistVariant::soft) {
    scales_.value = scales_.value.cwiseMax(1e-6);  // keep the slope positive
  } else if (variant_ == HistVariant::softrbf) {
    // keep the scale away from zero without flipping its sign
    for (Eigen::Index i = 0; i < scales_.value.size(); ++i) {
      double& w = scales_.value.data()[i];
      if (std::abs(w) < 1e-8) w = w < 0.0 ? -1e-8 : 1e-8;
    }
  }
}

Matrix HistogramLayer::infer(const Matrix& x) const {
  if (x.cols() != n_features_)
    fail(Errc::dimension_mismatch, "histogram layer expected " + std::to_string(n_features_) +
                                       " features, got " + std::to_string(x.cols()));
  const double inv_n = 1.0 / static_cast<double>(x.rows());
  Matrix out(1, static_cast<Eigen::Index>(n_bins_) * n_features_);
  for (int k = 0; k < n_features_; ++k) {
    const auto col = x.col(k).array();
    for (int b = 0; b < n_bins_; ++b) {
      const double mu = centers_.value(b, k);
      const double w = scales_.value(b, k);
      double value = 0.0;
      switch (variant_) {
        case HistVariant::hard:
          value = static_cast<double>(((col - mu).abs() < w).count());
          break;
        case HistVariant::soft:
          value = (1.0 - w * (col - mu).abs()).max(0.0).sum();
          break;
        case HistVariant::softrbf:
          value = (-((col - mu) / w).square()).exp().sum();
          break;
        case HistVariant::sigmoid: {
          const auto desc = 1.0 / (1.0 + (gamma_ * (col - (mu + 0.5 * w))).exp());
          const auto asc = 1.0 - 1.0 / (1.0 + (gamma_ * (col - (mu - 0.5 * w))).exp());
          value = (desc * asc).sum();
          break;
        }
      }
      out(0, static_cast<Eigen::Index>(k) * n_bins_ + b) = value * inv_n;
    }
  }
  return out;
}

Matrix HistogramLayer::forward(const Matrix& x, Rng&) {
  input_ = x;
  return infer(x);
}

Matrix HistogramLayer::backward(const Matrix& grad_out) {
  const Eigen::Index n = input_.rows();
  const double inv_n = 1.0 / static_cast<double>(n);
  Matrix grad_in = Matrix::Zero(n, n_features_);
  for (int k = 0; k < n_features_; ++k) {
    const auto col = input_.col(k).array();
    for (int b = 0; b < n_bins_; ++b) {
      const double g = grad_out(0, static_cast<Eigen::Index>(k) * n_bins_ + b) * inv_n;
      if (g == 0.0) continue;
      const double mu = centers_.value(b, k);
      const double w = scales_.value(b, k);
      const auto t = col - mu;
      switch (variant_) {
        case HistVariant::hard: {
          // straight-through: d phi / d u taken from u -> 1.01^u at the
          // pre-threshold value u = w - |t|
          Eigen::ArrayXd slope = (ln_1p01 * (w - t.abs())).exp() * ln_1p01;
          const Eigen::ArrayXd sign = t.sign();
          scales_.grad(b, k) += g * slope.sum();
          centers_.grad(b, k) += g * (slope * sign).sum();
          grad_in.col(k).array() -= g * slope * sign;
          break;
        }
        case HistVariant::soft: {
          const Eigen::ArrayXd a = t.abs();
          const Eigen::ArrayXd active = ((1.0 - w * a) > 0.0).cast<double>();
          const Eigen::ArrayXd sign = t.sign();
          scales_.grad(b, k) += g * (active * (-a)).sum();
          centers_.grad(b, k) += g * (active * w * sign).sum();
          grad_in.col(k).array() += g * active * (-w) * sign;
          break;
        }
        case HistVariant::softrbf: {
          const Eigen::ArrayXd u = t / w;
          const Eigen::ArrayXd phi = (-u.square()).exp();
          const Eigen::ArrayXd dphi_dt = phi * (-2.0) * u / w;
          scales_.grad(b, k) += g * (phi * 2.0 * u.square() / w).sum();
          centers_.grad(b, k) += g * (-dphi_dt).sum();
          grad_in.col(k).array() += g * dphi_dt;
          break;
        }
        case HistVariant::sigmoid: {
          const Eigen::ArrayXd desc = 1.0 / (1.0 + (gamma_ * (col - (mu + 0.5 * w))).exp());
          const Eigen::ArrayXd asc = 1.0 - 1.0 / (1.0 + (gamma_ * (col - (mu - 0.5 * w))).exp());
          const Eigen::ArrayXd d_desc = -gamma_ * desc * (1.0 - desc);
          const Eigen::ArrayXd d_asc = gamma_ * asc * (1.0 - asc);
          grad_in.col(k).array() += g * (asc * d_desc + desc * d_asc);
          break;
        }
      }
    }
  }
  return grad_in;
}

double HistogramLayer::kink_gap() const {
  if (input_.size() == 0) return std::numeric_limits<double>::infinity();
  double gap = std::numeric_limits<double>::infinity();
  if (variant_ == HistVariant::softrbf) {
    // smooth everywhere; only a vanishing scale is ill-posed
    return scales_.value.cwiseAbs().minCoeff();
  }
  if (variant_ == HistVariant::sigmoid) return gap;
  for (int k = 0; k < n_features_; ++k) {
    const auto col = input_.col(k).array();
    for (int b = 0; b < n_bins_; ++b) {
      const double w = scales_.value(b, k);
      const double boundary = variant_ == HistVariant::hard ? w : 1.0 / std::max(w, 1e-12);
      const Eigen::ArrayXd a = (col - centers_.value(b, k)).abs();
      gap = std::min(gap, a.minCoeff());                    // |v - mu| = 0 kink
      gap = std::min(gap, (a - boundary).abs().minCoeff()); // membership boundary
    }
  }
  return gap;
}

Matrix PoolingLayer::infer(const Matrix& x) const {
  Matrix out(1, x.cols());
  switch (kind_) {
    case PoolKind::avg:
      out.row(0) = x.colwise().mean();
      break;
    case PoolKind::max:
      out.row(0) = x.colwise().maxCoeff();
      break;
    case PoolKind::median: {
      const Eigen::Index pick = (x.rows() - 1) / 2;  // lower median
      std::vector<double> scratch(static_cast<std::size_t>(x.rows()));
      for (Eigen::Index k = 0; k < x.cols(); ++k) {
        for (Eigen::Index i = 0; i < x.rows(); ++i)
          scratch[static_cast<std::size_t>(i)] = x(i, k);
        std::nth_element(scratch.begin(), scratch.begin() + pick, scratch.end());
        out(0, k) = scratch[static_cast<std::size_t>(pick)];
      }
      break;
    }
  }
  return out;
}

Matrix PoolingLayer::forward(const Matrix& x, Rng&) {
  input_ = x;
  Matrix out = infer(x);
  picked_.assign(static_cast<std::size_t>(x.cols()), 0);
  if (kind_ != PoolKind::avg) {
    // remember which instance each column selected (first match)
    for (Eigen::Index k = 0; k < x.cols(); ++k) {
      for (Eigen::Index i = 0; i < x.rows(); ++i) {
        if (x(i, k) == out(0, k)) {
          picked_[static_cast<std::size_t>(k)] = i;
          break;
        }
      }
    }
  }
  return out;
}

Matrix PoolingLayer::backward(const Matrix& grad_out) {
  Matrix grad_in = Matrix::Zero(input_.rows(), input_.cols());
  if (kind_ == PoolKind::avg) {
    const double inv_n = 1.0 / static_cast<double>(input_.rows());
    for (Eigen::Index k = 0; k < input_.cols(); ++k)
      grad_in.col(k).setConstant(grad_out(0, k) * inv_n);
  } else {
    for (Eigen::Index k = 0; k < input_.cols(); ++k)
      grad_in(picked_[static_cast<std::size_t>(k)], k) = grad_out(0, k);
  }
  return grad_in;
}

double PoolingLayer::kink_gap() const {
  if (kind_ == PoolKind::avg || input_.size() == 0)
    return std::numeric_limits<double>::infinity();
  // selection switches when the chosen order statistic meets a neighbor
  double gap = std::numeric_limits<double>::infinity();
  for (Eigen::Index k = 0; k < input_.cols(); ++k) {
    const double chosen = input_(picked_[static_cast<std::size_t>(k)], k);
    for (Eigen::Index i = 0; i < input_.rows(); ++i) {
      if (i == picked_[static_cast<std::size_t>(k)]) continue;
      gap = std::min(gap, std::abs(input_(i, k) - chosen));
    }
  }
  return gap;
}

}  // namespace quantx
