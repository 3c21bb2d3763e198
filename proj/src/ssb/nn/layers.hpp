#pragma once

#include <cstdint>
#include <stdexcept>

#include "ssb/nn/common.hpp"

namespace ssb::nn {

using Index = Eigen::Index;

// Fully-connected layer, y = x W + b, rows are batch examples.
template <class T>
class Dense {
 public:
  Dense(ParamStore<T>& ps, Index in, Index out)
      : in_(in), out_(out), w_(ps.reserve(in, out)), b_(ps.reserve(1, out)) {}

  void init(ParamStore<T>& ps, Init kind, Rng& rng) {
    init_uniform(ps.value(w_), init_limit(kind, in_, out_), rng);
    ps.value(b_).setZero();
  }

  Mat<T> forward(ParamStore<T>& ps, const Mat<T>& x, OpCounter* oc) {
    if (x.cols() != in_) throw std::invalid_argument("dense: input shape");
    x_ = x;
    Mat<T> y = x * ps.value(w_);
    y.rowwise() += ps.value(b_).row(0);
    if (oc) {
      oc->mul += static_cast<std::uint64_t>(x.rows()) * in_ * out_;
      oc->add += static_cast<std::uint64_t>(x.rows()) * in_ * out_;
    }
    return y;
  }

  Mat<T> backward(ParamStore<T>& ps, const Mat<T>& dy) {
    ps.grad(w_).noalias() += x_.transpose() * dy;
    ps.grad(b_).row(0) += dy.colwise().sum();
    return dy * ps.value(w_).transpose();
  }

  Index in() const { return in_; }
  Index out() const { return out_; }

 private:
  Index in_, out_;
  typename ParamStore<T>::Slot w_, b_;
  Mat<T> x_;
};

template <class T>
class ReLU {
 public:
  Mat<T> forward(const Mat<T>& x) {
    y_ = x.cwiseMax(T(0));
    return y_;
  }
  Mat<T> backward(const Mat<T>& dy) const {
    return (y_.array() > T(0)).template cast<T>() * dy.array();
  }

 private:
  Mat<T> y_;
};

// 1-D convolution, stride 1, 'same' zero padding. Activations are laid out
// channel-major within each row: column c*len + n holds channel c, position
// n. Implemented as im2col + one GEMM over the whole batch.
template <class T>
class Conv1d {
 public:
  Conv1d(ParamStore<T>& ps, Index in_ch, Index out_ch, Index kernel, Index len)
      : in_ch_(in_ch),
        out_ch_(out_ch),
        kernel_(kernel),
        len_(len),
        w_(ps.reserve(out_ch, in_ch * kernel)),
        b_(ps.reserve(1, out_ch)) {}

  void init(ParamStore<T>& ps, Init kind, Rng& rng) {
    init_uniform(ps.value(w_), init_limit(kind, in_ch_ * kernel_, out_ch_),
                 rng);
    ps.value(b_).setZero();
  }

  Mat<T> forward(ParamStore<T>& ps, const Mat<T>& x, OpCounter* oc) {
    if (x.cols() != in_ch_ * len_)
      throw std::invalid_argument("conv1d: input shape");
    x_ = x;
    const Index batch = x.rows();
    Mat<T> col = im2col(x);
    Mat<T> y_col = ps.value(w_) * col;  // out_ch x (batch*len)

    Mat<T> y(batch, out_ch_ * len_);
    const auto bias = ps.value(b_);
    for (Index b = 0; b < batch; ++b)
      for (Index c = 0; c < out_ch_; ++c)
        for (Index n = 0; n < len_; ++n)
          y(b, c * len_ + n) = y_col(c, b * len_ + n) + bias(0, c);

    if (oc) {
      const std::uint64_t per = static_cast<std::uint64_t>(batch) * out_ch_ *
                                len_ * in_ch_ * kernel_;
      oc->mul += per;
      oc->add += per;  // (in_ch*kernel - 1) sums + 1 bias per output element
    }
    return y;
  }

  Mat<T> backward(ParamStore<T>& ps, const Mat<T>& dy) {
    const Index batch = dy.rows();
    Mat<T> dy_col(out_ch_, batch * len_);
    for (Index b = 0; b < batch; ++b)
      for (Index c = 0; c < out_ch_; ++c)
        for (Index n = 0; n < len_; ++n)
          dy_col(c, b * len_ + n) = dy(b, c * len_ + n);

    Mat<T> col = im2col(x_);
    ps.grad(w_).noalias() += dy_col * col.transpose();
    ps.grad(b_).row(0) += dy_col.rowwise().sum().transpose();

    Mat<T> dcol = ps.value(w_).transpose() * dy_col;
    const Index pad = (kernel_ - 1) / 2;
    Mat<T> dx = Mat<T>::Zero(batch, in_ch_ * len_);
    for (Index b = 0; b < batch; ++b)
      for (Index ci = 0; ci < in_ch_; ++ci)
        for (Index k = 0; k < kernel_; ++k)
          for (Index n = 0; n < len_; ++n) {
            const Index src = n + k - pad;
            if (src >= 0 && src < len_)
              dx(b, ci * len_ + src) += dcol(ci * kernel_ + k, b * len_ + n);
          }
    return dx;
  }

  Index out_len() const { return len_; }
  Index out_channels() const { return out_ch_; }

 private:
  Mat<T> im2col(const Mat<T>& x) const {
    const Index batch = x.rows();
    const Index pad = (kernel_ - 1) / 2;
    Mat<T> col = Mat<T>::Zero(in_ch_ * kernel_, batch * len_);
    for (Index b = 0; b < batch; ++b)
      for (Index ci = 0; ci < in_ch_; ++ci)
        for (Index k = 0; k < kernel_; ++k) {
          const Index row = ci * kernel_ + k;
          for (Index n = 0; n < len_; ++n) {
            const Index src = n + k - pad;
            if (src >= 0 && src < len_)
              col(row, b * len_ + n) = x(b, ci * len_ + src);
          }
        }
    return col;
  }

  Index in_ch_, out_ch_, kernel_, len_;
  typename ParamStore<T>::Slot w_, b_;
  Mat<T> x_;
};

// Per-channel batch normalization over (batch x positions). Batch statistics
// in Train mode, running statistics in Infer mode.
template <class T>
class BatchNorm1d {
 public:
  static constexpr double kEps = 1e-5;
  static constexpr double kMomentum = 0.9;

  BatchNorm1d(ParamStore<T>& ps, Index channels, Index len)
      : ch_(channels),
        len_(len),
        gamma_(ps.reserve(1, channels)),
        beta_(ps.reserve(1, channels)),
        running_mean_(channels, T(0)),
        running_var_(channels, T(1)) {}

  void init(ParamStore<T>& ps) {
    ps.value(gamma_).setOnes();
    ps.value(beta_).setZero();
  }

  Mat<T> forward(ParamStore<T>& ps, const Mat<T>& x, Mode mode,
                 OpCounter* oc) {
    if (x.cols() != ch_ * len_)
      throw std::invalid_argument("batch_norm: input shape");
    const Index batch = x.rows();
    const auto gamma = ps.value(gamma_);
    const auto beta = ps.value(beta_);
    Mat<T> y(batch, ch_ * len_);

    if (mode == Mode::Train) {
      const double m = static_cast<double>(batch) * len_;
      mean_.resize(ch_);
      inv_std_.resize(ch_);
      xhat_.resize(batch, ch_ * len_);
      for (Index c = 0; c < ch_; ++c) {
        double sum = 0.0, sq = 0.0;
        for (Index b = 0; b < batch; ++b)
          for (Index n = 0; n < len_; ++n) {
            const double v = x(b, c * len_ + n);
            sum += v;
            sq += v * v;
          }
        const double mean = sum / m;
        const double var = sq / m - mean * mean;
        mean_[c] = static_cast<T>(mean);
        inv_std_[c] = static_cast<T>(1.0 / std::sqrt(var + kEps));
        running_mean_[c] = static_cast<T>(kMomentum * running_mean_[c] +
                                          (1.0 - kMomentum) * mean);
        running_var_[c] = static_cast<T>(kMomentum * running_var_[c] +
                                         (1.0 - kMomentum) * var);
        for (Index b = 0; b < batch; ++b)
          for (Index n = 0; n < len_; ++n) {
            const T xh = (x(b, c * len_ + n) - mean_[c]) * inv_std_[c];
            xhat_(b, c * len_ + n) = xh;
            y(b, c * len_ + n) = gamma(0, c) * xh + beta(0, c);
          }
      }
    } else {
      for (Index c = 0; c < ch_; ++c) {
        // folded affine form: y = a*x + b2, one multiply and one add per
        // element
        const T a = gamma(0, c) /
                    static_cast<T>(
                        std::sqrt(static_cast<double>(running_var_[c]) + kEps));
        const T b2 = beta(0, c) - running_mean_[c] * a;
        for (Index b = 0; b < batch; ++b)
          for (Index n = 0; n < len_; ++n)
            y(b, c * len_ + n) = a * x(b, c * len_ + n) + b2;
      }
    }

    if (oc) {
      oc->mul += static_cast<std::uint64_t>(batch) * ch_ * len_;
      oc->add += static_cast<std::uint64_t>(batch) * ch_ * len_;
    }
    return y;
  }

  // Train-mode backward through the batch statistics.
  Mat<T> backward(ParamStore<T>& ps, const Mat<T>& dy) {
    const Index batch = dy.rows();
    const double m = static_cast<double>(batch) * len_;
    const auto gamma = ps.value(gamma_);
    auto dgamma = ps.grad(gamma_);
    auto dbeta = ps.grad(beta_);
    Mat<T> dx(batch, ch_ * len_);

    for (Index c = 0; c < ch_; ++c) {
      double sum_dy = 0.0, sum_dy_xhat = 0.0;
      for (Index b = 0; b < batch; ++b)
        for (Index n = 0; n < len_; ++n) {
          const double d = dy(b, c * len_ + n);
          sum_dy += d;
          sum_dy_xhat += d * xhat_(b, c * len_ + n);
        }
      dgamma(0, c) += static_cast<T>(sum_dy_xhat);
      dbeta(0, c) += static_cast<T>(sum_dy);
      const double scale = gamma(0, c) * inv_std_[c] / m;
      for (Index b = 0; b < batch; ++b)
        for (Index n = 0; n < len_; ++n) {
          const double d = dy(b, c * len_ + n);
          dx(b, c * len_ + n) = static_cast<T>(
              scale * (m * d - sum_dy - xhat_(b, c * len_ + n) * sum_dy_xhat));
        }
    }
    return dx;
  }

  std::vector<T>& running_mean() { return running_mean_; }
  std::vector<T>& running_var() { return running_var_; }
  const std::vector<T>& running_mean() const { return running_mean_; }
  const std::vector<T>& running_var() const { return running_var_; }

 private:
  Index ch_, len_;
  typename ParamStore<T>::Slot gamma_, beta_;
  std::vector<T> running_mean_, running_var_;
  std::vector<T> mean_, inv_std_;
  Mat<T> xhat_;
};

// Non-overlapping 1-D max pooling; trailing positions that do not fill a
// whole window are dropped (floor rule, shared with the cost model).
template <class T>
class MaxPool1d {
 public:
  MaxPool1d(Index channels, Index len, Index factor)
      : ch_(channels), len_(len), factor_(factor), out_len_(len / factor) {}

  Mat<T> forward(const Mat<T>& x, OpCounter* oc) {
    const Index batch = x.rows();
    Mat<T> y(batch, ch_ * out_len_);
    argmax_.resize(batch, ch_ * out_len_);
    for (Index b = 0; b < batch; ++b)
      for (Index c = 0; c < ch_; ++c)
        for (Index n = 0; n < out_len_; ++n) {
          Index best = n * factor_;
          T best_v = x(b, c * len_ + best);
          for (Index k = 1; k < factor_; ++k) {
            const Index i = n * factor_ + k;
            const T v = x(b, c * len_ + i);
            if (v > best_v) {
              best_v = v;
              best = i;
            }
          }
          y(b, c * out_len_ + n) = best_v;
          argmax_(b, c * out_len_ + n) = static_cast<std::int32_t>(best);
        }
    if (oc)
      oc->add += static_cast<std::uint64_t>(batch) * ch_ * out_len_ *
                 (factor_ - 1);  // one comparison per discarded candidate
    return y;
  }

  Mat<T> backward(const Mat<T>& dy) const {
    const Index batch = dy.rows();
    Mat<T> dx = Mat<T>::Zero(batch, ch_ * len_);
    for (Index b = 0; b < batch; ++b)
      for (Index c = 0; c < ch_; ++c)
        for (Index n = 0; n < out_len_; ++n)
          dx(b, c * len_ + argmax_(b, c * out_len_ + n)) +=
              dy(b, c * out_len_ + n);
    return dx;
  }

  Index out_len() const { return out_len_; }

 private:
  Index ch_, len_, factor_, out_len_;
  Eigen::Matrix<std::int32_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>
      argmax_;
};

}  // namespace ssb::nn
