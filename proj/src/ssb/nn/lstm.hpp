#pragma once

#include <stdexcept>
#include <vector>

#include "ssb/nn/common.hpp"

namespace ssb::nn {

// Single-direction LSTM over a step-major sequence (row = example, column
// t*features + f). Gate order in the fused weight matrix: input, forget,
// cell, output. Initial h and c are zero; the forget-gate bias starts at 1.
template <class T>
class Lstm {
 public:
  using Index = Eigen::Index;

  Lstm(ParamStore<T>& ps, Index features, Index hidden, Index steps)
      : f_(features),
        h_(hidden),
        t_(steps),
        w_(ps.reserve(features + hidden, 4 * hidden)),
        b_(ps.reserve(1, 4 * hidden)) {}

  void init(ParamStore<T>& ps, Rng& rng) {
    init_uniform(ps.value(w_), init_limit(Init::GlorotUniform, f_ + h_, h_),
                 rng);
    auto b = ps.value(b_);
    b.setZero();
    b.row(0).segment(h_, h_).setConstant(T(1));  // forget gate
  }

  // Returns the full hidden sequence (batch x steps*hidden); the final
  // hidden state is its last step.
  Mat<T> forward(ParamStore<T>& ps, const Mat<T>& x, OpCounter* oc) {
    if (x.cols() != t_ * f_) throw std::invalid_argument("lstm: input shape");
    const Index batch = x.rows();
    x_ = x;
    const auto w = ps.value(w_);
    const auto bias = ps.value(b_);

    h_seq_.resize(batch, t_ * h_);
    c_all_.assign(t_ + 1, Mat<T>());
    gates_.assign(t_, Mat<T>());
    tanh_c_.assign(t_, Mat<T>());
    c_all_[0] = Mat<T>::Zero(batch, h_);
    Mat<T> h_prev = Mat<T>::Zero(batch, h_);

    Mat<T> z(batch, f_ + h_);
    for (Index t = 0; t < t_; ++t) {
      z.leftCols(f_) = x.middleCols(t * f_, f_);
      z.rightCols(h_) = h_prev;
      Mat<T> g = z * w;
      g.rowwise() += bias.row(0);

      auto ig = g.leftCols(h_).array();
      auto fg = g.middleCols(h_, h_).array();
      auto cg = g.middleCols(2 * h_, h_).array();
      auto og = g.rightCols(h_).array();
      ig = T(1) / (T(1) + (-ig).exp());
      fg = T(1) / (T(1) + (-fg).exp());
      cg = cg.tanh();
      og = T(1) / (T(1) + (-og).exp());

      Mat<T> c = (fg * c_all_[t].array() + ig * cg).matrix();
      tanh_c_[t] = c.array().tanh().matrix();
      Mat<T> h = (og * tanh_c_[t].array()).matrix();

      c_all_[t + 1] = std::move(c);
      gates_[t] = std::move(g);
      h_seq_.middleCols(t * h_, h_) = h;
      h_prev = std::move(h);
    }

    if (oc) {
      const std::uint64_t bt = static_cast<std::uint64_t>(batch) * t_;
      oc->mul += bt * (f_ + h_) * 4 * h_;  // gate matmuls
      oc->add += bt * (f_ + h_) * 4 * h_;  // sums + bias
      oc->mul += bt * 3 * h_;              // f*c, i*g, o*tanh(c)
      oc->add += bt * h_;                  // cell-state sum
    }
    return h_seq_;
  }

  // d_seq: gradient w.r.t. the full hidden sequence (may be empty for "no
  // sequence consumers"); d_h_last: extra gradient on the final hidden state.
  Mat<T> backward(ParamStore<T>& ps, const Mat<T>& d_seq,
                  const Mat<T>& d_h_last) {
    const Index batch = x_.rows();
    const auto w = ps.value(w_);
    auto dw = ps.grad(w_);
    auto db = ps.grad(b_);

    Mat<T> dx(batch, t_ * f_);
    Mat<T> dh = Mat<T>::Zero(batch, h_);
    Mat<T> dc = Mat<T>::Zero(batch, h_);
    if (d_h_last.size() > 0) dh = d_h_last;

    Mat<T> z(batch, f_ + h_);
    for (Index t = t_ - 1; t >= 0; --t) {
      if (d_seq.size() > 0) dh += d_seq.middleCols(t * h_, h_);

      const auto& g = gates_[t];
      auto ig = g.leftCols(h_).array();
      auto fg = g.middleCols(h_, h_).array();
      auto cg = g.middleCols(2 * h_, h_).array();
      auto og = g.rightCols(h_).array();
      const auto tc = tanh_c_[t].array();

      Mat<T> d_o = (dh.array() * tc * og * (T(1) - og)).matrix();
      dc.array() += dh.array() * og * (T(1) - tc * tc);
      Mat<T> d_i = (dc.array() * cg * ig * (T(1) - ig)).matrix();
      Mat<T> d_f =
          (dc.array() * c_all_[t].array() * fg * (T(1) - fg)).matrix();
      Mat<T> d_c = (dc.array() * ig * (T(1) - cg * cg)).matrix();

      Mat<T> dg(batch, 4 * h_);
      dg.leftCols(h_) = d_i;
      dg.middleCols(h_, h_) = d_f;
      dg.middleCols(2 * h_, h_) = d_c;
      dg.rightCols(h_) = d_o;

      z.leftCols(f_) = x_.middleCols(t * f_, f_);
      z.rightCols(h_) =
          t == 0 ? Mat<T>::Zero(batch, h_).eval() : h_seq_.middleCols((t - 1) * h_, h_).eval();

      dw.noalias() += z.transpose() * dg;
      db.row(0) += dg.colwise().sum();

      Mat<T> dz = dg * w.transpose();
      dx.middleCols(t * f_, f_) = dz.leftCols(f_);
      dh = dz.rightCols(h_);
      dc = (dc.array() * fg).matrix();
    }
    return dx;
  }

  Index hidden() const { return h_; }
  Index steps() const { return t_; }

 private:
  Index f_, h_, t_;
  typename ParamStore<T>::Slot w_, b_;
  Mat<T> x_;
  Mat<T> h_seq_;
  std::vector<Mat<T>> c_all_, gates_, tanh_c_;
};

}  // namespace ssb::nn
