#pragma once

#include <memory>
#include <span>
#include <stdexcept>
#include <variant>
#include <vector>

#include "ssb/costmodel.hpp"
#include "ssb/nn/layers.hpp"
#include "ssb/nn/lstm.hpp"
#include "ssb/sigsim.hpp"

namespace ssb::nn {

enum class Family { Fc, Cnn, Rnn };

inline Family family_of(const costmodel::Arch& a) {
  if (std::holds_alternative<costmodel::FcArch>(a)) return Family::Fc;
  if (std::holds_alternative<costmodel::CnnArch>(a)) return Family::Cnn;
  return Family::Rnn;
}

// Real-valued input encodings of a complex sensing window. All three carry
// the same values in fixed orders:
//   Fc  — interleaved [re0, im0, re1, im1, ...], length 2*window_len
//   Cnn — two channel planes [re0..re_{N-1}, im0..im_{N-1}]
//   Rnn — step-major, 2 features per step [re0, im0, re1, im1, ...]
template <class T>
Mat<T> encode_batch(std::span<const sigsim::SensingWindow> windows,
                    Family family) {
  if (windows.empty()) throw std::invalid_argument("encode_batch: empty");
  const Index n = static_cast<Index>(windows[0].samples.size());
  Mat<T> x(static_cast<Index>(windows.size()), 2 * n);
  for (Index b = 0; b < x.rows(); ++b) {
    const auto& s = windows[b].samples;
    if (static_cast<Index>(s.size()) != n)
      throw std::invalid_argument("encode_batch: ragged window lengths");
    if (family == Family::Cnn) {
      for (Index i = 0; i < n; ++i) {
        x(b, i) = static_cast<T>(s[i].real());
        x(b, n + i) = static_cast<T>(s[i].imag());
      }
    } else {
      for (Index i = 0; i < n; ++i) {
        x(b, 2 * i) = static_cast<T>(s[i].real());
        x(b, 2 * i + 1) = static_cast<T>(s[i].imag());
      }
    }
  }
  return x;
}

// Inverse of the Fc encoding; the encodings are bijections on the window.
template <class T>
sigsim::SensingWindow decode_fc(const Mat<T>& x, Index row) {
  sigsim::SensingWindow w;
  const Index n = x.cols() / 2;
  w.samples.resize(n);
  for (Index i = 0; i < n; ++i)
    w.samples[i] = {static_cast<float>(x(row, 2 * i)),
                    static_cast<float>(x(row, 2 * i + 1))};
  return w;
}

// A trainable binary classifier producing one logit per input row.
// forward/backward operate on the most recent batch; parameter gradients
// accumulate until zero_grads() so a mini-batch may be fed in chunks.
template <class T>
class Model {
 public:
  virtual ~Model() = default;

  virtual Vec<T> forward(const Mat<T>& x, Mode mode,
                         OpCounter* oc = nullptr) = 0;
  virtual void backward(const Vec<T>& dlogit) = 0;

  ParamStore<T>& params() { return ps_; }
  const ParamStore<T>& params() const { return ps_; }

  // batch-norm running statistics and the like; empty when none
  virtual std::vector<T> aux_state() const { return {}; }
  virtual void set_aux_state(std::span<const T> aux) {
    if (!aux.empty())
      throw std::invalid_argument("model has no auxiliary state");
  }

  virtual Index input_width() const = 0;

 protected:
  ParamStore<T> ps_;
};

template <class T>
class FcModel : public Model<T> {
 public:
  FcModel(const costmodel::FcArch& arch, Rng& rng) : arch_(arch) {
    Index prev = arch.input_size;
    for (auto w : arch.hidden) {
      hidden_.emplace_back(this->ps_, prev, w);
      prev = w;
    }
    relu_.resize(hidden_.size());
    out_ = std::make_unique<Dense<T>>(this->ps_, prev, arch.output_size);
    for (auto& d : hidden_) d.init(this->ps_, Init::HeUniform, rng);
    out_->init(this->ps_, Init::GlorotUniform, rng);
  }

  Vec<T> forward(const Mat<T>& x, Mode, OpCounter* oc = nullptr) override {
    Mat<T> cur = x;
    for (std::size_t i = 0; i < hidden_.size(); ++i)
      cur = relu_[i].forward(hidden_[i].forward(this->ps_, cur, oc));
    return out_->forward(this->ps_, cur, oc).col(0);
  }

  void backward(const Vec<T>& dlogit) override {
    Mat<T> d = out_->backward(this->ps_, dlogit);
    for (std::size_t i = hidden_.size(); i-- > 0;)
      d = hidden_[i].backward(this->ps_, relu_[i].backward(d));
  }

  Index input_width() const override { return arch_.input_size; }

 private:
  costmodel::FcArch arch_;
  std::vector<Dense<T>> hidden_;
  std::vector<ReLU<T>> relu_;
  std::unique_ptr<Dense<T>> out_;
};

template <class T>
class CnnModel : public Model<T> {
 public:
  CnnModel(const costmodel::CnnArch& arch, Rng& rng) : arch_(arch) {
    using K = costmodel::CnnLayer::Kind;
    const auto lens = arch.length_chain();
    const auto chans = arch.channel_chain();
    for (std::size_t k = 0; k < arch.layers.size(); ++k) {
      const auto& l = arch.layers[k];
      Stage st;
      switch (l.kind) {
        case K::Conv:
          st.conv = std::make_unique<Conv1d<T>>(this->ps_, chans[k],
                                                chans[k + 1], l.kernel,
                                                lens[k]);
          // ReLU follows the conv, or its batch norm when one is attached
          st.relu_after = !(k + 1 < arch.layers.size() &&
                            arch.layers[k + 1].kind == K::BatchNorm);
          break;
        case K::BatchNorm:
          st.bn =
              std::make_unique<BatchNorm1d<T>>(this->ps_, chans[k + 1],
                                               lens[k + 1]);
          st.relu_after = k > 0 && arch.layers[k - 1].kind == K::Conv;
          break;
        case K::Pool:
          st.pool = std::make_unique<MaxPool1d<T>>(chans[k], lens[k], l.pool);
          break;
      }
      stages_.push_back(std::move(st));
    }
    const Index flat = chans.back() * lens.back();
    dense_ = std::make_unique<Dense<T>>(this->ps_, flat, arch.dense_size);
    out_ = std::make_unique<Dense<T>>(this->ps_, arch.dense_size,
                                      arch.output_size);

    for (auto& st : stages_) {
      if (st.conv) st.conv->init(this->ps_, Init::HeUniform, rng);
      if (st.bn) st.bn->init(this->ps_);
    }
    dense_->init(this->ps_, Init::HeUniform, rng);
    out_->init(this->ps_, Init::GlorotUniform, rng);
  }

  Vec<T> forward(const Mat<T>& x, Mode mode,
                 OpCounter* oc = nullptr) override {
    Mat<T> cur = x;
    for (auto& st : stages_) {
      if (st.conv) cur = st.conv->forward(this->ps_, cur, oc);
      if (st.bn) cur = st.bn->forward(this->ps_, cur, mode, oc);
      if (st.pool) cur = st.pool->forward(cur, oc);
      if (st.relu_after) cur = st.relu.forward(cur);
    }
    cur = dense_relu_.forward(dense_->forward(this->ps_, cur, oc));
    return out_->forward(this->ps_, cur, oc).col(0);
  }

  void backward(const Vec<T>& dlogit) override {
    Mat<T> d = out_->backward(this->ps_, dlogit);
    d = dense_->backward(this->ps_, dense_relu_.backward(d));
    for (std::size_t i = stages_.size(); i-- > 0;) {
      auto& st = stages_[i];
      if (st.relu_after) d = st.relu.backward(d);
      if (st.pool) d = st.pool->backward(d);
      if (st.bn) d = st.bn->backward(this->ps_, d);
      if (st.conv) d = st.conv->backward(this->ps_, d);
    }
  }

  std::vector<T> aux_state() const override {
    std::vector<T> aux;
    for (const auto& st : stages_)
      if (st.bn) {
        aux.insert(aux.end(), st.bn->running_mean().begin(),
                   st.bn->running_mean().end());
        aux.insert(aux.end(), st.bn->running_var().begin(),
                   st.bn->running_var().end());
      }
    return aux;
  }

  void set_aux_state(std::span<const T> aux) override {
    std::size_t pos = 0;
    for (auto& st : stages_)
      if (st.bn) {
        auto& rm = st.bn->running_mean();
        auto& rv = st.bn->running_var();
        if (pos + rm.size() + rv.size() > aux.size())
          throw std::invalid_argument("aux state size mismatch");
        std::copy_n(aux.begin() + pos, rm.size(), rm.begin());
        pos += rm.size();
        std::copy_n(aux.begin() + pos, rv.size(), rv.begin());
        pos += rv.size();
      }
    if (pos != aux.size())
      throw std::invalid_argument("aux state size mismatch");
  }

  Index input_width() const override {
    return arch_.input_channels * arch_.input_len;
  }

 private:
  struct Stage {
    std::unique_ptr<Conv1d<T>> conv;
    std::unique_ptr<BatchNorm1d<T>> bn;
    std::unique_ptr<MaxPool1d<T>> pool;
    ReLU<T> relu;
    bool relu_after = false;
  };

  costmodel::CnnArch arch_;
  std::vector<Stage> stages_;
  std::unique_ptr<Dense<T>> dense_;
  ReLU<T> dense_relu_;
  std::unique_ptr<Dense<T>> out_;
};

// LSTM classifier; bidirectional models run an independent stack over the
// reversed sequence and read out from the concatenated final states.
template <class T>
class RnnModel : public Model<T> {
 public:
  RnnModel(const costmodel::RnnArch& arch, Rng& rng) : arch_(arch) {
    Index prev = arch.input_features;
    for (auto h : arch.hidden) {
      fwd_.emplace_back(this->ps_, prev, h, arch.seq_len);
      prev = h;
    }
    if (arch.bidirectional) {
      prev = arch.input_features;
      for (auto h : arch.hidden) {
        bwd_.emplace_back(this->ps_, prev, h, arch.seq_len);
        prev = h;
      }
    }
    const Index readout_in =
        arch.hidden.back() * (arch.bidirectional ? 2 : 1);
    out_ = std::make_unique<Dense<T>>(this->ps_, readout_in, arch.output_size);
    for (auto& l : fwd_) l.init(this->ps_, rng);
    for (auto& l : bwd_) l.init(this->ps_, rng);
    out_->init(this->ps_, Init::GlorotUniform, rng);
  }

  Vec<T> forward(const Mat<T>& x, Mode, OpCounter* oc = nullptr) override {
    const Index h = arch_.hidden.back();
    Mat<T> seq = x;
    for (auto& l : fwd_) seq = l.forward(this->ps_, seq, oc);
    Mat<T> head = seq.rightCols(h);

    if (!bwd_.empty()) {
      x_rev_ = reverse_steps(x, arch_.input_features);
      Mat<T> rseq = x_rev_;
      for (auto& l : bwd_) rseq = l.forward(this->ps_, rseq, oc);
      Mat<T> both(x.rows(), 2 * h);
      both.leftCols(h) = head;
      both.rightCols(h) = rseq.rightCols(h);
      head = std::move(both);
    }
    return out_->forward(this->ps_, head, oc).col(0);
  }

  void backward(const Vec<T>& dlogit) override {
    const Index h = arch_.hidden.back();
    Mat<T> dhead = out_->backward(this->ps_, dlogit);
    backprop_stack(fwd_, dhead.leftCols(h));
    if (!bwd_.empty()) backprop_stack(bwd_, dhead.rightCols(h));
  }

  Index input_width() const override {
    return arch_.seq_len * arch_.input_features;
  }

 private:
  static Mat<T> reverse_steps(const Mat<T>& x, Index features) {
    const Index steps = x.cols() / features;
    Mat<T> r(x.rows(), x.cols());
    for (Index t = 0; t < steps; ++t)
      r.middleCols(t * features, features) =
          x.middleCols((steps - 1 - t) * features, features);
    return r;
  }

  void backprop_stack(std::vector<Lstm<T>>& stack, const Mat<T>& d_final) {
    Mat<T> d_seq;  // empty: topmost layer only receives the final-state grad
    Mat<T> d_last = d_final;
    for (std::size_t i = stack.size(); i-- > 0;) {
      d_seq = stack[i].backward(this->ps_, d_seq, d_last);
      d_last = Mat<T>();  // lower layers consume the full sequence gradient
    }
  }

  costmodel::RnnArch arch_;
  std::vector<Lstm<T>> fwd_, bwd_;
  Mat<T> x_rev_;
  std::unique_ptr<Dense<T>> out_;
};

template <class T>
std::unique_ptr<Model<T>> build_model(const costmodel::Arch& arch,
                                      std::uint64_t init_seed) {
  costmodel::validate(arch);
  Rng rng(Rng::mix(init_seed, 0x6d6f64656cULL));
  if (const auto* fc = std::get_if<costmodel::FcArch>(&arch))
    return std::make_unique<FcModel<T>>(*fc, rng);
  if (const auto* cnn = std::get_if<costmodel::CnnArch>(&arch))
    return std::make_unique<CnnModel<T>>(*cnn, rng);
  return std::make_unique<RnnModel<T>>(std::get<costmodel::RnnArch>(arch),
                                       rng);
}

}  // namespace ssb::nn
