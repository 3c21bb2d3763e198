#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

namespace ssb::nn {

// Adam with bias correction over a flat parameter vector.
template <class T>
class Adam {
 public:
  Adam(std::size_t n, double beta1 = 0.9, double beta2 = 0.999,
       double eps = 1e-8)
      : m_(n, 0.0), v_(n, 0.0), beta1_(beta1), beta2_(beta2), eps_(eps) {}

  void step(std::span<T> params, std::span<const T> grads, double lr) {
    ++t_;
    const double c1 = 1.0 - std::pow(beta1_, t_);
    const double c2 = 1.0 - std::pow(beta2_, t_);
    for (std::size_t i = 0; i < params.size(); ++i) {
      const double g = grads[i];
      m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * g;
      v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * g * g;
      const double mhat = m_[i] / c1;
      const double vhat = v_[i] / c2;
      params[i] -= static_cast<T>(lr * mhat / (std::sqrt(vhat) + eps_));
    }
  }

  std::int64_t timestep() const { return t_; }

 private:
  std::vector<double> m_, v_;
  double beta1_, beta2_, eps_;
  std::int64_t t_ = 0;
};

}  // namespace ssb::nn
