#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <vector>

#include "ssb/rng.hpp"

namespace ssb::nn {

template <class T>
using Mat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <class T>
using Vec = Eigen::Matrix<T, Eigen::Dynamic, 1>;
template <class T>
using MatMap = Eigen::Map<Mat<T>>;
template <class T>
using CMatMap = Eigen::Map<const Mat<T>>;

enum class Mode { Train, Infer };

// 64-byte-aligned storage for parameter/gradient arrays. Eigen's reduction
// kernels split loops at the first aligned element, so the rounding of a dot
// product over a Map depends on the address phase of its storage. Pinning
// the base alignment makes every slot's phase a pure function of its offset,
// which keeps training bit-reproducible across processes and heap layouts.
template <class T>
struct AlignedAllocator {
  using value_type = T;
  static constexpr std::size_t kAlign = 64;

  AlignedAllocator() = default;
  template <class U>
  AlignedAllocator(const AlignedAllocator<U>&) {}

  T* allocate(std::size_t n) {
    return static_cast<T*>(
        ::operator new(n * sizeof(T), std::align_val_t(kAlign)));
  }
  void deallocate(T* p, std::size_t) noexcept {
    ::operator delete(p, std::align_val_t(kAlign));
  }
  template <class U>
  bool operator==(const AlignedAllocator<U>&) const {
    return true;
  }
};

template <class T>
using AlignedVec = std::vector<T, AlignedAllocator<T>>;

// Counts every multiply and add actually performed by the linear operations
// of a forward pass (activations are free). Used to tie the implementation
// to the closed-form cost model.
struct OpCounter {
  std::uint64_t mul = 0;
  std::uint64_t add = 0;
  std::uint64_t total() const { return mul + add; }
};

// Flat parameter storage shared by all layers of a model. Layers reserve
// slots at construction time; values and gradients live in two parallel
// arrays so the optimizer can treat the whole model as one vector.
template <class T>
class ParamStore {
 public:
  struct Slot {
    std::size_t offset = 0;
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::size_t size() const { return rows * cols; }
  };

  Slot reserve(std::size_t rows, std::size_t cols) {
    Slot s{values_.size(), rows, cols};
    values_.resize(values_.size() + rows * cols, T(0));
    grads_.resize(values_.size(), T(0));
    return s;
  }

  MatMap<T> value(const Slot& s) {
    return MatMap<T>(values_.data() + s.offset, s.rows, s.cols);
  }
  MatMap<T> grad(const Slot& s) {
    return MatMap<T>(grads_.data() + s.offset, s.rows, s.cols);
  }

  AlignedVec<T>& values() { return values_; }
  const AlignedVec<T>& values() const { return values_; }
  AlignedVec<T>& grads() { return grads_; }
  const AlignedVec<T>& grads() const { return grads_; }
  std::size_t size() const { return values_.size(); }

  void zero_grads() { std::fill(grads_.begin(), grads_.end(), T(0)); }

 private:
  AlignedVec<T> values_;
  AlignedVec<T> grads_;
};

enum class Init {
  HeUniform,      // ReLU fan-in scaling
  GlorotUniform,  // dense output heads and LSTM gates
};

template <class T>
void init_uniform(MatMap<T> m, double limit, Rng& rng) {
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      m(i, j) = static_cast<T>((2.0 * rng.uniform() - 1.0) * limit);
}

inline double init_limit(Init kind, std::size_t fan_in, std::size_t fan_out) {
  switch (kind) {
    case Init::HeUniform:
      return std::sqrt(6.0 / static_cast<double>(fan_in));
    case Init::GlorotUniform:
      return std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  }
  return 0.0;
}

}  // namespace ssb::nn
