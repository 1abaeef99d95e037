#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "skysweep/common/errors.hpp"
#include "skysweep/core/alloc.hpp"

namespace skysweep {

// Dense shape of order 1..4 in batch-channel-height-width layout. Lower-order
// tensors use the trailing convention (C,H,W), (H,W), (N).
struct Shape {
  std::array<int, 4> extent{1, 1, 1, 1};
  int rank = 0;

  Shape() = default;
  Shape(std::initializer_list<int> dims) {
    if (dims.size() < 1 || dims.size() > 4) {
      throw contract_error("Shape: order must be 1..4, got " + std::to_string(dims.size()));
    }
    rank = static_cast<int>(dims.size());
    int i = 0;
    for (int d : dims) {
      if (d <= 0) throw contract_error("Shape: extents must be positive");
      extent[i++] = d;
    }
  }

  int operator[](int i) const { return extent[i]; }

  std::int64_t numel() const {
    std::int64_t n = 1;
    for (int i = 0; i < rank; ++i) n *= extent[i];
    return n;
  }

  bool operator==(const Shape& o) const {
    if (rank != o.rank) return false;
    for (int i = 0; i < rank; ++i)
      if (extent[i] != o.extent[i]) return false;
    return true;
  }
  bool operator!=(const Shape& o) const { return !(*this == o); }

  std::string str() const {
    std::string s = "[";
    for (int i = 0; i < rank; ++i) {
      if (i) s += "x";
      s += std::to_string(extent[i]);
    }
    return s + "]";
  }
};

// Contiguous dense tensor with shared ownership of its buffer. Copies are
// shallow; operations always allocate fresh outputs unless documented
// otherwise. All allocations flow through the live-bytes counters.
template <typename T>
class Tensor {
 public:
  Tensor() = default;

  static Tensor zeros(Shape shape) { return Tensor(shape, /*zero=*/true); }
  static Tensor uninit(Shape shape) { return Tensor(shape, /*zero=*/false); }

  static Tensor full(Shape shape, T v) {
    Tensor t(shape, false);
    T* p = t.data();
    for (std::int64_t i = 0; i < t.numel(); ++i) p[i] = v;
    return t;
  }

  static Tensor from(Shape shape, const std::vector<T>& values) {
    Tensor t(shape, false);
    if (static_cast<std::int64_t>(values.size()) != t.numel()) {
      throw contract_error("Tensor::from: value count " + std::to_string(values.size()) +
                           " does not match shape " + shape.str());
    }
    std::copy(values.begin(), values.end(), t.data());
    return t;
  }

  bool empty() const { return !data_; }
  const Shape& shape() const { return shape_; }
  int rank() const { return shape_.rank; }
  int dim(int i) const { return shape_[i]; }
  std::int64_t numel() const { return shape_.numel(); }

  T* data() { return data_.get(); }
  const T* data() const { return data_.get(); }

  T& operator[](std::int64_t i) { return data_.get()[i]; }
  const T& operator[](std::int64_t i) const { return data_.get()[i]; }

  Tensor clone() const {
    Tensor t(shape_, false);
    std::copy(data(), data() + numel(), t.data());
    return t;
  }

  void fill(T v) {
    T* p = data();
    for (std::int64_t i = 0; i < numel(); ++i) p[i] = v;
  }

  bool all_finite() const {
    // Single comparison catches both Inf and NaN (NaN fails any compare).
    const T limit = std::numeric_limits<T>::max();
    const T* p = data();
    bool ok = true;
    for (std::int64_t i = 0; i < numel(); ++i) ok &= (std::fabs(p[i]) <= limit);
    return ok;
  }

 private:
  Tensor(Shape shape, bool zero) : shape_(shape) {
    const std::int64_t n = shape.numel();
    const std::int64_t bytes = n * static_cast<std::int64_t>(sizeof(T));
    detail::count_alloc(bytes);
    T* raw = zero ? new T[n]() : new T[n];
    data_ = std::shared_ptr<T[]>(raw, [bytes](T* p) {
      delete[] p;
      detail::count_free(bytes);
    });
  }

  Shape shape_;
  std::shared_ptr<T[]> data_;
};

template <typename T>
void require_shape(const Tensor<T>& t, const Shape& want, const char* who) {
  if (t.shape() != want) {
    throw contract_error(std::string(who) + ": expected shape " + want.str() + ", got " +
                         t.shape().str());
  }
}

template <typename T>
void require_finite(const Tensor<T>& t, const char* who) {
  if (!t.all_finite()) {
    throw numeric_error(std::string(who) + ": non-finite values in output");
  }
}

}  // namespace skysweep
