#pragma once

#include <string>
#include <utility>

#include "skysweep/core/tensor.hpp"

namespace skysweep {

// A learned tensor with its gradient and optimizer accumulator, all of
// identical shape. Names must be unique within a model; they key the
// checkpoint format.
template <typename T>
struct Parameter {
  std::string name;
  Tensor<T> value;
  Tensor<T> grad;
  Tensor<T> accum;

  Parameter() = default;
  Parameter(std::string name_, Tensor<T> value_)
      : name(std::move(name_)),
        value(std::move(value_)),
        grad(Tensor<T>::zeros(value.shape())),
        accum(Tensor<T>::zeros(value.shape())) {}

  void clear_grad() { grad.fill(T(0)); }
};

}  // namespace skysweep
