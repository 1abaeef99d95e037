#pragma once

#include <cmath>
#include <vector>

#include "skysweep/common/errors.hpp"
#include "skysweep/core/parameter.hpp"

namespace skysweep {

// RMSProp with the accumulator update acc = rho*acc + (1-rho)*g^2 and the
// step value -= lr * g / (sqrt(acc) + eps). Gradients are cleared afterwards.
template <typename T>
void rmsprop_step(const std::vector<Parameter<T>*>& params, T lr, T rho = T(0.9),
                  T eps = T(1e-8)) {
  if (!(lr > T(0))) throw contract_error("rmsprop_step: learning rate must be positive");
  if (!(rho > T(0) && rho < T(1))) throw contract_error("rmsprop_step: rho must be in (0,1)");
  for (Parameter<T>* p : params) {
    const auto n = p->value.numel();
    T* v = p->value.data();
    T* g = p->grad.data();
    T* a = p->accum.data();
    for (std::int64_t i = 0; i < n; ++i) {
      a[i] = rho * a[i] + (T(1) - rho) * g[i] * g[i];
      v[i] -= lr * g[i] / (std::sqrt(a[i]) + eps);
    }
    require_finite(p->value, ("rmsprop_step: parameter " + p->name).c_str());
    p->clear_grad();
  }
}

}  // namespace skysweep
