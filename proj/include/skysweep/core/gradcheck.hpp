#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "skysweep/common/rng.hpp"
#include "skysweep/core/parameter.hpp"
#include "skysweep/core/tensor.hpp"

namespace skysweep {

inline double rel_err(double a, double b, double floor = 1e-2) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

// Central finite difference of eval() with respect to one coordinate; the
// coordinate is restored before returning.
template <typename Eval>
double fd_slot(Eval&& eval, double& slot, double step = 1e-6) {
  const double keep = slot;
  slot = keep + step;
  const double up = eval();
  slot = keep - step;
  const double dn = eval();
  slot = keep;
  return (up - dn) / (2.0 * step);
}

struct GradCheckSummary {
  double max_rel_err = 0.0;
  int checked = 0;
  std::string worst;
};

// Compares analytic parameter gradients against central differences at
// randomly sampled coordinates. eval() must re-run the forward pass and
// return the scalar loss; analytic[i] pairs with params[i].
template <typename Eval>
GradCheckSummary fd_check_params(Eval&& eval, const std::vector<Parameter<double>*>& params,
                                 const std::vector<Tensor<double>>& analytic, Rng& rng,
                                 int samples_per_param, double step = 1e-6,
                                 double floor = 1e-2) {
  GradCheckSummary out;
  for (std::size_t pi = 0; pi < params.size(); ++pi) {
    Parameter<double>* p = params[pi];
    const auto n = p->value.numel();
    const int take = static_cast<int>(std::min<std::int64_t>(n, samples_per_param));
    for (int s = 0; s < take; ++s) {
      const std::int64_t at = take == static_cast<int>(n) ? s : rng.uniform_int(0, n - 1);
      const double fd = fd_slot(eval, p->value.data()[at], step);
      const double an = analytic[pi].data()[at];
      const double e = rel_err(an, fd, floor);
      ++out.checked;
      if (e > out.max_rel_err) {
        out.max_rel_err = e;
        out.worst = p->name + "[" + std::to_string(at) + "] analytic " + std::to_string(an) +
                    " fd " + std::to_string(fd);
      }
    }
  }
  return out;
}

}  // namespace skysweep
