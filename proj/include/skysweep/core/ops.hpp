#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "skysweep/common/errors.hpp"
#include "skysweep/core/conv_detail.hpp"
#include "skysweep/core/parameter.hpp"
#include "skysweep/core/tape.hpp"
#include "skysweep/core/tensor.hpp"

namespace skysweep {

enum class Padding { same, valid };

// y = w * x + b over [C,H,W] inputs. Weights are [outC,inC,kH,kW], bias [outC].
// SAME keeps ceil(H/stride) x ceil(W/stride); VALID requires the kernel to fit.
template <typename T>
Var<T> conv2d(Tape<T>& t, const Var<T>& x, Parameter<T>& w, Parameter<T>& b, int stride,
              Padding padding = Padding::same) {
  const Tensor<T>& xv = x.value;
  if (xv.shape().rank != 3) throw contract_error("conv2d: input must be [C,H,W]");
  const Shape& ws = w.value.shape();
  if (ws.rank != 4) throw contract_error("conv2d: weights must be [outC,inC,kH,kW]");
  const int out_c = ws.extent[0];
  const int in_c = ws.extent[1];
  const int kh = ws.extent[2];
  const int kw = ws.extent[3];
  if (xv.shape().extent[0] != in_c)
    throw contract_error("conv2d: input has " + std::to_string(xv.shape().extent[0]) +
                         " channels, weights expect " + std::to_string(in_c));
  if (b.value.shape().rank != 1 || b.value.shape().extent[0] != out_c)
    throw contract_error("conv2d: bias must be [outC]");
  if (stride < 1) throw contract_error("conv2d: stride must be positive");
  const int h = xv.shape().extent[1];
  const int wd = xv.shape().extent[2];
  detail::ConvGeom g;
  if (padding == Padding::same) {
    g = detail::same_geom(h, wd, kh, kw, stride);
  } else {
    if (h < kh || wd < kw) throw contract_error("conv2d: VALID kernel larger than input");
    g = detail::valid_geom(h, wd, kh, kw, stride);
  }
  const int k = in_c * kh * kw;
  const int p = g.out_h * g.out_w;
  Tensor<T> col = Tensor<T>::uninit({k, p});
  detail::im2col(xv.data(), in_c, g, col.data());
  Tensor<T> y = Tensor<T>::uninit({out_c, g.out_h, g.out_w});
  detail::gemm(false, false, out_c, p, k, T(1), w.value.data(), k, col.data(), p, T(0), y.data(),
               p);
  {
    const T* bias = b.value.data();
    T* yd = y.data();
    for (int oc = 0; oc < out_c; ++oc) {
      const T bv = bias[oc];
      T* row = yd + static_cast<std::int64_t>(oc) * p;
      for (int i = 0; i < p; ++i) row[i] += bv;
    }
  }
  require_finite(y, "conv2d");
  if (!t.recording()) return {std::move(y), -1};

  const int wn = t.use(w).node;
  const int bn = t.use(b).node;
  auto bp = [xv, wt = w.value, g, in_c, out_c, k, p, xn = x.node, wn,
             bn](Tape<T>& tp, const Tensor<T>& gy) {
    {
      Tensor<T>& gb = tp.grad_buffer(bn);
      T* gbd = gb.data();
      const T* gyd = gy.data();
      for (int oc = 0; oc < out_c; ++oc) {
        T s = 0;
        const T* row = gyd + static_cast<std::int64_t>(oc) * p;
        for (int i = 0; i < p; ++i) s += row[i];
        gbd[oc] += s;
      }
    }
    Tensor<T> col = Tensor<T>::uninit({k, p});
    detail::im2col(xv.data(), in_c, g, col.data());
    {
      Tensor<T>& gw = tp.grad_buffer(wn);
      detail::gemm(false, true, out_c, k, p, T(1), gy.data(), p, col.data(), p, T(1), gw.data(),
                   k);
    }
    if (xn >= 0) {
      Tensor<T> gcol = Tensor<T>::uninit({k, p});
      detail::gemm(true, false, k, p, out_c, T(1), wt.data(), k, gy.data(), p, T(0), gcol.data(),
                   p);
      Tensor<T>& gx = tp.grad_buffer(xn);
      detail::col2im_add(gcol.data(), in_c, g, gx.data());
    }
  };
  return t.record(std::move(y), std::move(bp));
}

// Fractionally-strided convolution. Weights are [inC,outC,kH,kW]; the output
// is exactly [outC, stride*H, stride*W], matching the SAME conv of the same
// geometry run in reverse.
template <typename T>
Var<T> transposed_conv2d(Tape<T>& t, const Var<T>& x, Parameter<T>& w, Parameter<T>& b,
                         int stride) {
  const Tensor<T>& xv = x.value;
  if (xv.shape().rank != 3) throw contract_error("transposed_conv2d: input must be [C,H,W]");
  const Shape& ws = w.value.shape();
  if (ws.rank != 4) throw contract_error("transposed_conv2d: weights must be [inC,outC,kH,kW]");
  const int in_c = ws.extent[0];
  const int out_c = ws.extent[1];
  const int kh = ws.extent[2];
  const int kw = ws.extent[3];
  if (xv.shape().extent[0] != in_c)
    throw contract_error("transposed_conv2d: input has " +
                         std::to_string(xv.shape().extent[0]) + " channels, weights expect " +
                         std::to_string(in_c));
  if (b.value.shape().rank != 1 || b.value.shape().extent[0] != out_c)
    throw contract_error("transposed_conv2d: bias must be [outC]");
  if (stride < 1) throw contract_error("transposed_conv2d: stride must be positive");
  const int h = xv.shape().extent[1];
  const int wd = xv.shape().extent[2];
  detail::ConvGeom g;
  g.in_h = stride * h;
  g.in_w = stride * wd;
  g.out_h = h;
  g.out_w = wd;
  g.kh = kh;
  g.kw = kw;
  g.stride = stride;
  g.pad_top = std::max(kh - stride, 0) / 2;
  g.pad_left = std::max(kw - stride, 0) / 2;

  const int k2 = out_c * kh * kw;
  const int p = h * wd;
  Tensor<T> col = Tensor<T>::uninit({k2, p});
  detail::gemm(true, false, k2, p, in_c, T(1), w.value.data(), k2, xv.data(), p, T(0), col.data(),
               p);
  Tensor<T> y = Tensor<T>::zeros({out_c, g.in_h, g.in_w});
  detail::col2im_add(col.data(), out_c, g, y.data());
  {
    const T* bias = b.value.data();
    T* yd = y.data();
    const std::int64_t plane = static_cast<std::int64_t>(g.in_h) * g.in_w;
    for (int oc = 0; oc < out_c; ++oc) {
      const T bv = bias[oc];
      T* row = yd + oc * plane;
      for (std::int64_t i = 0; i < plane; ++i) row[i] += bv;
    }
  }
  require_finite(y, "transposed_conv2d");
  if (!t.recording()) return {std::move(y), -1};

  const int wn = t.use(w).node;
  const int bn = t.use(b).node;
  auto bp = [xv, wt = w.value, g, in_c, out_c, k2, p, xn = x.node, wn,
             bn](Tape<T>& tp, const Tensor<T>& gy) {
    {
      Tensor<T>& gb = tp.grad_buffer(bn);
      T* gbd = gb.data();
      const T* gyd = gy.data();
      const std::int64_t plane = static_cast<std::int64_t>(g.in_h) * g.in_w;
      for (int oc = 0; oc < out_c; ++oc) {
        T s = 0;
        const T* row = gyd + oc * plane;
        for (std::int64_t i = 0; i < plane; ++i) s += row[i];
        gbd[oc] += s;
      }
    }
    Tensor<T> gcol = Tensor<T>::uninit({k2, p});
    detail::im2col(gy.data(), out_c, g, gcol.data());
    {
      Tensor<T>& gw = tp.grad_buffer(wn);
      detail::gemm(false, true, in_c, k2, p, T(1), xv.data(), p, gcol.data(), p, T(1), gw.data(),
                   k2);
    }
    if (xn >= 0) {
      Tensor<T>& gx = tp.grad_buffer(xn);
      detail::gemm(false, false, in_c, p, k2, T(1), wt.data(), k2, gcol.data(), p, T(1), gx.data(),
                   p);
    }
  };
  return t.record(std::move(y), std::move(bp));
}

template <typename T>
Var<T> relu(Tape<T>& t, const Var<T>& x) {
  const auto n = x.value.numel();
  Tensor<T> y = Tensor<T>::uninit(x.value.shape());
  const T* xd = x.value.data();
  T* yd = y.data();
  for (std::int64_t i = 0; i < n; ++i) yd[i] = xd[i] > T(0) ? xd[i] : T(0);
  if (!t.recording()) return {std::move(y), -1};
  auto bp = [xv = x.value, xn = x.node, n](Tape<T>& tp, const Tensor<T>& gy) {
    if (xn < 0) return;
    Tensor<T>& gx = tp.grad_buffer(xn);
    T* gxd = gx.data();
    const T* xd = xv.data();
    const T* gyd = gy.data();
    for (std::int64_t i = 0; i < n; ++i)
      if (xd[i] > T(0)) gxd[i] += gyd[i];
  };
  return t.record(std::move(y), std::move(bp));
}

template <typename T>
Var<T> sigmoid(Tape<T>& t, const Var<T>& x) {
  const auto n = x.value.numel();
  Tensor<T> y = Tensor<T>::uninit(x.value.shape());
  const T* xd = x.value.data();
  T* yd = y.data();
  for (std::int64_t i = 0; i < n; ++i) {
    const T v = xd[i];
    if (v >= T(0)) {
      yd[i] = T(1) / (T(1) + std::exp(-v));
    } else {
      const T e = std::exp(v);
      yd[i] = e / (T(1) + e);
    }
  }
  if (!t.recording()) return {std::move(y), -1};
  auto bp = [yv = y, xn = x.node, n](Tape<T>& tp, const Tensor<T>& gy) {
    if (xn < 0) return;
    Tensor<T>& gx = tp.grad_buffer(xn);
    T* gxd = gx.data();
    const T* ydd = yv.data();
    const T* gyd = gy.data();
    for (std::int64_t i = 0; i < n; ++i) gxd[i] += gyd[i] * ydd[i] * (T(1) - ydd[i]);
  };
  return t.record(std::move(y), std::move(bp));
}

template <typename T>
Var<T> tanh_act(Tape<T>& t, const Var<T>& x) {
  const auto n = x.value.numel();
  Tensor<T> y = Tensor<T>::uninit(x.value.shape());
  const T* xd = x.value.data();
  T* yd = y.data();
  for (std::int64_t i = 0; i < n; ++i) yd[i] = std::tanh(xd[i]);
  if (!t.recording()) return {std::move(y), -1};
  auto bp = [yv = y, xn = x.node, n](Tape<T>& tp, const Tensor<T>& gy) {
    if (xn < 0) return;
    Tensor<T>& gx = tp.grad_buffer(xn);
    T* gxd = gx.data();
    const T* ydd = yv.data();
    const T* gyd = gy.data();
    for (std::int64_t i = 0; i < n; ++i) gxd[i] += gyd[i] * (T(1) - ydd[i] * ydd[i]);
  };
  return t.record(std::move(y), std::move(bp));
}

template <typename T>
Var<T> add(Tape<T>& t, const Var<T>& a, const Var<T>& b) {
  if (!(a.value.shape() == b.value.shape()))
    throw contract_error("add: shape mismatch " + a.value.shape().str() + " vs " +
                         b.value.shape().str());
  const auto n = a.value.numel();
  Tensor<T> y = Tensor<T>::uninit(a.value.shape());
  const T* ad = a.value.data();
  const T* bd = b.value.data();
  T* yd = y.data();
  for (std::int64_t i = 0; i < n; ++i) yd[i] = ad[i] + bd[i];
  if (!t.recording()) return {std::move(y), -1};
  auto bp = [an = a.node, bn = b.node](Tape<T>& tp, const Tensor<T>& gy) {
    if (an >= 0) tp.add_grad(an, gy);
    if (bn >= 0) tp.add_grad(bn, gy);
  };
  return t.record(std::move(y), std::move(bp));
}

template <typename T>
Var<T> hadamard(Tape<T>& t, const Var<T>& a, const Var<T>& b) {
  if (!(a.value.shape() == b.value.shape()))
    throw contract_error("hadamard: shape mismatch " + a.value.shape().str() + " vs " +
                         b.value.shape().str());
  const auto n = a.value.numel();
  Tensor<T> y = Tensor<T>::uninit(a.value.shape());
  const T* ad = a.value.data();
  const T* bd = b.value.data();
  T* yd = y.data();
  for (std::int64_t i = 0; i < n; ++i) yd[i] = ad[i] * bd[i];
  if (!t.recording()) return {std::move(y), -1};
  auto bp = [av = a.value, bv = b.value, an = a.node, bn = b.node,
             n](Tape<T>& tp, const Tensor<T>& gy) {
    const T* gyd = gy.data();
    if (an >= 0) {
      T* g = tp.grad_buffer(an).data();
      const T* bd = bv.data();
      for (std::int64_t i = 0; i < n; ++i) g[i] += gyd[i] * bd[i];
    }
    if (bn >= 0) {
      T* g = tp.grad_buffer(bn).data();
      const T* ad = av.data();
      for (std::int64_t i = 0; i < n; ++i) g[i] += gyd[i] * ad[i];
    }
  };
  return t.record(std::move(y), std::move(bp));
}

template <typename T>
Var<T> affine(Tape<T>& t, const Var<T>& x, T scale, T shift) {
  const auto n = x.value.numel();
  Tensor<T> y = Tensor<T>::uninit(x.value.shape());
  const T* xd = x.value.data();
  T* yd = y.data();
  for (std::int64_t i = 0; i < n; ++i) yd[i] = scale * xd[i] + shift;
  if (!t.recording()) return {std::move(y), -1};
  auto bp = [xn = x.node, scale, n](Tape<T>& tp, const Tensor<T>& gy) {
    if (xn < 0) return;
    T* g = tp.grad_buffer(xn).data();
    const T* gyd = gy.data();
    for (std::int64_t i = 0; i < n; ++i) g[i] += scale * gyd[i];
  };
  return t.record(std::move(y), std::move(bp));
}

// Concatenates [Ci,H,W] inputs along the channel axis.
template <typename T>
Var<T> concat_channels(Tape<T>& t, const std::vector<Var<T>>& xs) {
  if (xs.empty()) throw contract_error("concat_channels: no inputs");
  const int h = xs[0].value.shape().extent[1];
  const int w = xs[0].value.shape().extent[2];
  int total_c = 0;
  for (const auto& x : xs) {
    const Shape& s = x.value.shape();
    if (s.rank != 3) throw contract_error("concat_channels: inputs must be [C,H,W]");
    if (s.extent[1] != h || s.extent[2] != w)
      throw contract_error("concat_channels: spatial mismatch " + s.str());
    total_c += s.extent[0];
  }
  Tensor<T> y = Tensor<T>::uninit({total_c, h, w});
  const std::int64_t plane = static_cast<std::int64_t>(h) * w;
  {
    T* dst = y.data();
    for (const auto& x : xs) {
      const std::int64_t sz = x.value.numel();
      std::memcpy(dst, x.value.data(), sizeof(T) * static_cast<std::size_t>(sz));
      dst += sz;
    }
  }
  if (!t.recording()) return {std::move(y), -1};
  std::vector<int> nodes;
  std::vector<int> chans;
  nodes.reserve(xs.size());
  chans.reserve(xs.size());
  for (const auto& x : xs) {
    nodes.push_back(x.node);
    chans.push_back(x.value.shape().extent[0]);
  }
  auto bp = [nodes, chans, plane](Tape<T>& tp, const Tensor<T>& gy) {
    const T* src = gy.data();
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      const std::int64_t sz = chans[i] * plane;
      if (nodes[i] >= 0) {
        T* g = tp.grad_buffer(nodes[i]).data();
        for (std::int64_t j = 0; j < sz; ++j) g[j] += src[j];
      }
      src += sz;
    }
  };
  return t.record(std::move(y), std::move(bp));
}

// Stacks D per-plane maps ([1,H,W] or [H,W]) into one [D,H,W] volume.
template <typename T>
Var<T> stack_depth(Tape<T>& t, const std::vector<Var<T>>& xs) {
  if (xs.empty()) throw contract_error("stack_depth: no inputs");
  const Shape& s0 = xs[0].value.shape();
  if (s0.rank != 2 && !(s0.rank == 3 && s0.extent[0] == 1))
    throw contract_error("stack_depth: inputs must be [H,W] or [1,H,W]");
  const int h = s0.rank == 2 ? s0.extent[0] : s0.extent[1];
  const int w = s0.rank == 2 ? s0.extent[1] : s0.extent[2];
  const std::int64_t plane = static_cast<std::int64_t>(h) * w;
  const int d = static_cast<int>(xs.size());
  Tensor<T> y = Tensor<T>::uninit({d, h, w});
  std::vector<int> nodes;
  nodes.reserve(xs.size());
  for (int i = 0; i < d; ++i) {
    if (xs[i].value.numel() != plane)
      throw contract_error("stack_depth: plane " + std::to_string(i) + " shape mismatch");
    std::memcpy(y.data() + i * plane, xs[i].value.data(),
                sizeof(T) * static_cast<std::size_t>(plane));
    nodes.push_back(xs[i].node);
  }
  if (!t.recording()) return {std::move(y), -1};
  auto bp = [nodes, plane](Tape<T>& tp, const Tensor<T>& gy) {
    const T* src = gy.data();
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      if (nodes[i] >= 0) {
        T* g = tp.grad_buffer(nodes[i]).data();
        for (std::int64_t j = 0; j < plane; ++j) g[j] += src[j];
      }
      src += plane;
    }
  };
  return t.record(std::move(y), std::move(bp));
}

// Per-pixel variance over N same-shaped maps, computed as the mean squared
// deviation from the per-pixel mean (biased, divides by N).
template <typename T>
Var<T> variance_across(Tape<T>& t, const std::vector<Var<T>>& xs) {
  if (xs.size() < 2) throw contract_error("variance_across: needs at least two inputs");
  const Shape& s0 = xs[0].value.shape();
  for (const auto& x : xs)
    if (!(x.value.shape() == s0))
      throw contract_error("variance_across: shape mismatch " + x.value.shape().str());
  const auto n = xs[0].value.numel();
  const T inv_n = T(1) / static_cast<T>(xs.size());
  Tensor<T> mean = Tensor<T>::zeros(s0);
  {
    T* md = mean.data();
    for (const auto& x : xs) {
      const T* xd = x.value.data();
      for (std::int64_t i = 0; i < n; ++i) md[i] += xd[i];
    }
    for (std::int64_t i = 0; i < n; ++i) md[i] *= inv_n;
  }
  Tensor<T> y = Tensor<T>::zeros(s0);
  {
    T* yd = y.data();
    const T* md = mean.data();
    for (const auto& x : xs) {
      const T* xd = x.value.data();
      for (std::int64_t i = 0; i < n; ++i) {
        const T dv = xd[i] - md[i];
        yd[i] += dv * dv;
      }
    }
    for (std::int64_t i = 0; i < n; ++i) yd[i] *= inv_n;
  }
  require_finite(y, "variance_across");
  if (!t.recording()) return {std::move(y), -1};
  std::vector<Tensor<T>> vals;
  std::vector<int> nodes;
  vals.reserve(xs.size());
  nodes.reserve(xs.size());
  for (const auto& x : xs) {
    vals.push_back(x.value);
    nodes.push_back(x.node);
  }
  auto bp = [vals, nodes, mean, inv_n, n](Tape<T>& tp, const Tensor<T>& gy) {
    const T* gyd = gy.data();
    const T* md = mean.data();
    const T two_inv_n = T(2) * inv_n;
    for (std::size_t i = 0; i < vals.size(); ++i) {
      if (nodes[i] < 0) continue;
      T* g = tp.grad_buffer(nodes[i]).data();
      const T* xd = vals[i].data();
      for (std::int64_t j = 0; j < n; ++j) g[j] += gyd[j] * two_inv_n * (xd[j] - md[j]);
    }
  };
  return t.record(std::move(y), std::move(bp));
}

// Softmax along the depth axis of a [D,H,W] volume. With recording off the
// input buffer is normalized in place, so inference keeps a single volume
// live regardless of how it was produced.
template <typename T>
Var<T> softmax_depth(Tape<T>& t, const Var<T>& x) {
  const Shape& s = x.value.shape();
  if (s.rank != 3) throw contract_error("softmax_depth: input must be [D,H,W]");
  const int d = s.extent[0];
  const int h = s.extent[1];
  const int w = s.extent[2];
  if (d < 1) throw contract_error("softmax_depth: empty depth axis");
  const std::int64_t plane = static_cast<std::int64_t>(h) * w;
  Tensor<T> y = t.recording() ? Tensor<T>::uninit(s) : x.value;
  {
    Tensor<T> mx = Tensor<T>::full({h, w}, -std::numeric_limits<T>::infinity());
    T* mxd = mx.data();
    const T* xd = x.value.data();
    for (int k = 0; k < d; ++k) {
      const T* row = xd + k * plane;
      for (std::int64_t i = 0; i < plane; ++i)
        if (row[i] > mxd[i]) mxd[i] = row[i];
    }
    Tensor<T> sum = Tensor<T>::zeros({h, w});
    T* sd = sum.data();
    T* yd = y.data();
    for (int k = 0; k < d; ++k) {
      const T* row = xd + k * plane;
      T* out = yd + k * plane;
      for (std::int64_t i = 0; i < plane; ++i) {
        const T e = std::exp(row[i] - mxd[i]);
        out[i] = e;
        sd[i] += e;
      }
    }
    for (int k = 0; k < d; ++k) {
      T* out = yd + k * plane;
      for (std::int64_t i = 0; i < plane; ++i) out[i] /= sd[i];
    }
  }
  require_finite(y, "softmax_depth");
  if (!t.recording()) return {std::move(y), -1};
  auto bp = [yv = y, xn = x.node, d, plane](Tape<T>& tp, const Tensor<T>& gy) {
    if (xn < 0) return;
    Tensor<T> dot = Tensor<T>::zeros({static_cast<int>(plane)});
    T* dd = dot.data();
    const T* yd = yv.data();
    const T* gyd = gy.data();
    for (int k = 0; k < d; ++k) {
      const T* yr = yd + k * plane;
      const T* gr = gyd + k * plane;
      for (std::int64_t i = 0; i < plane; ++i) dd[i] += yr[i] * gr[i];
    }
    T* gx = tp.grad_buffer(xn).data();
    for (int k = 0; k < d; ++k) {
      const T* yr = yd + k * plane;
      const T* gr = gyd + k * plane;
      T* gxr = gx + k * plane;
      for (std::int64_t i = 0; i < plane; ++i) gxr[i] += yr[i] * (gr[i] - dd[i]);
    }
  };
  return t.record(std::move(y), std::move(bp));
}

// Mean negative log-likelihood of the target plane index over masked pixels.
// p is a [D,H,W] probability volume; target holds plane indices, mask selects
// the pixels that contribute. Probabilities are clamped at 1e-12 before log.
template <typename T>
Var<T> cross_entropy_masked(Tape<T>& t, const Var<T>& p, const Tensor<std::int32_t>& target,
                            const Tensor<std::uint8_t>& mask) {
  const Shape& s = p.value.shape();
  if (s.rank != 3) throw contract_error("cross_entropy_masked: input must be [D,H,W]");
  const int d = s.extent[0];
  const int h = s.extent[1];
  const int w = s.extent[2];
  const std::int64_t plane = static_cast<std::int64_t>(h) * w;
  if (target.shape().rank != 2 || target.shape().extent[0] != h || target.shape().extent[1] != w)
    throw contract_error("cross_entropy_masked: target must be [H,W]");
  if (!(mask.shape() == target.shape()))
    throw contract_error("cross_entropy_masked: mask must be [H,W]");
  const T eps = static_cast<T>(1e-12);
  std::int64_t m = 0;
  double acc = 0.0;
  const T* pd = p.value.data();
  const std::int32_t* td = target.data();
  const std::uint8_t* md = mask.data();
  for (std::int64_t i = 0; i < plane; ++i) {
    if (!md[i]) continue;
    const std::int32_t k = td[i];
    if (k < 0 || k >= d)
      throw contract_error("cross_entropy_masked: target index " + std::to_string(k) +
                           " outside [0," + std::to_string(d) + ")");
    const T pv = pd[k * plane + i];
    acc -= std::log(static_cast<double>(std::max(pv, eps)));
    ++m;
  }
  if (m == 0) throw degenerate_error("cross_entropy_masked: mask selects no pixels");
  Tensor<T> y = Tensor<T>::full({1}, static_cast<T>(acc / static_cast<double>(m)));
  require_finite(y, "cross_entropy_masked");
  if (!t.recording()) return {std::move(y), -1};
  auto bp = [pv = p.value, target, mask, pn = p.node, plane, m,
             eps](Tape<T>& tp, const Tensor<T>& gy) {
    if (pn < 0) return;
    const T gs = gy.data()[0] / static_cast<T>(m);
    T* gp = tp.grad_buffer(pn).data();
    const T* pd = pv.data();
    const std::int32_t* td = target.data();
    const std::uint8_t* md = mask.data();
    for (std::int64_t i = 0; i < plane; ++i) {
      if (!md[i]) continue;
      const std::int64_t at = static_cast<std::int64_t>(td[i]) * plane + i;
      if (pd[at] >= eps) gp[at] -= gs / pd[at];
    }
  };
  return t.record(std::move(y), std::move(bp));
}

template <typename T>
Var<T> reduce_sum(Tape<T>& t, const Var<T>& x) {
  const auto n = x.value.numel();
  const T* xd = x.value.data();
  double acc = 0.0;
  for (std::int64_t i = 0; i < n; ++i) acc += static_cast<double>(xd[i]);
  Tensor<T> y = Tensor<T>::full({1}, static_cast<T>(acc));
  if (!t.recording()) return {std::move(y), -1};
  auto bp = [xn = x.node, n](Tape<T>& tp, const Tensor<T>& gy) {
    if (xn < 0) return;
    const T g = gy.data()[0];
    T* gx = tp.grad_buffer(xn).data();
    for (std::int64_t i = 0; i < n; ++i) gx[i] += g;
  };
  return t.record(std::move(y), std::move(bp));
}

}  // namespace skysweep
