#pragma once

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "skysweep/common/errors.hpp"
#include "skysweep/core/ops.hpp"
#include "skysweep/geometry/camera.hpp"
#include "skysweep/geometry/warp.hpp"
#include "skysweep/net/params.hpp"

namespace skysweep {

template <typename T>
Var<T> extract_features(Tape<T>& t, const Var<T>& image, FeatureExtractorParams<T>& feat) {
  const Shape& s = image.value.shape();
  if (s.rank != 3 || s.extent[0] != 3)
    throw contract_error("extract_features: input must be [3,H,W]");
  if (s.extent[1] % 2 || s.extent[2] % 2)
    throw contract_error("extract_features: extents must be even, got " + s.str());
  Var<T> x = image;
  for (std::size_t i = 0; i < feat.layers.size(); ++i) {
    ConvParam<T>& l = feat.layers[i];
    x = conv2d(t, x, l.w, l.b, l.stride, Padding::same);
    if (i + 1 < feat.layers.size()) x = relu(t, x);
  }
  return x;
}

// Variance cost map over the reference features and the warped source
// features.
template <typename T>
Var<T> aggregate_variance(Tape<T>& t, const std::vector<Var<T>>& warped) {
  if (warped.size() < 2) throw contract_error("aggregate_variance: needs N >= 2 views");
  return variance_across(t, warped);
}

template <typename T>
Var<T> conv_gru_step(Tape<T>& t, const Var<T>& x, const Var<T>& h_prev,
                     GruCellParams<T>& cell) {
  if (!(x.value.shape() == h_prev.value.shape()))
    throw contract_error("conv_gru_step: state shape " + h_prev.value.shape().str() +
                         " does not match input " + x.value.shape().str());
  if (x.value.shape().extent[0] != cell.channels)
    throw contract_error("conv_gru_step: cell expects " + std::to_string(cell.channels) +
                         " channels");
  Var<T> hx = concat_channels(t, {h_prev, x});
  Var<T> r = sigmoid(t, conv2d(t, hx, cell.r.w, cell.r.b, 1, Padding::same));
  Var<T> u = sigmoid(t, conv2d(t, hx, cell.u.w, cell.u.b, 1, Padding::same));
  Var<T> rhx = concat_channels(t, {hadamard(t, r, h_prev), x});
  Var<T> c = tanh_act(t, conv2d(t, rhx, cell.c.w, cell.c.b, 1, Padding::same));
  Var<T> keep = hadamard(t, affine(t, u, T(-1), T(1)), h_prev);
  return add(t, keep, hadamard(t, u, c));
}

// One depth step: encode the cost map over four scales, pass each scale
// through its recurrent cell (updating `states` in place), decode with
// per-scale additions, and upsample to the image resolution.
template <typename T>
Var<T> red_regularize_step(Tape<T>& t, const Var<T>& cost, std::vector<Var<T>>& states,
                           REDParams<T>& red) {
  if (cost.value.shape().rank != 3 || cost.value.shape().extent[0] != 16)
    throw contract_error("red_regularize_step: cost must be [16,h,w]");
  if (states.size() != 4) throw contract_error("red_regularize_step: need 4 states");
  std::vector<Var<T>> enc;
  Var<T> x = cost;
  for (auto& e : red.enc) {
    x = relu(t, conv2d(t, x, e.w, e.b, e.stride, Padding::same));
    enc.push_back(x);
  }
  for (int i = 0; i < 4; ++i) states[i] = conv_gru_step(t, enc[i], states[i], red.cells[i]);
  Var<T> d = states[3];
  for (int i = 0; i < 3; ++i) {
    ConvParam<T>& dc = red.dec[i];
    d = relu(t, add(t, transposed_conv2d(t, d, dc.w, dc.b, dc.stride), states[2 - i]));
  }
  return transposed_conv2d(t, d, red.head.w, red.head.b, red.head.stride);
}

// One multi-view sample, views in reference-first order.
template <typename T>
struct UnitInputs {
  std::vector<Tensor<T>> images;  // each [3,H,W]; index 0 is the reference
  std::vector<CameraModel> cams;
};

// Full pipeline: shared feature extraction, per-depth homography warping,
// variance cost maps, recurrent regularization across the depth loop, and a
// depth softmax. Returns a [D,Hout,Wout] probability volume. In inference
// (tape not recording) the regularized maps are written straight into one
// preallocated volume and the softmax runs in place, so peak memory beyond
// that volume does not depend on D.
template <typename T>
Var<T> forward_volume(Tape<T>& t, const UnitInputs<T>& unit, const DepthPlan& plan,
                      RedNetParams<T>& net) {
  plan.validate();
  const std::size_t n = unit.images.size();
  if (n < 2) throw contract_error("forward_volume: need N >= 2 views");
  if (unit.cams.size() != n) throw contract_error("forward_volume: cameras do not match views");
  const Shape& s0 = unit.images[0].shape();
  for (const auto& img : unit.images)
    if (!(img.shape() == s0))
      throw contract_error("forward_volume: views must share extents, got " + img.shape().str() +
                           " vs " + s0.str());
  const int img_h = s0.extent[1];
  const int img_w = s0.extent[2];
  const int down = net.feat.quarter ? 8 : 2;
  if (img_h % (down * 8) || img_w % (down * 8))
    throw contract_error("forward_volume: extents must be divisible by " +
                         std::to_string(down * 8) + ", got " + s0.str());
  for (std::size_t v = 0; v < n; ++v) {
    if (unit.cams[v].width != img_w || unit.cams[v].height != img_h)
      throw contract_error("forward_volume: camera " + std::to_string(v) +
                           " extents do not match the image");
  }

  std::vector<Var<T>> feats;
  feats.reserve(n);
  for (std::size_t v = 0; v < n; ++v)
    feats.push_back(extract_features(t, t.recording() ? t.input(unit.images[v])
                                                      : Var<T>{unit.images[v], -1},
                                     net.feat));
  const int fh = feats[0].value.shape().extent[1];
  const int fw = feats[0].value.shape().extent[2];
  const double scale = net.feat.feature_scale();
  const int out_h = 2 * fh;
  const int out_w = 2 * fw;

  std::vector<Var<T>> states;
  const int chans[4] = {8, 16, 32, 64};
  for (int i = 0; i < 4; ++i) {
    Tensor<T> zero = Tensor<T>::zeros({chans[i], fh >> i, fw >> i});
    states.push_back(t.recording() ? t.input(std::move(zero)) : Var<T>{std::move(zero), -1});
  }

  std::vector<Var<T>> maps;
  Tensor<T> volume;
  if (t.recording())
    maps.reserve(static_cast<std::size_t>(plan.count));
  else
    volume = Tensor<T>::uninit({plan.count, out_h, out_w});
  const std::int64_t out_plane = static_cast<std::int64_t>(out_h) * out_w;

  for (int i = 0; i < plan.count; ++i) {
    const double d = plan.depth_of(i);
    std::vector<Var<T>> views;
    views.reserve(n);
    views.push_back(feats[0]);
    for (std::size_t v = 1; v < n; ++v)
      views.push_back(
          warp_bilinear(t, feats[v], sweep_homography(unit.cams[0], unit.cams[v], d), scale));
    Var<T> cost = aggregate_variance(t, views);
    Var<T> m = red_regularize_step(t, cost, states, net.red);
    if (t.recording()) {
      maps.push_back(std::move(m));
    } else {
      std::memcpy(volume.data() + i * out_plane, m.value.data(),
                  sizeof(T) * static_cast<std::size_t>(out_plane));
    }
  }
  if (t.recording()) return softmax_depth(t, stack_depth(t, maps));
  return softmax_depth(t, Var<T>{std::move(volume), -1});
}

// Cross-entropy against the nearest plane index; masks out invalid ground
// truth and depths outside the plan's coverage.
template <typename T>
Var<T> rednet_loss(Tape<T>& t, const Var<T>& volume, const Tensor<float>& gt,
                   const DepthPlan& plan) {
  const Shape& s = volume.value.shape();
  if (s.rank != 3) throw contract_error("rednet_loss: volume must be [D,H,W]");
  if (gt.shape().rank != 2 || gt.shape().extent[0] != s.extent[1] ||
      gt.shape().extent[1] != s.extent[2])
    throw contract_error("rednet_loss: ground truth extents " + gt.shape().str() +
                         " do not match volume " + s.str());
  const int d = s.extent[0];
  Tensor<std::int32_t> target = Tensor<std::int32_t>::zeros({s.extent[1], s.extent[2]});
  Tensor<std::uint8_t> mask = Tensor<std::uint8_t>::zeros({s.extent[1], s.extent[2]});
  const float* g = gt.data();
  std::int32_t* tg = target.data();
  std::uint8_t* mk = mask.data();
  for (std::int64_t i = 0; i < gt.numel(); ++i) {
    if (!(g[i] > 0)) continue;
    const long k = std::lround((g[i] - plan.d_min) / plan.interval);
    if (k < 0 || k >= d) continue;
    tg[i] = static_cast<std::int32_t>(k);
    mk[i] = 1;
  }
  return cross_entropy_masked(t, volume, target, mask);
}

struct DepthInference {
  Tensor<float> depth;       // [H,W]
  Tensor<float> confidence;  // max probability per pixel
};

// Winner-take-all depth (ties go to the lower plane index). With refine set,
// a quadratic fit over the argmax neighborhood adds a sub-plane offset.
template <typename T>
DepthInference infer_depth(const Tensor<T>& volume, const DepthPlan& plan, bool refine = false) {
  const Shape& s = volume.shape();
  if (s.rank != 3) throw contract_error("infer_depth: volume must be [D,H,W]");
  if (s.extent[0] != plan.count)
    throw contract_error("infer_depth: volume has " + std::to_string(s.extent[0]) +
                         " planes, plan has " + std::to_string(plan.count));
  const int d = s.extent[0];
  const int h = s.extent[1];
  const int w = s.extent[2];
  const std::int64_t plane = static_cast<std::int64_t>(h) * w;
  DepthInference out;
  out.depth = Tensor<float>::uninit({h, w});
  out.confidence = Tensor<float>::uninit({h, w});
  const T* p = volume.data();
  float* dep = out.depth.data();
  float* conf = out.confidence.data();
  for (std::int64_t i = 0; i < plane; ++i) {
    int best = 0;
    T best_p = p[i];
    for (int k = 1; k < d; ++k) {
      const T v = p[k * plane + i];
      if (v > best_p) {
        best_p = v;
        best = k;
      }
    }
    double depth = plan.depth_of(best);
    if (refine && best > 0 && best + 1 < d) {
      const double lo = static_cast<double>(p[(best - 1) * plane + i]);
      const double mid = static_cast<double>(best_p);
      const double hi = static_cast<double>(p[(best + 1) * plane + i]);
      const double denom = lo - 2 * mid + hi;
      if (denom < 0) {
        const double off = std::clamp(0.5 * (lo - hi) / denom, -0.5, 0.5);
        depth += off * plan.interval;
      }
    }
    dep[i] = static_cast<float>(depth);
    conf[i] = static_cast<float>(best_p);
  }
  return out;
}

// Confidence raster: flat binary, 3 little-endian int32 header (magic, H, W)
// then H*W 32-bit floats.
inline constexpr std::int32_t kConfidenceMagic = 0x464e4f43;  // "CONF"

inline void write_confidence(const std::string& path, const Tensor<float>& conf) {
  if (conf.shape().rank != 2) throw contract_error("write_confidence: raster must be [H,W]");
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw format_error("write_confidence: cannot open " + path);
  const std::int32_t header[3] = {kConfidenceMagic, conf.shape().extent[0],
                                  conf.shape().extent[1]};
  os.write(reinterpret_cast<const char*>(header), sizeof header);
  os.write(reinterpret_cast<const char*>(conf.data()),
           static_cast<std::streamsize>(sizeof(float) * conf.numel()));
  if (!os) throw format_error("write_confidence: write failed: " + path);
}

inline Tensor<float> read_confidence(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw format_error("read_confidence: cannot open " + path);
  std::int32_t header[3] = {};
  is.read(reinterpret_cast<char*>(header), sizeof header);
  if (!is || header[0] != kConfidenceMagic)
    throw format_error("read_confidence: bad header in " + path);
  if (header[1] <= 0 || header[2] <= 0)
    throw format_error("read_confidence: bad extents in " + path);
  Tensor<float> conf = Tensor<float>::uninit({header[1], header[2]});
  is.read(reinterpret_cast<char*>(conf.data()),
          static_cast<std::streamsize>(sizeof(float) * conf.numel()));
  if (!is) throw format_error("read_confidence: truncated data in " + path);
  return conf;
}

}  // namespace skysweep
