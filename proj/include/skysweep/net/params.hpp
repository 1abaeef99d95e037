#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "skysweep/common/rng.hpp"
#include "skysweep/core/parameter.hpp"

namespace skysweep {

namespace detail {

template <typename T>
Tensor<T> uniform_fan_in(Rng& rng, const Shape& shape, int fan_in) {
  Tensor<T> t = Tensor<T>::uninit(shape);
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  T* p = t.data();
  for (std::int64_t i = 0; i < t.numel(); ++i)
    p[i] = static_cast<T>(rng.uniform(-bound, bound));
  return t;
}

}  // namespace detail

template <typename T>
struct ConvParam {
  Parameter<T> w, b;
  int stride = 1;
};

// Forward convolution weights [outC,inC,k,k]; uniform +-1/sqrt(fan_in),
// zero bias.
template <typename T>
ConvParam<T> make_conv(const std::string& name, int in_c, int out_c, int k, int stride,
                       Rng& rng) {
  ConvParam<T> p;
  p.w = Parameter<T>(name + ".w",
                     detail::uniform_fan_in<T>(rng, Shape{out_c, in_c, k, k}, in_c * k * k));
  p.b = Parameter<T>(name + ".b", Tensor<T>::zeros({out_c}));
  p.stride = stride;
  return p;
}

// Transposed convolution weights [inC,outC,k,k].
template <typename T>
ConvParam<T> make_tconv(const std::string& name, int in_c, int out_c, int k, int stride,
                        Rng& rng) {
  ConvParam<T> p;
  p.w = Parameter<T>(name + ".w",
                     detail::uniform_fan_in<T>(rng, Shape{in_c, out_c, k, k}, in_c * k * k));
  p.b = Parameter<T>(name + ".b", Tensor<T>::zeros({out_c}));
  p.stride = stride;
  return p;
}

// Shared 2D extractor: channels 8,8,16,16,16; 3x3 stride 1 except layer 3
// (5x5 stride 2); ReLU after every layer but the last. The quarter
// configuration appends two more stride-2 3x3 layers, moving features from
// half to one-eighth resolution.
template <typename T>
struct FeatureExtractorParams {
  std::vector<ConvParam<T>> layers;
  bool quarter = false;

  FeatureExtractorParams() = default;
  FeatureExtractorParams(Rng& rng, bool quarter_) : quarter(quarter_) {
    layers.push_back(make_conv<T>("feat.l1", 3, 8, 3, 1, rng));
    layers.push_back(make_conv<T>("feat.l2", 8, 8, 3, 1, rng));
    layers.push_back(make_conv<T>("feat.l3", 8, 16, 5, 2, rng));
    layers.push_back(make_conv<T>("feat.l4", 16, 16, 3, 1, rng));
    layers.push_back(make_conv<T>("feat.l5", 16, 16, 3, 1, rng));
    if (quarter) {
      layers.push_back(make_conv<T>("feat.l6", 16, 16, 3, 2, rng));
      layers.push_back(make_conv<T>("feat.l7", 16, 16, 3, 2, rng));
    }
  }

  // Image-to-feature coordinate scale.
  double feature_scale() const { return quarter ? 0.125 : 0.5; }
};

template <typename T>
struct GruCellParams {
  ConvParam<T> r, u, c;
  int channels = 0;

  GruCellParams() = default;
  GruCellParams(const std::string& name, int channels_, Rng& rng) : channels(channels_) {
    r = make_conv<T>(name + ".r", 2 * channels_, channels_, 3, 1, rng);
    u = make_conv<T>(name + ".u", 2 * channels_, channels_, 3, 1, rng);
    c = make_conv<T>(name + ".c", 2 * channels_, channels_, 3, 1, rng);
  }
};

// Recurrent encoder-decoder: 4-scale encoder (16->8 stride 1, then 8->16,
// 16->32, 32->64 stride 2), one GRU cell per scale, decoder transposed convs
// 64->32->16->8 with per-scale recurrent outputs added, head transposed conv
// 8->1 doubling to the input resolution.
template <typename T>
struct REDParams {
  std::vector<ConvParam<T>> enc;   // 4
  std::vector<GruCellParams<T>> cells;  // 4, channels 8/16/32/64
  std::vector<ConvParam<T>> dec;   // 3: 64->32, 32->16, 16->8
  ConvParam<T> head;               // 8->1

  REDParams() = default;
  explicit REDParams(Rng& rng) {
    enc.push_back(make_conv<T>("red.enc1", 16, 8, 3, 1, rng));
    enc.push_back(make_conv<T>("red.enc2", 8, 16, 3, 2, rng));
    enc.push_back(make_conv<T>("red.enc3", 16, 32, 3, 2, rng));
    enc.push_back(make_conv<T>("red.enc4", 32, 64, 3, 2, rng));
    cells.emplace_back("red.gru1", 8, rng);
    cells.emplace_back("red.gru2", 16, rng);
    cells.emplace_back("red.gru3", 32, rng);
    cells.emplace_back("red.gru4", 64, rng);
    dec.push_back(make_tconv<T>("red.dec3", 64, 32, 3, 2, rng));
    dec.push_back(make_tconv<T>("red.dec2", 32, 16, 3, 2, rng));
    dec.push_back(make_tconv<T>("red.dec1", 16, 8, 3, 2, rng));
    head = make_tconv<T>("red.head", 8, 1, 3, 2, rng);
  }
};

template <typename T>
struct RedNetParams {
  FeatureExtractorParams<T> feat;
  REDParams<T> red;

  RedNetParams() = default;
  RedNetParams(std::uint64_t seed, bool quarter) {
    Rng rng(seed);
    feat = FeatureExtractorParams<T>(rng, quarter);
    red = REDParams<T>(rng);
  }

  std::vector<Parameter<T>*> parameters() {
    std::vector<Parameter<T>*> out;
    auto push = [&](ConvParam<T>& c) {
      out.push_back(&c.w);
      out.push_back(&c.b);
    };
    for (auto& l : feat.layers) push(l);
    for (auto& e : red.enc) push(e);
    for (auto& g : red.cells) {
      push(g.r);
      push(g.u);
      push(g.c);
    }
    for (auto& d : red.dec) push(d);
    push(red.head);
    return out;
  }

  std::vector<const Parameter<T>*> parameters() const {
    auto mut = const_cast<RedNetParams*>(this)->parameters();
    return {mut.begin(), mut.end()};
  }

  std::int64_t parameter_count() const {
    std::int64_t n = 0;
    for (const Parameter<T>* p : parameters()) n += p->value.numel();
    return n;
  }

  std::int64_t extractor_parameter_count() const {
    std::int64_t n = 0;
    for (const auto& l : feat.layers) n += l.w.value.numel() + l.b.value.numel();
    return n;
  }
};

}  // namespace skysweep
