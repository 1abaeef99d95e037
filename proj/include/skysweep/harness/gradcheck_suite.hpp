#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "skysweep/common/rng.hpp"
#include "skysweep/core/gradcheck.hpp"
#include "skysweep/core/ops.hpp"
#include "skysweep/core/tape.hpp"
#include "skysweep/geometry/warp.hpp"
#include "skysweep/net/rednet.hpp"

namespace skysweep {

struct GradCheckRow {
  std::string op;
  double max_rel_err = 0;
  double threshold = 0;
  int checked = 0;
  std::string worst;

  bool pass() const { return max_rel_err < threshold; }
};

namespace detail {

inline Tensor<double> random_tensor(const Shape& s, Rng& rng, double lo = -1, double hi = 1) {
  Tensor<double> t = Tensor<double>::uninit(s);
  for (std::int64_t i = 0; i < t.numel(); ++i) t.data()[i] = rng.uniform(lo, hi);
  return t;
}

// Magnitudes bounded away from zero so central differences never straddle
// the ReLU kink.
inline Tensor<double> random_signed_tensor(const Shape& s, Rng& rng, double lo = 0.1,
                                           double hi = 1.0) {
  Tensor<double> t = Tensor<double>::uninit(s);
  for (std::int64_t i = 0; i < t.numel(); ++i)
    t.data()[i] = rng.uniform(lo, hi) * (rng.uniform_int(0, 1) ? 1.0 : -1.0);
  return t;
}

// Random projection turning a tensor output into an informative scalar.
template <typename Fwd>
GradCheckRow run_probe_check(const std::string& name, double threshold, std::uint64_t seed,
                             std::vector<Parameter<double>*> params, Fwd&& forward,
                             int samples_per_param = 6, double step = 1e-6) {
  Rng rng(hash_u64(seed ^ 0x6772616463686b31ull));
  Tensor<double> probe;  // sized lazily from the first forward output
  auto loss_of = [&]() -> double {
    Tape<double> t;
    Var<double> y = forward(t);
    if (probe.shape().rank == 0) probe = random_tensor(y.value.shape(), rng);
    Var<double> loss = reduce_sum(t, hadamard(t, y, t.input(probe)));
    return loss.value.data()[0];
  };
  auto loss_and_grads = [&]() -> std::vector<Tensor<double>> {
    for (auto* p : params) p->clear_grad();
    Tape<double> t;
    Var<double> y = forward(t);
    if (probe.shape().rank == 0) probe = random_tensor(y.value.shape(), rng);
    Var<double> loss = reduce_sum(t, hadamard(t, y, t.input(probe)));
    t.backward(loss);
    std::vector<Tensor<double>> grads;
    grads.reserve(params.size());
    for (auto* p : params) grads.push_back(p->grad.clone());
    return grads;
  };
  const std::vector<Tensor<double>> analytic = loss_and_grads();
  GradCheckSummary s = fd_check_params(loss_of, params, analytic, rng, samples_per_param, step);
  return {name, s.max_rel_err, threshold, s.checked, s.worst};
}

// As above but forward() already returns the scalar loss Var.
template <typename Fwd>
GradCheckRow run_scalar_check(const std::string& name, double threshold, std::uint64_t seed,
                              std::vector<Parameter<double>*> params, Fwd&& forward,
                              int samples_per_param = 6, double step = 1e-6) {
  Rng rng(hash_u64(seed ^ 0x6772616463686b32ull));
  auto loss_of = [&]() -> double {
    Tape<double> t;
    return forward(t).value.data()[0];
  };
  auto loss_and_grads = [&]() -> std::vector<Tensor<double>> {
    for (auto* p : params) p->clear_grad();
    Tape<double> t;
    Var<double> loss = forward(t);
    t.backward(loss);
    std::vector<Tensor<double>> grads;
    grads.reserve(params.size());
    for (auto* p : params) grads.push_back(p->grad.clone());
    return grads;
  };
  const std::vector<Tensor<double>> analytic = loss_and_grads();
  GradCheckSummary s = fd_check_params(loss_of, params, analytic, rng, samples_per_param, step);
  return {name, s.max_rel_err, threshold, s.checked, s.worst};
}

inline std::vector<Parameter<double>*> conv_params(ConvParam<double>& c) {
  return {&c.w, &c.b};
}

}  // namespace detail

// Central-difference verification of every differentiable operation, each on
// small random double-precision fixtures. Per-op tolerance 1e-4; the
// end-to-end network spot check runs at 1e-3.
inline std::vector<GradCheckRow> gradcheck_suite() {
  using detail::random_signed_tensor;
  using detail::random_tensor;
  std::vector<GradCheckRow> rows;
  const double tol = 1e-4;

  {
    Rng rng(11);
    Parameter<double> x("x", random_tensor({2, 6, 7}, rng));
    auto conv = make_conv<double>("w", 2, 3, 3, 1, rng);
    auto ps = detail::conv_params(conv);
    ps.push_back(&x);
    rows.push_back(detail::run_probe_check("conv2d_s1_same", tol, 11, ps, [&](Tape<double>& t) {
      return conv2d(t, t.use(x), conv.w, conv.b, 1, Padding::same);
    }));
  }
  {
    Rng rng(12);
    Parameter<double> x("x", random_tensor({2, 7, 6}, rng));
    auto conv = make_conv<double>("w", 2, 3, 5, 2, rng);
    auto ps = detail::conv_params(conv);
    ps.push_back(&x);
    rows.push_back(detail::run_probe_check("conv2d_s2_same", tol, 12, ps, [&](Tape<double>& t) {
      return conv2d(t, t.use(x), conv.w, conv.b, 2, Padding::same);
    }));
  }
  {
    Rng rng(13);
    Parameter<double> x("x", random_tensor({3, 4, 5}, rng));
    auto conv = make_tconv<double>("w", 3, 2, 3, 2, rng);
    auto ps = detail::conv_params(conv);
    ps.push_back(&x);
    rows.push_back(
        detail::run_probe_check("transposed_conv2d_s2", tol, 13, ps, [&](Tape<double>& t) {
          return transposed_conv2d(t, t.use(x), conv.w, conv.b, 2);
        }));
  }
  {
    Rng rng(14);
    Parameter<double> x("x", random_signed_tensor({2, 5, 5}, rng));
    rows.push_back(detail::run_probe_check("relu", tol, 14, {&x}, [&](Tape<double>& t) {
      return relu(t, t.use(x));
    }));
  }
  {
    Rng rng(15);
    Parameter<double> x("x", random_tensor({2, 4, 4}, rng, -2, 2));
    rows.push_back(detail::run_probe_check("sigmoid", tol, 15, {&x}, [&](Tape<double>& t) {
      return sigmoid(t, t.use(x));
    }));
  }
  {
    Rng rng(16);
    Parameter<double> x("x", random_tensor({2, 4, 4}, rng, -2, 2));
    rows.push_back(detail::run_probe_check("tanh", tol, 16, {&x}, [&](Tape<double>& t) {
      return tanh_act(t, t.use(x));
    }));
  }
  {
    Rng rng(17);
    Parameter<double> a("a", random_tensor({3, 4, 5}, rng));
    Parameter<double> b("b", random_tensor({3, 4, 5}, rng));
    Parameter<double> c("c", random_tensor({3, 4, 5}, rng));
    rows.push_back(detail::run_probe_check(
        "add_hadamard_affine", tol, 17, {&a, &b, &c}, [&](Tape<double>& t) {
          return affine(t, hadamard(t, add(t, t.use(a), t.use(b)), t.use(c)), 1.7, 0.3);
        }));
  }
  {
    Rng rng(18);
    Parameter<double> a("a", random_tensor({2, 5, 4}, rng));
    Parameter<double> b("b", random_tensor({3, 5, 4}, rng));
    rows.push_back(
        detail::run_probe_check("concat_channels", tol, 18, {&a, &b}, [&](Tape<double>& t) {
          return concat_channels(t, {t.use(a), t.use(b)});
        }));
  }
  {
    Rng rng(19);
    Parameter<double> a("a", random_tensor({1, 4, 5}, rng));
    Parameter<double> b("b", random_tensor({1, 4, 5}, rng));
    Parameter<double> c("c", random_tensor({1, 4, 5}, rng));
    rows.push_back(
        detail::run_probe_check("stack_depth", tol, 19, {&a, &b, &c}, [&](Tape<double>& t) {
          return stack_depth(t, {t.use(a), t.use(b), t.use(c)});
        }));
  }
  {
    Rng rng(20);
    Parameter<double> a("a", random_tensor({4, 5, 6}, rng));
    Parameter<double> b("b", random_tensor({4, 5, 6}, rng));
    Parameter<double> c("c", random_tensor({4, 5, 6}, rng));
    rows.push_back(
        detail::run_probe_check("aggregate_variance", tol, 20, {&a, &b, &c},
                                [&](Tape<double>& t) {
                                  return aggregate_variance(
                                      t, std::vector<Var<double>>{t.use(a), t.use(b), t.use(c)});
                                }));
  }
  {
    Rng rng(21);
    Parameter<double> x("x", random_tensor({5, 3, 4}, rng, -2, 2));
    rows.push_back(detail::run_probe_check("softmax_depth", tol, 21, {&x}, [&](Tape<double>& t) {
      return softmax_depth(t, t.use(x));
    }));
  }
  {
    Rng rng(22);
    Parameter<double> x("x", random_tensor({6, 3, 4}, rng, -2, 2));
    Tensor<std::int32_t> target = Tensor<std::int32_t>::zeros({3, 4});
    Tensor<std::uint8_t> mask = Tensor<std::uint8_t>::zeros({3, 4});
    for (std::int64_t i = 0; i < target.numel(); ++i) {
      target.data()[i] = static_cast<std::int32_t>(rng.uniform_int(0, 5));
      mask.data()[i] = static_cast<std::uint8_t>(rng.uniform_int(0, 1));
    }
    mask.data()[0] = 1;
    rows.push_back(
        detail::run_scalar_check("softmax_cross_entropy", tol, 22, {&x}, [&](Tape<double>& t) {
          return cross_entropy_masked(t, softmax_depth(t, t.use(x)), target, mask);
        }));
  }
  {
    Rng rng(23);
    Parameter<double> src("src", random_tensor({2, 6, 8}, rng));
    Eigen::Matrix3d h;
    h << 1.0, 0.02, 0.3, -0.01, 1.0, 0.2, 0.0005, -0.0003, 1.0;
    rows.push_back(detail::run_probe_check("warp_bilinear", tol, 23, {&src},
                                           [&](Tape<double>& t) {
                                             return warp_bilinear(t, t.use(src), h, 0.5);
                                           }));
  }
  {
    Rng rng(24);
    GruCellParams<double> cell("gru", 4, rng);
    Parameter<double> x("x", random_tensor({4, 5, 6}, rng));
    Parameter<double> h("h", random_tensor({4, 5, 6}, rng));
    std::vector<Parameter<double>*> ps{&x,        &h,        &cell.r.w, &cell.r.b,
                                       &cell.u.w, &cell.u.b, &cell.c.w, &cell.c.b};
    rows.push_back(detail::run_probe_check("conv_gru_step", tol, 24, ps, [&](Tape<double>& t) {
      return conv_gru_step(t, t.use(x), t.use(h), cell);
    }));
  }
  {
    Rng rng(25);
    REDParams<double> red(rng);
    Parameter<double> cost("cost", random_tensor({16, 8, 8}, rng));
    Parameter<double> h0("h0", random_tensor({8, 8, 8}, rng, -0.5, 0.5));
    std::vector<Parameter<double>*> ps{&cost, &h0};
    for (auto& e : red.enc) {
      ps.push_back(&e.w);
      ps.push_back(&e.b);
    }
    for (auto& g : red.cells) {
      ps.push_back(&g.r.w);
      ps.push_back(&g.u.w);
      ps.push_back(&g.c.w);
    }
    for (auto& d : red.dec) {
      ps.push_back(&d.w);
      ps.push_back(&d.b);
    }
    ps.push_back(&red.head.w);
    ps.push_back(&red.head.b);
    rows.push_back(detail::run_probe_check(
        "red_regularize_step", tol, 25, ps,
        [&](Tape<double>& t) {
          std::vector<Var<double>> states;
          states.push_back(t.use(h0));
          states.push_back(t.input(Tensor<double>::zeros({16, 4, 4})));
          states.push_back(t.input(Tensor<double>::zeros({32, 2, 2})));
          states.push_back(t.input(Tensor<double>::zeros({64, 1, 1})));
          return red_regularize_step(t, t.use(cost), states, red);
        },
        3));
  }
  {
    Rng rng(26);
    FeatureExtractorParams<double> feat(rng, false);
    Parameter<double> img("img", random_tensor({3, 8, 8}, rng, 0, 1));
    std::vector<Parameter<double>*> ps{&img};
    for (auto& l : feat.layers) {
      ps.push_back(&l.w);
      ps.push_back(&l.b);
    }
    rows.push_back(detail::run_probe_check("extract_features", tol, 26, ps,
                                           [&](Tape<double>& t) {
                                             return extract_features(t, t.use(img), feat);
                                           },
                                           4));
  }
  {
    // End-to-end: two nadir views of a flat plane, full network, full loss.
    Rng rng(27);
    RedNetParams<double> net(27, false);
    CameraModel ref;
    ref.f = 20;
    ref.x0 = 7.5;
    ref.y0 = 7.5;
    ref.width = 16;
    ref.height = 16;
    ref.c = Eigen::Vector3d(0, 0, 30);
    ref.r = nadir_rotation();
    CameraModel src = ref;
    src.c = Eigen::Vector3d(1.5, 0, 30);
    UnitInputs<double> unit;
    unit.images.push_back(random_tensor({3, 16, 16}, rng, 0, 1));
    unit.images.push_back(random_tensor({3, 16, 16}, rng, 0, 1));
    unit.cams = {ref, src};
    DepthPlan plan(29.0, 0.5, 5);
    Tensor<float> gt = Tensor<float>::full({16, 16}, 30.0f);
    auto all = net.parameters();
    std::vector<Parameter<double>*> ps;
    for (std::size_t i = 0; i < all.size(); i += 4) ps.push_back(all[i]);
    rows.push_back(detail::run_scalar_check(
        "full_forward_loss", 1e-3, 27, ps,
        [&](Tape<double>& t) {
          return rednet_loss(t, forward_volume(t, unit, plan, net), gt, plan);
        },
        2));
  }
  return rows;
}

}  // namespace skysweep
