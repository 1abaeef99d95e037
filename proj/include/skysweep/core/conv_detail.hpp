#pragma once

#include <cblas.h>

#include <algorithm>
#include <cstdint>
#include <cstring>

namespace skysweep::detail {

// Row-major C[M x N] = alpha * op(A) * op(B) + beta * C.
inline void gemm(bool trans_a, bool trans_b, int m, int n, int k, float alpha, const float* a,
                 int lda, const float* b, int ldb, float beta, float* c, int ldc) {
  cblas_sgemm(CblasRowMajor, trans_a ? CblasTrans : CblasNoTrans,
              trans_b ? CblasTrans : CblasNoTrans, m, n, k, alpha, a, lda, b, ldb, beta, c, ldc);
}

inline void gemm(bool trans_a, bool trans_b, int m, int n, int k, double alpha, const double* a,
                 int lda, const double* b, int ldb, double beta, double* c, int ldc) {
  cblas_dgemm(CblasRowMajor, trans_a ? CblasTrans : CblasNoTrans,
              trans_b ? CblasTrans : CblasNoTrans, m, n, k, alpha, a, lda, b, ldb, beta, c, ldc);
}

struct ConvGeom {
  int in_h = 0, in_w = 0;
  int out_h = 0, out_w = 0;
  int kh = 0, kw = 0;
  int stride = 1;
  int pad_top = 0, pad_left = 0;
};

// TF-style SAME: output extent ceil(in/stride), zero padding split with the
// smaller half leading.
inline ConvGeom same_geom(int h, int w, int kh, int kw, int stride) {
  ConvGeom g;
  g.in_h = h;
  g.in_w = w;
  g.kh = kh;
  g.kw = kw;
  g.stride = stride;
  g.out_h = (h + stride - 1) / stride;
  g.out_w = (w + stride - 1) / stride;
  const int pad_h = std::max((g.out_h - 1) * stride + kh - h, 0);
  const int pad_w = std::max((g.out_w - 1) * stride + kw - w, 0);
  g.pad_top = pad_h / 2;
  g.pad_left = pad_w / 2;
  return g;
}

inline ConvGeom valid_geom(int h, int w, int kh, int kw, int stride) {
  ConvGeom g;
  g.in_h = h;
  g.in_w = w;
  g.kh = kh;
  g.kw = kw;
  g.stride = stride;
  g.out_h = (h - kh) / stride + 1;
  g.out_w = (w - kw) / stride + 1;
  return g;
}

// col is [C*kh*kw x out_h*out_w]; out-of-image taps are zero.
template <typename T>
void im2col(const T* img, int channels, const ConvGeom& g, T* col) {
  const std::int64_t plane = static_cast<std::int64_t>(g.in_h) * g.in_w;
  const std::int64_t cols = static_cast<std::int64_t>(g.out_h) * g.out_w;
  for (int c = 0; c < channels; ++c) {
    for (int ky = 0; ky < g.kh; ++ky) {
      for (int kx = 0; kx < g.kw; ++kx) {
        T* dst = col + (((static_cast<std::int64_t>(c) * g.kh + ky) * g.kw + kx) * cols);
        const T* src = img + c * plane;
        for (int oy = 0; oy < g.out_h; ++oy) {
          const int iy = oy * g.stride - g.pad_top + ky;
          T* drow = dst + static_cast<std::int64_t>(oy) * g.out_w;
          if (iy < 0 || iy >= g.in_h) {
            std::memset(drow, 0, sizeof(T) * static_cast<std::size_t>(g.out_w));
            continue;
          }
          const T* srow = src + static_cast<std::int64_t>(iy) * g.in_w;
          const int x0 = kx - g.pad_left;
          for (int ox = 0; ox < g.out_w; ++ox) {
            const int ix = ox * g.stride + x0;
            drow[ox] = (ix >= 0 && ix < g.in_w) ? srow[ix] : T(0);
          }
        }
      }
    }
  }
}

// Adjoint of im2col: scatter-adds col back into the image. Sequential over
// kernel taps so accumulation order is fixed.
template <typename T>
void col2im_add(const T* col, int channels, const ConvGeom& g, T* img) {
  const std::int64_t plane = static_cast<std::int64_t>(g.in_h) * g.in_w;
  const std::int64_t cols = static_cast<std::int64_t>(g.out_h) * g.out_w;
  for (int c = 0; c < channels; ++c) {
    for (int ky = 0; ky < g.kh; ++ky) {
      for (int kx = 0; kx < g.kw; ++kx) {
        const T* src = col + (((static_cast<std::int64_t>(c) * g.kh + ky) * g.kw + kx) * cols);
        T* dst = img + c * plane;
        for (int oy = 0; oy < g.out_h; ++oy) {
          const int iy = oy * g.stride - g.pad_top + ky;
          if (iy < 0 || iy >= g.in_h) continue;
          const T* srow = src + static_cast<std::int64_t>(oy) * g.out_w;
          T* drow = dst + static_cast<std::int64_t>(iy) * g.in_w;
          const int x0 = kx - g.pad_left;
          for (int ox = 0; ox < g.out_w; ++ox) {
            const int ix = ox * g.stride + x0;
            if (ix >= 0 && ix < g.in_w) drow[ix] += srow[ox];
          }
        }
      }
    }
  }
}

}  // namespace skysweep::detail
