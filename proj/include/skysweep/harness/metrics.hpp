#pragma once

#include <cmath>
#include <cstdio>
#include <string>

#include "skysweep/common/errors.hpp"
#include "skysweep/core/tensor.hpp"

namespace skysweep {

// Raw tallies from comparing one prediction raster against ground truth.
// Percentages are derived views so tallies from many tiles can be summed
// exactly before reporting.
struct MetricsCounts {
  double abs_sum = 0;           // L1 error summed over pixels within the MAE cap
  std::int64_t n_mae = 0;       // pixels within 100 intervals of gt
  std::int64_t n_both = 0;      // pixels valid in both rasters
  std::int64_t n_lt3 = 0;       // both-valid pixels with error < 3 intervals
  std::int64_t n_lt06 = 0;      // both-valid pixels with error < 0.6 m
  std::int64_t n_pred_on_gt = 0;  // gt-valid pixels carrying a prediction
  std::int64_t n_gt_valid = 0;

  void add(const MetricsCounts& o) {
    abs_sum += o.abs_sum;
    n_mae += o.n_mae;
    n_both += o.n_both;
    n_lt3 += o.n_lt3;
    n_lt06 += o.n_lt06;
    n_pred_on_gt += o.n_pred_on_gt;
    n_gt_valid += o.n_gt_valid;
  }

  double mae_m() const { return n_mae ? abs_sum / n_mae : 0.0; }
  double pct_lt_3interval() const { return n_both ? 100.0 * n_lt3 / n_both : 0.0; }
  double pct_lt_06m() const { return n_both ? 100.0 * n_lt06 / n_both : 0.0; }
  double completeness() const { return n_gt_valid ? 100.0 * n_pred_on_gt / n_gt_valid : 0.0; }
};

// Error metrics per the benchmark definitions: MAE counts only L1 distances
// within 100 depth intervals; the threshold percentages are taken over all
// both-valid pixels so gross outliers fail them; completeness is the share
// of valid-gt pixels carrying any prediction. Zero marks an invalid pixel.
inline MetricsCounts evaluate_depth(const Tensor<float>& pred, const Tensor<float>& gt,
                                    double interval) {
  if (!(pred.shape() == gt.shape()))
    throw contract_error("evaluate_depth: extent mismatch " + pred.shape().str() + " vs " +
                         gt.shape().str());
  if (!(interval > 0)) throw contract_error("evaluate_depth: interval must be positive");
  const float* p = pred.data();
  const float* g = gt.data();
  const double mae_cap = 100.0 * interval;
  const double thresh3 = 3.0 * interval;
  MetricsCounts c;
  for (std::int64_t i = 0; i < pred.numel(); ++i) {
    const bool gv = g[i] > 0;
    const bool pv = p[i] > 0;
    if (gv) {
      ++c.n_gt_valid;
      if (pv) ++c.n_pred_on_gt;
    }
    if (!gv || !pv) continue;
    ++c.n_both;
    const double err = std::abs(static_cast<double>(p[i]) - g[i]);
    if (err <= mae_cap) {
      c.abs_sum += err;
      ++c.n_mae;
    }
    if (err < thresh3) ++c.n_lt3;
    if (err < 0.6) ++c.n_lt06;
  }
  if (c.n_gt_valid == 0 || c.n_both == 0)
    throw degenerate_error("evaluate_depth: no valid overlap between prediction and gt");
  return c;
}

inline const char* metrics_csv_header() {
  return "mae_m,pct_lt_3interval,pct_lt_0p6m,completeness,n_pixels";
}

inline std::string metrics_csv_row(const MetricsCounts& c) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "%.6f,%.4f,%.4f,%.4f,%lld", c.mae_m(), c.pct_lt_3interval(),
                c.pct_lt_06m(), c.completeness(), static_cast<long long>(c.n_both));
  return buf;
}

}  // namespace skysweep
