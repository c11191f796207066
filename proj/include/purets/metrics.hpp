#pragma once

#include <string>

#include "purets/tensor.hpp"

namespace purets {

/// One evaluation run's metrics. Undefined diagnostics (horizon 1, constant
/// truth, ...) are NaN and serialize to null.
struct MetricReport {
  double mse = 0.0;
  double mae = 0.0;
  double rse = 0.0;
  double corr = 0.0;
  double fluctuation_index = 0.0;
  double peak_amplitude_ratio = 0.0;
  Index n_samples = 0;
};

/// Flat JSON record with the metric names above, plus n_samples.
std::string metric_report_to_json(const MetricReport& r);
MetricReport metric_report_from_json(const std::string& text);

// Tensors are (windows x horizon x channels). All aggregations run in fixed
// storage order, so results are deterministic.

double mse(const Tensor3& pred, const Tensor3& truth);
double mae(const Tensor3& pred, const Tensor3& truth);

/// sqrt(sum (Y-Yhat)^2) / sqrt(sum (Y-mean(Y))^2) over every cell; the
/// denominator uses the grand mean of truth. Throws DegenerateError on
/// constant truth.
double rse(const Tensor3& pred, const Tensor3& truth);

/// Per-channel Pearson correlation over all (window, step) points, averaged
/// over channels. Channels with zero variance in either series are skipped;
/// throws DegenerateError when every channel is skipped.
double corr(const Tensor3& pred, const Tensor3& truth);

/// Total-variation ratio TV(pred)/TV(truth), averaged over the (window,
/// channel) pairs where TV(truth) > 0; > 1 means the prediction fluctuates
/// more than the ground truth. Needs horizon >= 2.
double fluctuation_index(const Tensor3& pred, const Tensor3& truth);

/// mean |pred| over the cells where |truth| reaches its q-quantile, divided
/// by mean |truth| there; < 1 means peaks are underfit. Quantile by linear
/// interpolation of order statistics.
double peak_amplitude_ratio(const Tensor3& pred, const Tensor3& truth,
                            double quantile = 0.95);

/// Fills a full report; diagnostics that are undefined on this input become
/// NaN instead of throwing.
MetricReport evaluate_metrics(const Tensor3& pred, const Tensor3& truth);

}  // namespace purets
