#include "purets/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <json.hpp>

#include "purets/errors.hpp"

namespace purets {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void check_pair(const Tensor3& pred, const Tensor3& truth) {
  if (!pred.same_shape(truth)) {
    throw ShapeError("metric inputs differ in shape: " + pred.shape_str() +
                     " vs " + truth.shape_str());
  }
  if (pred.size() == 0) {
    throw DegenerateError("metric inputs are empty");
  }
}

double grand_mean(const Tensor3& t) {
  double sum = 0.0;
  for (Index b = 0; b < t.batch(); ++b) {
    for (Index i = 0; i < t.axis1(); ++i) {
      for (Index j = 0; j < t.axis2(); ++j) {
        sum += t(b, i, j);
      }
    }
  }
  return sum / static_cast<double>(t.size());
}

// Exact-arithmetic zero variance: every sample equals the first one.
bool channel_constant(const Tensor3& t, Index j) {
  const double first = t(0, 0, j);
  for (Index b = 0; b < t.batch(); ++b) {
    for (Index i = 0; i < t.axis1(); ++i) {
      if (t(b, i, j) != first) return false;
    }
  }
  return true;
}

double quantile_sorted(const std::vector<double>& v, double q) {
  const auto n = static_cast<double>(v.size());
  const double pos = q * (n - 1.0);
  const auto lo = static_cast<std::size_t>(pos);
  const double frac = pos - static_cast<double>(lo);
  if (lo + 1 >= v.size()) return v.back();
  return v[lo] + frac * (v[lo + 1] - v[lo]);
}

}  // namespace

double mse(const Tensor3& pred, const Tensor3& truth) {
  check_pair(pred, truth);
  double sum = 0.0;
  for (Index b = 0; b < pred.batch(); ++b) {
    for (Index i = 0; i < pred.axis1(); ++i) {
      for (Index j = 0; j < pred.axis2(); ++j) {
        const double d = pred(b, i, j) - truth(b, i, j);
        sum += d * d;
      }
    }
  }
  return sum / static_cast<double>(pred.size());
}

double mae(const Tensor3& pred, const Tensor3& truth) {
  check_pair(pred, truth);
  double sum = 0.0;
  for (Index b = 0; b < pred.batch(); ++b) {
    for (Index i = 0; i < pred.axis1(); ++i) {
      for (Index j = 0; j < pred.axis2(); ++j) {
        sum += std::abs(pred(b, i, j) - truth(b, i, j));
      }
    }
  }
  return sum / static_cast<double>(pred.size());
}

double rse(const Tensor3& pred, const Tensor3& truth) {
  check_pair(pred, truth);
  const double mean = grand_mean(truth);
  double num = 0.0;
  double den = 0.0;
  for (Index b = 0; b < pred.batch(); ++b) {
    for (Index i = 0; i < pred.axis1(); ++i) {
      for (Index j = 0; j < pred.axis2(); ++j) {
        const double r = pred(b, i, j) - truth(b, i, j);
        num += r * r;
        const double d = truth(b, i, j) - mean;
        den += d * d;
      }
    }
  }
  if (den == 0.0) {
    throw DegenerateError("rse undefined: ground truth is constant");
  }
  return std::sqrt(num) / std::sqrt(den);
}

double corr(const Tensor3& pred, const Tensor3& truth) {
  check_pair(pred, truth);
  const Index n_points = pred.batch() * pred.axis1();
  double total = 0.0;
  Index used = 0;
  for (Index j = 0; j < pred.axis2(); ++j) {
    if (channel_constant(pred, j) || channel_constant(truth, j)) continue;
    double mp = 0.0;
    double mt = 0.0;
    for (Index b = 0; b < pred.batch(); ++b) {
      for (Index i = 0; i < pred.axis1(); ++i) {
        mp += pred(b, i, j);
        mt += truth(b, i, j);
      }
    }
    mp /= static_cast<double>(n_points);
    mt /= static_cast<double>(n_points);
    double spt = 0.0;
    double sp = 0.0;
    double st = 0.0;
    for (Index b = 0; b < pred.batch(); ++b) {
      for (Index i = 0; i < pred.axis1(); ++i) {
        const double dp = pred(b, i, j) - mp;
        const double dt = truth(b, i, j) - mt;
        spt += dp * dt;
        sp += dp * dp;
        st += dt * dt;
      }
    }
    // Rounding can push |r| a hair past 1; the report promises [-1, 1].
    total += std::clamp(spt / (std::sqrt(sp) * std::sqrt(st)), -1.0, 1.0);
    ++used;
  }
  if (used == 0) {
    throw DegenerateError("corr undefined: every channel is constant");
  }
  return total / static_cast<double>(used);
}

double fluctuation_index(const Tensor3& pred, const Tensor3& truth) {
  check_pair(pred, truth);
  if (pred.axis1() < 2) {
    throw DegenerateError("fluctuation_index needs horizon >= 2");
  }
  double total = 0.0;
  Index used = 0;
  for (Index b = 0; b < pred.batch(); ++b) {
    for (Index j = 0; j < pred.axis2(); ++j) {
      double tv_pred = 0.0;
      double tv_truth = 0.0;
      for (Index i = 1; i < pred.axis1(); ++i) {
        tv_pred += std::abs(pred(b, i, j) - pred(b, i - 1, j));
        tv_truth += std::abs(truth(b, i, j) - truth(b, i - 1, j));
      }
      if (tv_truth > 0.0) {
        total += tv_pred / tv_truth;
        ++used;
      }
    }
  }
  if (used == 0) {
    throw DegenerateError(
        "fluctuation_index undefined: ground truth is flat in every window");
  }
  return total / static_cast<double>(used);
}

double peak_amplitude_ratio(const Tensor3& pred, const Tensor3& truth,
                            double quantile) {
  check_pair(pred, truth);
  if (!(quantile > 0.0 && quantile < 1.0)) {
    throw ConfigError("peak quantile must lie strictly between 0 and 1");
  }
  std::vector<double> mags;
  mags.reserve(static_cast<std::size_t>(truth.size()));
  for (Index b = 0; b < truth.batch(); ++b) {
    for (Index i = 0; i < truth.axis1(); ++i) {
      for (Index j = 0; j < truth.axis2(); ++j) {
        mags.push_back(std::abs(truth(b, i, j)));
      }
    }
  }
  std::sort(mags.begin(), mags.end());
  const double threshold = quantile_sorted(mags, quantile);
  double sum_pred = 0.0;
  double sum_truth = 0.0;
  for (Index b = 0; b < truth.batch(); ++b) {
    for (Index i = 0; i < truth.axis1(); ++i) {
      for (Index j = 0; j < truth.axis2(); ++j) {
        if (std::abs(truth(b, i, j)) >= threshold) {
          sum_pred += std::abs(pred(b, i, j));
          sum_truth += std::abs(truth(b, i, j));
        }
      }
    }
  }
  if (sum_truth == 0.0) {
    throw DegenerateError(
        "peak_amplitude_ratio undefined: ground truth is identically zero");
  }
  return sum_pred / sum_truth;
}

MetricReport evaluate_metrics(const Tensor3& pred, const Tensor3& truth) {
  check_pair(pred, truth);
  MetricReport r;
  r.mse = mse(pred, truth);
  r.mae = mae(pred, truth);
  r.n_samples = pred.batch();
  const auto guarded = [&](double (*fn)(const Tensor3&, const Tensor3&)) {
    try {
      return fn(pred, truth);
    } catch (const DegenerateError&) {
      return kNaN;
    }
  };
  r.rse = guarded(rse);
  r.corr = guarded(corr);
  r.fluctuation_index = guarded(fluctuation_index);
  try {
    r.peak_amplitude_ratio = peak_amplitude_ratio(pred, truth);
  } catch (const DegenerateError&) {
    r.peak_amplitude_ratio = kNaN;
  }
  return r;
}

std::string metric_report_to_json(const MetricReport& r) {
  nlohmann::ordered_json j;
  j["mse"] = r.mse;
  j["mae"] = r.mae;
  j["rse"] = r.rse;
  j["corr"] = r.corr;
  j["fluctuation_index"] = r.fluctuation_index;
  j["peak_amplitude_ratio"] = r.peak_amplitude_ratio;
  j["n_samples"] = r.n_samples;
  return j.dump(2) + "\n";
}

MetricReport metric_report_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("bad metric report: ") + e.what());
  }
  const auto field = [&](const char* key) {
    if (!j.contains(key)) {
      throw ParseError(std::string("metric report missing key: ") + key);
    }
    if (j[key].is_null()) return kNaN;
    return j[key].get<double>();
  };
  MetricReport r;
  r.mse = field("mse");
  r.mae = field("mae");
  r.rse = field("rse");
  r.corr = field("corr");
  r.fluctuation_index = field("fluctuation_index");
  r.peak_amplitude_ratio = field("peak_amplitude_ratio");
  r.n_samples = j.value("n_samples", 0);
  return r;
}

}  // namespace purets
