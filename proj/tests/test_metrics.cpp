#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "helpers.hpp"
#include "purets/metrics.hpp"
#include "purets/random.hpp"
#include "purets/tensor.hpp"

using namespace purets;

namespace {

Tensor3 sine_tensor(Index windows, Index horizon, Index channels,
                    double scale = 1.0, double shift = 0.0) {
  Tensor3 t(windows, horizon, channels);
  for (Index b = 0; b < windows; ++b)
    for (Index i = 0; i < horizon; ++i)
      for (Index j = 0; j < channels; ++j)
        t(b, i, j) =
            scale * std::sin(0.37 * static_cast<double>(b * horizon + i) +
                             static_cast<double>(j)) +
            shift;
  return t;
}

// Direct-summation oracles, structured differently from the library loops.
double oracle_mse(const Tensor3& p, const Tensor3& t) {
  double acc = 0.0;
  for (Index i = 0; i < p.size(); ++i) {
    const double d = p.data()[i] - t.data()[i];
    acc += d * d;
  }
  return acc / static_cast<double>(p.size());
}

double oracle_mae(const Tensor3& p, const Tensor3& t) {
  double acc = 0.0;
  for (Index i = 0; i < p.size(); ++i)
    acc += std::fabs(p.data()[i] - t.data()[i]);
  return acc / static_cast<double>(p.size());
}

double oracle_rse(const Tensor3& p, const Tensor3& t) {
  double mean = 0.0;
  for (Index i = 0; i < t.size(); ++i) mean += t.data()[i];
  mean /= static_cast<double>(t.size());
  double num = 0.0, den = 0.0;
  for (Index i = 0; i < t.size(); ++i) {
    num += (t.data()[i] - p.data()[i]) * (t.data()[i] - p.data()[i]);
    den += (t.data()[i] - mean) * (t.data()[i] - mean);
  }
  return std::sqrt(num) / std::sqrt(den);
}

// Two-pass Pearson per channel over all (window, step) points.
double oracle_corr(const Tensor3& p, const Tensor3& t) {
  double total = 0.0;
  Index used = 0;
  for (Index j = 0; j < t.axis2(); ++j) {
    std::vector<double> xs, ys;
    for (Index b = 0; b < t.batch(); ++b)
      for (Index i = 0; i < t.axis1(); ++i) {
        xs.push_back(p(b, i, j));
        ys.push_back(t(b, i, j));
      }
    const auto var = [](const std::vector<double>& v, double m) {
      double acc = 0.0;
      for (double x : v) acc += (x - m) * (x - m);
      return acc;
    };
    double mx = 0.0, my = 0.0;
    for (double x : xs) mx += x;
    for (double y : ys) my += y;
    mx /= static_cast<double>(xs.size());
    my /= static_cast<double>(ys.size());
    const double vx = var(xs, mx), vy = var(ys, my);
    if (vx == 0.0 || vy == 0.0) continue;
    double cov = 0.0;
    for (std::size_t k = 0; k < xs.size(); ++k)
      cov += (xs[k] - mx) * (ys[k] - my);
    total += cov / std::sqrt(vx * vy);
    ++used;
  }
  return total / static_cast<double>(used);
}

}  // namespace

TEST_CASE("mse and mae are zero on identical arrays") {
  const Tensor3 t = sine_tensor(3, 5, 2);
  CHECK(mse(t, t) == 0.0);
  CHECK(mae(t, t) == 0.0);
}

TEST_CASE("mse and mae match the two-element hand example") {
  Tensor3 pred(1, 2, 1), truth(1, 2, 1);
  pred(0, 0, 0) = 0.0;
  pred(0, 1, 0) = 2.0;
  truth(0, 0, 0) = 1.0;
  truth(0, 1, 0) = 1.0;
  CHECK(mse(pred, truth) == 1.0);
  CHECK(mae(pred, truth) == 1.0);
}

TEST_CASE("mse, mae, rse and corr match direct-summation oracles") {
  RandomSource rng(1);
  for (int rep = 0; rep < 20; ++rep) {
    const Index b = 1 + static_cast<Index>(rng.below(6));
    const Index h = 2 + static_cast<Index>(rng.below(8));
    const Index c = 1 + static_cast<Index>(rng.below(4));
    const Tensor3 pred = random_uniform(b, h, c, rng);
    const Tensor3 truth = random_uniform(b, h, c, rng);
    CHECK(std::fabs(mse(pred, truth) - oracle_mse(pred, truth)) <= 1e-12);
    CHECK(std::fabs(mae(pred, truth) - oracle_mae(pred, truth)) <= 1e-12);
    CHECK(std::fabs(rse(pred, truth) - oracle_rse(pred, truth)) <= 1e-12);
    CHECK(std::fabs(corr(pred, truth) - oracle_corr(pred, truth)) <= 1e-10);
  }
}

TEST_CASE("metrics reject mismatched or empty inputs") {
  CHECK_THROWS_AS(mse(Tensor3(1, 2, 3), Tensor3(1, 3, 2)), ShapeError);
  CHECK_THROWS_AS(mae(Tensor3(0, 0, 0), Tensor3(0, 0, 0)), DegenerateError);
}

TEST_CASE("mae squared never exceeds mse") {
  RandomSource rng(2);
  for (int rep = 0; rep < 20; ++rep) {
    const Tensor3 pred = random_uniform(2, 7, 3, rng);
    const Tensor3 truth = random_uniform(2, 7, 3, rng);
    const double a = mae(pred, truth);
    CHECK(a * a <= mse(pred, truth) + 1e-12);
  }
}

TEST_CASE("rse of a perfect prediction is zero") {
  const Tensor3 t = sine_tensor(2, 6, 2);
  CHECK(rse(t, t) == 0.0);
}

TEST_CASE("rse of the grand-mean predictor is exactly one") {
  const Tensor3 truth = sine_tensor(3, 8, 2, 1.3, 0.4);
  double mean = 0.0;
  for (Index i = 0; i < truth.size(); ++i) mean += truth.data()[i];
  mean /= static_cast<double>(truth.size());
  Tensor3 pred(3, 8, 2);
  pred.mat().setConstant(mean);
  CHECK(rse(pred, truth) == 1.0);
}

TEST_CASE("rse refuses constant truth") {
  Tensor3 truth(2, 3, 1);
  truth.mat().setConstant(4.0);
  const Tensor3 pred = sine_tensor(2, 3, 1);
  CHECK_THROWS_AS(rse(pred, truth), DegenerateError);
}

TEST_CASE("corr of a series with itself is one, with its negation minus one") {
  const Tensor3 t = sine_tensor(2, 10, 3);
  CHECK(std::fabs(corr(t, t) - 1.0) <= 1e-12);
  Tensor3 neg = t;
  neg.mat() = -neg.mat();
  CHECK(std::fabs(corr(neg, t) + 1.0) <= 1e-12);
}

TEST_CASE("corr is invariant under positive affine rescaling per channel") {
  RandomSource rng(3);
  const Tensor3 truth = random_uniform(3, 6, 2, rng);
  const Tensor3 pred = random_uniform(3, 6, 2, rng);
  Tensor3 scaled = pred;
  for (Index b = 0; b < 3; ++b)
    for (Index i = 0; i < 6; ++i) {
      scaled(b, i, 0) = 2.5 * pred(b, i, 0) + 7.0;
      scaled(b, i, 1) = 0.3 * pred(b, i, 1) - 2.0;
    }
  CHECK(std::fabs(corr(pred, truth) - corr(scaled, truth)) <= 1e-10);
}

TEST_CASE("corr skips constant channels and fails when all are constant") {
  Tensor3 truth(2, 4, 2), pred(2, 4, 2);
  // channel 0 varies, channel 1 constant in truth
  for (Index b = 0; b < 2; ++b)
    for (Index i = 0; i < 4; ++i) {
      truth(b, i, 0) = static_cast<double>(b * 4 + i);
      pred(b, i, 0) = static_cast<double>(b * 4 + i);
      truth(b, i, 1) = 5.0;
      pred(b, i, 1) = static_cast<double>(i);
    }
  CHECK(std::fabs(corr(pred, truth) - 1.0) <= 1e-12);  // only channel 0 counts

  Tensor3 flat(2, 4, 1);
  flat.mat().setConstant(1.0);
  CHECK_THROWS_AS(corr(flat, flat), DegenerateError);
}

TEST_CASE("fluctuation index is one for equal series and zero for flat ones") {
  const Tensor3 t = sine_tensor(3, 7, 2);
  CHECK(fluctuation_index(t, t) == 1.0);
  Tensor3 flat(3, 7, 2);
  flat.mat().setConstant(2.0);
  CHECK(fluctuation_index(flat, t) == 0.0);
}

TEST_CASE("fluctuation index matches the hand-expanded alternating case") {
  // truth = [0, 1, 2, 3, 4]; pred = truth + (+d, -d, +d, -d, +d) with d
  // large enough that the zigzag dominates the slope
  const double d = 1.5;
  Tensor3 truth(1, 5, 1), pred(1, 5, 1);
  for (Index i = 0; i < 5; ++i) {
    truth(0, i, 0) = static_cast<double>(i);
    pred(0, i, 0) = static_cast<double>(i) + ((i % 2 == 0) ? d : -d);
  }
  // TV(truth) = 4; pred steps alternate |1 - 2d| = 2, |1 + 2d| = 4
  const double tv_pred =
      2.0 * std::fabs(1.0 - 2.0 * d) + 2.0 * std::fabs(1.0 + 2.0 * d);
  const double want = tv_pred / 4.0;  // = 3
  CHECK(std::fabs(fluctuation_index(pred, truth) - want) <= 1e-12);
}

TEST_CASE("fluctuation index ignores constant shifts of both series") {
  RandomSource rng(4);
  const Tensor3 truth = random_uniform(2, 6, 2, rng);
  const Tensor3 pred = random_uniform(2, 6, 2, rng);
  Tensor3 truth_shift = truth, pred_shift = pred;
  truth_shift.mat().array() += 11.0;
  pred_shift.mat().array() += 11.0;
  CHECK(std::fabs(fluctuation_index(pred, truth) -
                  fluctuation_index(pred_shift, truth_shift)) <= 1e-12);
}

TEST_CASE("fluctuation index skips flat-truth windows, fails when all flat") {
  Tensor3 truth(2, 3, 1), pred(2, 3, 1);
  // window 0 varies, window 1 constant
  truth(0, 0, 0) = 0;
  truth(0, 1, 0) = 1;
  truth(0, 2, 0) = 0;
  truth(1, 0, 0) = truth(1, 1, 0) = truth(1, 2, 0) = 3.0;
  pred.mat().setConstant(0.5);
  pred(1, 1, 0) = 9.0;  // wild fluctuation in the skipped window
  CHECK(fluctuation_index(pred, truth) == 0.0);  // only window 0 counted

  Tensor3 all_flat(2, 3, 1);
  all_flat.mat().setConstant(1.0);
  CHECK_THROWS_AS(fluctuation_index(pred, all_flat), DegenerateError);
}

TEST_CASE("fluctuation index needs a horizon of at least two") {
  Tensor3 one(2, 1, 1);
  CHECK_THROWS_AS(fluctuation_index(one, one), DegenerateError);
}

TEST_CASE("peak amplitude ratio is one on equal series, half on 0.5x") {
  const Tensor3 t = sine_tensor(2, 50, 1);
  CHECK(std::fabs(peak_amplitude_ratio(t, t) - 1.0) <= 1e-12);
  Tensor3 half = t;
  half.mat() *= 0.5;
  CHECK(std::fabs(peak_amplitude_ratio(half, t) - 0.5) <= 1e-12);
}

TEST_CASE("peak amplitude ratio matches a direct oracle on clipped sine") {
  // truth: one long sine window; pred: same but clipped at |0.8|
  const Index n = 200;
  Tensor3 truth(1, n, 1), pred(1, n, 1);
  for (Index i = 0; i < n; ++i) {
    const double v = std::sin(0.13 * static_cast<double>(i));
    truth(0, i, 0) = v;
    pred(0, i, 0) = std::clamp(v, -0.8, 0.8);
  }
  const double got = peak_amplitude_ratio(pred, truth, 0.95);

  // oracle: sort |truth|, take the 0.95 quantile by linear interpolation,
  // then average |.| over the cells at or above it
  std::vector<double> mags;
  for (Index i = 0; i < n; ++i) mags.push_back(std::fabs(truth(0, i, 0)));
  std::vector<double> sorted = mags;
  std::sort(sorted.begin(), sorted.end());
  const double pos = 0.95 * static_cast<double>(n - 1);
  const auto lo = static_cast<std::size_t>(pos);
  const double frac = pos - static_cast<double>(lo);
  const double q = sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
  double num = 0.0, den = 0.0;
  Index cnt = 0;
  for (Index i = 0; i < n; ++i)
    if (mags[static_cast<std::size_t>(i)] >= q) {
      num += std::fabs(pred(0, i, 0));
      den += std::fabs(truth(0, i, 0));
      ++cnt;
    }
  REQUIRE(cnt > 0);
  CHECK(std::fabs(got - num / den) <= 1e-12);
  CHECK(got < 1.0);  // clipping shaves the peaks
}

TEST_CASE("peak amplitude ratio validates the quantile and the truth") {
  const Tensor3 t = sine_tensor(1, 20, 1);
  CHECK_THROWS_AS(peak_amplitude_ratio(t, t, 0.0), ConfigError);
  CHECK_THROWS_AS(peak_amplitude_ratio(t, t, 1.0), ConfigError);
  Tensor3 zeros(1, 20, 1);
  CHECK_THROWS_AS(peak_amplitude_ratio(zeros, zeros), DegenerateError);
}

TEST_CASE("evaluate_metrics fills every field and NaNs the undefined ones") {
  const Tensor3 truth = sine_tensor(3, 6, 2);
  const Tensor3 pred = sine_tensor(3, 6, 2, 0.9, 0.01);
  const MetricReport r = evaluate_metrics(pred, truth);
  CHECK(r.n_samples == 3);
  CHECK(r.mse > 0.0);
  CHECK(r.mae > 0.0);
  CHECK(r.rse > 0.0);
  CHECK(r.corr > 0.9);
  CHECK(r.fluctuation_index > 0.0);
  CHECK(r.peak_amplitude_ratio > 0.0);

  // horizon 1: fluctuation undefined; constant truth: rse/corr/peak too
  Tensor3 one_step(4, 1, 1);
  one_step.mat().setConstant(2.0);
  const MetricReport r2 = evaluate_metrics(one_step, one_step);
  CHECK(r2.mse == 0.0);
  CHECK(std::isnan(r2.fluctuation_index));
  CHECK(std::isnan(r2.rse));
  CHECK(std::isnan(r2.corr));
}

TEST_CASE("metric reports serialize with exact keys and NaN becomes null") {
  MetricReport r;
  r.mse = 0.25;
  r.mae = 0.5;
  r.rse = 0.3;
  r.corr = 0.9;
  r.fluctuation_index = std::nan("");
  r.peak_amplitude_ratio = 1.1;
  r.n_samples = 42;
  const std::string json = metric_report_to_json(r);
  for (const char* key :
       {"\"mse\"", "\"mae\"", "\"rse\"", "\"corr\"", "\"fluctuation_index\"",
        "\"peak_amplitude_ratio\"", "\"n_samples\""})
    CHECK(json.find(key) != std::string::npos);
  CHECK(json.find("null") != std::string::npos);

  const MetricReport back = metric_report_from_json(json);
  CHECK(back.mse == r.mse);
  CHECK(back.mae == r.mae);
  CHECK(back.rse == r.rse);
  CHECK(back.corr == r.corr);
  CHECK(std::isnan(back.fluctuation_index));
  CHECK(back.peak_amplitude_ratio == r.peak_amplitude_ratio);
  CHECK(back.n_samples == 42);
}
