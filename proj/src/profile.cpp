#include "purets/profile.hpp"

#include <chrono>
#include <cmath>
#include <vector>

#include <json.hpp>

#include "purets/errors.hpp"
#include "purets/random.hpp"
#include "purets/tensor.hpp"

namespace purets {

namespace {

std::uint64_t u64(Index v) { return static_cast<std::uint64_t>(v); }

}  // namespace

std::uint64_t count_parameters(const LinearStack& model) {
  std::uint64_t total = 0;
  for (const auto& layer : model.temporal) {
    total += u64(layer.out_dim()) * u64(layer.in_dim()) + u64(layer.out_dim());
  }
  if (model.spatial) {
    total += u64(model.spatial->out_dim()) * u64(model.spatial->in_dim()) +
             u64(model.spatial->out_dim());
  }
  return total;
}

std::uint64_t count_macs(const LinearStack& model, Index batch) {
  if (batch < 1) throw ConfigError("batch must be at least 1");
  std::uint64_t per_window = 0;
  for (const auto& layer : model.temporal) {
    per_window += u64(model.n_features) * u64(layer.out_dim()) *
                  u64(layer.in_dim());
  }
  if (model.spatial) {
    per_window += u64(model.horizon) * u64(model.n_features) *
                  u64(model.n_features);
  }
  return u64(batch) * per_window;
}

std::uint64_t count_bias_adds(const LinearStack& model, Index batch) {
  if (batch < 1) throw ConfigError("batch must be at least 1");
  std::uint64_t per_window = 0;
  for (const auto& layer : model.temporal) {
    per_window += u64(model.n_features) * u64(layer.out_dim());
  }
  if (model.spatial) {
    per_window += u64(model.horizon) * u64(model.n_features);
  }
  return u64(batch) * per_window;
}

std::string shape_summary(const LinearStack& model) {
  std::string s = "temporal ";
  s += std::to_string(model.input_window);
  for (const auto& layer : model.temporal) {
    s += "->" + std::to_string(layer.out_dim());
  }
  s += ", channels " + std::to_string(model.n_features);
  if (model.spatial) {
    s += ", spatial " + std::to_string(model.n_features) + "x" +
         std::to_string(model.n_features);
  }
  return s;
}

ProfileReport profile_model(const LinearStack& model, Index batch,
                            Index warmup, Index repeats, std::uint64_t seed) {
  model.validate();
  if (batch < 1) throw ConfigError("batch must be at least 1");
  if (warmup < 1 || repeats < 5) {
    throw ConfigError("need warmup >= 1 and repeats >= 5");
  }
  ProfileReport r;
  r.parameter_count = count_parameters(model);
  r.mac_count = count_macs(model, batch);
  r.add_count = count_bias_adds(model, batch);
  r.batch = batch;
  r.warmup = warmup;
  r.repeats = repeats;
  r.shape_summary = shape_summary(model);

  RandomSource rng(seed);
  const Tensor3 input =
      random_uniform(batch, model.input_window, model.n_features, rng);
  volatile double sink = 0.0;
  for (Index k = 0; k < warmup; ++k) {
    sink = forward(model, input)(0, 0, 0);
  }
  using Clock = std::chrono::steady_clock;
  std::vector<double> times(static_cast<std::size_t>(repeats));
  for (Index k = 0; k < repeats; ++k) {
    const auto t0 = Clock::now();
    const Tensor3 out = forward(model, input);
    const auto t1 = Clock::now();
    sink = out(0, 0, 0);
    times[static_cast<std::size_t>(k)] =
        std::chrono::duration<double>(t1 - t0).count();
  }
  (void)sink;
  double mean = 0.0;
  for (double t : times) mean += t;
  mean /= static_cast<double>(times.size());
  double var = 0.0;
  for (double t : times) var += (t - mean) * (t - mean);
  var /= static_cast<double>(times.size());
  r.mean_latency_s = mean;
  r.latency_std_s = std::sqrt(var);
  return r;
}

std::string profile_report_to_json(const ProfileReport& r) {
  nlohmann::ordered_json j;
  j["parameter_count"] = r.parameter_count;
  j["mac_count"] = r.mac_count;
  j["add_count"] = r.add_count;
  j["batch"] = r.batch;
  j["warmup"] = r.warmup;
  j["repeats"] = r.repeats;
  j["mean_latency_s"] = r.mean_latency_s;
  j["latency_std_s"] = r.latency_std_s;
  j["shape_summary"] = r.shape_summary;
  return j.dump(2) + "\n";
}

}  // namespace purets
