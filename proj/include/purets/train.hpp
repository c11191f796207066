#pragma once

#include <string>
#include <utility>
#include <vector>

#include "purets/data.hpp"
#include "purets/metrics.hpp"
#include "purets/model.hpp"

namespace purets {

enum class Optimizer { Adam, SGD };

std::string optimizer_name(Optimizer o);
Optimizer parse_optimizer(const std::string& name);

struct TrainConfig {
  Optimizer optimizer = Optimizer::Adam;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  Index batch_size = 32;
  Index max_epochs = 100;
  Index patience = 10;  // epochs without strict val improvement before stopping
  Index stride = 1;     // training window stride
  std::uint64_t seed = 0;
  bool shuffle = true;

  void validate() const;  // throws ConfigError
};

/// Mean squared error over every element plus its gradient with respect to
/// the prediction, d/dpred mean((pred-target)^2) = 2(pred-target)/size.
std::pair<double, Tensor3> mse_loss(const Tensor3& pred,
                                    const Tensor3& target);

/// First and second moment accumulators, one slot per parameter block.
struct AdamState {
  std::vector<LayerGrad> m;
  std::vector<LayerGrad> v;
  Index step = 0;

  static AdamState init(const LinearStack& model);
};

/// One bias-corrected Adam update. Layer order matches GradientSet: temporal
/// layers first, then the spatial layer when present.
void adam_step(LinearStack& model, const GradientSet& grads, AdamState& state,
               const TrainConfig& cfg);

void sgd_step(LinearStack& model, const GradientSet& grads,
              double learning_rate);

struct TraceRow {
  Index epoch = 0;
  double train_loss = 0.0;
  double val_loss = 0.0;
  double seconds = 0.0;  // wall clock since training started
};

using ConvergenceTrace = std::vector<TraceRow>;

/// CSV with header "epoch,train_loss,val_loss,seconds".
std::string trace_to_csv(const ConvergenceTrace& trace);

struct TrainResult {
  ConvergenceTrace trace;
  Index best_epoch = 0;
  double best_val_loss = 0.0;
  Index epochs_run = 0;
  bool stopped_early = false;
};

/// Minibatch training on the train split with per-epoch validation MSE.
/// Stops after cfg.patience epochs without strict improvement and restores
/// the best-validation weights. The epoch loop is single threaded and fully
/// determined by cfg.seed and the initial weights.
TrainResult train(LinearStack& model, const SeriesDataset& ds,
                  const TrainConfig& cfg);

struct Evaluation {
  MetricReport report;
  Tensor3 predictions{0, 0, 0};
  Tensor3 truth{0, 0, 0};
};

/// Runs the model over every window of a split in chronological order and
/// scores it. Windows advance by `stride` rows.
Evaluation evaluate(const LinearStack& model, const SeriesDataset& ds,
                    Split split, Index stride = 1, Index batch_size = 256);

}  // namespace purets
