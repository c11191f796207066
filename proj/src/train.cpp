#include "purets/train.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <span>

#include "purets/errors.hpp"
#include "purets/io.hpp"
#include "purets/random.hpp"

namespace purets {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// Flat block list in GradientSet order: temporal layers, then spatial.
std::vector<AffineLayer*> parameter_blocks(LinearStack& model) {
  std::vector<AffineLayer*> blocks;
  for (auto& layer : model.temporal) blocks.push_back(&layer);
  if (model.spatial) blocks.push_back(&*model.spatial);
  return blocks;
}

std::vector<const LayerGrad*> gradient_blocks(const GradientSet& grads) {
  std::vector<const LayerGrad*> blocks;
  for (const auto& g : grads.temporal) blocks.push_back(&g);
  if (grads.spatial) blocks.push_back(&*grads.spatial);
  return blocks;
}

// Mean squared error of the model over every window of the set, computed in
// fixed chunk order.
double window_mse(const LinearStack& model, const WindowSet& ws,
                  Index batch_size) {
  double sse = 0.0;
  Index n = 0;
  std::vector<Index> rows(static_cast<std::size_t>(ws.count()));
  std::iota(rows.begin(), rows.end(), Index{0});
  for (std::size_t pos = 0; pos < rows.size();
       pos += static_cast<std::size_t>(batch_size)) {
    const auto len =
        std::min(rows.size() - pos, static_cast<std::size_t>(batch_size));
    const WindowBatch wb =
        ws.make_batch(std::span<const Index>(rows.data() + pos, len));
    const Tensor3 pred = forward(model, wb.inputs);
    for (Index b = 0; b < pred.batch(); ++b) {
      for (Index i = 0; i < pred.axis1(); ++i) {
        for (Index j = 0; j < pred.axis2(); ++j) {
          const double d = pred(b, i, j) - wb.targets(b, i, j);
          sse += d * d;
        }
      }
    }
    n += pred.size();
  }
  return sse / static_cast<double>(n);
}

}  // namespace

std::string optimizer_name(Optimizer o) {
  return o == Optimizer::Adam ? "adam" : "sgd";
}

Optimizer parse_optimizer(const std::string& name) {
  if (name == "adam") return Optimizer::Adam;
  if (name == "sgd") return Optimizer::SGD;
  throw ConfigError("unknown optimizer: " + name + " (expected adam or sgd)");
}

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw ConfigError("learning_rate must be positive and finite");
  }
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) {
    throw ConfigError("adam betas must lie in [0, 1)");
  }
  if (!(epsilon > 0.0)) throw ConfigError("epsilon must be positive");
  if (batch_size < 1) throw ConfigError("batch_size must be at least 1");
  if (max_epochs < 1) throw ConfigError("max_epochs must be at least 1");
  if (patience < 1) throw ConfigError("patience must be at least 1");
  if (stride < 1) throw ConfigError("stride must be at least 1");
}

std::pair<double, Tensor3> mse_loss(const Tensor3& pred,
                                    const Tensor3& target) {
  if (!pred.same_shape(target)) {
    throw ShapeError("loss inputs differ in shape: " + pred.shape_str() +
                     " vs " + target.shape_str());
  }
  if (pred.size() == 0) throw ShapeError("loss inputs are empty");
  const double n = static_cast<double>(pred.size());
  Tensor3 grad(pred.batch(), pred.axis1(), pred.axis2());
  grad.mat() = pred.mat() - target.mat();
  const double loss = grad.mat().squaredNorm() / n;
  grad.mat() *= 2.0 / n;
  return {loss, std::move(grad)};
}

AdamState AdamState::init(const LinearStack& model) {
  AdamState st;
  const auto add = [&st](const AffineLayer& layer) {
    LayerGrad zero;
    zero.weight = Matrix::Zero(layer.weight.rows(), layer.weight.cols());
    zero.bias = Vector::Zero(layer.bias.size());
    st.m.push_back(zero);
    st.v.push_back(zero);
  };
  for (const auto& layer : model.temporal) add(layer);
  if (model.spatial) add(*model.spatial);
  return st;
}

void adam_step(LinearStack& model, const GradientSet& grads, AdamState& state,
               const TrainConfig& cfg) {
  const auto params = parameter_blocks(model);
  const auto gs = gradient_blocks(grads);
  if (params.size() != gs.size() || params.size() != state.m.size()) {
    throw ShapeError("adam_step: model, gradients and state disagree on the "
                     "number of parameter blocks");
  }
  state.step += 1;
  const double t = static_cast<double>(state.step);
  const double bc1 = 1.0 - std::pow(cfg.beta1, t);
  const double bc2 = 1.0 - std::pow(cfg.beta2, t);
  for (std::size_t k = 0; k < params.size(); ++k) {
    auto update = [&](auto& p, const auto& g, auto& m, auto& v) {
      m = cfg.beta1 * m + (1.0 - cfg.beta1) * g;
      v.array() = cfg.beta2 * v.array() + (1.0 - cfg.beta2) * g.array().square();
      p.array() -= cfg.learning_rate * (m.array() / bc1) /
                   ((v.array() / bc2).sqrt() + cfg.epsilon);
    };
    update(params[k]->weight, gs[k]->weight, state.m[k].weight,
           state.v[k].weight);
    update(params[k]->bias, gs[k]->bias, state.m[k].bias, state.v[k].bias);
  }
}

void sgd_step(LinearStack& model, const GradientSet& grads,
              double learning_rate) {
  const auto params = parameter_blocks(model);
  const auto gs = gradient_blocks(grads);
  if (params.size() != gs.size()) {
    throw ShapeError("sgd_step: model and gradients disagree on the number "
                     "of parameter blocks");
  }
  for (std::size_t k = 0; k < params.size(); ++k) {
    params[k]->weight -= learning_rate * gs[k]->weight;
    params[k]->bias -= learning_rate * gs[k]->bias;
  }
}

std::string trace_to_csv(const ConvergenceTrace& trace) {
  std::string out = "epoch,train_loss,val_loss,seconds\n";
  for (const auto& row : trace) {
    out += std::to_string(row.epoch);
    out += ',';
    out += format_double(row.train_loss);
    out += ',';
    out += format_double(row.val_loss);
    out += ',';
    out += format_double(row.seconds);
    out += '\n';
  }
  return out;
}

TrainResult train(LinearStack& model, const SeriesDataset& ds,
                  const TrainConfig& cfg) {
  cfg.validate();
  model.validate();
  if (ds.n_features() != model.n_features) {
    throw ShapeError("model expects " + std::to_string(model.n_features) +
                     " channels but dataset has " +
                     std::to_string(ds.n_features()));
  }
  const WindowSet train_ws(ds, Split::Train, model.input_window, model.horizon,
                           cfg.stride);
  const WindowSet val_ws(ds, Split::Val, model.input_window, model.horizon, 1);

  RandomSource rng(cfg.seed);
  AdamState adam = AdamState::init(model);
  std::vector<Index> order(static_cast<std::size_t>(train_ws.count()));
  std::iota(order.begin(), order.end(), Index{0});

  TrainResult res;
  LinearStack best = model;
  double best_val = std::numeric_limits<double>::infinity();
  Index bad_epochs = 0;
  const auto start = Clock::now();

  for (Index epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    if (cfg.shuffle) rng.shuffle(order);
    double sse = 0.0;
    Index n_elems = 0;
    for (std::size_t pos = 0; pos < order.size();
         pos += static_cast<std::size_t>(cfg.batch_size)) {
      const auto len = std::min(order.size() - pos,
                                static_cast<std::size_t>(cfg.batch_size));
      const WindowBatch wb =
          train_ws.make_batch(std::span<const Index>(order.data() + pos, len));
      ForwardTrace trace;
      const Tensor3 pred = forward(model, wb.inputs, trace);
      auto [loss, grad_out] = mse_loss(pred, wb.targets);
      if (!std::isfinite(loss)) {
        throw NumericError("non-finite training loss at epoch " +
                           std::to_string(epoch));
      }
      const GradientSet grads = backward(model, trace, grad_out);
      if (cfg.optimizer == Optimizer::Adam) {
        adam_step(model, grads, adam, cfg);
      } else {
        sgd_step(model, grads, cfg.learning_rate);
      }
      sse += loss * static_cast<double>(pred.size());
      n_elems += pred.size();
    }
    const double train_loss = sse / static_cast<double>(n_elems);
    const double val_loss = window_mse(model, val_ws, cfg.batch_size);
    if (!std::isfinite(val_loss)) {
      throw NumericError("non-finite validation loss at epoch " +
                         std::to_string(epoch));
    }
    res.trace.push_back({epoch, train_loss, val_loss, seconds_since(start)});
    res.epochs_run = epoch;
    if (val_loss < best_val) {
      best_val = val_loss;
      best = model;
      res.best_epoch = epoch;
      bad_epochs = 0;
    } else {
      ++bad_epochs;
      if (bad_epochs >= cfg.patience) {
        res.stopped_early = true;
        break;
      }
    }
  }

  model = best;
  res.best_val_loss = best_val;
  return res;
}

Evaluation evaluate(const LinearStack& model, const SeriesDataset& ds,
                    Split split, Index stride, Index batch_size) {
  model.validate();
  if (batch_size < 1) throw ConfigError("batch_size must be at least 1");
  const WindowSet ws(ds, split, model.input_window, model.horizon, stride);
  Evaluation ev;
  ev.predictions = Tensor3(ws.count(), model.horizon, model.n_features);
  ev.truth = Tensor3(ws.count(), model.horizon, model.n_features);
  std::vector<Index> rows(static_cast<std::size_t>(ws.count()));
  std::iota(rows.begin(), rows.end(), Index{0});
  for (std::size_t pos = 0; pos < rows.size();
       pos += static_cast<std::size_t>(batch_size)) {
    const auto len =
        std::min(rows.size() - pos, static_cast<std::size_t>(batch_size));
    const WindowBatch wb =
        ws.make_batch(std::span<const Index>(rows.data() + pos, len));
    const Tensor3 pred = forward(model, wb.inputs);
    for (std::size_t b = 0; b < len; ++b) {
      const Index dst = static_cast<Index>(pos + b);
      ev.predictions.slice(dst) = pred.slice(static_cast<Index>(b));
      ev.truth.slice(dst) = wb.targets.slice(static_cast<Index>(b));
    }
  }
  ev.report = evaluate_metrics(ev.predictions, ev.truth);
  return ev;
}

}  // namespace purets
