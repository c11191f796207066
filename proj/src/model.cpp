#include "purets/model.hpp"

#include <algorithm>
#include <cmath>

namespace purets {

namespace {

void apply_sigmoid(Tensor3& t) {
  t.mat() = (1.0 + (-t.mat().array()).exp()).inverse().matrix();
}

// d(sigmoid)/dpre expressed through the post-activation value s: s*(1-s).
Tensor3 chain_through_activation(const Tensor3& grad, const Tensor3& post,
                                 Activation act) {
  if (act == Activation::None) return grad;
  Tensor3 out = grad;
  out.mat().array() *= post.mat().array() * (1.0 - post.mat().array());
  return out;
}

}  // namespace

void LinearStack::validate() const {
  if (temporal.empty())
    throw ShapeError("LinearStack: no temporal layers");
  if (temporal.front().in_dim() != input_window)
    throw ShapeError("LinearStack: first layer in_dim " +
                     std::to_string(temporal.front().in_dim()) +
                     " != input_window " + std::to_string(input_window));
  if (temporal.back().out_dim() != horizon)
    throw ShapeError("LinearStack: last layer out_dim " +
                     std::to_string(temporal.back().out_dim()) +
                     " != horizon " + std::to_string(horizon));
  for (std::size_t k = 0; k + 1 < temporal.size(); ++k) {
    if (temporal[k].out_dim() != temporal[k + 1].in_dim())
      throw ShapeError("LinearStack: layer " + std::to_string(k) +
                       " out_dim " + std::to_string(temporal[k].out_dim()) +
                       " != layer " + std::to_string(k + 1) + " in_dim " +
                       std::to_string(temporal[k + 1].in_dim()));
  }
  for (const auto& l : temporal) {
    if (l.bias.size() != l.out_dim())
      throw ShapeError("LinearStack: bias length " +
                       std::to_string(l.bias.size()) + " != out_dim " +
                       std::to_string(l.out_dim()));
  }
  if (spatial) {
    if (spatial->in_dim() != n_features || spatial->out_dim() != n_features)
      throw ShapeError("LinearStack: spatial layer is " +
                       shape_str(spatial->weight) + ", expected " +
                       std::to_string(n_features) + "x" +
                       std::to_string(n_features));
    if (spatial->bias.size() != n_features)
      throw ShapeError("LinearStack: spatial bias length " +
                       std::to_string(spatial->bias.size()));
  }
}

LinearStack make_model(ModelKind kind, Index input_window, Index horizon,
                       Index n_features, int depth,
                       const std::vector<Index>& hidden) {
  if (depth < 1) throw ConfigError("model depth must be >= 1");
  if (input_window < 1 || horizon < 1 || n_features < 1)
    throw ConfigError("model dims must be >= 1");
  std::vector<Index> dims;
  dims.push_back(input_window);
  if (hidden.empty()) {
    const Index h = std::max(input_window, horizon);
    for (int k = 0; k + 1 < depth; ++k) dims.push_back(h);
  } else {
    if (static_cast<int>(hidden.size()) != depth - 1)
      throw ConfigError("expected " + std::to_string(depth - 1) +
                        " hidden widths, got " + std::to_string(hidden.size()));
    for (Index h : hidden) {
      if (h < 1) throw ConfigError("hidden width must be >= 1");
      dims.push_back(h);
    }
  }
  dims.push_back(horizon);

  LinearStack m;
  m.input_window = input_window;
  m.horizon = horizon;
  m.n_features = n_features;
  for (std::size_t k = 0; k + 1 < dims.size(); ++k) {
    AffineLayer l;
    l.weight = Matrix::Zero(dims[k + 1], dims[k]);
    l.bias = Vector::Zero(dims[k + 1]);
    const bool last = (k + 2 == dims.size());
    l.activation = (kind == ModelKind::SigmoidMLP && !last)
                       ? Activation::Sigmoid
                       : Activation::None;
    m.temporal.push_back(std::move(l));
  }
  if (kind == ModelKind::PureTS_S) {
    AffineLayer s;
    s.weight = Matrix::Zero(n_features, n_features);
    s.bias = Vector::Zero(n_features);
    m.spatial = std::move(s);
  }
  return m;
}

GradientSet GradientSet::zeros_like(const LinearStack& m) {
  GradientSet g;
  g.temporal.reserve(m.temporal.size());
  for (const auto& l : m.temporal)
    g.temporal.push_back(
        {Matrix::Zero(l.out_dim(), l.in_dim()), Vector::Zero(l.out_dim())});
  if (m.spatial)
    g.spatial = LayerGrad{Matrix::Zero(m.spatial->out_dim(), m.spatial->in_dim()),
                          Vector::Zero(m.spatial->out_dim())};
  return g;
}

double GradientSet::max_abs() const {
  double v = 0.0;
  for (const auto& l : temporal) {
    v = std::max(v, l.weight.cwiseAbs().maxCoeff());
    if (l.bias.size() > 0) v = std::max(v, l.bias.cwiseAbs().maxCoeff());
  }
  if (spatial) {
    v = std::max(v, spatial->weight.cwiseAbs().maxCoeff());
    if (spatial->bias.size() > 0)
      v = std::max(v, spatial->bias.cwiseAbs().maxCoeff());
  }
  return v;
}

Tensor3 forward(const LinearStack& m, const Tensor3& x, ForwardTrace& trace) {
  m.validate();
  if (x.axis1() != m.input_window || x.axis2() != m.n_features)
    throw ShapeError("forward: input " + x.shape_str() + ", model expects Bx" +
                     std::to_string(m.input_window) + "x" +
                     std::to_string(m.n_features));

  trace.permuted_input = permute_time_feature(x);  // (B, N, T)
  trace.temporal_out.clear();
  trace.temporal_out.reserve(m.temporal.size());

  const Tensor3* cur = &trace.permuted_input;
  for (std::size_t k = 0; k < m.temporal.size(); ++k) {
    const auto& layer = m.temporal[k];
    Tensor3 next = batched_affine(*cur, layer.weight, layer.bias);
    if (layer.activation == Activation::Sigmoid) apply_sigmoid(next);
    if (!next.all_finite())
      throw NumericError("forward: temporal layer " + std::to_string(k + 1) +
                         " produced non-finite values");
    trace.temporal_out.push_back(std::move(next));
    cur = &trace.temporal_out.back();
  }

  Tensor3 y = permute_time_feature(*cur);  // (B, T', N)
  if (m.spatial) {
    trace.spatial_input = std::move(y);
    Tensor3 out =
        batched_affine(trace.spatial_input, m.spatial->weight, m.spatial->bias);
    if (m.spatial->activation == Activation::Sigmoid) apply_sigmoid(out);
    if (!out.all_finite())
      throw NumericError("forward: spatial layer produced non-finite values");
    trace.output = std::move(out);
  } else {
    trace.output = std::move(y);
  }
  return trace.output;
}

Tensor3 forward(const LinearStack& m, const Tensor3& x) {
  ForwardTrace trace;
  return forward(m, x, trace);
}

GradientSet backward(const LinearStack& m, const ForwardTrace& trace,
                     const Tensor3& grad_out) {
  if (!grad_out.same_shape(trace.output))
    throw ShapeError("backward: grad_out " + grad_out.shape_str() +
                     " vs output " + trace.output.shape_str());

  GradientSet g = GradientSet::zeros_like(m);
  const Index B = grad_out.batch();

  Tensor3 gy;  // gradient wrt the permuted temporal output, (B, T', N)
  if (m.spatial) {
    Tensor3 gu =
        chain_through_activation(grad_out, trace.output, m.spatial->activation);
    gy = Tensor3(B, m.horizon, m.n_features);
    for (Index b = 0; b < B; ++b) {
      g.spatial->weight.noalias() +=
          gu.slice(b).transpose() * trace.spatial_input.slice(b);
      g.spatial->bias += gu.slice(b).colwise().sum().transpose();
      gy.slice(b).noalias() = gu.slice(b) * m.spatial->weight;
    }
  } else {
    gy = grad_out;
  }

  // Back through the output permute: (B, T', N) -> (B, N, T').
  Tensor3 gz = permute_time_feature(gy);

  for (std::size_t k = m.temporal.size(); k-- > 0;) {
    const auto& layer = m.temporal[k];
    const Tensor3& post = trace.temporal_out[k];
    const Tensor3& prev =
        (k == 0) ? trace.permuted_input : trace.temporal_out[k - 1];
    Tensor3 gu = chain_through_activation(gz, post, layer.activation);
    for (Index b = 0; b < B; ++b) {
      g.temporal[k].weight.noalias() +=
          gu.slice(b).transpose() * prev.slice(b);
      g.temporal[k].bias += gu.slice(b).colwise().sum().transpose();
    }
    if (k > 0) {
      Tensor3 gprev(B, gu.axis1(), layer.in_dim());
      for (Index b = 0; b < B; ++b)
        gprev.slice(b).noalias() = gu.slice(b) * layer.weight;
      gz = std::move(gprev);
    }
  }
  return g;
}

GradientSet backward(const LinearStack& m, const Tensor3& x,
                     const Tensor3& grad_out) {
  ForwardTrace trace;
  forward(m, x, trace);
  return backward(m, trace, grad_out);
}

std::pair<Matrix, Vector> collapse_to_affine(const LinearStack& m) {
  m.validate();
  for (const auto& l : m.temporal)
    if (l.activation != Activation::None)
      throw UnsupportedModelError(
          "collapse_to_affine: stack contains an activation");
  if (m.spatial) {
    const bool identity = m.spatial->activation == Activation::None &&
                          m.spatial->weight.isIdentity(0.0) &&
                          m.spatial->bias.isZero(0.0);
    if (!identity)
      throw UnsupportedModelError(
          "collapse_to_affine: non-identity spatial layer");
  }
  Matrix w = m.temporal.front().weight;
  Vector b = m.temporal.front().bias;
  for (std::size_t k = 1; k < m.temporal.size(); ++k) {
    b = m.temporal[k].weight * b + m.temporal[k].bias;
    w = matmul(m.temporal[k].weight, w);
  }
  return {std::move(w), std::move(b)};
}

void init_parameters(LinearStack& m, RandomSource& rng) {
  auto fill = [&rng](AffineLayer& l) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(l.in_dim()));
    Scalar* p = l.weight.data();  // row-major
    for (Index i = 0; i < l.weight.size(); ++i)
      p[i] = rng.uniform(-bound, bound);
    l.bias.setZero();
  };
  for (auto& l : m.temporal) fill(l);
  if (m.spatial) fill(*m.spatial);
}

}  // namespace purets
