#pragma once

#include <optional>
#include <vector>

#include "purets/tensor.hpp"

namespace purets {

enum class Activation { None, Sigmoid };

struct AffineLayer {
  Matrix weight;  // out_dim x in_dim
  Vector bias;    // out_dim
  Activation activation = Activation::None;

  Index in_dim() const { return weight.cols(); }
  Index out_dim() const { return weight.rows(); }
};

/// An ordered stack of affine layers applied along the time axis after a
/// time/feature permute, optionally followed by one affine map along the
/// feature axis. One temporal weight per layer, shared across channels.
struct LinearStack {
  std::vector<AffineLayer> temporal;   // dims: T -> h1 -> ... -> T'
  std::optional<AffineLayer> spatial;  // n_features -> n_features
  Index input_window = 0;  // T
  Index horizon = 0;       // T'
  Index n_features = 0;    // N

  /// Checks the dimension chain; throws ShapeError on violation.
  void validate() const;
};

enum class ModelKind { PureTS, PureTS_S, SigmoidMLP };

/// Builds an uninitialized (zero-parameter) stack.
///   PureTS      temporal layers only, no activations
///   PureTS_S    PureTS plus a feature-axis N x N layer
///   SigmoidMLP  sigmoid after every temporal layer except the last
/// Hidden widths default to max(T, horizon) on every interior layer; pass
/// `hidden` (depth-1 entries) to override.
LinearStack make_model(ModelKind kind, Index input_window, Index horizon,
                       Index n_features, int depth = 3,
                       const std::vector<Index>& hidden = {});

struct LayerGrad {
  Matrix weight;
  Vector bias;
};

/// Per-parameter gradients (or any parameter-shaped value set: Adam moments
/// reuse it). Shapes mirror the stack exactly.
struct GradientSet {
  std::vector<LayerGrad> temporal;
  std::optional<LayerGrad> spatial;

  static GradientSet zeros_like(const LinearStack& m);
  double max_abs() const;
};

/// Post-activation intermediates captured by forward() for reuse in
/// backward().
struct ForwardTrace {
  Tensor3 permuted_input;             // (B, N, T)
  std::vector<Tensor3> temporal_out;  // (B, N, dim_k) per layer
  Tensor3 spatial_input;              // (B, T', N), set iff spatial layer
  Tensor3 output;                     // (B, T', N)
};

/// Applies the model to a (B, T, N) batch, producing (B, T', N).
Tensor3 forward(const LinearStack& m, const Tensor3& x);
Tensor3 forward(const LinearStack& m, const Tensor3& x, ForwardTrace& trace);

/// Reverse-mode gradients of all parameters given dLoss/dOutput. The trace
/// overload reuses cached intermediates; the input overload recomputes them.
GradientSet backward(const LinearStack& m, const ForwardTrace& trace,
                     const Tensor3& grad_out);
GradientSet backward(const LinearStack& m, const Tensor3& x,
                     const Tensor3& grad_out);

/// Folds an activation-free stack into the single equivalent affine map
/// (weight T' x T, bias T'). Requires every activation None and the spatial
/// layer absent or exactly identity.
std::pair<Matrix, Vector> collapse_to_affine(const LinearStack& m);

/// Weights uniform on [-1/sqrt(in_dim), +1/sqrt(in_dim)] drawn in layer
/// order (weight entries in row-major order), biases zero.
void init_parameters(LinearStack& m, RandomSource& rng);

}  // namespace purets
