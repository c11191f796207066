#pragma once

#include <string>

#include "purets/errors.hpp"
#include "purets/random.hpp"
#include "purets/types.hpp"

namespace purets {

/// Dense rank-3 array (batch x axis1 x axis2). Storage is one row-major
/// matrix of shape (batch*axis1, axis2), so the buffer is contiguous and
/// element (b, i, j) lives at data()[(b*axis1 + i)*axis2 + j]. Plain value
/// type: copy/move freely, no shared state.
class Tensor3 {
 public:
  Tensor3() = default;

  /// Zero-filled tensor of the given shape.
  Tensor3(Index batch, Index axis1, Index axis2)
      : batch_(batch), axis1_(axis1), axis2_(axis2) {
    if (batch < 0 || axis1 < 0 || axis2 < 0)
      throw ShapeError("Tensor3: negative dimension in (" + shape_str() + ")");
    stacked_ = Matrix::Zero(batch * axis1, axis2);
  }

  Index batch() const { return batch_; }
  Index axis1() const { return axis1_; }
  Index axis2() const { return axis2_; }
  Index size() const { return batch_ * axis1_ * axis2_; }

  Scalar& operator()(Index b, Index i, Index j) {
    return stacked_(b * axis1_ + i, j);
  }
  Scalar operator()(Index b, Index i, Index j) const {
    return stacked_(b * axis1_ + i, j);
  }

  /// axis1 x axis2 view of one batch entry.
  MatrixMap slice(Index b) {
    return MatrixMap(stacked_.data() + b * axis1_ * axis2_, axis1_, axis2_);
  }
  ConstMatrixMap slice(Index b) const {
    return ConstMatrixMap(stacked_.data() + b * axis1_ * axis2_, axis1_,
                          axis2_);
  }

  /// The whole tensor as a (batch*axis1) x axis2 matrix. Shape-preserving
  /// expressions on it are the idiomatic way to do elementwise work.
  Matrix& mat() { return stacked_; }
  const Matrix& mat() const { return stacked_; }

  Scalar* data() { return stacked_.data(); }
  const Scalar* data() const { return stacked_.data(); }

  bool same_shape(const Tensor3& o) const {
    return batch_ == o.batch_ && axis1_ == o.axis1_ && axis2_ == o.axis2_;
  }

  bool all_finite() const { return stacked_.allFinite(); }

  std::string shape_str() const {
    return std::to_string(batch_) + "x" + std::to_string(axis1_) + "x" +
           std::to_string(axis2_);
  }

  Tensor3& operator+=(const Tensor3& o) {
    require_same_shape(o, "+=");
    stacked_ += o.stacked_;
    return *this;
  }
  Tensor3& operator-=(const Tensor3& o) {
    require_same_shape(o, "-=");
    stacked_ -= o.stacked_;
    return *this;
  }
  Tensor3& operator*=(Scalar s) {
    stacked_ *= s;
    return *this;
  }

  friend Tensor3 operator+(Tensor3 a, const Tensor3& b) { return a += b; }
  friend Tensor3 operator-(Tensor3 a, const Tensor3& b) { return a -= b; }
  friend Tensor3 operator*(Scalar s, Tensor3 a) { return a *= s; }
  friend Tensor3 operator*(Tensor3 a, Scalar s) { return a *= s; }

 private:
  void require_same_shape(const Tensor3& o, const char* op) const {
    if (!same_shape(o))
      throw ShapeError(std::string("Tensor3 ") + op + ": " + shape_str() +
                       " vs " + o.shape_str());
  }

  Index batch_ = 0, axis1_ = 0, axis2_ = 0;
  Matrix stacked_;  // (batch*axis1) x axis2
};

inline std::string shape_str(const Matrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

/// Standard matrix product; throws ShapeError naming both shapes when the
/// inner dimensions disagree.
Matrix matmul(const Matrix& a, const Matrix& b);

/// Swap axis1 and axis2: element (b, i, j) moves to (b, j, i). Materialized
/// copy, involutive.
Tensor3 permute_time_feature(const Tensor3& x);

/// Affine map along the last axis, shared across batch and axis1:
/// out[b, i, :] = w * x[b, i, :] + bias with w of shape out_dim x in_dim.
Tensor3 batched_affine(const Tensor3& x, const Matrix& w, const Vector& bias);

/// Tensor with i.i.d. uniform entries on [lo, hi), drawn in storage order.
Tensor3 random_uniform(Index batch, Index axis1, Index axis2,
                       RandomSource& rng, double lo = -1.0, double hi = 1.0);

}  // namespace purets
