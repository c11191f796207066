#include "purets/tensor.hpp"

namespace purets {

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows())
    throw ShapeError("matmul: inner dimensions disagree, " + shape_str(a) +
                     " vs " + shape_str(b));
  return a * b;
}

Tensor3 permute_time_feature(const Tensor3& x) {
  Tensor3 out(x.batch(), x.axis2(), x.axis1());
  for (Index b = 0; b < x.batch(); ++b)
    out.slice(b) = x.slice(b).transpose();
  return out;
}

Tensor3 batched_affine(const Tensor3& x, const Matrix& w, const Vector& bias) {
  if (x.axis2() != w.cols())
    throw ShapeError("batched_affine: input last axis " +
                     std::to_string(x.axis2()) + " vs weight " + shape_str(w));
  if (bias.size() != w.rows())
    throw ShapeError("batched_affine: bias length " +
                     std::to_string(bias.size()) + " vs weight " +
                     shape_str(w));
  Tensor3 out(x.batch(), x.axis1(), w.rows());
  for (Index b = 0; b < x.batch(); ++b) {
    out.slice(b).noalias() = x.slice(b) * w.transpose();
    out.slice(b).rowwise() += bias.transpose();
  }
  return out;
}

Tensor3 random_uniform(Index batch, Index axis1, Index axis2,
                       RandomSource& rng, double lo, double hi) {
  Tensor3 out(batch, axis1, axis2);
  Scalar* p = out.data();
  for (Index k = 0; k < out.size(); ++k) p[k] = rng.uniform(lo, hi);
  return out;
}

}  // namespace purets
