#pragma once

// Shared test fixtures: scratch directories, random model construction and
// the finite-difference gradient oracle the model tests check against.

#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <string>
#include <vector>

#include <unistd.h>

#include "purets/model.hpp"
#include "purets/random.hpp"
#include "purets/tensor.hpp"

namespace testutil {

/// Exact elementwise equality for Eigen matrices/vectors of any mix.
template <class A, class B>
bool exact_equal(const A& a, const B& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
  for (purets::Index i = 0; i < a.rows(); ++i)
    for (purets::Index j = 0; j < a.cols(); ++j)
      if (a(i, j) != b(i, j)) return false;
  return true;
}

/// Unique scratch directory, removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    const int n = counter.fetch_add(1);
    path_ = std::filesystem::temp_directory_path() /
            ("purets_test_" + std::to_string(::getpid()) + "_" +
             std::to_string(n));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const {
    return path_ / name;
  }

 private:
  std::filesystem::path path_;
};

struct StackSpec {
  purets::Index input_window = 0;
  purets::Index horizon = 0;
  purets::Index n_features = 0;
  int depth = 0;
  bool sigmoid = false;
  bool spatial = false;
};

/// Random small stack covering every structural combination: depth 1..3,
/// T 2..32, T' 1..16, N 1..4, with and without sigmoid activations and a
/// feature-axis layer. Parameters initialized from `rng`.
inline purets::LinearStack random_stack(purets::RandomSource& rng,
                                        StackSpec* out_spec = nullptr) {
  StackSpec s;
  s.input_window = 2 + static_cast<purets::Index>(rng.below(31));  // 2..32
  s.horizon = 1 + static_cast<purets::Index>(rng.below(16));       // 1..16
  s.n_features = 1 + static_cast<purets::Index>(rng.below(4));     // 1..4
  s.depth = 1 + static_cast<int>(rng.below(3));                    // 1..3
  s.sigmoid = rng.below(2) == 1;
  s.spatial = rng.below(2) == 1;

  using purets::ModelKind;
  // SigmoidMLP + a hand-attached spatial layer covers the combination no
  // ModelKind builds directly; backward() is structural, not kind-gated.
  purets::LinearStack m = purets::make_model(
      s.sigmoid ? ModelKind::SigmoidMLP : ModelKind::PureTS, s.input_window,
      s.horizon, s.n_features, s.depth);
  if (s.spatial) {
    purets::AffineLayer sp;
    sp.weight = purets::Matrix::Zero(s.n_features, s.n_features);
    sp.bias = purets::Vector::Zero(s.n_features);
    m.spatial = sp;
  }
  purets::init_parameters(m, rng);
  m.validate();
  if (out_spec) *out_spec = s;
  return m;
}

/// Flat pointers to every parameter scalar: per layer the weight entries in
/// row-major order then the bias, temporal layers first, spatial last. The
/// gradient overload walks a GradientSet in the same order, so index k in
/// both lists refers to the same parameter.
inline std::vector<double*> param_scalars(purets::LinearStack& m) {
  std::vector<double*> out;
  auto add = [&out](purets::AffineLayer& l) {
    for (purets::Index i = 0; i < l.weight.size(); ++i)
      out.push_back(l.weight.data() + i);
    for (purets::Index i = 0; i < l.bias.size(); ++i)
      out.push_back(l.bias.data() + i);
  };
  for (auto& l : m.temporal) add(l);
  if (m.spatial) add(*m.spatial);
  return out;
}

inline std::vector<double> grad_scalars(const purets::GradientSet& g) {
  std::vector<double> out;
  auto add = [&out](const purets::LayerGrad& l) {
    for (purets::Index i = 0; i < l.weight.size(); ++i)
      out.push_back(*(l.weight.data() + i));
    for (purets::Index i = 0; i < l.bias.size(); ++i)
      out.push_back(*(l.bias.data() + i));
  };
  for (const auto& l : g.temporal) add(l);
  if (g.spatial) add(*g.spatial);
  return out;
}

/// Loop-based forward pass that counts every scalar multiply it performs.
/// Returns the output so callers can prove the oracle walked the real
/// computation, not just a closed form.
inline purets::Tensor3 instrumented_forward(const purets::LinearStack& m,
                                            const purets::Tensor3& x,
                                            std::uint64_t& multiplies) {
  using purets::Index;
  using purets::Tensor3;
  multiplies = 0;
  const Index B = x.batch(), N = m.n_features;
  Tensor3 cur = purets::permute_time_feature(x);  // (B, N, T)
  for (const auto& layer : m.temporal) {
    Tensor3 next(B, N, layer.out_dim());
    for (Index b = 0; b < B; ++b)
      for (Index n = 0; n < N; ++n)
        for (Index o = 0; o < layer.out_dim(); ++o) {
          double acc = layer.bias(o);
          for (Index i = 0; i < layer.in_dim(); ++i) {
            acc += layer.weight(o, i) * cur(b, n, i);
            ++multiplies;
          }
          next(b, n, o) = acc;
        }
    if (layer.activation == purets::Activation::Sigmoid)
      next.mat() = (1.0 + (-next.mat().array()).exp()).inverse().matrix();
    cur = std::move(next);
  }
  Tensor3 out = purets::permute_time_feature(cur);  // (B, T', N)
  if (m.spatial) {
    Tensor3 mixed(B, m.horizon, N);
    for (Index b = 0; b < B; ++b)
      for (Index t = 0; t < m.horizon; ++t)
        for (Index o = 0; o < N; ++o) {
          double acc = m.spatial->bias(o);
          for (Index i = 0; i < N; ++i) {
            acc += m.spatial->weight(o, i) * out(b, t, i);
            ++multiplies;
          }
          mixed(b, t, o) = acc;
        }
    out = std::move(mixed);
  }
  return out;
}

/// Scalar objective J = sum(forward(m, x) .* g); backward(m, x, g) is its
/// exact gradient, which makes J the natural probe for finite differences.
inline double dot_objective(const purets::LinearStack& m,
                            const purets::Tensor3& x,
                            const purets::Tensor3& g) {
  const purets::Tensor3 out = purets::forward(m, x);
  return (out.mat().array() * g.mat().array()).sum();
}

/// Max over parameters of |fd - analytic| / max(|fd|, |analytic|, 1e-4),
/// with central differences at eps. The 1e-4 floor keeps round-off on
/// near-zero gradients from registering as relative error.
inline double max_fd_rel_error(purets::LinearStack& m, const purets::Tensor3& x,
                               const purets::Tensor3& g, double eps = 1e-5) {
  const purets::GradientSet gs = purets::backward(m, x, g);
  const std::vector<double> analytic = grad_scalars(gs);
  const std::vector<double*> params = param_scalars(m);
  double worst = 0.0;
  for (std::size_t k = 0; k < params.size(); ++k) {
    const double orig = *params[k];
    *params[k] = orig + eps;
    const double jp = dot_objective(m, x, g);
    *params[k] = orig - eps;
    const double jm = dot_objective(m, x, g);
    *params[k] = orig;
    const double fd = (jp - jm) / (2.0 * eps);
    const double denom =
        std::max({std::fabs(fd), std::fabs(analytic[k]), 1e-4});
    worst = std::max(worst, std::fabs(fd - analytic[k]) / denom);
  }
  return worst;
}

}  // namespace testutil
