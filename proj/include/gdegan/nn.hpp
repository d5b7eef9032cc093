#pragma once

// Dense building blocks. Row-vector convention throughout: a batch of inputs
// is an (rows x in) matrix and a layer computes X * W + b.

#include <Eigen/Dense>

#include <cmath>
#include <string>
#include <vector>

namespace gdegan {

using Matrix = Eigen::MatrixXd;

inline double silu(double x) { return x / (1.0 + std::exp(-x)); }
inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }
inline double softplus(double x) { return x > 30.0 ? x : std::log1p(std::exp(x)); }
inline double inverse_softplus(double y) { return y > 30.0 ? y : std::log(std::expm1(y)); }

Matrix silu(const Matrix& x);

struct Linear {
  Matrix weight;  // in x out
  Matrix bias;    // 1 x out, or empty when the layer has no bias

  Linear() = default;
  Linear(int in, int out, bool with_bias);

  int in() const { return static_cast<int>(weight.rows()); }
  int out() const { return static_cast<int>(weight.cols()); }
  Matrix operator()(const Matrix& x) const;
};

/// Two-layer perceptron in -> hidden -> out with SiLU between.
struct Mlp {
  Linear first;
  Linear second;

  Mlp() = default;
  Mlp(int in, int hidden, int out) : first(in, hidden, true), second(hidden, out, true) {}

  int in() const { return first.in(); }
  int out() const { return second.out(); }
  Matrix operator()(const Matrix& x) const { return second(silu(first(x))); }
};

/// Row-wise layer normalization with learned scale and shift.
struct LayerNorm {
  Matrix scale;  // 1 x width
  Matrix shift;  // 1 x width
  double eps = 1e-5;

  LayerNorm() = default;
  explicit LayerNorm(int width);

  Matrix operator()(const Matrix& x) const;
};

/// (name, tensor) pairs, in a fixed order, used by serialization, parameter
/// counting and the finite-difference trainer.
using TensorRefs = std::vector<std::pair<std::string, Matrix*>>;

void append_tensors(TensorRefs& out, const std::string& prefix, Linear& l);
void append_tensors(TensorRefs& out, const std::string& prefix, Mlp& m);
void append_tensors(TensorRefs& out, const std::string& prefix, LayerNorm& ln);

}  // namespace gdegan
