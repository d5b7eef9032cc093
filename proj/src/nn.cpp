#include "gdegan/nn.hpp"

#include "gdegan/errors.hpp"

namespace gdegan {

Matrix silu(const Matrix& x) { return x.unaryExpr([](double v) { return silu(v); }); }

Linear::Linear(int in, int out, bool with_bias) : weight(Matrix::Zero(in, out)) {
  if (with_bias) bias = Matrix::Zero(1, out);
}

Matrix Linear::operator()(const Matrix& x) const {
  if (x.cols() != weight.rows()) {
    throw ShapeError("linear layer expects width " + std::to_string(weight.rows()) + ", got " +
                     std::to_string(x.cols()));
  }
  Matrix y = x * weight;
  if (bias.size() != 0) y.rowwise() += bias.row(0);
  return y;
}

LayerNorm::LayerNorm(int width) : scale(Matrix::Ones(1, width)), shift(Matrix::Zero(1, width)) {}

Matrix LayerNorm::operator()(const Matrix& x) const {
  if (x.cols() != scale.cols()) throw ShapeError("layer norm width mismatch");
  Matrix y(x.rows(), x.cols());
  const double w = static_cast<double>(x.cols());
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    const double mean = x.row(r).sum() / w;
    const double var = (x.row(r).array() - mean).square().sum() / w;
    const double inv = 1.0 / std::sqrt(var + eps);
    y.row(r) = ((x.row(r).array() - mean) * inv * scale.row(0).array() + shift.row(0).array()).matrix();
  }
  return y;
}

void append_tensors(TensorRefs& out, const std::string& prefix, Linear& l) {
  out.emplace_back(prefix + ".weight", &l.weight);
  if (l.bias.size() != 0) out.emplace_back(prefix + ".bias", &l.bias);
}

void append_tensors(TensorRefs& out, const std::string& prefix, Mlp& m) {
  append_tensors(out, prefix + ".0", m.first);
  append_tensors(out, prefix + ".1", m.second);
}

void append_tensors(TensorRefs& out, const std::string& prefix, LayerNorm& ln) {
  out.emplace_back(prefix + ".scale", &ln.scale);
  out.emplace_back(prefix + ".shift", &ln.shift);
}

}  // namespace gdegan
