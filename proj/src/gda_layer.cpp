#include "gdegan/gda_layer.hpp"

#include "gdegan/errors.hpp"
#include "gdegan/geom.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace gdegan {

GdaParams::GdaParams(int heads, double eps_) : xi_raw(Matrix::Constant(1, heads, 0.0)), eps(eps_) {
  if (heads < 1) throw ConfigError("need at least one attention head");
  xi_raw.setConstant(static_cast<float>(inverse_softplus(kInitialTemperature)));
}

BlockWeights::BlockWeights(int h_d, int e_d, int l_max)
    : gamma_v(h_d, h_d, (1 + 2 * l_max) * h_d),
      gamma_s(h_d, h_d, (1 + 2 * l_max) * h_d),
      w_rs(Matrix::Zero(e_d, (1 + 2 * l_max) * h_d)),
      w_q(Matrix::Zero(e_d, e_d)),
      gamma_w(e_d, e_d, e_d),
      gamma_t(e_d, e_d, e_d),
      w_v(Matrix::Zero(h_d, h_d)),
      gamma_m(l_max * h_d + h_d, h_d, 2 * h_d) {
  for (int l = 1; l <= l_max; ++l) w_k.push_back(Matrix::Zero(e_d, e_d));
}

void append_tensors(TensorRefs& out, const std::string& prefix, GdaParams& p) {
  out.emplace_back(prefix + ".xi_raw", &p.xi_raw);
}

void append_tensors(TensorRefs& out, const std::string& prefix, BlockWeights& w) {
  append_tensors(out, prefix + ".gamma_v", w.gamma_v);
  append_tensors(out, prefix + ".gamma_s", w.gamma_s);
  out.emplace_back(prefix + ".w_rs", &w.w_rs);
  out.emplace_back(prefix + ".w_q", &w.w_q);
  for (std::size_t l = 0; l < w.w_k.size(); ++l)
    out.emplace_back(prefix + ".w_k" + std::to_string(l + 1), &w.w_k[l]);
  append_tensors(out, prefix + ".gamma_w", w.gamma_w);
  append_tensors(out, prefix + ".gamma_t", w.gamma_t);
  out.emplace_back(prefix + ".w_v", &w.w_v);
  append_tensors(out, prefix + ".gamma_m", w.gamma_m);
}

NeighborhoodStats neighborhood_stats(const ProteinGraph& g, const Matrix& h, Exec exec) {
  if (h.rows() != g.n) throw ShapeError("feature rows do not match graph");
  NeighborhoodStats s{Matrix::Zero(g.n, h.cols()), Matrix::Zero(g.n, h.cols())};
  for_each_index(g.n, exec, [&](int i) {
    const int deg = g.degree(i);
    if (deg == 0) return;
    auto mean = s.mean.row(i);
    for (int e = g.offsets[i]; e < g.offsets[i + 1]; ++e) mean += h.row(g.senders[e]);
    mean /= deg;
    auto var = s.var.row(i);
    for (int e = g.offsets[i]; e < g.offsets[i + 1]; ++e)
      var.array() += (h.row(g.senders[e]) - mean).array().square();
    var /= deg;
  });
  return s;
}

Matrix scaled_differences(const ProteinGraph& g, const Matrix& h, const Matrix& var, double eps,
                          Exec exec) {
  if (h.rows() != g.n || var.rows() != g.n || var.cols() != h.cols()) {
    throw ShapeError("scaled_differences: feature/variance shapes disagree");
  }
  Matrix d(g.num_edges(), h.cols());
  for_each_index(g.n, exec, [&](int i) {
    if (g.degree(i) == 0) return;
    const Eigen::RowVectorXd inv_sd = (var.row(i).array() + eps).sqrt().inverse().matrix();
    for (int e = g.offsets[i]; e < g.offsets[i + 1]; ++e)
      d.row(e) = ((h.row(g.senders[e]) - h.row(i)).array() * inv_sd.array()).matrix();
  });
  return d;
}

Matrix gaussian_attention(const ProteinGraph& g, const Matrix& d_scaled, const GdaParams& params,
                          Exec exec) {
  const int heads = params.heads();
  const int width = static_cast<int>(d_scaled.cols());
  if (d_scaled.rows() != g.num_edges()) throw ShapeError("one scaled difference row per edge");
  if (width % heads != 0) throw ShapeError("head count must divide the feature width");
  const int head_dim = width / heads;

  std::vector<double> inv_two_xi(heads);
  for (int hd = 0; hd < heads; ++hd) inv_two_xi[hd] = 1.0 / (2.0 * params.temperature(hd));

  Matrix alpha(g.num_edges(), heads);
  for_each_index(g.n, exec, [&](int i) {
    const int begin = g.offsets[i], end = g.offsets[i + 1];
    if (begin == end) return;
    for (int hd = 0; hd < heads; ++hd) {
      double max_logit = -std::numeric_limits<double>::infinity();
      for (int e = begin; e < end; ++e) {
        const double logit =
            -d_scaled.row(e).segment(hd * head_dim, head_dim).squaredNorm() * inv_two_xi[hd];
        alpha(e, hd) = logit;
        max_logit = std::max(max_logit, logit);
      }
      double total = 0.0;
      for (int e = begin; e < end; ++e) {
        alpha(e, hd) = std::exp(alpha(e, hd) - max_logit);
        total += alpha(e, hd);
      }
      for (int e = begin; e < end; ++e) alpha(e, hd) /= total;
    }
  });
  return alpha;
}

Messages attention_messages(const ProteinGraph& g, const Matrix& alpha, const LayerState& state,
                            const BlockWeights& w) {
  const int h_d = w.hidden();
  const int l_max = w.l_max();
  const int s_dim = w.splits() * h_d;
  const int ne = g.num_edges();
  if (state.h.cols() != h_d || state.l_max() != l_max) throw ShapeError("layer state misshaped");
  if (w.gamma_v.out() != s_dim || w.gamma_s.out() != s_dim || w.w_rs.cols() != s_dim) {
    throw ShapeError("message projections must produce S * h_d channels");
  }
  if (state.t.cols() != w.w_rs.rows() || state.t.rows() != ne) throw ShapeError("edge features misshaped");
  if (alpha.rows() != ne || h_d % alpha.cols() != 0) throw ShapeError("attention misshaped");
  const int head_dim = h_d / static_cast<int>(alpha.cols());

  const Matrix values = w.gamma_v(state.h);
  const Matrix gates = w.gamma_s(state.h);
  const Matrix edge_proj = state.t * w.w_rs;

  Matrix o(ne, s_dim);
  for (int e = 0; e < ne; ++e) {
    const int j = g.senders[e];
    const double cut = state.geo.cut[e];
    for (int s = 0; s < w.splits(); ++s) {
      for (int c = 0; c < h_d; ++c) {
        const int k = s * h_d + c;
        o(e, k) = alpha(e, c / head_dim) * values(j, k) + edge_proj(e, k) * gates(j, k) * cut;
      }
    }
  }

  Messages msg;
  msg.scalar = o.leftCols(h_d);
  for (int l = 1; l <= l_max; ++l) msg.dir.push_back(o.middleCols(l * h_d, h_d));
  for (int l = 1; l <= l_max; ++l) msg.tensor.push_back(o.middleCols((l_max + l) * h_d, h_d));
  return msg;
}

void update_features(const ProteinGraph& g, const Messages& o, LayerState& state, Exec exec) {
  const int l_max = state.l_max();
  if (static_cast<int>(o.dir.size()) != l_max || static_cast<int>(o.tensor.size()) != l_max) {
    throw ShapeError("message components do not match l_max");
  }
  Matrix h = state.h;
  std::vector<Matrix> x = state.x;
  for_each_index(g.n, exec, [&](int i) {
    for (int e = g.offsets[i]; e < g.offsets[i + 1]; ++e) h.row(i) += o.scalar.row(e);
    for (int l = 1; l <= l_max; ++l) {
      const int dim = harmonic_dim(l);
      const Matrix& old = state.x[l - 1];
      const Matrix& sh = state.geo.harmonics[l - 1];
      auto block = x[l - 1].middleRows(i * dim, dim);
      for (int e = g.offsets[i]; e < g.offsets[i + 1]; ++e) {
        const int j = g.senders[e];
        for (int m = 0; m < dim; ++m) {
          block.row(m) += o.dir[l - 1].row(e) * sh(e, m) +
                          (o.tensor[l - 1].row(e).array() * old.row(j * dim + m).array()).matrix();
        }
      }
    }
  });
  state.h = std::move(h);
  state.x = std::move(x);
}

Matrix hierarchical_refinement(const ProteinGraph& g, const std::vector<Matrix>& x, const Matrix& t,
                               const BlockWeights& w, Exec exec) {
  const int l_max = w.l_max();
  if (static_cast<int>(x.size()) != l_max) throw ShapeError("steerable degrees do not match weights");
  if (t.rows() != g.num_edges() || t.cols() != w.w_q.cols()) throw ShapeError("edge features misshaped");
  std::vector<Matrix> q, k;
  for (int l = 1; l <= l_max; ++l) {
    if (x[l - 1].cols() != w.w_q.rows()) throw ShapeError("W_q expects h_d == e_d");
    q.push_back(x[l - 1] * w.w_q);
    k.push_back(x[l - 1] * w.w_k[l - 1]);
  }
  Matrix sim = Matrix::Zero(g.num_edges(), t.cols());
  for_each_index(g.n, exec, [&](int i) {
    for (int e = g.offsets[i]; e < g.offsets[i + 1]; ++e) {
      const int j = g.senders[e];
      for (int l = 1; l <= l_max; ++l) {
        const int dim = harmonic_dim(l);
        for (int m = 0; m < dim; ++m)
          sim.row(e).array() += q[l - 1].row(i * dim + m).array() * k[l - 1].row(j * dim + m).array();
      }
    }
  });
  return t + (w.gamma_w(sim).array() * w.gamma_t(t).array()).matrix();
}

void eqff(LayerState& state, const BlockWeights& w) {
  const int h_d = w.hidden();
  const int l_max = w.l_max();
  const int n = static_cast<int>(state.h.rows());
  if (state.h.cols() != h_d || state.l_max() != l_max) throw ShapeError("eqff: layer state misshaped");

  std::vector<Matrix> xv;
  Matrix input(n, l_max * h_d + h_d);
  for (int l = 1; l <= l_max; ++l) {
    const int dim = harmonic_dim(l);
    xv.push_back(state.x[l - 1] * w.w_v);
    for (int i = 0; i < n; ++i) {
      input.block(i, (l - 1) * h_d, 1, h_d) =
          xv.back().middleRows(i * dim, dim).colwise().squaredNorm().array().sqrt().matrix();
    }
  }
  input.rightCols(h_d) = state.h;
  const Matrix mod = w.gamma_m(input);
  state.h += mod.leftCols(h_d);
  for (int l = 1; l <= l_max; ++l) {
    const int dim = harmonic_dim(l);
    for (int i = 0; i < n; ++i) {
      for (int m = 0; m < dim; ++m) {
        state.x[l - 1].row(i * dim + m).array() +=
            mod.block(i, h_d, 1, h_d).array() * xv[l - 1].row(i * dim + m).array();
      }
    }
  }
}

LayerState layer_forward(const LayerState& state, const ProteinGraph& g, const GdaParams& params,
                         const BlockWeights& w, Exec exec, LayerDiagnostics* diag) {
  const NeighborhoodStats stats = neighborhood_stats(g, state.h, exec);
  const Matrix d = scaled_differences(g, state.h, stats.var, params.eps, exec);
  Matrix alpha = gaussian_attention(g, d, params, exec);
  const Messages msg = attention_messages(g, alpha, state, w);

  LayerState next = state;
  update_features(g, msg, next, exec);
  next.t = hierarchical_refinement(g, next.x, state.t, w, exec);
  eqff(next, w);

  if (diag) {
    diag->alpha = std::move(alpha);
    diag->var = stats.var;
  }
  return next;
}

}  // namespace gdegan
