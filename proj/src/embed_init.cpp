#include "gdegan/embed_init.hpp"

#include "gdegan/errors.hpp"
#include "gdegan/geom.hpp"

#include <algorithm>

namespace gdegan {

InitWeights::InitWeights(int n_d, int h_d, int k, int e_d)
    : w_a(Matrix::Zero(n_d, h_d)),
      w_rbf(Matrix::Zero(k, h_d)),
      w_h(2 * h_d, h_d, true),
      w_d(h_d, h_d, true),
      w_u(h_d, h_d, true),
      ln(h_d),
      w_e(Matrix::Zero(k, e_d)) {}

void append_tensors(TensorRefs& out, const std::string& prefix, InitWeights& w) {
  out.emplace_back(prefix + ".w_a", &w.w_a);
  out.emplace_back(prefix + ".w_rbf", &w.w_rbf);
  append_tensors(out, prefix + ".w_h", w.w_h);
  append_tensors(out, prefix + ".w_d", w.w_d);
  append_tensors(out, prefix + ".w_u", w.w_u);
  append_tensors(out, prefix + ".ln", w.ln);
  out.emplace_back(prefix + ".w_e", &w.w_e);
}

EdgeGeometry edge_geometry(const ProteinGraph& g, int k, int l_max) {
  if (k < 1) throw ConfigError("need at least one radial basis function");
  if (l_max < 1 || l_max > kMaxDegree) throw UnsupportedDegree("l_max must be 1 or 2");
  const int ne = g.num_edges();
  EdgeGeometry geo;
  geo.rbf.resize(ne, k);
  geo.cut.resize(ne);
  for (int l = 1; l <= l_max; ++l) geo.harmonics.emplace_back(ne, harmonic_dim(l));

  Eigen::VectorXd basis(k);
  double sh[5];
  for (int e = 0; e < ne; ++e) {
    rbf_expand_unchecked(g.dist[e], k, g.cutoff, basis.data());
    geo.rbf.row(e) = basis.transpose();
    geo.cut[e] = cosine_cutoff(g.dist[e], g.cutoff);
    for (int l = 1; l <= l_max; ++l) {
      harmonic_unchecked(l, g.unit[e], sh);
      for (int m = 0; m < harmonic_dim(l); ++m) geo.harmonics[l - 1](e, m) = sh[m];
    }
  }
  return geo;
}

Matrix aggregate_neighborhood(const ProteinGraph& g, const EdgeGeometry& geo, const InitWeights& w,
                              Exec exec) {
  if (g.features.cols() != w.w_a.rows()) throw ShapeError("W_a rows must equal n_d");
  if (geo.rbf.cols() != w.w_rbf.rows()) throw ShapeError("W_rbf rows must equal K");
  if (w.w_a.cols() != w.w_rbf.cols()) throw ShapeError("W_a and W_rbf widths differ");
  if (geo.rbf.rows() != g.num_edges()) throw ShapeError("edge geometry does not match graph");

  const Matrix proj = g.features * w.w_a;
  const Matrix radial = geo.rbf * w.w_rbf;
  Matrix m = Matrix::Zero(g.n, w.hidden());
  for_each_index(g.n, exec, [&](int i) {
    for (int e = g.offsets[i]; e < g.offsets[i + 1]; ++e) {
      const int j = g.senders[e];
      m.row(i).array() += proj.row(j).array() * radial.row(e).array() * geo.cut[e];
    }
  });
  return m;
}

Matrix init_node_features(const ProteinGraph& g, const Matrix& m, const InitWeights& w) {
  if (m.rows() != g.n || m.cols() != w.hidden()) throw ShapeError("neighborhood messages misshaped");
  if (g.features.cols() != w.w_a.rows()) throw ShapeError("W_a rows must equal n_d");
  Matrix self_and_nbr(g.n, 2 * w.hidden());
  self_and_nbr << g.features * w.w_a, m;
  return w.w_u(silu(w.w_d(w.ln(w.w_h(self_and_nbr)))));
}

Matrix init_edge_features(const Matrix& h0, const ProteinGraph& g, const EdgeGeometry& geo,
                          const InitWeights& w) {
  if (w.w_e.cols() != h0.cols()) {
    throw ConfigError("edge width e_d must equal node width h_d");
  }
  if (geo.rbf.cols() != w.w_e.rows()) throw ShapeError("W_e rows must equal K");
  const Matrix radial = geo.rbf * w.w_e;
  Matrix t(g.num_edges(), h0.cols());
  for (int e = 0; e < g.num_edges(); ++e) {
    const int i = g.receivers[e], j = g.senders[e];
    // lower index first: keeps t_ij and t_ji bitwise equal
    const int a = std::min(i, j), b = std::max(i, j);
    t.row(e) = ((h0.row(a) + h0.row(b)).array() * radial.row(e).array()).matrix();
  }
  return t;
}

std::vector<Matrix> init_steerable(int n, int l_max, int h_d) {
  std::vector<Matrix> x;
  for (int l = 1; l <= l_max; ++l) x.push_back(Matrix::Zero(n * harmonic_dim(l), h_d));
  return x;
}

LayerState initial_state(const ProteinGraph& g, const InitWeights& w, int l_max, Exec exec) {
  LayerState s;
  s.geo = edge_geometry(g, w.num_rbf(), l_max);
  const Matrix m = aggregate_neighborhood(g, s.geo, w, exec);
  s.h = init_node_features(g, m, w);
  s.t = init_edge_features(s.h, g, s.geo, w);
  s.x = init_steerable(g.n, l_max, w.hidden());
  return s;
}

}  // namespace gdegan
