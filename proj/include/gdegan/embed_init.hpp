#pragma once

// Initial node, edge and steerable features from the raw residue graph.

#include "gdegan/nn.hpp"
#include "gdegan/parallel.hpp"
#include "gdegan/protein.hpp"

#include <vector>

namespace gdegan {

struct InitWeights {
  Matrix w_a;     // n_d x h_d, no bias
  Matrix w_rbf;   // K x h_d, no bias
  Linear w_h;     // 2 h_d -> h_d, with bias; input is (h_i W_a || m_i)
  Linear w_d;     // h_d -> h_d, with bias
  Linear w_u;     // h_d -> h_d, with bias
  LayerNorm ln;   // width h_d, eps 1e-5
  Matrix w_e;     // K x e_d, no bias

  InitWeights() = default;
  InitWeights(int n_d, int h_d, int k, int e_d);

  int hidden() const { return static_cast<int>(w_a.cols()); }
  int num_rbf() const { return static_cast<int>(w_rbf.rows()); }
};

void append_tensors(TensorRefs& out, const std::string& prefix, InitWeights& w);

/// Per-edge geometry shared by every layer: radial basis rows, cutoff values
/// and edge harmonics r~^(l) for l = 1..l_max, all indexed like the graph's
/// edge list.
struct EdgeGeometry {
  Matrix rbf;                     // n_e x K
  Eigen::VectorXd cut;            // n_e
  std::vector<Matrix> harmonics;  // [l-1]: n_e x (2l+1)
};

EdgeGeometry edge_geometry(const ProteinGraph& g, int k, int l_max);

/// Layer state. Steerable block x[l-1] stores X~^(l) as an (n (2l+1)) x h_d
/// matrix; rows i(2l+1) .. i(2l+1)+2l belong to residue i.
struct LayerState {
  Matrix h;               // n x h_d
  std::vector<Matrix> x;  // [l-1]
  Matrix t;               // n_e x e_d
  EdgeGeometry geo;

  int l_max() const { return static_cast<int>(x.size()); }
};

/// m_i = sum_j (h_j W_a) o (rbf_ij W_rbf) o cut_ij; zero for isolated nodes.
Matrix aggregate_neighborhood(const ProteinGraph& g, const EdgeGeometry& geo, const InitWeights& w,
                              Exec exec = Exec::Parallel);

/// h0_i = W_u(SiLU(LN[W_h(h_i W_a || m_i)] W_d)).
Matrix init_node_features(const ProteinGraph& g, const Matrix& m, const InitWeights& w);

/// t0_ij = (h0_i + h0_j) o (rbf_ij W_e). Requires e_d == h_d.
Matrix init_edge_features(const Matrix& h0, const ProteinGraph& g, const EdgeGeometry& geo,
                          const InitWeights& w);

/// Zero steerable tensors, one (n (2l+1)) x h_d block per degree 1..l_max.
std::vector<Matrix> init_steerable(int n, int l_max, int h_d);

LayerState initial_state(const ProteinGraph& g, const InitWeights& w, int l_max,
                         Exec exec = Exec::Parallel);

}  // namespace gdegan
