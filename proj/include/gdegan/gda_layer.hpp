#pragma once

// One message-passing block: Gaussian dynamic attention over neighborhood
// statistics, attention-weighted equivariant updates, hierarchical tensor
// refinement of the edge features and the equivariant feed-forward.

#include "gdegan/embed_init.hpp"
#include "gdegan/nn.hpp"
#include "gdegan/parallel.hpp"
#include "gdegan/protein.hpp"

#include <vector>

namespace gdegan {

/// softplus(raw) ~= 2.03, the starting temperature.
inline constexpr double kInitialTemperature = 2.03;

/// Per-head temperatures xi_h = softplus(xi_raw_h), plus the variance floor.
struct GdaParams {
  Matrix xi_raw;  // 1 x H
  double eps = 1e-6;

  GdaParams() = default;
  explicit GdaParams(int heads, double eps = 1e-6);

  int heads() const { return static_cast<int>(xi_raw.cols()); }
  double temperature(int head) const { return softplus(xi_raw(0, head)); }
};

struct BlockWeights {
  Mlp gamma_v;                // h_d -> S h_d
  Mlp gamma_s;                // h_d -> S h_d
  Matrix w_rs;                // e_d x S h_d, no bias
  Matrix w_q;                 // e_d x e_d, shared over degrees
  std::vector<Matrix> w_k;    // [l-1]: e_d x e_d
  Mlp gamma_w;                // e_d -> e_d
  Mlp gamma_t;                // e_d -> e_d
  Matrix w_v;                 // h_d x h_d
  Mlp gamma_m;                // (l_max h_d + h_d) -> 2 h_d

  BlockWeights() = default;
  BlockWeights(int h_d, int e_d, int l_max);

  int hidden() const { return static_cast<int>(w_v.rows()); }
  int l_max() const { return static_cast<int>(w_k.size()); }
  int splits() const { return 1 + 2 * l_max(); }
};

void append_tensors(TensorRefs& out, const std::string& prefix, GdaParams& p);
void append_tensors(TensorRefs& out, const std::string& prefix, BlockWeights& w);

struct NeighborhoodStats {
  Matrix mean;  // n x h_d
  Matrix var;   // n x h_d, population variance; zero for isolated nodes
};

NeighborhoodStats neighborhood_stats(const ProteinGraph& g, const Matrix& h,
                                     Exec exec = Exec::Parallel);

/// (h_j - h_i) / sqrt(var_i + eps) per directed edge (receiver i).
Matrix scaled_differences(const ProteinGraph& g, const Matrix& h, const Matrix& var, double eps,
                          Exec exec = Exec::Parallel);

/// Head-wise softmax over each receiver's neighbors of
/// -|d_scaled[head slice]|^2 / (2 xi_h). Returns n_e x H.
Matrix gaussian_attention(const ProteinGraph& g, const Matrix& d_scaled, const GdaParams& params,
                          Exec exec = Exec::Parallel);

/// The S = 1 + 2 l_max message components, each n_e x h_d.
struct Messages {
  Matrix scalar;
  std::vector<Matrix> dir;     // o^{d,(l)}, [l-1]
  std::vector<Matrix> tensor;  // o^{t,(l)}, [l-1]
};

Messages attention_messages(const ProteinGraph& g, const Matrix& alpha, const LayerState& state,
                            const BlockWeights& w);

/// Residual sum of the messages into h and the steerable blocks.
void update_features(const ProteinGraph& g, const Messages& o, LayerState& state,
                     Exec exec = Exec::Parallel);

/// t_ij + gamma_w(w_ij) o gamma_t(t_ij) with
/// w_ij = sum_l sum_m (X_i^(l) W_q)[m] o (X_j^(l) W_k^(l))[m].
Matrix hierarchical_refinement(const ProteinGraph& g, const std::vector<Matrix>& x, const Matrix& t,
                               const BlockWeights& w, Exec exec = Exec::Parallel);

/// Equivariant feed-forward; updates state.h and state.x in place.
void eqff(LayerState& state, const BlockWeights& w);

struct LayerDiagnostics {
  Matrix alpha;  // n_e x H
  Matrix var;    // n x h_d
};

LayerState layer_forward(const LayerState& state, const ProteinGraph& g, const GdaParams& params,
                         const BlockWeights& w, Exec exec = Exec::Parallel,
                         LayerDiagnostics* diag = nullptr);

}  // namespace gdegan
