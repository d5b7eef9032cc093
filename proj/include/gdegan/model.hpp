#pragma once

// The full network: initial embedding, a stack of GDA blocks, the binding
// probability head and the direction read-out from the l = 1 features.

#include "gdegan/embed_init.hpp"
#include "gdegan/gda_layer.hpp"
#include "gdegan/nn.hpp"
#include "gdegan/parallel.hpp"
#include "gdegan/protein.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace gdegan {

struct ModelConfig {
  int n_d = 1280;  // ESM-2 650M width; real inputs carry their own width
  int h_d = 128;
  int e_d = 128;
  int K = 32;
  int H = 8;
  int L = 4;
  int L_max = 2;
  double r_c = kDefaultCutoff;
  int max_neighbors = kDefaultMaxNeighbors;
  double eps = 1e-6;
  double tau = 0.5;
  std::uint64_t seed = 0;

  /// Throws ConfigError on violated invariants. L = 0 is accepted (a model
  /// reduced to the embedding block and the head).
  void validate() const;

  bool operator==(const ModelConfig&) const = default;
};

/// key=value lines, one per field, in declaration order.
std::string format_config(const ModelConfig& cfg);
/// Applies key=value pairs on top of `base`; unknown keys throw ConfigError.
ModelConfig apply_config_entry(ModelConfig base, std::string_view key, std::string_view value);

struct ModelWeights {
  ModelConfig cfg;
  InitWeights init;
  std::vector<GdaParams> attention;
  std::vector<BlockWeights> blocks;
  Mlp head;  // h_d -> h_d -> 1

  /// Zero-valued weights shaped by cfg (xi_raw at its initial value).
  explicit ModelWeights(const ModelConfig& cfg);
  ModelWeights() = default;

  TensorRefs tensors();
  std::vector<std::pair<std::string, const Matrix*>> tensors() const;
};

/// Deterministic uniform fan-in initialization; every value is rounded to the
/// nearest float so checkpoints round-trip exactly.
ModelWeights init_model(const ModelConfig& cfg, std::uint64_t seed);

std::size_t count_params(const ModelWeights& w);

struct Prediction {
  Eigen::VectorXd probs;          // n
  std::vector<Vec3> dirs;         // n, Cartesian
  Matrix h;                       // final scalars
  std::vector<Matrix> steerable;  // final X~^(l)
  std::vector<LayerDiagnostics> layers;  // filled when requested
};

Prediction forward(const ProteinGraph& g, const ModelWeights& w, Exec exec = Exec::Parallel,
                   bool keep_diagnostics = false);

/// 1 - (2 sum p y + s) / (sum p + sum y + s).
double dice_loss(const Eigen::VectorXd& probs, const std::vector<int>& labels, double smooth = 1.0);

/// Mean of 1 - d_hat . d_true over masked residues; 0 for an empty mask.
double directional_loss(const std::vector<Vec3>& predicted, const std::vector<Vec3>& truth,
                        const std::vector<std::uint8_t>& mask);

/// Residues with y = 1 and a defined ground-truth direction.
std::vector<std::uint8_t> direction_mask(const ProteinGraph& g);

/// Dice + directional, unweighted.
double total_loss(const ProteinGraph& g, const Prediction& pred);

// Checkpoints: a text manifest (magic line, config echo, "tensor name rows
// cols" lines, "end") followed by little-endian float32 values in manifest
// order.
std::string save_checkpoint(const ModelWeights& w);
/// When `expected` is given, a config whose tensor shapes differ raises
/// ShapeError.
ModelWeights load_checkpoint(std::string_view bytes, const ModelConfig* expected = nullptr);

// Finite-difference trainer.
struct TrainOptions {
  int steps = 200;
  double lr = 0.01;
  double fd_step = 1e-4;
  /// Test hook: poison one weight before this step to exercise divergence.
  std::optional<int> inject_nan_at;
};

struct TrainResult {
  ModelWeights weights;
  std::vector<double> trace;  // loss before step 0, then after every step
};

/// Central-difference gradient of `objective` over every parameter scalar,
/// in tensors() order.
Eigen::VectorXd finite_difference_gradient(ModelWeights& w,
                                           const std::function<double(const ModelWeights&)>& objective,
                                           double step = 1e-4);

/// Plain gradient descent on total_loss for micro configs. Single-threaded.
/// Throws DivergenceError when the loss becomes non-finite.
TrainResult toy_train(const ProteinGraph& g, ModelWeights w, const TrainOptions& opt);

}  // namespace gdegan
