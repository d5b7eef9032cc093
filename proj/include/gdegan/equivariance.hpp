#pragma once

// Property harness for the symmetry claims: rigid-motion invariance of the
// probabilities, D^(l)-equivariance of the steerable features, rotation of the
// read-out directions, mirror indistinguishability and permutation
// equivariance. Used by the check-equivariance command and the acceptance
// gate.

#include "gdegan/model.hpp"
#include "gdegan/parallel.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace gdegan {

struct EquivarianceOptions {
  int graphs = 5;
  int motions = 20;
  int residues = 30;
  std::uint64_t seed = 0;
  Exec exec = Exec::Serial;
  /// Negative control: compare steerables against the transposed Wigner
  /// block, which must make the check fail.
  bool corrupt_wigner = false;
};

struct Tolerances {
  double harmonics = 1e-8;
  double probs = 1e-5;      // relative
  double steerable = 1e-5;  // relative
  double directions = 1e-4;
  double mirror = 1e-5;     // relative, scalars and l = 1 parity
  double permutation = 1e-5;
};

/// Largest deviation seen for each property.
struct EquivarianceReport {
  double harmonics = 0.0;
  double probs = 0.0;
  std::vector<double> steerable;  // [l-1]
  double directions = 0.0;
  double mirror_scalars = 0.0;
  double mirror_parity = 0.0;
  double plane_mirror = 0.0;
  double permutation = 0.0;
  int graphs = 0;
  int motions = 0;
  Tolerances tol;

  bool passed() const;
  std::string format() const;
};

/// ||a - b||_inf / max(||a||_inf, 1e-12).
double relative_deviation(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

EquivarianceReport check_equivariance(const ModelConfig& cfg, const EquivarianceOptions& opt);

}  // namespace gdegan
