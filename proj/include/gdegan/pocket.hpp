#pragma once

// Residue probabilities -> ranked pocket centers.

#include "gdegan/geom.hpp"
#include "gdegan/parallel.hpp"
#include "gdegan/protein.hpp"

#include <Eigen/Dense>

#include <span>
#include <vector>

namespace gdegan {

inline constexpr double kDefaultBandwidth = 8.0;  // Å
inline constexpr double kModeTolerance = 1e-3;    // Å
inline constexpr int kMaxModeIterations = 300;

struct Candidates {
  std::vector<int> residues;  // graph indices with p > tau
  std::vector<Vec3> points;   // their CA positions
  std::vector<double> probs;
};

/// Strictly-greater threshold; an empty result is a valid outcome.
Candidates select_candidates(const Eigen::VectorXd& probs, const ProteinGraph& g, double tau);

struct MeanShiftResult {
  std::vector<Vec3> centers;
  std::vector<int> supporters;  // points within bandwidth of each center
  std::vector<int> assignment;  // point -> center index
  std::vector<int> iterations;  // per point, until convergence
};

/// Flat-kernel mean shift. Every point seeds a mode that moves to the mean
/// of the points within `bandwidth` until it shifts by less than 1e-3 Å (or
/// 300 iterations). Modes are then merged greedily, strongest first (more
/// supporters, then lower seed index): a mode closer than bandwidth / 2 to an
/// already kept center joins it. Throws EmptyInput for no points.
MeanShiftResult mean_shift(std::span<const Vec3> points, double bandwidth, Exec exec = Exec::Parallel);

struct Pocket {
  Vec3 center;
  std::vector<int> members;  // residue indices
  double mean_prob = 0.0;
  double score = 0.0;  // |members| * mean_prob
};

/// Pockets sorted by score descending (ties: more members, then lower
/// center index).
struct PocketPrediction {
  std::vector<Pocket> pockets;
};

PocketPrediction rank_pockets(const MeanShiftResult& clusters, const Candidates& candidates);

/// select_candidates -> mean_shift -> rank_pockets.
PocketPrediction predict_pockets(const Eigen::VectorXd& probs, const ProteinGraph& g, double tau,
                                 double bandwidth = kDefaultBandwidth, Exec exec = Exec::Parallel);

}  // namespace gdegan
