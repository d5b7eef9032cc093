#include "gdegan/pocket.hpp"

#include "gdegan/errors.hpp"

#include <algorithm>
#include <numeric>

namespace gdegan {

Candidates select_candidates(const Eigen::VectorXd& probs, const ProteinGraph& g, double tau) {
  if (probs.size() != g.n) throw ShapeError("one probability per residue expected");
  Candidates c;
  for (int i = 0; i < g.n; ++i) {
    if (probs[i] > tau) {
      c.residues.push_back(i);
      c.points.push_back(g.pos[i]);
      c.probs.push_back(probs[i]);
    }
  }
  return c;
}

MeanShiftResult mean_shift(std::span<const Vec3> points, double bandwidth, Exec exec) {
  if (points.empty()) throw EmptyInput("mean shift needs at least one point");
  if (!(bandwidth > 0.0)) throw DomainError("bandwidth must be positive");
  const int n = static_cast<int>(points.size());
  const double bw2 = bandwidth * bandwidth;

  std::vector<Vec3> modes(points.begin(), points.end());
  std::vector<int> iterations(n, 0);
  std::vector<int> support(n, 0);
  for_each_index(n, exec, [&](int k) {
    Vec3 mode = modes[k];
    for (int it = 1; it <= kMaxModeIterations; ++it) {
      Vec3 sum = Vec3::Zero();
      int count = 0;
      for (const auto& p : points) {
        if ((p - mode).squaredNorm() <= bw2) {
          sum += p;
          ++count;
        }
      }
      iterations[k] = it;
      if (count == 0) break;
      const Vec3 next = sum / count;
      const double shift = (next - mode).norm();
      mode = next;
      if (shift < kModeTolerance) break;
    }
    modes[k] = mode;
    int count = 0;
    for (const auto& p : points) count += (p - mode).squaredNorm() <= bw2;
    support[k] = count;
  });

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return support[a] > support[b]; });

  MeanShiftResult r;
  r.iterations = std::move(iterations);
  std::vector<int> mode_center(n, -1);
  const double merge2 = 0.25 * bw2;
  for (int k : order) {
    int target = -1;
    for (std::size_t c = 0; c < r.centers.size(); ++c) {
      if ((modes[k] - r.centers[c]).squaredNorm() < merge2) {
        target = static_cast<int>(c);
        break;
      }
    }
    if (target < 0) {
      target = static_cast<int>(r.centers.size());
      r.centers.push_back(modes[k]);
      r.supporters.push_back(support[k]);
    }
    mode_center[k] = target;
  }
  r.assignment = std::move(mode_center);
  return r;
}

PocketPrediction rank_pockets(const MeanShiftResult& clusters, const Candidates& candidates) {
  const std::size_t nc = clusters.centers.size();
  if (clusters.assignment.size() != candidates.residues.size()) {
    throw ShapeError("cluster assignment does not match candidates");
  }
  std::vector<Pocket> pockets(nc);
  for (std::size_t c = 0; c < nc; ++c) pockets[c].center = clusters.centers[c];
  for (std::size_t k = 0; k < candidates.residues.size(); ++k) {
    Pocket& p = pockets[clusters.assignment[k]];
    p.members.push_back(candidates.residues[k]);
    p.mean_prob += candidates.probs[k];
  }
  for (auto& p : pockets) {
    if (!p.members.empty()) p.mean_prob /= static_cast<double>(p.members.size());
    p.score = static_cast<double>(p.members.size()) * p.mean_prob;
  }

  std::vector<std::size_t> order(nc);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (pockets[a].score != pockets[b].score) return pockets[a].score > pockets[b].score;
    if (pockets[a].members.size() != pockets[b].members.size())
      return pockets[a].members.size() > pockets[b].members.size();
    return a < b;
  });

  PocketPrediction out;
  for (std::size_t idx : order) {
    if (!pockets[idx].members.empty()) out.pockets.push_back(std::move(pockets[idx]));
  }
  return out;
}

PocketPrediction predict_pockets(const Eigen::VectorXd& probs, const ProteinGraph& g, double tau,
                                 double bandwidth, Exec exec) {
  const Candidates c = select_candidates(probs, g, tau);
  if (c.points.empty()) return {};
  return rank_pockets(mean_shift(c.points, bandwidth, exec), c);
}

}  // namespace gdegan
