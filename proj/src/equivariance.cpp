#include "gdegan/equivariance.hpp"

#include "gdegan/errors.hpp"
#include "gdegan/geom.hpp"
#include "gdegan/synth.hpp"

#include <algorithm>
#include <cstdio>

namespace gdegan {

namespace {

ProteinGraph moved(const ProteinGraph& g, const Mat3& m, const Vec3& shift) {
  std::vector<Vec3> pos;
  pos.reserve(g.n);
  for (const auto& p : g.pos) pos.push_back(m * p + shift);
  return make_graph(std::move(pos), g.features, g.cutoff, g.max_neighbors);
}

// X' block of residue i must equal D X block of residue i.
double steerable_deviation(const Matrix& original, const Matrix& transformed, const Eigen::MatrixXd& d) {
  const int rows = static_cast<int>(d.rows());
  const int n = static_cast<int>(original.rows()) / rows;
  Matrix expected(original.rows(), original.cols());
  for (int i = 0; i < n; ++i) expected.middleRows(i * rows, rows) = d * original.middleRows(i * rows, rows);
  return relative_deviation(expected, transformed);
}

Vec3 direction_mean(const Matrix& x1, int i) {
  const Eigen::Vector3d mean = x1.middleRows(i * 3, 3).rowwise().mean();
  return {mean[2], mean[0], mean[1]};
}

}  // namespace

double relative_deviation(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw ShapeError("relative_deviation: shape mismatch");
  if (a.size() == 0) return 0.0;
  const double scale = std::max(a.cwiseAbs().maxCoeff(), 1e-12);
  return (a - b).cwiseAbs().maxCoeff() / scale;
}

bool EquivarianceReport::passed() const {
  bool ok = harmonics <= tol.harmonics && probs <= tol.probs && directions <= tol.directions &&
            mirror_scalars <= tol.mirror && mirror_parity <= tol.mirror && plane_mirror <= tol.mirror &&
            permutation <= tol.permutation;
  for (double s : steerable) ok = ok && s <= tol.steerable;
  return ok;
}

std::string EquivarianceReport::format() const {
  std::string out;
  char buf[160];
  auto line = [&](const char* name, double value, double limit) {
    std::snprintf(buf, sizeof buf, "%-28s max %.3e  tol %.0e  %s\n", name, value, limit,
                  value <= limit ? "ok" : "FAIL");
    out += buf;
  };
  std::snprintf(buf, sizeof buf, "graphs %d, rigid motions per graph %d\n", graphs, motions);
  out += buf;
  line("harmonics vs wigner", harmonics, tol.harmonics);
  line("probabilities (rel)", probs, tol.probs);
  for (std::size_t l = 0; l < steerable.size(); ++l) {
    const std::string name = "steerable l=" + std::to_string(l + 1) + " (rel)";
    line(name.c_str(), steerable[l], tol.steerable);
  }
  line("directions", directions, tol.directions);
  line("inversion scalars (rel)", mirror_scalars, tol.mirror);
  line("inversion l=1 parity (rel)", mirror_parity, tol.mirror);
  line("plane mirror scalars (rel)", plane_mirror, tol.mirror);
  line("permutation (rel)", permutation, tol.permutation);
  out += passed() ? "PASS\n" : "FAIL\n";
  return out;
}

EquivarianceReport check_equivariance(const ModelConfig& cfg, const EquivarianceOptions& opt) {
  if (opt.graphs < 1 || opt.motions < 1 || opt.residues < 2) {
    throw ConfigError("equivariance check needs at least one graph, one motion and two residues");
  }
  cfg.validate();
  EquivarianceReport rep;
  rep.graphs = opt.graphs;
  rep.motions = opt.motions;
  rep.steerable.assign(cfg.L_max, 0.0);
  std::mt19937_64 rng(opt.seed);

  for (int k = 0; k < 100; ++k) {
    const Rotation r = Rotation::random(rng);
    const Vec3 u = Vec3(standard_normal(rng), standard_normal(rng), standard_normal(rng)).normalized();
    for (int l = 0; l <= kMaxDegree; ++l) {
      const Eigen::VectorXd lhs = harmonic(l, UnitVec3::normalized(r * u));
      const Eigen::VectorXd rhs = wigner_block(r, l).matrix * harmonic(l, UnitVec3::normalized(u));
      rep.harmonics = std::max(rep.harmonics, (lhs - rhs).cwiseAbs().maxCoeff());
    }
  }

  for (int gi = 0; gi < opt.graphs; ++gi) {
    const std::uint64_t gseed = opt.seed * 1000003ULL + static_cast<std::uint64_t>(gi);
    const ProteinGraph g = random_graph(opt.residues, cfg.n_d, gseed, cfg.r_c, cfg.max_neighbors);
    const ModelWeights w = init_model(cfg, gseed ^ 0x5DEECE66DULL);
    const Prediction base = forward(g, w, opt.exec);

    for (int mi = 0; mi < opt.motions; ++mi) {
      const Rotation r = Rotation::random(rng);
      const Vec3 shift(10.0 * standard_normal(rng), 10.0 * standard_normal(rng), 10.0 * standard_normal(rng));
      const Prediction p = forward(moved(g, r.matrix(), shift), w, opt.exec);
      rep.probs = std::max(rep.probs, relative_deviation(base.probs, p.probs));
      for (int l = 1; l <= cfg.L_max; ++l) {
        Eigen::MatrixXd d = wigner_block(r, l).matrix;
        if (opt.corrupt_wigner) d.transposeInPlace();
        rep.steerable[l - 1] =
            std::max(rep.steerable[l - 1], steerable_deviation(base.steerable[l - 1], p.steerable[l - 1], d));
      }
      for (int i = 0; i < g.n; ++i) {
        // the read-out direction is only meaningful where X^(1) is nonzero
        if (direction_mean(base.steerable[0], i).norm() < 1e-6) continue;
        rep.directions = std::max(rep.directions, (p.dirs[i] - r * base.dirs[i]).cwiseAbs().maxCoeff());
      }
    }

    const Prediction inv = forward(moved(g, -Mat3::Identity(), Vec3::Zero()), w, opt.exec);
    rep.mirror_scalars = std::max(rep.mirror_scalars, relative_deviation(base.h, inv.h));
    rep.mirror_scalars = std::max(rep.mirror_scalars, relative_deviation(base.probs, inv.probs));
    rep.mirror_parity = std::max(rep.mirror_parity, relative_deviation(-base.steerable[0], inv.steerable[0]));

    const Mat3 plane = Eigen::Vector3d(-1.0, 1.0, 1.0).asDiagonal();
    const Prediction mir = forward(moved(g, plane, Vec3::Zero()), w, opt.exec);
    rep.plane_mirror = std::max(rep.plane_mirror, relative_deviation(base.probs, mir.probs));
    rep.plane_mirror = std::max(rep.plane_mirror, relative_deviation(base.h, mir.h));

    std::vector<int> perm(g.n);
    for (int i = 0; i < g.n; ++i) perm[i] = i;
    for (int i = g.n - 1; i > 0; --i) std::swap(perm[i], perm[static_cast<int>(uniform01(rng) * (i + 1))]);
    std::vector<Vec3> pos(g.n);
    Eigen::MatrixXd feats(g.n, g.feature_dim());
    for (int i = 0; i < g.n; ++i) {
      pos[i] = g.pos[perm[i]];
      feats.row(i) = g.features.row(perm[i]);
    }
    const Prediction pp = forward(make_graph(pos, feats, g.cutoff, g.max_neighbors), w, opt.exec);
    Eigen::VectorXd expected(g.n);
    for (int i = 0; i < g.n; ++i) expected[i] = base.probs[perm[i]];
    rep.permutation = std::max(rep.permutation, relative_deviation(expected, pp.probs));
  }
  return rep;
}

}  // namespace gdegan
