#include "gdegan/geom.hpp"

#include "gdegan/errors.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

namespace gdegan {

namespace {

constexpr double kUnitTol = 1e-6;
constexpr double kRotationTol = 1e-9;

void check_degree(int l) {
  if (l < 0 || l > kMaxDegree) {
    throw UnsupportedDegree("harmonic degree " + std::to_string(l) + " outside [0, 2]");
  }
}

// Orthonormal (Frobenius) basis of traceless symmetric 3x3 matrices, ordered
// to match the l = 2 harmonic components.
const std::array<Mat3, 5>& quadratic_basis() {
  static const std::array<Mat3, 5> basis = [] {
    std::array<Mat3, 5> b;
    const double r2 = 1.0 / std::sqrt(2.0);
    const double r6 = 1.0 / std::sqrt(6.0);
    for (auto& m : b) m.setZero();
    b[0](0, 1) = b[0](1, 0) = r2;  // xy
    b[1](1, 2) = b[1](2, 1) = r2;  // yz
    b[2].diagonal() << -r6, -r6, 2.0 * r6;
    b[3](0, 2) = b[3](2, 0) = r2;  // xz
    b[4].diagonal() << r2, -r2, 0.0;
    return b;
  }();
  return basis;
}

}  // namespace

UnitVec3::UnitVec3(const Vec3& v) : v_(v) {
  if (!v.allFinite() || std::abs(v.norm() - 1.0) > kUnitTol) {
    throw NormalizationError("direction is not unit-norm");
  }
}

UnitVec3 UnitVec3::normalized(const Vec3& v) {
  const double n = v.norm();
  if (!(n > 0.0) || !std::isfinite(n)) throw NormalizationError("cannot normalize zero vector");
  return UnitVec3(v / n, Trusted{});
}

Rotation::Rotation(const Mat3& m) : m_(m) {
  const double ortho = (m.transpose() * m - Mat3::Identity()).cwiseAbs().maxCoeff();
  if (!(ortho < kRotationTol) || std::abs(m.determinant() - 1.0) > kRotationTol) {
    throw DomainError("matrix is not a proper rotation");
  }
}

Rotation Rotation::axis_angle(const Vec3& axis, double angle) {
  return Rotation(Eigen::AngleAxisd(angle, axis.normalized()).toRotationMatrix(), Trusted{});
}

Rotation Rotation::random(std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::Quaterniond q(normal(rng), normal(rng), normal(rng), normal(rng));
  q.normalize();
  return Rotation(q.toRotationMatrix(), Trusted{});
}

void harmonic_unchecked(int l, const Vec3& u, double* out) {
  const double x = u.x(), y = u.y(), z = u.z();
  switch (l) {
    case 0:
      out[0] = 1.0;
      return;
    case 1:
      out[0] = y;
      out[1] = z;
      out[2] = x;
      return;
    case 2: {
      const double s3 = std::numbers::sqrt3;
      out[0] = s3 * x * y;
      out[1] = s3 * y * z;
      out[2] = 0.5 * (3.0 * z * z - 1.0);
      out[3] = s3 * x * z;
      out[4] = 0.5 * s3 * (x * x - y * y);
      return;
    }
    default:
      check_degree(l);
  }
}

Eigen::VectorXd harmonic(int l, const UnitVec3& u) {
  check_degree(l);
  Eigen::VectorXd v(harmonic_dim(l));
  harmonic_unchecked(l, u.vec(), v.data());
  return v;
}

std::vector<SphHarm> spherical_harmonics(const Vec3& dir, int l_max) {
  check_degree(l_max);
  const UnitVec3 u(dir);
  std::vector<SphHarm> out;
  out.reserve(l_max + 1);
  for (int l = 0; l <= l_max; ++l) out.push_back({l, harmonic(l, u)});
  return out;
}

WignerBlock wigner_block(const Rotation& rot, int l) {
  check_degree(l);
  const Mat3& r = rot.matrix();
  WignerBlock block{l, Eigen::MatrixXd(harmonic_dim(l), harmonic_dim(l))};
  switch (l) {
    case 0:
      block.matrix(0, 0) = 1.0;
      break;
    case 1: {
      // harmonic slot -> Cartesian axis
      constexpr std::array<int, 3> axis{1, 2, 0};
      for (int m = 0; m < 3; ++m)
        for (int n = 0; n < 3; ++n) block.matrix(m, n) = r(axis[m], axis[n]);
      break;
    }
    case 2: {
      const auto& b = quadratic_basis();
      for (int n = 0; n < 5; ++n) {
        const Mat3 rotated = r * b[n] * r.transpose();
        for (int m = 0; m < 5; ++m) block.matrix(m, n) = (b[m].array() * rotated.array()).sum();
      }
      break;
    }
  }
  return block;
}

void rbf_expand_unchecked(double distance, int k, double r_cut, double* out) {
  const double gamma = (k / r_cut) * (k / r_cut);
  const double spacing = k > 1 ? r_cut / (k - 1) : 0.0;
  for (int m = 0; m < k; ++m) {
    const double diff = distance - spacing * m;
    // floor at the smallest normal double so far tails stay strictly positive
    out[m] = std::max(std::exp(-gamma * diff * diff), std::numeric_limits<double>::min());
  }
}

Eigen::VectorXd rbf_expand(double distance, int k, double r_cut) {
  if (!(distance >= 0.0)) throw DomainError("negative distance in rbf_expand");
  if (k < 1) throw DomainError("rbf_expand needs k >= 1");
  if (!(r_cut > 0.0)) throw DomainError("rbf_expand needs r_cut > 0");
  Eigen::VectorXd v(k);
  rbf_expand_unchecked(distance, k, r_cut, v.data());
  return v;
}

double cosine_cutoff(double distance, double r_cut) {
  if (distance >= r_cut) return 0.0;
  return 0.5 * (std::cos(std::numbers::pi * distance / r_cut) + 1.0);
}

}  // namespace gdegan
