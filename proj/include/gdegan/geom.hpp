#pragma once

// Geometric primitives: real spherical harmonics up to degree 2, the matching
// rotation representations, radial basis expansion and the smooth cutoff.
//
// Harmonic conventions (fixed repo-wide):
//   l = 0 : [1]
//   l = 1 : (y, z, x)                       -- m = -1, 0, +1
//   l = 2 : (sqrt3 xy, sqrt3 yz, (3z^2-1)/2, sqrt3 xz, sqrt3/2 (x^2-y^2))
// Every degree satisfies sum_m Y_m(u)^2 = 1 for a unit vector u, so l = 1 and
// l = 2 components share the same per-component scale (mean square 1/(2l+1)).

#include <Eigen/Dense>

#include <random>
#include <vector>

namespace gdegan {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

inline constexpr int kMaxDegree = 2;

inline constexpr int harmonic_dim(int l) { return 2 * l + 1; }

/// Direction with unit norm, validated at construction (tolerance 1e-6).
class UnitVec3 {
public:
  explicit UnitVec3(const Vec3& v);
  static UnitVec3 normalized(const Vec3& v);

  const Vec3& vec() const noexcept { return v_; }
  double x() const noexcept { return v_.x(); }
  double y() const noexcept { return v_.y(); }
  double z() const noexcept { return v_.z(); }

private:
  struct Trusted {};
  UnitVec3(const Vec3& v, Trusted) : v_(v) {}
  Vec3 v_;
};

struct SphHarm {
  int degree = 0;
  Eigen::VectorXd coeffs;
};

/// Proper rotation, validated orthogonal with det +1 (tolerance 1e-9).
class Rotation {
public:
  Rotation() : m_(Mat3::Identity()) {}
  explicit Rotation(const Mat3& m);

  static Rotation axis_angle(const Vec3& axis, double angle);
  /// Haar-uniform random rotation.
  static Rotation random(std::mt19937_64& rng);

  const Mat3& matrix() const noexcept { return m_; }
  Rotation operator*(const Rotation& o) const { return Rotation(m_ * o.m_, Trusted{}); }
  Vec3 operator*(const Vec3& v) const { return m_ * v; }

private:
  struct Trusted {};
  Rotation(const Mat3& m, Trusted) : m_(m) {}
  Mat3 m_;
};

struct WignerBlock {
  int degree = 0;
  Eigen::MatrixXd matrix;
};

/// Y^(0..l_max)(dir). Throws NormalizationError if |dir| deviates from 1 by
/// more than 1e-6 and UnsupportedDegree if l_max > 2.
std::vector<SphHarm> spherical_harmonics(const Vec3& dir, int l_max);

/// Single degree, no normalization check. Writes 2l+1 values into `out`.
void harmonic_unchecked(int l, const Vec3& u, double* out);
Eigen::VectorXd harmonic(int l, const UnitVec3& u);

/// D^(l)(R) with Y^(l)(R u) = D^(l)(R) Y^(l)(u).
///
/// l = 2 is built from the traceless-symmetric-matrix picture of the
/// quadratic harmonics: D_mn = <B_m, R B_n R^T>_F for the orthonormal basis
/// B_m that generates the components above.
WignerBlock wigner_block(const Rotation& rot, int l);

/// Gaussian radial basis: centers evenly spaced on [0, r_cut], shared width
/// gamma = (k / r_cut)^2.
Eigen::VectorXd rbf_expand(double distance, int k, double r_cut);
void rbf_expand_unchecked(double distance, int k, double r_cut, double* out);

/// 0.5 (cos(pi d / r_cut) + 1) inside the cutoff, 0 beyond.
double cosine_cutoff(double distance, double r_cut);

}  // namespace gdegan
