#include "posepost/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "posepost/error.hpp"

namespace posepost {

namespace {

constexpr double kPi = std::numbers::pi;

Eigen::Matrix3d skew(const Eigen::Vector3d& v) {
  Eigen::Matrix3d s;
  s << 0, -v.z(), v.y(), v.z(), 0, -v.x(), -v.y(), v.x(), 0;
  return s;
}

Eigen::Vector3d first_nonzero_positive(Eigen::Vector3d v) {
  for (int i = 0; i < 3; ++i) {
    if (v[i] != 0.0) {
      if (v[i] < 0.0) v = -v;
      break;
    }
  }
  return v;
}

}  // namespace

RotVec canonicalize(const RotVec& v) {
  const double theta = v.r.norm();
  if (!std::isfinite(theta)) throw ValidationError("rotation vector is not finite");
  if (theta <= kPi) {
    if (theta == kPi) return RotVec(first_nonzero_positive(v.r));
    return v;
  }
  const Eigen::Vector3d axis = v.r / theta;
  double a = std::fmod(theta, 2.0 * kPi);
  if (a > kPi) return RotVec(axis * (a - 2.0 * kPi));
  if (a == kPi) return RotVec(first_nonzero_positive(axis * kPi));
  return RotVec(axis * a);
}

RotationMatrix rotvec_to_matrix(const RotVec& v) {
  if (!v.r.allFinite()) throw ValidationError("rotation vector is not finite");
  const double theta2 = v.r.squaredNorm();
  const double theta = std::sqrt(theta2);
  const Eigen::Matrix3d k = skew(v.r);
  double a, b;
  if (theta < 1e-4) {
    a = 1.0 - theta2 / 6.0 + theta2 * theta2 / 120.0;
    b = 0.5 - theta2 / 24.0 + theta2 * theta2 / 720.0;
  } else {
    a = std::sin(theta) / theta;
    b = (1.0 - std::cos(theta)) / theta2;
  }
  return Eigen::Matrix3d::Identity() + a * k + b * k * k;
}

double rotation_angle(const RotationMatrix& m) {
  const Eigen::Vector3d w(m(2, 1) - m(1, 2), m(0, 2) - m(2, 0), m(1, 0) - m(0, 1));
  const double s = 0.5 * w.norm();
  const double c = 0.5 * (m.trace() - 1.0);
  return std::atan2(s, c);
}

RotVec matrix_to_rotvec(const RotationMatrix& m) {
  const Eigen::Vector3d w(m(2, 1) - m(1, 2), m(0, 2) - m(2, 0), m(1, 0) - m(0, 1));
  const double theta = rotation_angle(m);
  if (theta < 1e-6) return RotVec(0.5 * w);  // sin(theta)/theta ~ 1
  if (kPi - theta > 1e-4) return RotVec(w * (theta / (2.0 * std::sin(theta))));

  // Near pi the antisymmetric part vanishes; recover the axis from the symmetric part.
  const Eigen::Matrix3d b = 0.5 * (m + m.transpose()) - std::cos(theta) * Eigen::Matrix3d::Identity();
  Eigen::Index col = 0;
  b.diagonal().maxCoeff(&col);
  Eigen::Vector3d axis = b.col(col).normalized();
  if (axis.dot(w) < 0.0) axis = -axis;
  Eigen::Vector3d r = axis * theta;
  return canonicalize(RotVec(r));
}

double angular_error_deg(const RotationMatrix& a, const RotationMatrix& b) {
  return rotation_angle(a.transpose() * b) * 180.0 / kPi;
}

double angular_error_deg(const RotVec& a, const RotVec& b) {
  return angular_error_deg(rotvec_to_matrix(a), rotvec_to_matrix(b));
}

RotationMatrix view_to_matrix(const ViewAngles& v) {
  using Eigen::AngleAxisd;
  const Eigen::Matrix3d rz = AngleAxisd(v.roll, Eigen::Vector3d::UnitZ()).toRotationMatrix();
  const Eigen::Matrix3d rx = AngleAxisd(v.elevation, Eigen::Vector3d::UnitX()).toRotationMatrix();
  const Eigen::Matrix3d ry = AngleAxisd(v.azimuth, Eigen::Vector3d::UnitY()).toRotationMatrix();
  return rz * rx * ry;
}

ViewAngles matrix_to_view(const RotationMatrix& m) {
  ViewAngles v;
  v.elevation = std::asin(std::clamp(m(2, 1), -1.0, 1.0));
  v.azimuth = std::atan2(-m(2, 0), m(2, 2));
  v.roll = std::atan2(-m(0, 1), m(1, 1));
  if (v.azimuth == -kPi) v.azimuth = kPi;
  return v;
}

RotationMatrix sample_uniform_rotation(Rng& rng) {
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  const double u1 = u01(rng), u2 = u01(rng), u3 = u01(rng);
  const double a = std::sqrt(1.0 - u1), b = std::sqrt(u1);
  const Eigen::Quaterniond q(b * std::cos(2.0 * kPi * u3), a * std::sin(2.0 * kPi * u2),
                             a * std::cos(2.0 * kPi * u2), b * std::sin(2.0 * kPi * u3));
  return q.toRotationMatrix();
}

RotVec sample_pose(PoseSampling mode, Rng& rng) {
  if (mode == PoseSampling::Uniform) return matrix_to_rotvec(sample_uniform_rotation(rng));
  std::uniform_real_distribution<double> az(-kPi, kPi);
  std::uniform_real_distribution<double> el(-kPi / 2.0, kPi / 2.0);
  std::normal_distribution<double> roll(0.0, kRollSigmaDeg * kPi / 180.0);
  ViewAngles v;
  v.azimuth = az(rng);
  v.elevation = el(rng);
  v.roll = roll(rng);
  return matrix_to_rotvec(view_to_matrix(v));
}

RotVec parse_rotvec(const std::string& text) {
  std::stringstream ss(text);
  std::string item;
  std::vector<double> values;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      values.push_back(std::stod(item, &used));
      if (used != item.size()) throw ValidationError("bad number");
    } catch (const std::exception&) {
      throw ValidationError("pose must be three comma-separated numbers: '" + text + "'");
    }
  }
  if (values.size() != 3) throw ValidationError("pose must be three comma-separated numbers: '" + text + "'");
  RotVec r(values[0], values[1], values[2]);
  if (!r.r.allFinite()) throw ValidationError("pose is not finite");
  return r;
}

void CameraIntrinsics::validate() const {
  if (!(fx > 0.0) || !(fy > 0.0)) throw ValidationError("focal lengths must be positive");
  if (width < 8 || height < 8) throw ValidationError("image must be at least 8x8");
  if (!(object_distance > std::sqrt(3.0) / 2.0))
    throw ValidationError("object_distance must exceed the unit cube's bounding radius");
}

std::size_t DepthImage::object_pixels() const {
  return static_cast<std::size_t>(
      std::count_if(depth.begin(), depth.end(), [](double d) { return d != kBackground; }));
}

}  // namespace posepost
