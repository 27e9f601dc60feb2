#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "posepost/shapespace.hpp"

namespace posepost {

using Rng = std::mt19937_64;
using RotationMatrix = Eigen::Matrix3d;

/// Axis-angle rotation vector: direction is the axis, norm is the angle in radians.
struct RotVec {
  Eigen::Vector3d r = Eigen::Vector3d::Zero();

  RotVec() = default;
  explicit RotVec(const Eigen::Vector3d& v) : r(v) {}
  RotVec(double x, double y, double z) : r(x, y, z) {}

  double angle() const { return r.norm(); }
  bool operator==(const RotVec& o) const { return r == o.r; }
};

/// Representative with norm <= pi. At exactly pi the first nonzero component is positive.
RotVec canonicalize(const RotVec& v);

RotationMatrix rotvec_to_matrix(const RotVec& v);

/// Logarithm map; the result is canonical.
RotVec matrix_to_rotvec(const RotationMatrix& m);

/// Geodesic distance between two rotations, in degrees, range [0, 180].
double angular_error_deg(const RotVec& a, const RotVec& b);
double angular_error_deg(const RotationMatrix& a, const RotationMatrix& b);

/// Rotation angle of a rotation matrix, radians.
double rotation_angle(const RotationMatrix& m);

/// Viewing parameters used by the training-view sampler. The pose is
/// R = Rz(roll) * Rx(elevation) * Ry(azimuth): the object spins about its vertical
/// (y) axis first, then tilts about the camera x axis, then rolls about the optical axis.
struct ViewAngles {
  double azimuth = 0.0;    // (-pi, pi]
  double elevation = 0.0;  // [-pi/2, pi/2]
  double roll = 0.0;
};

RotationMatrix view_to_matrix(const ViewAngles& v);
ViewAngles matrix_to_view(const RotationMatrix& m);

enum class PoseSampling { TrainingView, Uniform };

/// 25 degrees / 2.576, so 99% of roll mass lies in [-25, 25] degrees.
inline constexpr double kRollSigmaDeg = 25.0 / 2.576;

RotVec sample_pose(PoseSampling mode, Rng& rng);

/// Uniform rotation (Shoemake's uniform quaternion construction).
RotationMatrix sample_uniform_rotation(Rng& rng);

/// Parses "rx,ry,rz".
RotVec parse_rotvec(const std::string& text);

struct CameraIntrinsics {
  double fx = 64.0;
  double fy = 64.0;
  double cx = 31.5;
  double cy = 31.5;
  int width = 64;
  int height = 64;
  double object_distance = 2.5;

  void validate() const;
};

/// Row-major z-depth image in meters; background pixels hold kBackground.
struct DepthImage {
  static constexpr double kBackground = -1.0;

  int width = 0;
  int height = 0;
  std::vector<double> depth;

  DepthImage() = default;
  DepthImage(int w, int h) : width(w), height(h), depth(static_cast<std::size_t>(w) * h, kBackground) {}

  double at(int x, int y) const { return depth[static_cast<std::size_t>(y) * width + x]; }
  double& at(int x, int y) { return depth[static_cast<std::size_t>(y) * width + x]; }
  bool is_object(int x, int y) const { return at(x, y) != kBackground; }
  std::size_t object_pixels() const;

  bool operator==(const DepthImage&) const = default;
};

/// Casts one ray per pixel through the posed grid. The grid is scaled to the unit
/// cube, rotated by `pose` about its center and centered on the optical axis at
/// cam.object_distance. Depth is the optical-axis distance to the first occupied
/// voxel boundary; rays that miss are background.
DepthImage render_depth(const VoxelGrid& grid, const RotVec& pose, const CameraIntrinsics& cam);
DepthImage render_depth(const VoxelGrid& grid, const RotationMatrix& pose, const CameraIntrinsics& cam);

}  // namespace posepost
