#include <algorithm>
#include <cmath>
#include <limits>

#include "posepost/error.hpp"
#include "posepost/geometry.hpp"

namespace posepost {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// First-hit z-depth of one ray through the grid, or kBackground.
// The ray is origin + t * dir in grid coordinates, where the grid spans [0, n_i].
double cast_ray(const VoxelGrid& grid, const Eigen::Vector3d& origin, const Eigen::Vector3d& dir) {
  const auto& n = grid.dims();
  double t_enter = -kInf, t_exit = kInf;
  for (int a = 0; a < 3; ++a) {
    if (dir[a] == 0.0) {
      if (origin[a] < 0.0 || origin[a] > n[a]) return DepthImage::kBackground;
      continue;
    }
    double t0 = (0.0 - origin[a]) / dir[a];
    double t1 = (n[a] - origin[a]) / dir[a];
    if (t0 > t1) std::swap(t0, t1);
    t_enter = std::max(t_enter, t0);
    t_exit = std::min(t_exit, t1);
  }
  if (t_enter > t_exit || t_exit <= 0.0) return DepthImage::kBackground;
  t_enter = std::max(t_enter, 0.0);

  int idx[3], step[3];
  double t_max[3], t_delta[3];
  for (int a = 0; a < 3; ++a) {
    const double p = origin[a] + t_enter * dir[a];
    idx[a] = std::clamp(static_cast<int>(std::floor(p)), 0, n[a] - 1);
    if (dir[a] > 0.0) {
      step[a] = 1;
      t_max[a] = (idx[a] + 1 - origin[a]) / dir[a];
      t_delta[a] = 1.0 / dir[a];
    } else if (dir[a] < 0.0) {
      step[a] = -1;
      t_max[a] = (idx[a] - origin[a]) / dir[a];
      t_delta[a] = -1.0 / dir[a];
    } else {
      step[a] = 0;
      t_max[a] = kInf;
      t_delta[a] = kInf;
    }
  }

  double t = t_enter;
  while (true) {
    if (grid.at(idx[0], idx[1], idx[2])) return t;
    int a = 0;
    if (t_max[1] < t_max[a]) a = 1;
    if (t_max[2] < t_max[a]) a = 2;
    if (t_max[a] > t_exit) return DepthImage::kBackground;
    t = t_max[a];
    idx[a] += step[a];
    if (idx[a] < 0 || idx[a] >= n[a]) return DepthImage::kBackground;
    t_max[a] += t_delta[a];
  }
}

}  // namespace

DepthImage render_depth(const VoxelGrid& grid, const RotationMatrix& pose, const CameraIntrinsics& cam) {
  cam.validate();
  DepthImage img(cam.width, cam.height);
  if (grid.size() == 0 || grid.empty()) return img;

  const auto& n = grid.dims();
  const Eigen::Vector3d scale(n[0], n[1], n[2]);
  const Eigen::Matrix3d rt = pose.transpose();
  // Camera at the origin; grid center at (0, 0, object_distance).
  const Eigen::Vector3d origin_obj = rt * Eigen::Vector3d(0.0, 0.0, -cam.object_distance);
  const Eigen::Vector3d origin_grid = (origin_obj.array() + 0.5).matrix().cwiseProduct(scale);

  for (int v = 0; v < cam.height; ++v) {
    for (int u = 0; u < cam.width; ++u) {
      const Eigen::Vector3d d_cam((u - cam.cx) / cam.fx, (v - cam.cy) / cam.fy, 1.0);
      const Eigen::Vector3d d_grid = (rt * d_cam).cwiseProduct(scale);
      img.at(u, v) = cast_ray(grid, origin_grid, d_grid);
    }
  }
  return img;
}

DepthImage render_depth(const VoxelGrid& grid, const RotVec& pose, const CameraIntrinsics& cam) {
  return render_depth(grid, rotvec_to_matrix(pose), cam);
}

}  // namespace posepost
