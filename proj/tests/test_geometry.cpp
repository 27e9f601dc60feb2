#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "posepost/error.hpp"
#include "posepost/geometry.hpp"

using namespace posepost;

namespace {

Eigen::Vector3d random_rotvec(std::mt19937_64& rng, double max_angle = M_PI) {
  std::normal_distribution<double> g;
  std::uniform_real_distribution<double> a(0.0, max_angle);
  Eigen::Vector3d axis(g(rng), g(rng), g(rng));
  return axis.normalized() * a(rng);
}

// First-hit z-depth by intersecting each ray with every occupied voxel box in the
// object frame; no grid traversal involved.
DepthImage brute_force_render(const VoxelGrid& grid, const Eigen::Matrix3d& rot, const CameraIntrinsics& cam) {
  DepthImage img(cam.width, cam.height);
  const Eigen::Matrix3d rt = rot.transpose();
  const Eigen::Vector3d origin = rt * Eigen::Vector3d(0, 0, -cam.object_distance);
  const Eigen::Vector3d step(1.0 / grid.nx(), 1.0 / grid.ny(), 1.0 / grid.nz());
  for (int v = 0; v < cam.height; ++v) {
    for (int u = 0; u < cam.width; ++u) {
      const Eigen::Vector3d dir = rt * Eigen::Vector3d((u - cam.cx) / cam.fx, (v - cam.cy) / cam.fy, 1.0);
      double best = std::numeric_limits<double>::infinity();
      for (int ix = 0; ix < grid.nx(); ++ix)
        for (int iy = 0; iy < grid.ny(); ++iy)
          for (int iz = 0; iz < grid.nz(); ++iz) {
            if (!grid.at(ix, iy, iz)) continue;
            const Eigen::Vector3d lo = Eigen::Vector3d(ix, iy, iz).cwiseProduct(step) - Eigen::Vector3d::Constant(0.5);
            const Eigen::Vector3d hi = lo + step;
            double t0 = -std::numeric_limits<double>::infinity(), t1 = std::numeric_limits<double>::infinity();
            for (int a = 0; a < 3; ++a) {
              double ta = (lo[a] - origin[a]) / dir[a], tb = (hi[a] - origin[a]) / dir[a];
              if (ta > tb) std::swap(ta, tb);
              t0 = std::max(t0, ta);
              t1 = std::min(t1, tb);
            }
            if (t0 <= t1) best = std::min(best, t0);
          }
      if (std::isfinite(best)) img.at(u, v) = best;
    }
  }
  return img;
}

VoxelGrid random_grid(int side, double p, std::mt19937_64& rng) {
  std::bernoulli_distribution coin(p);
  VoxelGrid g = VoxelGrid::cube(side);
  for (int x = 0; x < side; ++x)
    for (int y = 0; y < side; ++y)
      for (int z = 0; z < side; ++z) g.set(x, y, z, coin(rng));
  return g;
}

}  // namespace

TEST_CASE("rodrigues map") {
  CHECK(rotvec_to_matrix(RotVec(0, 0, 0)) == Eigen::Matrix3d::Identity());
  const Eigen::Matrix3d half = rotvec_to_matrix(RotVec(0, 0, M_PI));
  CHECK((half - Eigen::Vector3d(-1, -1, 1).asDiagonal().toDenseMatrix()).cwiseAbs().maxCoeff() < 1e-12);

  std::mt19937_64 rng(1);
  for (int i = 0; i < 1000; ++i) {
    const Eigen::Vector3d r = random_rotvec(rng, 3.0 * M_PI);
    const Eigen::Matrix3d m = rotvec_to_matrix(RotVec(r));
    CHECK((m - oracle::quaternion_rotation(r)).cwiseAbs().maxCoeff() < 1e-9);
    CHECK((m * rotvec_to_matrix(RotVec(-r)) - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() < 1e-9);
    CHECK(m.determinant() == doctest::Approx(1.0).epsilon(1e-9));
  }
  // Small-angle branch agrees with the quaternion form.
  const Eigen::Vector3d tiny(3e-5, -2e-5, 1e-5);
  CHECK((rotvec_to_matrix(RotVec(tiny)) - oracle::quaternion_rotation(tiny)).cwiseAbs().maxCoeff() < 1e-15);
  CHECK_THROWS_AS(rotvec_to_matrix(RotVec(std::nan(""), 0, 0)), ValidationError);
}

TEST_CASE("logarithm map round trip") {
  std::mt19937_64 rng(2);
  for (int i = 0; i < 1000; ++i) {
    const Eigen::Vector3d r = random_rotvec(rng);
    const RotVec back = matrix_to_rotvec(rotvec_to_matrix(RotVec(r)));
    CHECK((back.r - r).norm() < 1e-7);
  }
  // Near a half turn the axis is recovered from the symmetric part.
  const Eigen::Vector3d axis = Eigen::Vector3d(1, 2, -2).normalized();
  for (double eps : {0.0, 1e-9, 1e-6, 1e-3}) {
    const Eigen::Matrix3d m = rotvec_to_matrix(RotVec(axis * (M_PI - eps)));
    const RotVec back = matrix_to_rotvec(m);
    CHECK(back.angle() <= M_PI);
    CHECK((rotvec_to_matrix(back) - m).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("canonical representative") {
  const RotVec c = canonicalize(RotVec(0, 0, 1.5 * M_PI));
  CHECK(c.r.z() == doctest::Approx(-0.5 * M_PI));
  const RotVec h = canonicalize(RotVec(0, -M_PI, 0));
  CHECK(h.r.y() == doctest::Approx(M_PI));
  std::mt19937_64 rng(3);
  for (int i = 0; i < 200; ++i) {
    const RotVec r(random_rotvec(rng, 6.0 * M_PI));
    const RotVec k = canonicalize(r);
    CHECK(k.angle() <= M_PI + 1e-12);
    CHECK(angular_error_deg(r, k) < 1e-6);
  }
}

TEST_CASE("angular error") {
  CHECK(angular_error_deg(RotVec(0.3, 0.1, -0.2), RotVec(0.3, 0.1, -0.2)) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(angular_error_deg(RotVec(0, 0, M_PI / 2), RotVec(0, 0, -M_PI / 2)) == doctest::Approx(180.0));

  std::mt19937_64 rng(4);
  for (int i = 0; i < 1000; ++i) {
    const RotVec a(random_rotvec(rng)), b(random_rotvec(rng)), c(random_rotvec(rng));
    const double ab = angular_error_deg(a, b);
    CHECK(std::abs(ab - oracle::geodesic_deg(rotvec_to_matrix(a), rotvec_to_matrix(b))) < 1e-6);
    CHECK(ab == doctest::Approx(angular_error_deg(b, a)).epsilon(1e-12));
    CHECK(ab >= 0.0);
    CHECK(ab <= 180.0);
    CHECK(angular_error_deg(a, c) <= ab + angular_error_deg(b, c) + 1e-6);
  }
}

TEST_CASE("view angles") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> az(-M_PI, M_PI), el(-1.5, 1.5), roll(-0.5, 0.5);
  for (int i = 0; i < 500; ++i) {
    const ViewAngles v{az(rng), el(rng), roll(rng)};
    const ViewAngles back = matrix_to_view(view_to_matrix(v));
    CHECK(back.azimuth == doctest::Approx(v.azimuth).epsilon(1e-9));
    CHECK(back.elevation == doctest::Approx(v.elevation).epsilon(1e-9));
    CHECK(back.roll == doctest::Approx(v.roll).epsilon(1e-9));
  }
  // Pure azimuth is a spin about the vertical axis.
  const Eigen::Matrix3d m = view_to_matrix({0.7, 0.0, 0.0});
  CHECK((m - oracle::quaternion_rotation(Eigen::Vector3d(0, 0.7, 0))).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("pose sampling statistics") {
  constexpr int kDraws = 100000;
  SUBCASE("uniform rotations have zero mean trace") {
    Rng rng(6);
    double sum = 0.0, sum2 = 0.0;
    for (int i = 0; i < kDraws; ++i) {
      const double t = rotvec_to_matrix(sample_pose(PoseSampling::Uniform, rng)).trace();
      sum += t;
      sum2 += t * t;
    }
    const double mean = sum / kDraws;
    const double se = std::sqrt((sum2 / kDraws - mean * mean) / kDraws);
    CHECK(std::abs(mean) < 3.0 * se);
  }
  SUBCASE("training-view roll tail") {
    Rng rng(7);
    int tail = 0;
    for (int i = 0; i < kDraws; ++i) {
      const ViewAngles v = matrix_to_view(rotvec_to_matrix(sample_pose(PoseSampling::TrainingView, rng)));
      if (std::abs(v.roll) > 25.0 * M_PI / 180.0) ++tail;
    }
    const double frac = static_cast<double>(tail) / kDraws;
    CHECK(std::abs(frac - 0.01) <= 0.003);
  }
  SUBCASE("fixed seed repeats") {
    Rng a(8), b(8);
    for (int i = 0; i < 100; ++i) {
      CHECK(sample_pose(PoseSampling::TrainingView, a) == sample_pose(PoseSampling::TrainingView, b));
      CHECK(sample_uniform_rotation(a) == sample_uniform_rotation(b));
    }
  }
}

TEST_CASE("parse rotation vectors") {
  CHECK(parse_rotvec("0.1,-2,3e-1") == RotVec(0.1, -2, 0.3));
  CHECK_THROWS_AS(parse_rotvec("1,2"), ValidationError);
  CHECK_THROWS_AS(parse_rotvec("1,2,x"), ValidationError);
  CHECK_THROWS_AS(parse_rotvec("1,2,3,4"), ValidationError);
}

TEST_CASE("render closed forms") {
  const CameraIntrinsics cam;
  SUBCASE("empty grid") {
    const DepthImage img = render_depth(VoxelGrid::cube(8), RotVec(), cam);
    CHECK(img.object_pixels() == 0);
  }
  SUBCASE("single center voxel") {
    VoxelGrid g = VoxelGrid::cube(3);
    g.set(1, 1, 1, true);
    const DepthImage img = render_depth(g, RotVec(), cam);
    CHECK(img.at(31, 31) == doctest::Approx(cam.object_distance - 1.0 / 6.0).epsilon(1e-12));
    double su = 0.0, sv = 0.0, dmin = 1e9;
    for (int v = 0; v < cam.height; ++v)
      for (int u = 0; u < cam.width; ++u)
        if (img.is_object(u, v)) {
          su += u;
          sv += v;
          dmin = std::min(dmin, img.at(u, v));
        }
    const double n = static_cast<double>(img.object_pixels());
    CHECK(n > 0);
    CHECK(su / n == doctest::Approx(cam.cx));
    CHECK(sv / n == doctest::Approx(cam.cy));
    CHECK(dmin == doctest::Approx(cam.object_distance - 1.0 / 6.0).epsilon(1e-12));
  }
  SUBCASE("full grid") {
    VoxelGrid g = VoxelGrid::cube(8);
    g.fill_box(0, 8, 0, 8, 0, 8);
    const DepthImage img = render_depth(g, RotVec(), cam);
    CHECK(img.at(31, 31) == doctest::Approx(cam.object_distance - 0.5).epsilon(1e-12));
    // The front face spans |x| <= 0.5 at depth 2.0, i.e. pixels 16..47.
    CHECK(img.object_pixels() == 32 * 32);
    CHECK(img.is_object(16, 16));
    CHECK_FALSE(img.is_object(15, 31));
    CHECK(img.is_object(47, 47));
    CHECK_FALSE(img.is_object(48, 31));
  }
}

TEST_CASE("render matches per-voxel box intersection") {
  std::mt19937_64 rng(9);
  CameraIntrinsics cam;
  cam.width = cam.height = 24;
  cam.fx = cam.fy = 24.0;
  cam.cx = cam.cy = 11.5;
  for (int trial = 0; trial < 20; ++trial) {
    const VoxelGrid g = random_grid(5, 0.15, rng);
    const Eigen::Matrix3d rot = trial == 0 ? Eigen::Matrix3d::Identity() : rotvec_to_matrix(RotVec(random_rotvec(rng)));
    const DepthImage fast = render_depth(g, rot, cam);
    const DepthImage slow = brute_force_render(g, rot, cam);
    for (std::size_t i = 0; i < fast.depth.size(); ++i) {
      REQUIRE(fast.depth[i] == doctest::Approx(slow.depth[i]).epsilon(1e-9));
    }
  }
}

TEST_CASE("quarter turns of the pose equal permuted grids") {
  std::mt19937_64 rng(10);
  const VoxelGrid g = random_grid(6, 0.2, rng);
  // Generic intrinsics keep rays off voxel edges, where traversal order would decide
  // between two voxels the ray only touches.
  CameraIntrinsics cam;
  cam.fx = 61.3;
  cam.fy = 62.9;
  cam.cx = 31.17;
  cam.cy = 32.29;
  for (int axis = 0; axis < 3; ++axis) {
    for (int k = 1; k <= 3; ++k) {
      // Exact integer rotation matrix.
      const Eigen::Matrix3d rot =
          Eigen::AngleAxisd(k * M_PI / 2, Eigen::Vector3d::Unit(axis)).toRotationMatrix().array().round().matrix();
      const DepthImage posed = render_depth(g, rot, cam);
      const DepthImage permuted = render_depth(g.rotated_quarter(axis, k), RotVec(), cam);
      for (std::size_t i = 0; i < posed.depth.size(); ++i)
        REQUIRE(posed.depth[i] == doctest::Approx(permuted.depth[i]).epsilon(1e-12));
    }
  }
}

TEST_CASE("depth bounds and determinism") {
  std::mt19937_64 rng(11);
  const CameraIntrinsics cam;
  for (int trial = 0; trial < 20; ++trial) {
    const VoxelGrid g = random_grid(8, 0.3, rng);
    const RotVec pose(random_rotvec(rng));
    const DepthImage img = render_depth(g, pose, cam);
    for (double d : img.depth) {
      if (d == DepthImage::kBackground) continue;
      CHECK(d > cam.object_distance - std::sqrt(3.0) / 2.0);
      CHECK(d < cam.object_distance + std::sqrt(3.0) / 2.0);
    }
    CHECK(img == render_depth(g, pose, cam));
  }
}

TEST_CASE("camera validation") {
  CameraIntrinsics cam;
  cam.width = 4;
  CHECK_THROWS_AS(cam.validate(), ValidationError);
  cam = {};
  cam.object_distance = 0.5;
  CHECK_THROWS_AS(cam.validate(), ValidationError);
  cam = {};
  cam.fx = 0;
  CHECK_THROWS_AS(render_depth(VoxelGrid::cube(4), RotVec(), cam), ValidationError);
}
