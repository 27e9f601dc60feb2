#pragma once

#include <array>
#include <cstdint>
#include <variant>
#include <vector>

#include <Eigen/Dense>

namespace posepost {

using ShapeVector = Eigen::VectorXd;
using Coefficients = Eigen::VectorXd;

/// Binary occupancy grid. Linear index is (ix * ny + iy) * nz + iz.
class VoxelGrid {
 public:
  VoxelGrid() = default;
  VoxelGrid(int nx, int ny, int nz);
  VoxelGrid(std::array<int, 3> dims, std::vector<std::uint8_t> occupancy);

  static VoxelGrid cube(int side) { return VoxelGrid(side, side, side); }

  const std::array<int, 3>& dims() const { return dims_; }
  int nx() const { return dims_[0]; }
  int ny() const { return dims_[1]; }
  int nz() const { return dims_[2]; }
  std::size_t size() const { return occupancy_.size(); }

  std::size_t index(int ix, int iy, int iz) const {
    return (static_cast<std::size_t>(ix) * dims_[1] + iy) * dims_[2] + iz;
  }
  bool at(int ix, int iy, int iz) const { return occupancy_[index(ix, iy, iz)] != 0; }
  void set(int ix, int iy, int iz, bool v) { occupancy_[index(ix, iy, iz)] = v ? 1 : 0; }

  /// Marks every voxel with ix in [x0,x1), iy in [y0,y1), iz in [z0,z1); clipped to the grid.
  void fill_box(int x0, int x1, int y0, int y1, int z0, int z1);

  std::size_t count() const;
  bool empty() const { return count() == 0; }

  const std::vector<std::uint8_t>& occupancy() const { return occupancy_; }

  ShapeVector to_vector() const;

  /// Rotates the grid by k quarter turns about the given axis (0=x, 1=y, 2=z),
  /// following the right-hand rule in the grid's (x, y, z) frame.
  /// Only valid for grids that are square in the plane of rotation.
  VoxelGrid rotated_quarter(int axis, int k) const;

  bool operator==(const VoxelGrid&) const = default;

 private:
  std::array<int, 3> dims_{0, 0, 0};
  std::vector<std::uint8_t> occupancy_;
};

struct TargetDim {
  int k;
};
struct VarianceFraction {
  double fraction;
};
using Retained = std::variant<TargetDim, VarianceFraction>;

/// PCA subspace of one category.
struct ClassSubspace {
  Eigen::MatrixXd basis;  // d x k, orthonormal columns
  ShapeVector mean;
  int category_id = 0;
  Eigen::VectorXd singular_values;  // of the centered data, descending, all of them
};

/// Shared orthonormal basis spanning every category subspace and mean.
struct SubspaceModel {
  Eigen::MatrixXd basis;  // d x k
  std::vector<ShapeVector> category_means;
  std::vector<int> category_ids;
  std::array<int, 3> grid_dims{0, 0, 0};

  int dim() const { return static_cast<int>(basis.rows()); }
  int retained_dim() const { return static_cast<int>(basis.cols()); }
};

/// PCA via SVD of the mean-centered data matrix. Columns follow the
/// first-nonzero-entry-positive sign convention.
ClassSubspace learn_class_subspace(const std::vector<ShapeVector>& shapes, Retained retained,
                                   int category_id = 0);

/// Orthonormal basis for span[W_1..W_m, mu_1..mu_m]. Directions whose singular value
/// is below rel_tol times the largest are dropped.
SubspaceModel merge_subspaces(const std::vector<ClassSubspace>& subspaces, double rel_tol = 1e-8);

/// o' = W^T o. The shape is not mean-centered; the merged basis already spans the means.
Coefficients project(const ShapeVector& shape, const SubspaceModel& model);

/// o_hat = W o'.
ShapeVector reconstruct(const Coefficients& coeffs, const SubspaceModel& model);

VoxelGrid binarize(const ShapeVector& values, std::array<int, 3> dims, double threshold);

/// Flips column signs so that each column's first nonzero entry is positive.
void apply_sign_convention(Eigen::MatrixXd& basis);

}  // namespace posepost
