#include "posepost/shapespace.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "posepost/error.hpp"

namespace posepost {

VoxelGrid::VoxelGrid(int nx, int ny, int nz) : dims_{nx, ny, nz} {
  if (nx <= 0 || ny <= 0 || nz <= 0) throw ValidationError("voxel grid dims must be positive");
  occupancy_.assign(static_cast<std::size_t>(nx) * ny * nz, 0);
}

VoxelGrid::VoxelGrid(std::array<int, 3> dims, std::vector<std::uint8_t> occupancy)
    : dims_(dims), occupancy_(std::move(occupancy)) {
  if (dims[0] <= 0 || dims[1] <= 0 || dims[2] <= 0)
    throw ValidationError("voxel grid dims must be positive");
  if (occupancy_.size() != static_cast<std::size_t>(dims[0]) * dims[1] * dims[2])
    throw ValidationError("voxel grid dims do not match occupancy length");
  for (auto v : occupancy_)
    if (v > 1) throw ValidationError("voxel occupancy must be 0 or 1");
}

void VoxelGrid::fill_box(int x0, int x1, int y0, int y1, int z0, int z1) {
  x0 = std::max(x0, 0), y0 = std::max(y0, 0), z0 = std::max(z0, 0);
  x1 = std::min(x1, dims_[0]), y1 = std::min(y1, dims_[1]), z1 = std::min(z1, dims_[2]);
  for (int ix = x0; ix < x1; ++ix)
    for (int iy = y0; iy < y1; ++iy)
      for (int iz = z0; iz < z1; ++iz) set(ix, iy, iz, true);
}

std::size_t VoxelGrid::count() const {
  return static_cast<std::size_t>(std::count(occupancy_.begin(), occupancy_.end(), 1));
}

ShapeVector VoxelGrid::to_vector() const {
  ShapeVector v(static_cast<Eigen::Index>(occupancy_.size()));
  for (std::size_t i = 0; i < occupancy_.size(); ++i) v[static_cast<Eigen::Index>(i)] = occupancy_[i];
  return v;
}

VoxelGrid VoxelGrid::rotated_quarter(int axis, int k) const {
  if (axis < 0 || axis > 2) throw ValidationError("rotation axis must be 0, 1 or 2");
  const int a = (axis + 1) % 3, b = (axis + 2) % 3;
  if (dims_[a] != dims_[b]) throw ValidationError("quarter turn needs a square cross-section");
  k = ((k % 4) + 4) % 4;
  VoxelGrid out(dims_[0], dims_[1], dims_[2]);
  // Doubled centered coordinates keep everything integral.
  for (int ix = 0; ix < dims_[0]; ++ix)
    for (int iy = 0; iy < dims_[1]; ++iy)
      for (int iz = 0; iz < dims_[2]; ++iz) {
        if (!at(ix, iy, iz)) continue;
        std::array<int, 3> i{ix, iy, iz};
        std::array<int, 3> u;
        for (int c = 0; c < 3; ++c) u[c] = 2 * i[c] - (dims_[c] - 1);
        for (int t = 0; t < k; ++t) {
          // +90 degrees about `axis`: (u_a, u_b) -> (-u_b, u_a)
          const int ua = u[a];
          u[a] = -u[b];
          u[b] = ua;
        }
        for (int c = 0; c < 3; ++c) i[c] = (u[c] + dims_[c] - 1) / 2;
        out.set(i[0], i[1], i[2], true);
      }
  return out;
}

void apply_sign_convention(Eigen::MatrixXd& basis) {
  for (Eigen::Index j = 0; j < basis.cols(); ++j) {
    for (Eigen::Index i = 0; i < basis.rows(); ++i) {
      const double v = basis(i, j);
      if (v != 0.0) {
        if (v < 0.0) basis.col(j) *= -1.0;
        break;
      }
    }
  }
}

ClassSubspace learn_class_subspace(const std::vector<ShapeVector>& shapes, Retained retained,
                                   int category_id) {
  if (shapes.size() < 2) throw ValidationError("insufficient shapes");
  const Eigen::Index d = shapes.front().size();
  const auto n = static_cast<Eigen::Index>(shapes.size());
  for (const auto& s : shapes)
    if (s.size() != d) throw ValidationError("dimension mismatch");

  Eigen::MatrixXd data(d, n);
  for (Eigen::Index j = 0; j < n; ++j) data.col(j) = shapes[static_cast<std::size_t>(j)];
  ShapeVector mean = data.rowwise().mean();
  data.colwise() -= mean;

  Eigen::BDCSVD<Eigen::MatrixXd> svd(data, Eigen::ComputeThinU);
  const Eigen::VectorXd& s = svd.singularValues();
  const Eigen::Index max_k = std::min(n - 1, d);

  Eigen::Index k = 0;
  if (const auto* t = std::get_if<TargetDim>(&retained)) {
    if (t->k < 1 || t->k > max_k) throw ValidationError("retained dimension out of range");
    k = t->k;
  } else {
    const double f = std::get<VarianceFraction>(retained).fraction;
    if (!(f > 0.0 && f <= 1.0)) throw ValidationError("variance fraction must be in (0, 1]");
    const double total = s.squaredNorm();
    double acc = 0.0;
    k = 1;
    for (Eigen::Index i = 0; i < max_k; ++i) {
      acc += s[i] * s[i];
      k = i + 1;
      if (acc >= f * total) break;
    }
  }

  ClassSubspace out;
  out.basis = svd.matrixU().leftCols(k);
  apply_sign_convention(out.basis);
  out.mean = std::move(mean);
  out.category_id = category_id;
  out.singular_values = s;
  return out;
}

SubspaceModel merge_subspaces(const std::vector<ClassSubspace>& subspaces, double rel_tol) {
  if (subspaces.empty()) throw ValidationError("no subspaces to merge");
  const Eigen::Index d = subspaces.front().mean.size();
  Eigen::Index cols = 0;
  for (const auto& s : subspaces) {
    if (s.mean.size() != d || s.basis.rows() != d) throw ValidationError("dimension mismatch");
    cols += s.basis.cols() + 1;
  }

  Eigen::MatrixXd stacked(d, cols);
  Eigen::Index c = 0;
  for (const auto& s : subspaces) {
    stacked.middleCols(c, s.basis.cols()) = s.basis;
    c += s.basis.cols();
  }
  for (const auto& s : subspaces) stacked.col(c++) = s.mean;

  Eigen::BDCSVD<Eigen::MatrixXd> svd(stacked, Eigen::ComputeThinU);
  const Eigen::VectorXd& sv = svd.singularValues();
  Eigen::Index rank = 0;
  if (sv.size() > 0 && sv[0] > 0.0) {
    const double cutoff = rel_tol * sv[0];
    while (rank < sv.size() && sv[rank] >= cutoff) ++rank;
  }

  SubspaceModel model;
  model.basis = svd.matrixU().leftCols(rank);
  apply_sign_convention(model.basis);
  for (const auto& s : subspaces) {
    model.category_means.push_back(s.mean);
    model.category_ids.push_back(s.category_id);
  }
  return model;
}

Coefficients project(const ShapeVector& shape, const SubspaceModel& model) {
  if (shape.size() != model.basis.rows()) throw ValidationError("shape length does not match subspace");
  return model.basis.transpose() * shape;
}

ShapeVector reconstruct(const Coefficients& coeffs, const SubspaceModel& model) {
  if (coeffs.size() != model.basis.cols())
    throw ValidationError("coefficient length does not match subspace");
  return model.basis * coeffs;
}

VoxelGrid binarize(const ShapeVector& values, std::array<int, 3> dims, double threshold) {
  std::vector<std::uint8_t> occ(static_cast<std::size_t>(values.size()));
  for (Eigen::Index i = 0; i < values.size(); ++i)
    occ[static_cast<std::size_t>(i)] = values[i] >= threshold ? 1 : 0;
  return VoxelGrid(dims, std::move(occ));
}

}  // namespace posepost
