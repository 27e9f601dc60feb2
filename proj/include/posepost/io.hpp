#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "posepost/geometry.hpp"
#include "posepost/network.hpp"
#include "posepost/sdf.hpp"
#include "posepost/shapespace.hpp"

namespace posepost::io {

namespace fs = std::filesystem;

// "VXG1" | u32 nx, ny, nz | nx*ny*nz bytes in {0,1}
void write_voxels(const fs::path& path, const VoxelGrid& grid);
VoxelGrid read_voxels(const fs::path& path);

// "DPM1" | u32 width, height | width*height f32, row-major, background -1.0
void write_depth(const fs::path& path, const DepthImage& image);
DepthImage read_depth(const fs::path& path);
void write_sdf(const fs::path& path, const SignedDistanceField& sdf);

// "WTS1" | f32 values
void write_blob(const fs::path& path, std::span<const double> values);
std::vector<double> read_blob(const fs::path& path, std::size_t expected);

/// Writes `<path>` (JSON manifest) and `<path stem>.wts` (W column-major, then the category means).
void save_subspace(const fs::path& path, const SubspaceModel& model);
SubspaceModel load_subspace(const fs::path& path);

struct SavedNetwork {
  NetworkConfig config;
  NetworkWeights weights;
  std::uint64_t seed = 0;
  std::vector<double> loss_trace;
};

/// Writes `<path>` (JSON manifest) and `<path stem>.wts` (each layer's weight, column-major, then bias).
void save_network(const fs::path& path, const SavedNetwork& net);
SavedNetwork load_network(const fs::path& path);

/// Rounds a depth image through the on-disk f32 representation.
DepthImage quantize(const DepthImage& image);

}  // namespace posepost::io
