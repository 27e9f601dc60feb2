#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "posepost/geometry.hpp"
#include "posepost/network.hpp"
#include "posepost/shapespace.hpp"
#include "posepost/synthetic.hpp"

namespace posepost {

namespace fs = std::filesystem;

/// One manifest line. Paths are relative to the split directory.
struct ViewRecord {
  std::string depth_path;
  std::string voxel_path;
  RotVec pose;
  Coefficients shape_coeffs;
  int category = 0;
  std::string family;
  int object = 0;
  int view = 0;

  bool operator==(const ViewRecord& o) const;
};

struct Split {
  fs::path dir;
  std::vector<ViewRecord> records;
  std::vector<DepthImage> images;  // parallel to records when loaded
};

struct GeneratedDataset {
  SubspaceModel subspace;
  CameraIntrinsics camera;
  std::vector<std::string> families;
  Split train;
  Split test;
};

/// Builds objects for every family, learns and merges the per-family subspaces on the
/// training objects, renders training-view poses and writes:
///   DIR/dataset.json, DIR/subspace.json (+ .wts),
///   DIR/{train,test}/manifest.jsonl, voxels/*.vxg, depth/*.dpm
/// The returned splits hold the images exactly as written to disk.
GeneratedDataset gen_dataset(const SyntheticConfig& cfg, const fs::path& out_dir);

std::string record_to_json_line(const ViewRecord& r);
ViewRecord record_from_json_line(const std::string& line);

/// Reads manifest.jsonl from a split directory (or DIR/<fallback> when DIR has none),
/// optionally loading every depth image.
Split load_split(const fs::path& dir, const std::string& fallback, bool load_images);

/// Camera stored in DIR/dataset.json next to a split (searching the split dir and its parent).
std::optional<CameraIntrinsics> load_dataset_camera(const fs::path& split_dir);

std::vector<Example> make_examples(const Split& split, const NetworkConfig& cfg);

}  // namespace posepost
