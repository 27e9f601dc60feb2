#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "posepost/geometry.hpp"
#include "posepost/shapespace.hpp"

namespace posepost {

enum class Family { Boxcar, Winged, Slab, SymmetricTwin };

std::string to_string(Family f);
Family family_from_string(const std::string& s);

/// Closed interval a per-object dimension is drawn from (fractions of the grid side).
using Range = std::pair<double, double>;
using FamilyRanges = std::map<std::string, Range>;

FamilyRanges default_ranges(Family f);

/// Procedural object: an axis-aligned union of boxes with per-object dimensions.
/// Grid y points down in the camera at identity pose, so "up" is -y. SymmetricTwin
/// objects are exactly invariant under a half turn about the vertical axis.
VoxelGrid generate_object(Family f, int grid_side, const FamilyRanges& ranges, Rng& rng);

/// The half-turn about the object's vertical axis.
RotationMatrix vertical_flip();

struct SyntheticConfig {
  std::vector<Family> families{Family::Boxcar, Family::Winged, Family::SymmetricTwin};
  int count = 60;             // training objects per family
  int views_per_object = 30;
  int test_count = 15;        // test objects per family (0 disables the split)
  int test_views_per_object = 20;
  int grid_side = 16;
  int retained_dim = 20;      // per-family PCA size, capped at count - 1
  CameraIntrinsics camera;
  std::map<Family, FamilyRanges> ranges;  // overrides; missing entries use defaults
  std::uint64_t seed = 0;

  void validate() const;
};

SyntheticConfig synthetic_config_from_json_text(const std::string& text);

}  // namespace posepost
