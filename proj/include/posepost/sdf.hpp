#pragma once

#include <vector>

#include "posepost/geometry.hpp"

namespace posepost {

/// Row-major signed distances in pixel units: negative inside the silhouette,
/// positive outside. Pixels beyond the image border count as background.
struct SignedDistanceField {
  int width = 0;
  int height = 0;
  std::vector<double> values;

  double at(int x, int y) const { return values[static_cast<std::size_t>(y) * width + x]; }
};

/// Exact Euclidean signed distance field of the image's silhouette (unmasked pixels).
/// Throws ValidationError("empty silhouette") for a fully masked image.
SignedDistanceField silhouette_sdf(const DepthImage& image);

/// Exact squared Euclidean distance transform of a binary mask: for each pixel, the
/// squared distance to the nearest pixel whose mask value is 1. Pixels with no
/// reachable feature get +infinity.
std::vector<double> squared_distance_transform(const std::vector<std::uint8_t>& features, int width,
                                               int height);

struct SdfErrorOptions {
  // Divide the Frobenius norm by sqrt(width * height).
  bool normalize = true;
};

/// ||SDF(a) - SDF(b)||_F, resolution-normalized by default.
double depth_error(const DepthImage& observed, const DepthImage& predicted, SdfErrorOptions opts = {});
double sdf_difference(const SignedDistanceField& a, const SignedDistanceField& b, SdfErrorOptions opts = {});

inline constexpr double kPriorEpsilon = 1e-6;

/// 1 / (e^4 + eps).
double prior_density(double error, double eps = kPriorEpsilon);

}  // namespace posepost
