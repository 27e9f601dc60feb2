#pragma once

#include <optional>

#include "posepost/geometry.hpp"
#include "posepost/gmm.hpp"
#include "posepost/sdf.hpp"
#include "posepost/shapespace.hpp"

namespace posepost {

struct EstimateResult {
  RotVec pose;
  double score = 0.0;  // mixture density (MLE), prior * density (MAP), or method-specific
  int n_evaluated = 0;
  double elapsed = 0.0;  // seconds
  // No candidate rendered a non-empty silhouette. estimate_map then returns the
  // mixture-likelihood winner; baseline_random_sdf returns its first candidate.
  bool all_candidates_empty = false;
};

/// Everything the silhouette prior needs besides the mixture.
struct ShapeContext {
  const SubspaceModel* model = nullptr;
  Coefficients shape_coeffs;
  const DepthImage* observed = nullptr;
  CameraIntrinsics camera;
  double binarize_threshold = 0.5;
  double prior_epsilon = kPriorEpsilon;
  SdfErrorOptions sdf_options;
};

struct MapOptions {
  // Test hook: treat every candidate as a perfect silhouette match (e_R = 0),
  // which turns the prior into a constant.
  bool constant_prior = false;
  // Stop drawing candidates once this many seconds have elapsed (at least one is evaluated).
  std::optional<double> time_budget;
};

/// argmax over n mixture samples of the mixture density; first occurrence wins ties.
EstimateResult estimate_mle(const GmmParams& theta, int n, Rng& rng);

/// argmax over n mixture samples of prior(e_R) * density. Candidates whose rendered
/// silhouette is empty score zero.
EstimateResult estimate_map(const GmmParams& theta, const ShapeContext& ctx, int n, Rng& rng,
                            const MapOptions& opts = {});

/// Scores one candidate the way estimate_map does (log of prior * density);
/// -infinity for an empty rendered silhouette.
double map_log_score(const Eigen::Vector3d& candidate, const GmmParams& theta, const VoxelGrid& shape,
                     const SignedDistanceField& observed_sdf, const ShapeContext& ctx);

/// Uniform rotations; returns the one closest to the true pose.
EstimateResult baseline_random_oracle(const RotVec& true_pose, int n, Rng& rng);

/// Uniform rotations scored by silhouette error alone; lowest error wins.
EstimateResult baseline_random_sdf(const ShapeContext& ctx, int n, Rng& rng);

/// Binarized reconstruction of the predicted shape.
VoxelGrid predicted_shape(const ShapeContext& ctx);

}  // namespace posepost
