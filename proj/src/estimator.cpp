#include "posepost/estimator.hpp"

#include <chrono>
#include <cmath>
#include <limits>

#include "posepost/error.hpp"

namespace posepost {

namespace {

using Clock = std::chrono::steady_clock;
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

void require_budget(int n) {
  if (n < 1) throw ValidationError("sample budget must be at least 1");
}

const SignedDistanceField& checked_observed(const ShapeContext& ctx, SignedDistanceField& storage) {
  if (ctx.model == nullptr || ctx.observed == nullptr) throw ValidationError("shape context is incomplete");
  storage = silhouette_sdf(*ctx.observed);
  return storage;
}

// Silhouette error e_R for a candidate rotation, or +inf when it renders nothing.
double candidate_error(const RotationMatrix& rot, const VoxelGrid& shape, const SignedDistanceField& observed_sdf,
                       const ShapeContext& ctx) {
  const DepthImage rendered = render_depth(shape, rot, ctx.camera);
  if (rendered.object_pixels() == 0) return std::numeric_limits<double>::infinity();
  return sdf_difference(observed_sdf, silhouette_sdf(rendered), ctx.sdf_options);
}

double log_prior(const RotationMatrix& rot, const VoxelGrid& shape, const SignedDistanceField& observed_sdf,
                 const ShapeContext& ctx) {
  const double e = candidate_error(rot, shape, observed_sdf, ctx);
  if (std::isinf(e)) return kNegInf;
  return std::log(prior_density(e, ctx.prior_epsilon));
}

}  // namespace

VoxelGrid predicted_shape(const ShapeContext& ctx) {
  if (ctx.model == nullptr) throw ValidationError("shape context has no subspace model");
  return binarize(reconstruct(ctx.shape_coeffs, *ctx.model), ctx.model->grid_dims, ctx.binarize_threshold);
}

EstimateResult estimate_mle(const GmmParams& theta, int n, Rng& rng) {
  require_budget(n);
  const auto start = Clock::now();
  EstimateResult best;
  double best_log = kNegInf;
  for (int i = 0; i < n; ++i) {
    const Eigen::Vector3d y = gmm_sample(theta, rng);
    const double lp = gmm_log_pdf(y, theta);
    if (i == 0 || lp > best_log) {
      best_log = lp;
      best.pose = RotVec(y);
    }
  }
  best.score = std::exp(best_log);
  best.n_evaluated = n;
  best.elapsed = seconds_since(start);
  return best;
}

double map_log_score(const Eigen::Vector3d& candidate, const GmmParams& theta, const VoxelGrid& shape,
                     const SignedDistanceField& observed_sdf, const ShapeContext& ctx) {
  const double lp = log_prior(rotvec_to_matrix(RotVec(candidate)), shape, observed_sdf, ctx);
  if (lp == kNegInf) return kNegInf;
  return lp + gmm_log_pdf(candidate, theta);
}

EstimateResult estimate_map(const GmmParams& theta, const ShapeContext& ctx, int n, Rng& rng,
                            const MapOptions& opts) {
  require_budget(n);
  const auto start = Clock::now();
  SignedDistanceField sdf_storage;
  const SignedDistanceField& observed_sdf = checked_observed(ctx, sdf_storage);
  const VoxelGrid shape = predicted_shape(ctx);
  const double constant_log_prior = std::log(prior_density(0.0, ctx.prior_epsilon));

  EstimateResult best;
  double best_score = kNegInf;
  bool have_best = false;
  Eigen::Vector3d mle_pose = Eigen::Vector3d::Zero();
  double mle_log = kNegInf;

  int evaluated = 0;
  for (int i = 0; i < n; ++i) {
    if (i > 0 && opts.time_budget && seconds_since(start) >= *opts.time_budget) break;
    const Eigen::Vector3d y = gmm_sample(theta, rng);
    const double lik = gmm_log_pdf(y, theta);
    ++evaluated;
    if (i == 0 || lik > mle_log) {
      mle_log = lik;
      mle_pose = y;
    }
    const double lp = opts.constant_prior ? constant_log_prior
                                          : log_prior(rotvec_to_matrix(RotVec(y)), shape, observed_sdf, ctx);
    if (lp == kNegInf) continue;
    const double score = lp + lik;
    if (!have_best || score > best_score) {
      have_best = true;
      best_score = score;
      best.pose = RotVec(y);
    }
  }

  if (!have_best) {
    best.pose = RotVec(mle_pose);
    best_score = mle_log;
    best.all_candidates_empty = true;
  }
  best.score = std::exp(best_score);
  best.n_evaluated = evaluated;
  best.elapsed = seconds_since(start);
  return best;
}

EstimateResult baseline_random_oracle(const RotVec& true_pose, int n, Rng& rng) {
  require_budget(n);
  const auto start = Clock::now();
  const RotationMatrix truth = rotvec_to_matrix(true_pose);
  EstimateResult best;
  double best_err = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i) {
    const RotationMatrix r = sample_uniform_rotation(rng);
    const double err = angular_error_deg(truth, r);
    if (i == 0 || err < best_err) {
      best_err = err;
      best.pose = matrix_to_rotvec(r);
    }
  }
  best.score = -best_err;
  best.n_evaluated = n;
  best.elapsed = seconds_since(start);
  return best;
}

EstimateResult baseline_random_sdf(const ShapeContext& ctx, int n, Rng& rng) {
  require_budget(n);
  const auto start = Clock::now();
  SignedDistanceField sdf_storage;
  const SignedDistanceField& observed_sdf = checked_observed(ctx, sdf_storage);
  const VoxelGrid shape = predicted_shape(ctx);

  EstimateResult best;
  double best_err = std::numeric_limits<double>::infinity();
  bool have_best = false;
  for (int i = 0; i < n; ++i) {
    const RotationMatrix r = sample_uniform_rotation(rng);
    if (i == 0) best.pose = matrix_to_rotvec(r);
    const double e = candidate_error(r, shape, observed_sdf, ctx);
    if (std::isinf(e)) continue;
    if (!have_best || e < best_err) {
      have_best = true;
      best_err = e;
      best.pose = matrix_to_rotvec(r);
    }
  }
  best.all_candidates_empty = !have_best;
  best.score = have_best ? prior_density(best_err, ctx.prior_epsilon) : 0.0;
  best.n_evaluated = n;
  best.elapsed = seconds_since(start);
  return best;
}

}  // namespace posepost
