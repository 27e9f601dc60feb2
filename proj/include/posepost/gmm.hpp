#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "posepost/geometry.hpp"

namespace posepost {

/// Diagonal-covariance Gaussian mixture over R^3.
struct GmmParams {
  struct Component {
    double weight = 0.0;
    Eigen::Vector3d mean = Eigen::Vector3d::Zero();
    Eigen::Vector3d variance = Eigen::Vector3d::Ones();
  };
  std::vector<Component> components;

  std::size_t size() const { return components.size(); }
  /// Throws ValidationError unless weights sum to 1 and variances are positive.
  void validate() const;
};

/// Number of raw head outputs for c diagonal components in 3D: c * (2 * 3 + 1).
constexpr int gmm_head_size(int components) { return components * 7; }

/// Continuous translated ELU: z + alpha + eps for z > 0, alpha * exp(z) + eps otherwise.
double variance_activation(double z, double alpha, double eps);
double variance_activation_derivative(double z, double alpha);

/// Raw layout: [mixing logits (c) | means (3c) | variance pre-activations (3c)].
GmmParams head_transform(std::span<const double> raw, int components, double alpha, double eps);

/// Component log-densities ln N(y | mu_i, Sigma_i).
double component_log_density(const Eigen::Vector3d& y, const GmmParams::Component& c);

/// Direct mixture density sum_i pi_i N(y | mu_i, Sigma_i).
double gmm_pdf(const Eigen::Vector3d& y, const GmmParams& theta);

/// ln p(y | theta) via log-sum-exp.
double gmm_log_pdf(const Eigen::Vector3d& y, const GmmParams& theta);

/// Ancestral sampling: pick a component by weight, then draw from its Gaussian.
Eigen::Vector3d gmm_sample(const GmmParams& theta, Rng& rng);

/// Negative log-likelihood -ln p(y | theta), log-sum-exp stabilized.
double pose_loss(const Eigen::Vector3d& y, const GmmParams& theta);

}  // namespace posepost
