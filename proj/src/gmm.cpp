#include "posepost/gmm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "posepost/error.hpp"

namespace posepost {

namespace {
const double kLog2Pi = std::log(2.0 * std::numbers::pi);
}

void GmmParams::validate() const {
  if (components.empty()) throw ValidationError("mixture has no components");
  double total = 0.0;
  for (const auto& c : components) {
    if (!(c.weight >= 0.0)) throw ValidationError("mixture weight must be non-negative");
    if (!(c.variance.array() > 0.0).all()) throw ValidationError("mixture variances must be positive");
    if (!c.mean.allFinite()) throw ValidationError("mixture mean is not finite");
    total += c.weight;
  }
  if (std::abs(total - 1.0) > 1e-9) throw ValidationError("mixture weights must sum to 1");
}

double variance_activation(double z, double alpha, double eps) {
  return z > 0.0 ? z + alpha + eps : alpha * std::exp(z) + eps;
}

double variance_activation_derivative(double z, double alpha) {
  return z > 0.0 ? 1.0 : alpha * std::exp(z);
}

GmmParams head_transform(std::span<const double> raw, int components, double alpha, double eps) {
  if (static_cast<int>(raw.size()) != gmm_head_size(components))
    throw ValidationError("mixture head has the wrong size");
  const std::size_t c = static_cast<std::size_t>(components);
  GmmParams theta;
  theta.components.resize(c);

  const double zmax = *std::max_element(raw.begin(), raw.begin() + static_cast<std::ptrdiff_t>(c));
  double denom = 0.0;
  for (std::size_t i = 0; i < c; ++i) denom += std::exp(raw[i] - zmax);
  for (std::size_t i = 0; i < c; ++i) {
    auto& comp = theta.components[i];
    comp.weight = std::exp(raw[i] - zmax) / denom;
    for (std::size_t d = 0; d < 3; ++d) {
      comp.mean[static_cast<Eigen::Index>(d)] = raw[c + 3 * i + d];
      comp.variance[static_cast<Eigen::Index>(d)] = variance_activation(raw[4 * c + 3 * i + d], alpha, eps);
    }
  }
  return theta;
}

double component_log_density(const Eigen::Vector3d& y, const GmmParams::Component& c) {
  const Eigen::Array3d diff = (y - c.mean).array();
  const Eigen::Array3d var = c.variance.array();
  return -0.5 * (3.0 * kLog2Pi + var.log().sum() + (diff * diff / var).sum());
}

double gmm_pdf(const Eigen::Vector3d& y, const GmmParams& theta) {
  double p = 0.0;
  for (const auto& c : theta.components) {
    const Eigen::Array3d diff = (y - c.mean).array();
    const Eigen::Array3d var = c.variance.array();
    const double norm = std::pow(2.0 * std::numbers::pi, -1.5) / std::sqrt(var.prod());
    p += c.weight * norm * std::exp(-0.5 * (diff * diff / var).sum());
  }
  return p;
}

double gmm_log_pdf(const Eigen::Vector3d& y, const GmmParams& theta) {
  double best = -std::numeric_limits<double>::infinity();
  std::vector<double> terms(theta.size());
  for (std::size_t i = 0; i < theta.size(); ++i) {
    const auto& c = theta.components[i];
    terms[i] = std::log(c.weight) + component_log_density(y, c);
    best = std::max(best, terms[i]);
  }
  if (!std::isfinite(best)) return best;
  double sum = 0.0;
  for (double t : terms) sum += std::exp(t - best);
  return best + std::log(sum);
}

Eigen::Vector3d gmm_sample(const GmmParams& theta, Rng& rng) {
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  const double u = u01(rng);
  std::size_t pick = theta.size() - 1;
  double acc = 0.0;
  for (std::size_t i = 0; i < theta.size(); ++i) {
    acc += theta.components[i].weight;
    if (u < acc) {
      pick = i;
      break;
    }
  }
  const auto& c = theta.components[pick];
  std::normal_distribution<double> n01(0.0, 1.0);
  Eigen::Vector3d out;
  for (int d = 0; d < 3; ++d) out[d] = c.mean[d] + std::sqrt(c.variance[d]) * n01(rng);
  return out;
}

double pose_loss(const Eigen::Vector3d& y, const GmmParams& theta) { return -gmm_log_pdf(y, theta); }

}  // namespace posepost
