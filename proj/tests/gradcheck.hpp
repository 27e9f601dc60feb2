#pragma once

// Finite-difference check of loss_gradient, shared by the unit and acceptance tests.

#include <cmath>
#include <random>
#include <vector>

#include "posepost/network.hpp"

namespace gradcheck {

inline constexpr double kStep = 1e-4;
inline constexpr double kTolerance = 1e-4;
// Denominator floor of the relative error, so gradients that are zero up to
// round-off compare on an absolute scale.
inline constexpr double kFloor = 1e-6;

inline posepost::Example random_example(const posepost::NetworkConfig& cfg, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0), p(-2.0, 2.0);
  std::normal_distribution<double> g(0.0, 1.0);
  std::uniform_int_distribution<int> cat(0, cfg.n_categories - 1);
  posepost::Example ex;
  ex.input.resize(cfg.input_size());
  for (auto& v : ex.input) v = u(rng);
  ex.target.pose = posepost::RotVec(p(rng), p(rng), p(rng));
  ex.target.shape_coeffs.resize(cfg.shape_dim);
  for (auto& v : ex.target.shape_coeffs) v = g(rng);
  ex.target.category = cat(rng);
  return ex;
}

// Smallest |pre-activation| of any hidden unit over the batch; finite differences are
// only meaningful when no step can cross a rectifier kink.
inline double min_hidden_margin(const posepost::NetworkWeights& w, const std::vector<posepost::Example>& batch) {
  double margin = std::numeric_limits<double>::infinity();
  for (const auto& ex : batch) {
    Eigen::VectorXd h = ex.input;
    for (std::size_t l = 0; l + 1 < w.layers.size(); ++l) {
      const Eigen::VectorXd z = w.layers[l].weight * h + w.layers[l].bias;
      margin = std::min(margin, z.cwiseAbs().minCoeff());
      h = z.cwiseMax(0.0);
    }
  }
  return margin;
}

struct Report {
  double worst_relative = 0.0;
  int configurations = 0;
  int rejected = 0;
};

inline double relative_error(double a, double b) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), kFloor});
}

// Draws random weights and 8-example batches until `configs` kink-free
// configurations have been checked parameter by parameter.
inline Report run(const posepost::NetworkConfig& cfg, int configs, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Report rep;
  while (rep.configurations < configs) {
    std::vector<posepost::Example> batch;
    for (int i = 0; i < 8; ++i) batch.push_back(random_example(cfg, rng));
    posepost::Rng wrng(rng());
    posepost::NetworkWeights w = posepost::NetworkWeights::initialize(cfg, wrng);
    // Randomize biases too, so their gradients are exercised away from zero.
    std::normal_distribution<double> g(0.0, 0.3);
    for (auto& layer : w.layers)
      for (auto& b : layer.bias) b = g(rng);
    if (min_hidden_margin(w, batch) < 1e-2) {
      ++rep.rejected;
      continue;
    }
    const Eigen::VectorXd analytic = posepost::loss_gradient(w, batch, cfg).gradient.flatten();
    const Eigen::VectorXd base = w.flatten();
    posepost::NetworkWeights probe = w;
    for (Eigen::Index i = 0; i < base.size(); ++i) {
      Eigen::VectorXd x = base;
      x[i] = base[i] + kStep;
      probe.assign(x);
      const double up = posepost::loss_gradient(probe, batch, cfg).loss;
      x[i] = base[i] - kStep;
      probe.assign(x);
      const double down = posepost::loss_gradient(probe, batch, cfg).loss;
      const double numeric = (up - down) / (2.0 * kStep);
      rep.worst_relative = std::max(rep.worst_relative, relative_error(analytic[i], numeric));
    }
    ++rep.configurations;
  }
  return rep;
}

}  // namespace gradcheck
