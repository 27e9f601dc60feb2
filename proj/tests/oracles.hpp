#pragma once

// Slow, independent reference computations shared by the unit and acceptance tests.

#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "posepost/geometry.hpp"
#include "posepost/gmm.hpp"
#include "posepost/sdf.hpp"

namespace oracle {

// All-pairs signed distance: each pixel scans every pixel of the opposite region,
// and interior pixels also scan the ring of virtual background pixels around the image.
inline std::vector<double> brute_force_sdf(const std::vector<std::uint8_t>& object, int w, int h) {
  std::vector<double> out(object.size());
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const bool inside = object[y * w + x] != 0;
      double best = std::numeric_limits<double>::infinity();
      for (int v = -1; v <= h; ++v) {
        for (int u = -1; u <= w; ++u) {
          const bool border = u < 0 || v < 0 || u >= w || v >= h;
          if (border && !inside) continue;
          const bool other = border ? false : object[v * w + u] != 0;
          if (other == inside) continue;
          const double dx = x - u, dy = y - v;
          best = std::min(best, dx * dx + dy * dy);
        }
      }
      out[y * w + x] = inside ? -std::sqrt(best) : std::sqrt(best);
    }
  }
  return out;
}

inline posepost::DepthImage image_from_mask(const std::vector<std::uint8_t>& mask, int w, int h, double depth = 2.0) {
  posepost::DepthImage img(w, h);
  for (std::size_t i = 0; i < mask.size(); ++i)
    if (mask[i]) img.depth[i] = depth;
  return img;
}

inline std::vector<std::uint8_t> random_mask(int w, int h, double p, std::mt19937_64& rng) {
  std::bernoulli_distribution coin(p);
  std::vector<std::uint8_t> m(static_cast<std::size_t>(w) * h);
  for (auto& v : m) v = coin(rng) ? 1 : 0;
  return m;
}

// Rotation angle from the matrix logarithm computed by Eigen's AngleAxis conversion.
inline double geodesic_deg(const Eigen::Matrix3d& a, const Eigen::Matrix3d& b) {
  const Eigen::AngleAxisd aa(Eigen::Matrix3d(a.transpose() * b));
  return aa.angle() * 180.0 / M_PI;
}

inline Eigen::Matrix3d quaternion_rotation(const Eigen::Vector3d& r) {
  const double t = r.norm();
  if (t == 0.0) return Eigen::Matrix3d::Identity();
  return Eigen::Quaterniond(Eigen::AngleAxisd(t, r / t)).toRotationMatrix();
}

// Product of per-dimension normal densities, summed over components.
inline double mixture_density(const Eigen::Vector3d& y, const posepost::GmmParams& g) {
  double total = 0.0;
  for (const auto& c : g.components) {
    double p = c.weight;
    for (int k = 0; k < 3; ++k) {
      const double d = y[k] - c.mean[k];
      p *= std::exp(-0.5 * d * d / c.variance[k]) / std::sqrt(2.0 * M_PI * c.variance[k]);
    }
    total += p;
  }
  return total;
}

inline posepost::GmmParams random_mixture(int c, std::mt19937_64& rng, double var_lo = 0.05, double var_hi = 0.5) {
  std::uniform_real_distribution<double> w(0.2, 1.0), m(-1.5, 1.5), v(var_lo, var_hi);
  posepost::GmmParams g;
  double sum = 0.0;
  for (int i = 0; i < c; ++i) {
    posepost::GmmParams::Component comp;
    comp.weight = w(rng);
    sum += comp.weight;
    comp.mean = {m(rng), m(rng), m(rng)};
    comp.variance = {v(rng), v(rng), v(rng)};
    g.components.push_back(comp);
  }
  for (auto& comp : g.components) comp.weight /= sum;
  return g;
}

}  // namespace oracle
