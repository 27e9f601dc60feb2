#include "posepost/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "posepost/error.hpp"

namespace posepost {

int azimuth_bin(double azimuth, int bins) {
  const double width = 2.0 * std::numbers::pi / bins;
  const int b = static_cast<int>(std::floor((azimuth + std::numbers::pi) / width));
  return std::clamp(b, 0, bins - 1);
}

int elevation_bin(double elevation, int bins) {
  const double width = std::numbers::pi / bins;
  const int b = static_cast<int>(std::floor((elevation + std::numbers::pi / 2.0) / width));
  return std::clamp(b, 0, bins - 1);
}

PoseMetrics compute_metrics(const std::vector<RotVec>& predictions, const std::vector<RotVec>& truth) {
  if (predictions.empty()) throw ValidationError("no predictions to score");
  if (predictions.size() != truth.size()) throw ValidationError("predictions and ground truth differ in length");

  PoseMetrics m;
  m.count = predictions.size();
  const double n = static_cast<double>(m.count);
  std::vector<double> errors;
  errors.reserve(m.count);
  for (std::size_t i = 0; i < m.count; ++i) {
    const RotationMatrix p = rotvec_to_matrix(predictions[i]);
    const RotationMatrix t = rotvec_to_matrix(truth[i]);
    const double e = angular_error_deg(p, t);
    errors.push_back(e);
    m.mean_error_deg += e;
    if (e > kGrossErrorDeg) m.gross_rate += 1.0;

    const ViewAngles pv = matrix_to_view(p), tv = matrix_to_view(t);
    for (std::size_t b = 0; b < kAzimuthBins.size(); ++b)
      if (azimuth_bin(pv.azimuth, kAzimuthBins[b]) == azimuth_bin(tv.azimuth, kAzimuthBins[b]))
        m.azimuth_accuracy[b] += 1.0;
    for (std::size_t b = 0; b < kElevationBins.size(); ++b)
      if (elevation_bin(pv.elevation, kElevationBins[b]) == elevation_bin(tv.elevation, kElevationBins[b]))
        m.elevation_accuracy[b] += 1.0;
  }
  m.mean_error_deg /= n;
  m.gross_rate /= n;
  for (auto& a : m.azimuth_accuracy) a /= n;
  for (auto& a : m.elevation_accuracy) a /= n;
  if (m.count > 1) {
    double ss = 0.0;
    for (double e : errors) ss += (e - m.mean_error_deg) * (e - m.mean_error_deg);
    m.ci95_deg = 1.96 * std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
  }
  return m;
}

void write_metrics_csv(std::ostream& os, const std::vector<MetricsRow>& rows) {
  os << kMetricsHeader << '\n';
  char buf[512];
  for (const auto& r : rows) {
    const auto& m = r.metrics;
    std::snprintf(buf, sizeof buf, "%s,%d,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f\n",
                  r.method.c_str(), r.n_samples, m.mean_error_deg, m.ci95_deg, m.gross_rate, r.runtime_s,
                  m.azimuth_accuracy[0], m.azimuth_accuracy[1], m.azimuth_accuracy[2], m.azimuth_accuracy[3],
                  m.elevation_accuracy[0], m.elevation_accuracy[1], m.elevation_accuracy[2]);
    os << buf;
  }
}

}  // namespace posepost
