#pragma once

#include <array>
#include <ostream>
#include <string>
#include <vector>

#include "posepost/geometry.hpp"

namespace posepost {

inline constexpr double kGrossErrorDeg = 15.0;
inline constexpr std::array<int, 4> kAzimuthBins{4, 8, 12, 24};
inline constexpr std::array<int, 3> kElevationBins{4, 6, 12};

struct PoseMetrics {
  std::size_t count = 0;
  double mean_error_deg = 0.0;
  double ci95_deg = 0.0;     // 1.96 * sample standard deviation / sqrt(count)
  double gross_rate = 0.0;   // fraction with error > 15 degrees
  std::array<double, 4> azimuth_accuracy{};
  std::array<double, 3> elevation_accuracy{};
};

int azimuth_bin(double azimuth, int bins);
int elevation_bin(double elevation, int bins);

PoseMetrics compute_metrics(const std::vector<RotVec>& predictions, const std::vector<RotVec>& truth);

/// One CSV row of an evaluation.
struct MetricsRow {
  std::string method;
  int n_samples = 0;
  PoseMetrics metrics;
  double runtime_s = 0.0;  // mean wall time per view
};

inline constexpr const char* kMetricsHeader =
    "method,n_samples,mean_err_deg,ci95_deg,gross_rate,runtime_s,azb4,azb8,azb12,azb24,elb4,elb6,elb12";

void write_metrics_csv(std::ostream& os, const std::vector<MetricsRow>& rows);

}  // namespace posepost
