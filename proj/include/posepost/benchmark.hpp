#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "posepost/dataset.hpp"
#include "posepost/estimator.hpp"
#include "posepost/io.hpp"
#include "posepost/metrics.hpp"

namespace posepost {

enum class Method { Point, Mle, Map, RandomOracle, RandomSdf };

std::string to_string(Method m);
Method method_from_string(const std::string& s);
std::vector<Method> parse_methods(const std::string& csv);
std::vector<int> parse_sample_counts(const std::string& csv);

struct BenchmarkOptions {
  std::vector<Method> methods{Method::Point, Method::Mle, Method::Map, Method::RandomOracle, Method::RandomSdf};
  std::vector<int> sample_counts{5, 25, 100};
  std::uint64_t seed = 0;
  CameraIntrinsics camera;
  double prior_epsilon = kPriorEpsilon;
  // Called after each test view with (done, total).
  std::function<void(std::size_t, std::size_t)> progress;
};

struct ItemResult {
  std::string family;
  int category = 0;
  RotVec truth;
  std::map<std::pair<Method, int>, RotVec> predictions;
  std::map<std::pair<Method, int>, double> seconds;
  // Mixture density at the true pose and at the pose turned half-way about the
  // object's vertical axis (mdn model only).
  double density_true = 0.0;
  double density_flipped = 0.0;
};

struct BenchmarkResult {
  std::vector<ItemResult> items;
  std::vector<Method> methods;
  std::vector<int> sample_counts;

  double error_deg(std::size_t item, Method m, int n) const;
  /// Rows in method order, then sample-count order; optionally restricted to one family.
  std::vector<MetricsRow> rows(const std::optional<std::string>& family = std::nullopt) const;
  std::vector<std::string> families() const;
};

/// Evaluates each method at each sample count on every test view. Sampling methods use
/// one random stream per (seed, view, method), restarted for every sample count, so the
/// candidate set for a smaller n is a prefix of the set for a larger one.
BenchmarkResult run_benchmark(const Split& test, const SubspaceModel& subspace, const io::SavedNetwork* mdn,
                              const io::SavedNetwork* point, const BenchmarkOptions& opts);

/// Gnuplot script plotting mean error (with 95% interval) against sample count.
void write_gnuplot_script(std::ostream& os, const std::string& csv_name, const std::vector<Method>& methods);

}  // namespace posepost
