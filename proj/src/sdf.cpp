#include "posepost/sdf.hpp"

#include <cmath>
#include <limits>

#include "posepost/error.hpp"

namespace posepost {

namespace {

constexpr double kFar = 1e20;

// Felzenszwalb-Huttenlocher lower envelope of parabolas over one line.
// f holds squared distances (kFar when unknown); d receives the result.
void edt_1d(const double* f, double* d, int n, std::vector<int>& v, std::vector<double>& z) {
  int k = 0;
  v[0] = 0;
  z[0] = -std::numeric_limits<double>::infinity();
  z[1] = std::numeric_limits<double>::infinity();
  for (int q = 1; q < n; ++q) {
    const double fq = f[q] + static_cast<double>(q) * q;
    double s = (fq - (f[v[k]] + static_cast<double>(v[k]) * v[k])) / (2.0 * (q - v[k]));
    while (s <= z[k]) {
      --k;
      s = (fq - (f[v[k]] + static_cast<double>(v[k]) * v[k])) / (2.0 * (q - v[k]));
    }
    ++k;
    v[k] = q;
    z[k] = s;
    z[k + 1] = std::numeric_limits<double>::infinity();
  }
  k = 0;
  for (int q = 0; q < n; ++q) {
    while (z[k + 1] < q) ++k;
    const double dq = q - v[k];
    d[q] = dq * dq + f[v[k]];
  }
}

}  // namespace

std::vector<double> squared_distance_transform(const std::vector<std::uint8_t>& features, int width,
                                               int height) {
  const std::size_t w = static_cast<std::size_t>(width);
  std::vector<double> grid(features.size());
  for (std::size_t i = 0; i < features.size(); ++i) grid[i] = features[i] ? 0.0 : kFar;

  const int longest = std::max(width, height);
  std::vector<double> f(static_cast<std::size_t>(longest)), d(static_cast<std::size_t>(longest));
  std::vector<int> v(static_cast<std::size_t>(longest));
  std::vector<double> z(static_cast<std::size_t>(longest) + 1);

  for (int x = 0; x < width; ++x) {
    for (int y = 0; y < height; ++y) f[y] = grid[y * w + x];
    edt_1d(f.data(), d.data(), height, v, z);
    for (int y = 0; y < height; ++y) grid[y * w + x] = d[y];
  }
  for (int y = 0; y < height; ++y) {
    edt_1d(&grid[y * w], d.data(), width, v, z);
    for (int x = 0; x < width; ++x) grid[y * w + x] = d[x];
  }
  for (auto& g : grid)
    if (g >= kFar * 0.5) g = std::numeric_limits<double>::infinity();
  return grid;
}

SignedDistanceField silhouette_sdf(const DepthImage& image) {
  const int w = image.width, h = image.height;
  if (w <= 0 || h <= 0 || image.depth.size() != static_cast<std::size_t>(w) * h)
    throw ValidationError("malformed depth image");

  std::vector<std::uint8_t> object(image.depth.size());
  bool any = false;
  for (std::size_t i = 0; i < object.size(); ++i) {
    object[i] = image.depth[i] != DepthImage::kBackground ? 1 : 0;
    any = any || object[i];
  }
  if (!any) throw ValidationError("empty silhouette");

  // Outside: distance to the nearest silhouette pixel.
  const std::vector<double> outside = squared_distance_transform(object, w, h);

  // Inside: distance to the nearest background pixel, with a one-pixel background
  // ring standing in for everything beyond the border.
  const int pw = w + 2, ph = h + 2;
  std::vector<std::uint8_t> background(static_cast<std::size_t>(pw) * ph, 1);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      background[static_cast<std::size_t>(y + 1) * pw + (x + 1)] = object[static_cast<std::size_t>(y) * w + x] ? 0 : 1;
  const std::vector<double> inside = squared_distance_transform(background, pw, ph);

  SignedDistanceField sdf{w, h, std::vector<double>(object.size())};
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * w + x;
      sdf.values[i] = object[i] ? -std::sqrt(inside[static_cast<std::size_t>(y + 1) * pw + (x + 1)])
                                : std::sqrt(outside[i]);
    }
  }
  return sdf;
}

double sdf_difference(const SignedDistanceField& a, const SignedDistanceField& b, SdfErrorOptions opts) {
  if (a.width != b.width || a.height != b.height) throw ValidationError("dimension mismatch");
  double sum = 0.0;
  for (std::size_t i = 0; i < a.values.size(); ++i) {
    const double diff = a.values[i] - b.values[i];
    sum += diff * diff;
  }
  if (opts.normalize) sum /= static_cast<double>(a.values.size());
  return std::sqrt(sum);
}

double depth_error(const DepthImage& observed, const DepthImage& predicted, SdfErrorOptions opts) {
  if (observed.width != predicted.width || observed.height != predicted.height)
    throw ValidationError("dimension mismatch");
  return sdf_difference(silhouette_sdf(observed), silhouette_sdf(predicted), opts);
}

double prior_density(double error, double eps) {
  if (!(error >= 0.0)) throw ValidationError("SDF error must be non-negative");
  const double e2 = error * error;
  return 1.0 / (e2 * e2 + eps);
}

}  // namespace posepost
