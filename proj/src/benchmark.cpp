#include "posepost/benchmark.hpp"

#include <chrono>
#include <set>
#include <sstream>

#include "posepost/error.hpp"

namespace posepost {

std::string to_string(Method m) {
  switch (m) {
    case Method::Point: return "point";
    case Method::Mle: return "mle";
    case Method::Map: return "map";
    case Method::RandomOracle: return "random-oracle";
    case Method::RandomSdf: return "random-sdf";
  }
  return "unknown";
}

Method method_from_string(const std::string& s) {
  if (s == "point") return Method::Point;
  if (s == "mle") return Method::Mle;
  if (s == "map") return Method::Map;
  if (s == "random-oracle") return Method::RandomOracle;
  if (s == "random-sdf") return Method::RandomSdf;
  throw ValidationError("unknown method '" + s + "'");
}

namespace {
std::vector<std::string> split_csv(const std::string& csv) {
  std::vector<std::string> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  if (out.empty()) throw ValidationError("empty list '" + csv + "'");
  return out;
}
}  // namespace

std::vector<Method> parse_methods(const std::string& csv) {
  std::vector<Method> out;
  for (const auto& s : split_csv(csv)) out.push_back(method_from_string(s));
  return out;
}

std::vector<int> parse_sample_counts(const std::string& csv) {
  std::vector<int> out;
  for (const auto& s : split_csv(csv)) {
    std::size_t used = 0;
    int n = 0;
    try {
      n = std::stoi(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != s.size() || n < 1) throw ValidationError("sample counts must be positive integers: '" + csv + "'");
    out.push_back(n);
  }
  return out;
}

double BenchmarkResult::error_deg(std::size_t item, Method m, int n) const {
  const auto& it = items.at(item);
  return angular_error_deg(it.predictions.at({m, n}), it.truth);
}

std::vector<std::string> BenchmarkResult::families() const {
  std::vector<std::string> out;
  std::set<std::string> seen;
  for (const auto& it : items)
    if (seen.insert(it.family).second) out.push_back(it.family);
  return out;
}

std::vector<MetricsRow> BenchmarkResult::rows(const std::optional<std::string>& family) const {
  std::vector<MetricsRow> out;
  for (Method m : methods) {
    for (int n : sample_counts) {
      std::vector<RotVec> pred, truth;
      double seconds = 0.0;
      for (const auto& it : items) {
        if (family && it.family != *family) continue;
        pred.push_back(it.predictions.at({m, n}));
        truth.push_back(it.truth);
        seconds += it.seconds.at({m, n});
      }
      if (pred.empty()) continue;
      MetricsRow row;
      row.method = to_string(m);
      row.n_samples = n;
      row.metrics = compute_metrics(pred, truth);
      row.runtime_s = seconds / static_cast<double>(pred.size());
      out.push_back(std::move(row));
    }
  }
  return out;
}

namespace {

using Clock = std::chrono::steady_clock;

Rng item_stream(std::uint64_t seed, std::size_t item, Method m) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(item), static_cast<std::uint32_t>(m)};
  return Rng(seq);
}

bool needs_mdn(Method m) { return m == Method::Mle || m == Method::Map; }

}  // namespace

BenchmarkResult run_benchmark(const Split& test, const SubspaceModel& subspace, const io::SavedNetwork* mdn,
                              const io::SavedNetwork* point, const BenchmarkOptions& opts) {
  if (test.records.empty() || test.images.size() != test.records.size())
    throw ValidationError("benchmark needs a loaded test split");
  if (opts.sample_counts.empty() || opts.methods.empty()) throw ValidationError("nothing to evaluate");
  for (Method m : opts.methods) {
    if (needs_mdn(m) && (mdn == nullptr || mdn->config.mode != HeadMode::Mdn))
      throw ValidationError("method " + to_string(m) + " needs an mdn-mode model");
    if (m == Method::Point && (point == nullptr || point->config.mode != HeadMode::Point))
      throw ValidationError("method point needs a point-mode model");
    if (m == Method::RandomSdf && mdn == nullptr && point == nullptr)
      throw ValidationError("method random-sdf needs a model for the shape estimate");
  }
  for (const auto* net : {mdn, point})
    if (net && net->config.shape_dim != subspace.retained_dim())
      throw ValidationError("model shape_dim does not match the subspace");

  BenchmarkResult result;
  result.methods = opts.methods;
  result.sample_counts = opts.sample_counts;
  const RotationMatrix flip = vertical_flip();

  for (std::size_t i = 0; i < test.records.size(); ++i) {
    const ViewRecord& rec = test.records[i];
    const DepthImage& image = test.images[i];
    ItemResult item;
    item.family = rec.family;
    item.category = rec.category;
    item.truth = canonicalize(rec.pose);

    std::optional<PredictionOutput> mdn_out, point_out;
    double mdn_seconds = 0.0, point_seconds = 0.0;
    if (mdn) {
      const auto t0 = Clock::now();
      mdn_out = forward(mdn->weights, image, mdn->config);
      mdn_seconds = std::chrono::duration<double>(Clock::now() - t0).count();
      if (mdn->config.mode == HeadMode::Mdn) {
        item.density_true = gmm_pdf(item.truth.r, mdn_out->pose_mixture);
        const RotVec flipped = matrix_to_rotvec(rotvec_to_matrix(item.truth) * flip);
        item.density_flipped = gmm_pdf(flipped.r, mdn_out->pose_mixture);
      }
    }
    if (point) {
      const auto t0 = Clock::now();
      point_out = forward(point->weights, image, point->config);
      point_seconds = std::chrono::duration<double>(Clock::now() - t0).count();
    }

    ShapeContext ctx;
    ctx.model = &subspace;
    ctx.observed = &image;
    ctx.camera = opts.camera;
    ctx.prior_epsilon = opts.prior_epsilon;
    if (mdn_out) {
      ctx.shape_coeffs = mdn_out->shape_coeffs;
    } else if (point_out) {
      ctx.shape_coeffs = point_out->shape_coeffs;
    }
    const double shape_seconds = mdn_out ? mdn_seconds : point_seconds;

    for (Method m : opts.methods) {
      for (int n : opts.sample_counts) {
        Rng rng = item_stream(opts.seed, i, m);
        EstimateResult est;
        double seconds = 0.0;
        switch (m) {
          case Method::Point:
            est.pose = point_out->pose_point;
            seconds = point_seconds;
            break;
          case Method::Mle:
            est = estimate_mle(mdn_out->pose_mixture, n, rng);
            seconds = mdn_seconds + est.elapsed;
            break;
          case Method::Map:
            est = estimate_map(mdn_out->pose_mixture, ctx, n, rng);
            seconds = mdn_seconds + est.elapsed;
            break;
          case Method::RandomOracle:
            est = baseline_random_oracle(item.truth, n, rng);
            seconds = est.elapsed;
            break;
          case Method::RandomSdf:
            est = baseline_random_sdf(ctx, n, rng);
            seconds = shape_seconds + est.elapsed;
            break;
        }
        item.predictions[{m, n}] = canonicalize(est.pose);
        item.seconds[{m, n}] = seconds;
      }
    }
    result.items.push_back(std::move(item));
    if (opts.progress) opts.progress(i + 1, test.records.size());
  }
  return result;
}

void write_gnuplot_script(std::ostream& os, const std::string& csv_name, const std::vector<Method>& methods) {
  os << "# Mean pose error against sample count; error bars are 95% intervals.\n"
     << "set datafile separator ','\n"
     << "set key autotitle columnhead\n"
     << "set logscale x\n"
     << "set xlabel 'samples'\n"
     << "set ylabel 'mean angular error (deg)'\n"
     << "plot ";
  for (std::size_t i = 0; i < methods.size(); ++i) {
    const std::string name = to_string(methods[i]);
    if (i) os << ", \\\n     ";
    os << "'" << csv_name << "' using 2:(strcol(1) eq '" << name << "' ? $3 : 1/0):4 with yerrorlines title '"
       << name << "'";
  }
  os << '\n';
}

}  // namespace posepost
