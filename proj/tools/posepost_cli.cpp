// Command-line front end: dataset generation, training, estimation, evaluation,
// rendering and SDF export.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "posepost/benchmark.hpp"
#include "posepost/dataset.hpp"
#include "posepost/error.hpp"
#include "posepost/estimator.hpp"
#include "posepost/io.hpp"
#include "posepost/sdf.hpp"
#include "posepost/serialize.hpp"

namespace fs = std::filesystem;
using namespace posepost;
using nlohmann::json;

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitNumeric = 3;

std::string read_text(const fs::path& p) {
  std::ifstream is(p);
  if (!is) throw ValidationError("cannot read " + p.string());
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

CameraIntrinsics camera_or_default(const std::string& camera_path, std::optional<CameraIntrinsics> fallback) {
  if (!camera_path.empty()) return camera_from_json(json::parse(read_text(camera_path), nullptr, true));
  return fallback.value_or(CameraIntrinsics{});
}

std::optional<CameraIntrinsics> model_camera(const fs::path& model_path) {
  const json j = json::parse(read_text(model_path), nullptr, false);
  if (j.is_object() && j.contains("camera")) return camera_from_json(j.at("camera"));
  return std::nullopt;
}

void add_camera_to_manifest(const fs::path& model_path, const CameraIntrinsics& cam) {
  json j = json::parse(read_text(model_path));
  j["camera"] = camera_to_json(cam);
  std::ofstream os(model_path, std::ios::trunc);
  os << j.dump(2) << '\n';
  if (!os) throw ValidationError("failed writing " + model_path.string());
}

struct GenArgs {
  std::string config, out;
  std::optional<std::uint64_t> seed;
};

int run_gen(const GenArgs& a) {
  SyntheticConfig cfg = synthetic_config_from_json_text(a.config.empty() ? "{}" : read_text(a.config));
  if (a.seed) cfg.seed = *a.seed;
  const GeneratedDataset ds = gen_dataset(cfg, a.out);
  std::cout << "wrote " << ds.train.records.size() << " training views and " << ds.test.records.size()
            << " test views to " << a.out << " (subspace k=" << ds.subspace.retained_dim() << ")\n";
  return 0;
}

struct TrainArgs {
  std::string data, out, mode = "mdn", config;
  int epochs = 25;
  std::uint64_t seed = 0;
};

int run_train(const TrainArgs& a) {
  NetworkConfig cfg;
  if (!a.config.empty()) cfg = config_from_json(json::parse(read_text(a.config)));
  cfg.mode = head_mode_from_string(a.mode);
  cfg.epochs = a.epochs;
  const Split split = load_split(a.data, "train", true);
  const auto camera = load_dataset_camera(split.dir);
  if (camera) cfg.depth_center = camera->object_distance;
  cfg.shape_dim = static_cast<int>(split.records.front().shape_coeffs.size());
  int max_category = 0;
  for (const auto& r : split.records) max_category = std::max(max_category, r.category);
  cfg.n_categories = std::max(cfg.n_categories, max_category + 1);
  cfg.validate();

  const std::vector<Example> examples = make_examples(split, cfg);
  const TrainResult tr = train(examples, cfg, a.seed);
  io::SavedNetwork net{cfg, tr.weights, tr.seed, tr.loss_trace};
  io::save_network(a.out, net);
  if (camera) add_camera_to_manifest(a.out, *camera);
  std::cout << "trained " << to_string(cfg.mode) << " model on " << examples.size() << " views; final loss "
            << (tr.loss_trace.empty() ? 0.0 : tr.loss_trace.back()) << '\n';
  return 0;
}

struct EstimateArgs {
  std::string model, subspace, depth, method = "map", camera, true_pose;
  int n = 100;
  double time_budget = 0.0;
  std::uint64_t seed = 0;
};

int run_estimate(const EstimateArgs& a) {
  const Method method = method_from_string(a.method);
  const DepthImage image = io::read_depth(a.depth);
  Rng rng(a.seed);
  EstimateResult est;
  if (method == Method::RandomOracle) {
    if (a.true_pose.empty()) throw ValidationError("random-oracle needs --true-pose");
    est = baseline_random_oracle(parse_rotvec(a.true_pose), a.n, rng);
  } else {
    if (a.model.empty()) throw ValidationError("--model is required for " + a.method);
    const io::SavedNetwork net = io::load_network(a.model);
    const PredictionOutput pred = forward(net.weights, image, net.config);
    if (method == Method::Point) {
      if (net.config.mode != HeadMode::Point) throw ValidationError("point estimation needs a point-mode model");
      est.pose = pred.pose_point;
      est.n_evaluated = 1;
    } else {
      ShapeContext ctx;
      SubspaceModel subspace;
      if (method == Method::Map || method == Method::RandomSdf) {
        if (a.subspace.empty()) throw ValidationError("--subspace is required for " + a.method);
        subspace = io::load_subspace(a.subspace);
        if (subspace.retained_dim() != net.config.shape_dim)
          throw ValidationError("model shape_dim does not match the subspace");
        ctx.model = &subspace;
        ctx.shape_coeffs = pred.shape_coeffs;
        ctx.observed = &image;
        ctx.camera = camera_or_default(a.camera, model_camera(a.model));
      }
      if (method != Method::RandomSdf && net.config.mode != HeadMode::Mdn)
        throw ValidationError(a.method + " needs an mdn-mode model");
      MapOptions opts;
      int n = a.n;
      if (a.time_budget > 0.0) {
        opts.time_budget = a.time_budget;
        n = std::numeric_limits<int>::max();
      }
      switch (method) {
        case Method::Mle: est = estimate_mle(pred.pose_mixture, a.n, rng); break;
        case Method::Map: est = estimate_map(pred.pose_mixture, ctx, n, rng, opts); break;
        case Method::RandomSdf: est = baseline_random_sdf(ctx, a.n, rng); break;
        default: break;
      }
    }
  }
  const RotVec pose = canonicalize(est.pose);
  json out = {{"method", a.method},
              {"pose", {pose.r.x(), pose.r.y(), pose.r.z()}},
              {"score", est.score},
              {"n_evaluated", est.n_evaluated},
              {"elapsed_s", est.elapsed},
              {"all_candidates_empty", est.all_candidates_empty}};
  std::cout << out.dump(2) << '\n';
  return 0;
}

struct EvalArgs {
  std::string model, point_model, subspace, data, methods = "point,mle,map,random-oracle,random-sdf", n = "5,25,100",
                                                  out = "results.csv", camera;
  std::uint64_t seed = 0;
  bool quiet = false;
};

int run_eval(const EvalArgs& a) {
  BenchmarkOptions opts;
  opts.methods = parse_methods(a.methods);
  opts.sample_counts = parse_sample_counts(a.n);
  opts.seed = a.seed;
  const Split test = load_split(a.data, "test", true);
  opts.camera = camera_or_default(a.camera, load_dataset_camera(test.dir));
  const SubspaceModel subspace = io::load_subspace(a.subspace);

  std::optional<io::SavedNetwork> mdn, point;
  for (const std::string& path : {a.model, a.point_model}) {
    if (path.empty()) continue;
    io::SavedNetwork net = io::load_network(path);
    if (net.config.mode == HeadMode::Mdn) {
      mdn = std::move(net);
    } else {
      point = std::move(net);
    }
  }
  if (!a.quiet)
    opts.progress = [](std::size_t done, std::size_t total) {
      if (done % 50 == 0 || done == total) std::cerr << "\r" << done << "/" << total << " views" << std::flush;
    };
  const BenchmarkResult res = run_benchmark(test, subspace, mdn ? &*mdn : nullptr, point ? &*point : nullptr, opts);
  if (!a.quiet) std::cerr << '\n';

  const fs::path out(a.out);
  auto write_csv = [&](const fs::path& p, const std::vector<MetricsRow>& rows) {
    std::ofstream os(p, std::ios::trunc);
    if (!os) throw ValidationError("cannot write " + p.string());
    write_metrics_csv(os, rows);
  };
  const auto overall = res.rows();
  write_csv(out, overall);
  for (const auto& fam : res.families()) {
    fs::path p = out;
    p.replace_filename(out.stem().string() + "." + fam + out.extension().string());
    write_csv(p, res.rows(fam));
  }
  fs::path gp = out;
  gp.replace_extension(".gp");
  std::ofstream gos(gp, std::ios::trunc);
  write_gnuplot_script(gos, out.filename().string(), opts.methods);

  write_metrics_csv(std::cout, overall);
  return 0;
}

struct RenderArgs {
  std::string voxel, pose = "0,0,0", out, camera;
};

int run_render(const RenderArgs& a) {
  const VoxelGrid grid = io::read_voxels(a.voxel);
  const CameraIntrinsics cam = camera_or_default(a.camera, std::nullopt);
  io::write_depth(a.out, render_depth(grid, parse_rotvec(a.pose), cam));
  return 0;
}

struct SdfArgs {
  std::string depth, out;
};

int run_sdf(const SdfArgs& a) {
  io::write_sdf(a.out, silhouette_sdf(io::read_depth(a.depth)));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Category-level pose posteriors from segmented depth images"};
  app.require_subcommand(1);

  GenArgs gen;
  auto* gen_cmd = app.add_subcommand("gen-data", "Generate a synthetic dataset");
  gen_cmd->add_option("--config", gen.config, "Dataset config JSON");
  gen_cmd->add_option("--out", gen.out, "Output directory")->required();
  gen_cmd->add_option("--seed", gen.seed, "Random seed");

  TrainArgs tr;
  auto* train_cmd = app.add_subcommand("train", "Train a network");
  train_cmd->add_option("--data", tr.data, "Dataset directory (or its train split)")->required();
  train_cmd->add_option("--out", tr.out, "Model manifest path (.json)")->required();
  train_cmd->add_option("--mode", tr.mode, "mdn or point")->check(CLI::IsMember({"mdn", "point"}));
  train_cmd->add_option("--epochs", tr.epochs, "Training epochs")->check(CLI::NonNegativeNumber);
  train_cmd->add_option("--seed", tr.seed, "Random seed");
  train_cmd->add_option("--config", tr.config, "Network config JSON");

  EstimateArgs est;
  auto* est_cmd = app.add_subcommand("estimate", "Estimate the pose of one depth image");
  est_cmd->add_option("--model", est.model, "Model manifest");
  est_cmd->add_option("--subspace", est.subspace, "Subspace manifest");
  est_cmd->add_option("--depth", est.depth, "Depth image (.dpm)")->required();
  est_cmd->add_option("--method", est.method, "point|mle|map|random-oracle|random-sdf");
  est_cmd->add_option("--n", est.n, "Sample budget")->check(CLI::PositiveNumber);
  est_cmd->add_option("--time-budget", est.time_budget, "Seconds (map only)")->check(CLI::NonNegativeNumber);
  est_cmd->add_option("--seed", est.seed, "Random seed");
  est_cmd->add_option("--camera", est.camera, "Camera JSON");
  est_cmd->add_option("--true-pose", est.true_pose, "rx,ry,rz for random-oracle");

  EvalArgs ev;
  auto* eval_cmd = app.add_subcommand("eval", "Benchmark methods on a test split");
  eval_cmd->add_option("--model", ev.model, "Model manifest (mdn or point)");
  eval_cmd->add_option("--point-model", ev.point_model, "Point-mode model manifest");
  eval_cmd->add_option("--subspace", ev.subspace, "Subspace manifest")->required();
  eval_cmd->add_option("--data", ev.data, "Dataset directory (or its test split)")->required();
  eval_cmd->add_option("--methods", ev.methods, "Comma-separated methods");
  eval_cmd->add_option("--n", ev.n, "Comma-separated sample counts");
  eval_cmd->add_option("--out", ev.out, "Results CSV");
  eval_cmd->add_option("--seed", ev.seed, "Random seed");
  eval_cmd->add_option("--camera", ev.camera, "Camera JSON");
  eval_cmd->add_flag("--quiet", ev.quiet, "No progress output");

  RenderArgs rd;
  auto* render_cmd = app.add_subcommand("render", "Render a voxel grid to a depth image");
  render_cmd->add_option("--voxel", rd.voxel, "Voxel grid (.vxg)")->required();
  render_cmd->add_option("--pose", rd.pose, "rx,ry,rz radians");
  render_cmd->add_option("--out", rd.out, "Depth image (.dpm)")->required();
  render_cmd->add_option("--camera", rd.camera, "Camera JSON");

  SdfArgs sd;
  auto* sdf_cmd = app.add_subcommand("sdf", "Signed distance field of a depth image's silhouette");
  sdf_cmd->add_option("--depth", sd.depth, "Depth image (.dpm)")->required();
  sdf_cmd->add_option("--out", sd.out, "Output grid (.dpm)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitValidation;
  }

  try {
    if (*gen_cmd) return run_gen(gen);
    if (*train_cmd) return run_train(tr);
    if (*est_cmd) return run_estimate(est);
    if (*eval_cmd) return run_eval(ev);
    if (*render_cmd) return run_render(rd);
    if (*sdf_cmd) return run_sdf(sd);
  } catch (const NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  }
  return 0;
}
