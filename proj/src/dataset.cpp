#include "posepost/dataset.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"
#include "posepost/error.hpp"
#include "posepost/io.hpp"
#include "posepost/serialize.hpp"

namespace posepost {

using nlohmann::json;

bool ViewRecord::operator==(const ViewRecord& o) const {
  return depth_path == o.depth_path && voxel_path == o.voxel_path && pose == o.pose &&
         shape_coeffs.size() == o.shape_coeffs.size() && shape_coeffs == o.shape_coeffs && category == o.category &&
         family == o.family && object == o.object && view == o.view;
}

std::string record_to_json_line(const ViewRecord& r) {
  json j;
  j["depth_path"] = r.depth_path;
  j["voxel_path"] = r.voxel_path;
  j["pose"] = {r.pose.r.x(), r.pose.r.y(), r.pose.r.z()};
  j["shape_coeffs"] = std::vector<double>(r.shape_coeffs.data(), r.shape_coeffs.data() + r.shape_coeffs.size());
  j["category"] = r.category;
  j["family"] = r.family;
  j["object"] = r.object;
  j["view"] = r.view;
  return j.dump();
}

ViewRecord record_from_json_line(const std::string& line) {
  ViewRecord r;
  try {
    const json j = json::parse(line);
    r.depth_path = j.at("depth_path").get<std::string>();
    r.voxel_path = j.value("voxel_path", std::string{});
    const auto pose = j.at("pose").get<std::vector<double>>();
    if (pose.size() != 3) throw ValidationError("manifest pose must have 3 entries");
    r.pose = RotVec(pose[0], pose[1], pose[2]);
    const auto coeffs = j.at("shape_coeffs").get<std::vector<double>>();
    r.shape_coeffs = Eigen::Map<const Eigen::VectorXd>(coeffs.data(), static_cast<Eigen::Index>(coeffs.size()));
    r.category = j.at("category").get<int>();
    r.family = j.value("family", std::string{});
    r.object = j.value("object", 0);
    r.view = j.value("view", 0);
  } catch (const json::exception& e) {
    throw ValidationError(std::string("manifest line: ") + e.what());
  }
  return r;
}

namespace {

// Independent stream per (seed, family, split, purpose).
Rng stream(std::uint64_t seed, std::size_t family, int split, int purpose) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(family), static_cast<std::uint32_t>(split),
                    static_cast<std::uint32_t>(purpose)};
  return Rng(seq);
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw ValidationError("cannot create directory " + dir.string());
}

Split write_split(const fs::path& dir, const std::vector<std::vector<VoxelGrid>>& objects, int views,
                  const SyntheticConfig& cfg, const SubspaceModel& subspace, int split_id) {
  Split split;
  split.dir = dir;
  if (objects.empty()) return split;
  ensure_dir(dir / "voxels");
  ensure_dir(dir / "depth");
  std::ofstream manifest(dir / "manifest.jsonl", std::ios::trunc);
  if (!manifest) throw ValidationError("cannot write " + (dir / "manifest.jsonl").string());

  for (std::size_t f = 0; f < objects.size(); ++f) {
    const std::string fam = to_string(cfg.families[f]);
    Rng pose_rng = stream(cfg.seed, f, split_id, 1);
    for (std::size_t o = 0; o < objects[f].size(); ++o) {
      const VoxelGrid& grid = objects[f][o];
      char stem[96];
      std::snprintf(stem, sizeof stem, "%s_%03zu", fam.c_str(), o);
      const std::string voxel_rel = std::string("voxels/") + stem + ".vxg";
      io::write_voxels(dir / voxel_rel, grid);
      const Coefficients coeffs = project(grid.to_vector(), subspace);
      for (int v = 0; v < views; ++v) {
        ViewRecord r;
        r.pose = sample_pose(PoseSampling::TrainingView, pose_rng);
        char name[128];
        std::snprintf(name, sizeof name, "depth/%s_v%03d.dpm", stem, v);
        r.depth_path = name;
        r.voxel_path = voxel_rel;
        r.shape_coeffs = coeffs;
        r.category = static_cast<int>(f);
        r.family = fam;
        r.object = static_cast<int>(o);
        r.view = v;
        DepthImage img = io::quantize(render_depth(grid, r.pose, cfg.camera));
        io::write_depth(dir / r.depth_path, img);
        manifest << record_to_json_line(r) << '\n';
        split.records.push_back(std::move(r));
        split.images.push_back(std::move(img));
      }
    }
  }
  manifest.flush();
  if (!manifest) throw ValidationError("failed writing manifest in " + dir.string());
  return split;
}

}  // namespace

GeneratedDataset gen_dataset(const SyntheticConfig& cfg, const fs::path& out_dir) {
  cfg.validate();
  ensure_dir(out_dir);

  std::vector<std::vector<VoxelGrid>> train_objects(cfg.families.size()), test_objects;
  if (cfg.test_count > 0) test_objects.resize(cfg.families.size());
  std::vector<ClassSubspace> classes;
  for (std::size_t f = 0; f < cfg.families.size(); ++f) {
    const Family fam = cfg.families[f];
    const auto it = cfg.ranges.find(fam);
    const FamilyRanges ranges = it == cfg.ranges.end() ? FamilyRanges{} : it->second;
    Rng train_rng = stream(cfg.seed, f, 0, 0);
    for (int i = 0; i < cfg.count; ++i) train_objects[f].push_back(generate_object(fam, cfg.grid_side, ranges, train_rng));
    if (cfg.test_count > 0) {
      Rng test_rng = stream(cfg.seed, f, 1, 0);
      for (int i = 0; i < cfg.test_count; ++i) test_objects[f].push_back(generate_object(fam, cfg.grid_side, ranges, test_rng));
    }

    std::vector<ShapeVector> shapes;
    for (const auto& g : train_objects[f]) shapes.push_back(g.to_vector());
    if (shapes.size() == 1) shapes.push_back(shapes.front());  // a lone object still gets a mean
    const int k = std::min(cfg.retained_dim, static_cast<int>(shapes.size()) - 1);
    classes.push_back(learn_class_subspace(shapes, TargetDim{k}, static_cast<int>(f)));
  }

  GeneratedDataset ds;
  ds.subspace = merge_subspaces(classes);
  ds.subspace.grid_dims = {cfg.grid_side, cfg.grid_side, cfg.grid_side};
  ds.camera = cfg.camera;
  for (Family f : cfg.families) ds.families.push_back(to_string(f));

  io::save_subspace(out_dir / "subspace.json", ds.subspace);
  json meta;
  meta["camera"] = camera_to_json(cfg.camera);
  meta["families"] = ds.families;
  meta["grid_side"] = cfg.grid_side;
  meta["seed"] = cfg.seed;
  meta["count"] = cfg.count;
  meta["views_per_object"] = cfg.views_per_object;
  meta["test_count"] = cfg.test_count;
  meta["test_views_per_object"] = cfg.test_views_per_object;
  meta["shape_dim"] = ds.subspace.retained_dim();
  {
    std::ofstream os(out_dir / "dataset.json", std::ios::trunc);
    if (!os) throw ValidationError("cannot write " + (out_dir / "dataset.json").string());
    os << meta.dump(2) << '\n';
  }

  ds.train = write_split(out_dir / "train", train_objects, cfg.views_per_object, cfg, ds.subspace, 0);
  if (cfg.test_count > 0)
    ds.test = write_split(out_dir / "test", test_objects, cfg.test_views_per_object, cfg, ds.subspace, 1);
  return ds;
}

Split load_split(const fs::path& dir, const std::string& fallback, bool load_images) {
  Split split;
  split.dir = dir;
  if (!fs::exists(dir / "manifest.jsonl") && fs::exists(dir / fallback / "manifest.jsonl")) split.dir = dir / fallback;
  std::ifstream is(split.dir / "manifest.jsonl");
  if (!is) throw ValidationError("no manifest.jsonl in " + dir.string());
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    split.records.push_back(record_from_json_line(line));
    if (load_images) split.images.push_back(io::read_depth(split.dir / split.records.back().depth_path));
  }
  if (split.records.empty()) throw ValidationError("empty manifest in " + split.dir.string());
  return split;
}

std::optional<CameraIntrinsics> load_dataset_camera(const fs::path& split_dir) {
  for (const fs::path& p : {split_dir / "dataset.json", split_dir.parent_path() / "dataset.json"}) {
    std::ifstream is(p);
    if (!is) continue;
    try {
      const json j = json::parse(is);
      if (j.contains("camera")) return camera_from_json(j.at("camera"));
    } catch (const json::exception& e) {
      throw ValidationError(p.string() + ": " + e.what());
    }
  }
  return std::nullopt;
}

std::vector<Example> make_examples(const Split& split, const NetworkConfig& cfg) {
  if (split.images.size() != split.records.size()) throw ValidationError("split images are not loaded");
  std::vector<Example> out;
  out.reserve(split.records.size());
  for (std::size_t i = 0; i < split.records.size(); ++i) {
    Example e;
    e.input = preprocess(split.images[i], cfg);
    e.target.pose = canonicalize(split.records[i].pose);
    e.target.shape_coeffs = split.records[i].shape_coeffs;
    e.target.category = split.records[i].category;
    out.push_back(std::move(e));
  }
  return out;
}

}  // namespace posepost
