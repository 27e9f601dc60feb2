#include "posepost/io.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include "json.hpp"
#include "posepost/error.hpp"
#include "posepost/serialize.hpp"

namespace posepost::io {

namespace {

using nlohmann::json;

void put_u32(std::ostream& os, std::uint32_t v) {
  const char b[4] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
                     static_cast<char>((v >> 16) & 0xff), static_cast<char>((v >> 24) & 0xff)};
  os.write(b, 4);
}

void put_f32(std::ostream& os, double v) { put_u32(os, std::bit_cast<std::uint32_t>(static_cast<float>(v))); }

std::uint32_t get_u32(std::istream& is, const fs::path& path) {
  unsigned char b[4];
  if (!is.read(reinterpret_cast<char*>(b), 4)) throw ValidationError("truncated file: " + path.string());
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

double get_f32(std::istream& is, const fs::path& path) { return std::bit_cast<float>(get_u32(is, path)); }

std::ofstream open_out(const fs::path& path) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw ValidationError("cannot write " + path.string());
  return os;
}

std::ifstream open_in(const fs::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ValidationError("cannot read " + path.string());
  return is;
}

void expect_magic(std::istream& is, const char* magic, const fs::path& path) {
  char buf[4];
  if (!is.read(buf, 4) || std::memcmp(buf, magic, 4) != 0)
    throw ValidationError(path.string() + ": expected " + std::string(magic, 4) + " header");
}

void finish(std::ofstream& os, const fs::path& path) {
  os.flush();
  if (!os) throw ValidationError("failed writing " + path.string());
}

fs::path blob_path(const fs::path& manifest) {
  fs::path p = manifest;
  p.replace_extension(".wts");
  return p;
}

json read_json(const fs::path& path) {
  std::ifstream is(path);
  if (!is) throw ValidationError("cannot read " + path.string());
  try {
    return json::parse(is);
  } catch (const json::exception& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

void write_json(const fs::path& path, const json& j) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw ValidationError("cannot write " + path.string());
  os << j.dump(2) << '\n';
  os.flush();
  if (!os) throw ValidationError("failed writing " + path.string());
}

}  // namespace

void write_voxels(const fs::path& path, const VoxelGrid& grid) {
  auto os = open_out(path);
  os.write("VXG1", 4);
  for (int d : grid.dims()) put_u32(os, static_cast<std::uint32_t>(d));
  os.write(reinterpret_cast<const char*>(grid.occupancy().data()), static_cast<std::streamsize>(grid.size()));
  finish(os, path);
}

VoxelGrid read_voxels(const fs::path& path) {
  auto is = open_in(path);
  expect_magic(is, "VXG1", path);
  std::array<int, 3> dims;
  for (auto& d : dims) {
    const std::uint32_t v = get_u32(is, path);
    if (v == 0 || v > 4096) throw ValidationError(path.string() + ": implausible voxel dims");
    d = static_cast<int>(v);
  }
  std::vector<std::uint8_t> occ(static_cast<std::size_t>(dims[0]) * dims[1] * dims[2]);
  if (!is.read(reinterpret_cast<char*>(occ.data()), static_cast<std::streamsize>(occ.size())))
    throw ValidationError("truncated file: " + path.string());
  return VoxelGrid(dims, std::move(occ));
}

namespace {
void write_grid(const fs::path& path, int w, int h, const std::vector<double>& values) {
  auto os = open_out(path);
  os.write("DPM1", 4);
  put_u32(os, static_cast<std::uint32_t>(w));
  put_u32(os, static_cast<std::uint32_t>(h));
  for (double v : values) put_f32(os, v);
  finish(os, path);
}
}  // namespace

void write_depth(const fs::path& path, const DepthImage& image) {
  write_grid(path, image.width, image.height, image.depth);
}

void write_sdf(const fs::path& path, const SignedDistanceField& sdf) {
  write_grid(path, sdf.width, sdf.height, sdf.values);
}

DepthImage read_depth(const fs::path& path) {
  auto is = open_in(path);
  expect_magic(is, "DPM1", path);
  const std::uint32_t w = get_u32(is, path), h = get_u32(is, path);
  if (w == 0 || h == 0 || w > 16384 || h > 16384) throw ValidationError(path.string() + ": implausible image size");
  DepthImage img(static_cast<int>(w), static_cast<int>(h));
  for (auto& d : img.depth) {
    d = get_f32(is, path);
    if (d != DepthImage::kBackground && !(d > 0.0))
      throw ValidationError(path.string() + ": depth values must be positive or -1");
  }
  return img;
}

DepthImage quantize(const DepthImage& image) {
  DepthImage out = image;
  for (auto& d : out.depth) d = static_cast<float>(d);
  return out;
}

void write_blob(const fs::path& path, std::span<const double> values) {
  auto os = open_out(path);
  os.write("WTS1", 4);
  for (double v : values) put_f32(os, v);
  finish(os, path);
}

std::vector<double> read_blob(const fs::path& path, std::size_t expected) {
  auto is = open_in(path);
  expect_magic(is, "WTS1", path);
  std::vector<double> out(expected);
  for (auto& v : out) v = get_f32(is, path);
  if (is.peek() != std::char_traits<char>::eof()) throw ValidationError(path.string() + ": trailing data");
  return out;
}

void save_subspace(const fs::path& path, const SubspaceModel& model) {
  const fs::path blob = blob_path(path);
  json j;
  j["d"] = model.dim();
  j["k"] = model.retained_dim();
  j["dims"] = model.grid_dims;
  j["category_ids"] = model.category_ids;
  j["sign_convention"] = "first-nonzero-positive";
  j["weights_file"] = blob.filename().string();
  write_json(path, j);

  std::vector<double> values(model.basis.data(), model.basis.data() + model.basis.size());
  for (const auto& m : model.category_means) values.insert(values.end(), m.data(), m.data() + m.size());
  write_blob(blob, values);
}

SubspaceModel load_subspace(const fs::path& path) {
  const json j = read_json(path);
  SubspaceModel model;
  try {
    const int d = j.at("d").get<int>(), k = j.at("k").get<int>();
    model.grid_dims = j.at("dims").get<std::array<int, 3>>();
    model.category_ids = j.at("category_ids").get<std::vector<int>>();
    if (d <= 0 || k < 0 || d != model.grid_dims[0] * model.grid_dims[1] * model.grid_dims[2])
      throw ValidationError(path.string() + ": inconsistent subspace dimensions");
    const fs::path blob = path.parent_path() / j.value("weights_file", blob_path(path).filename().string());
    const std::size_t n_means = model.category_ids.size();
    const std::vector<double> values = read_blob(blob, static_cast<std::size_t>(d) * (k + n_means));
    model.basis = Eigen::Map<const Eigen::MatrixXd>(values.data(), d, k);
    for (std::size_t i = 0; i < n_means; ++i)
      model.category_means.push_back(
          Eigen::Map<const Eigen::VectorXd>(values.data() + static_cast<std::size_t>(d) * (k + i), d));
  } catch (const json::exception& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
  return model;
}

void save_network(const fs::path& path, const SavedNetwork& net) {
  const fs::path blob = blob_path(path);
  json j;
  j["config"] = config_to_json(net.config);
  json shapes = json::array();
  for (const auto& l : net.weights.layers) shapes.push_back({l.weight.rows(), l.weight.cols()});
  j["layer_shapes"] = shapes;
  j["seed"] = net.seed;
  j["epochs"] = net.loss_trace.size();
  j["loss_trace"] = net.loss_trace;
  j["weights_file"] = blob.filename().string();
  write_json(path, j);

  std::vector<double> values;
  values.reserve(net.weights.parameter_count());
  for (const auto& l : net.weights.layers) {
    values.insert(values.end(), l.weight.data(), l.weight.data() + l.weight.size());
    values.insert(values.end(), l.bias.data(), l.bias.data() + l.bias.size());
  }
  write_blob(blob, values);
}

SavedNetwork load_network(const fs::path& path) {
  const json j = read_json(path);
  SavedNetwork net;
  try {
    net.config = config_from_json(j.at("config"));
    net.seed = j.value("seed", std::uint64_t{0});
    net.loss_trace = j.value("loss_trace", std::vector<double>{});
    net.weights = NetworkWeights::zeros(net.config);
    const auto shapes = j.at("layer_shapes");
    if (shapes.size() != net.weights.layers.size()) throw ValidationError(path.string() + ": layer count mismatch");
    for (std::size_t l = 0; l < shapes.size(); ++l) {
      if (shapes[l][0].get<Eigen::Index>() != net.weights.layers[l].weight.rows() ||
          shapes[l][1].get<Eigen::Index>() != net.weights.layers[l].weight.cols())
        throw ValidationError(path.string() + ": layer shape does not match config");
    }
    const fs::path blob = path.parent_path() / j.value("weights_file", blob_path(path).filename().string());
    const std::vector<double> values = read_blob(blob, net.weights.parameter_count());
    std::size_t o = 0;
    for (auto& l : net.weights.layers) {
      l.weight = Eigen::Map<const Eigen::MatrixXd>(values.data() + o, l.weight.rows(), l.weight.cols());
      o += static_cast<std::size_t>(l.weight.size());
      l.bias = Eigen::Map<const Eigen::VectorXd>(values.data() + o, l.bias.size());
      o += static_cast<std::size_t>(l.bias.size());
    }
  } catch (const json::exception& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
  return net;
}

}  // namespace posepost::io

namespace posepost {

nlohmann::json config_to_json(const NetworkConfig& cfg) {
  return {
      {"input_side", cfg.input_side},     {"hidden_sizes", cfg.hidden_sizes},
      {"components", cfg.components},     {"shape_dim", cfg.shape_dim},
      {"n_categories", cfg.n_categories}, {"lambda_pose", cfg.lambda_pose},
      {"lambda_shape", cfg.lambda_shape}, {"lambda_class", cfg.lambda_class},
      {"mode", to_string(cfg.mode)},      {"elu_alpha", cfg.elu_alpha},
      {"var_epsilon", cfg.var_epsilon},   {"depth_center", cfg.depth_center},
      {"epochs", cfg.epochs},             {"batch_size", cfg.batch_size},
      {"learning_rate", cfg.learning_rate}, {"beta1", cfg.beta1},
      {"beta2", cfg.beta2},               {"adam_epsilon", cfg.adam_epsilon},
  };
}

NetworkConfig config_from_json(const nlohmann::json& j) {
  NetworkConfig cfg;
  try {
    cfg.input_side = j.value("input_side", cfg.input_side);
    cfg.hidden_sizes = j.value("hidden_sizes", cfg.hidden_sizes);
    cfg.components = j.value("components", cfg.components);
    cfg.shape_dim = j.value("shape_dim", cfg.shape_dim);
    cfg.n_categories = j.value("n_categories", cfg.n_categories);
    cfg.lambda_pose = j.value("lambda_pose", cfg.lambda_pose);
    cfg.lambda_shape = j.value("lambda_shape", cfg.lambda_shape);
    cfg.lambda_class = j.value("lambda_class", cfg.lambda_class);
    cfg.mode = head_mode_from_string(j.value("mode", to_string(cfg.mode)));
    cfg.elu_alpha = j.value("elu_alpha", cfg.elu_alpha);
    cfg.var_epsilon = j.value("var_epsilon", cfg.var_epsilon);
    cfg.depth_center = j.value("depth_center", cfg.depth_center);
    cfg.epochs = j.value("epochs", cfg.epochs);
    cfg.batch_size = j.value("batch_size", cfg.batch_size);
    cfg.learning_rate = j.value("learning_rate", cfg.learning_rate);
    cfg.beta1 = j.value("beta1", cfg.beta1);
    cfg.beta2 = j.value("beta2", cfg.beta2);
    cfg.adam_epsilon = j.value("adam_epsilon", cfg.adam_epsilon);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("network config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

nlohmann::json camera_to_json(const CameraIntrinsics& cam) {
  return {{"fx", cam.fx},       {"fy", cam.fy},         {"cx", cam.cx},
          {"cy", cam.cy},       {"width", cam.width},   {"height", cam.height},
          {"object_distance", cam.object_distance}};
}

CameraIntrinsics camera_from_json(const nlohmann::json& j) {
  CameraIntrinsics cam;
  try {
    cam.fx = j.value("fx", cam.fx);
    cam.fy = j.value("fy", cam.fy);
    cam.cx = j.value("cx", cam.cx);
    cam.cy = j.value("cy", cam.cy);
    cam.width = j.value("width", cam.width);
    cam.height = j.value("height", cam.height);
    cam.object_distance = j.value("object_distance", cam.object_distance);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("camera config: ") + e.what());
  }
  cam.validate();
  return cam;
}

}  // namespace posepost
