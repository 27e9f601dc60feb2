#include "posepost/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "json.hpp"
#include "posepost/error.hpp"
#include "posepost/serialize.hpp"

namespace posepost {

std::string to_string(Family f) {
  switch (f) {
    case Family::Boxcar: return "boxcar";
    case Family::Winged: return "winged";
    case Family::Slab: return "slab";
    case Family::SymmetricTwin: return "symmetric-twin";
  }
  return "unknown";
}

Family family_from_string(const std::string& s) {
  if (s == "boxcar") return Family::Boxcar;
  if (s == "winged") return Family::Winged;
  if (s == "slab") return Family::Slab;
  if (s == "symmetric-twin") return Family::SymmetricTwin;
  throw ValidationError("unknown family '" + s + "'");
}

FamilyRanges default_ranges(Family f) {
  switch (f) {
    case Family::Boxcar:
      return {{"body_length", {0.75, 0.95}}, {"body_width", {0.38, 0.52}}, {"body_height", {0.18, 0.28}},
              {"cabin_length", {0.35, 0.5}},  {"cabin_height", {0.14, 0.22}}, {"cabin_offset", {0.08, 0.22}},
              {"wheel_size", {0.1, 0.16}}};
    case Family::Winged:
      return {{"fuselage_length", {0.8, 0.95}}, {"fuselage_width", {0.1, 0.16}}, {"wing_span", {0.7, 0.95}},
              {"wing_chord", {0.14, 0.24}},     {"wing_position", {0.5, 0.65}},  {"fin_height", {0.16, 0.26}},
              {"tail_span", {0.28, 0.4}}};
    case Family::Slab:
      return {{"plate_length", {0.7, 0.95}}, {"plate_width", {0.45, 0.7}}, {"plate_height", {0.1, 0.18}},
              {"riser_size", {0.18, 0.3}},    {"riser_height", {0.2, 0.35}}, {"foot_size", {0.1, 0.18}}};
    case Family::SymmetricTwin:
      return {{"base_length", {0.6, 0.9}},  {"base_depth", {0.3, 0.45}}, {"base_height", {0.14, 0.24}},
              {"tower_width", {0.12, 0.2}}, {"tower_depth", {0.12, 0.2}}, {"tower_height", {0.2, 0.35}}};
  }
  return {};
}

namespace {

class Builder {
 public:
  Builder(int side, const FamilyRanges& ranges, Rng& rng) : grid_(VoxelGrid::cube(side)), side_(side), ranges_(ranges), rng_(rng) {}

  double draw(const std::string& name) {
    const auto it = ranges_.find(name);
    if (it == ranges_.end()) throw ValidationError("missing family parameter '" + name + "'");
    const auto [lo, hi] = it->second;
    if (!(lo <= hi)) throw ValidationError("bad range for '" + name + "'");
    std::uniform_real_distribution<double> u(lo, hi);
    return u(rng_);
  }

  // Box given by its extent along each axis in unit-cube fractions [0, 1].
  void box(double x0, double x1, double y0, double y1, double z0, double z1) {
    auto lo = [&](double f) { return static_cast<int>(std::lround(std::clamp(f, 0.0, 1.0) * side_)); };
    int ix0 = lo(x0), ix1 = lo(x1), iy0 = lo(y0), iy1 = lo(y1), iz0 = lo(z0), iz1 = lo(z1);
    // Keep thin parts at least one voxel thick.
    auto widen = [&](int& a, int& b) {
      if (b <= a) {
        if (a >= side_) a = side_ - 1;
        b = a + 1;
      }
    };
    widen(ix0, ix1), widen(iy0, iy1), widen(iz0, iz1);
    grid_.fill_box(ix0, ix1, iy0, iy1, iz0, iz1);
  }

  // Box centered at (cx, ·, cz) with given sizes, spanning [top, bottom] vertically.
  void centered(double cx, double sx, double top, double bottom, double cz, double sz) {
    box(cx - sx / 2, cx + sx / 2, top, bottom, cz - sz / 2, cz + sz / 2);
  }

  VoxelGrid take() { return std::move(grid_); }
  VoxelGrid& grid() { return grid_; }

 private:
  VoxelGrid grid_;
  int side_;
  const FamilyRanges& ranges_;
  Rng& rng_;
};

void make_boxcar(Builder& b) {
  const double len = b.draw("body_length"), wid = b.draw("body_width"), h = b.draw("body_height");
  const double cab_len = b.draw("cabin_length") * len, cab_h = b.draw("cabin_height");
  const double cab_off = b.draw("cabin_offset") * len, wheel = b.draw("wheel_size");
  const double total = wheel * 0.6 + h + cab_h;
  const double ground = 0.5 + total / 2;
  const double body_bottom = ground - wheel * 0.6, body_top = body_bottom - h;
  b.centered(0.5, len, body_top, body_bottom, 0.5, wid);
  // Cabin sits toward the rear (-x) end.
  const double rear = 0.5 - len / 2;
  b.box(rear + cab_off, rear + cab_off + cab_len, body_top - cab_h, body_top, 0.5 - wid * 0.42, 0.5 + wid * 0.42);
  for (double sx : {-1.0, 1.0})
    for (double sz : {-1.0, 1.0})
      b.centered(0.5 + sx * len * 0.3, wheel, body_bottom, ground, 0.5 + sz * (wid / 2 - wheel * 0.3), wheel * 0.5);
}

void make_winged(Builder& b) {
  const double len = b.draw("fuselage_length"), fw = b.draw("fuselage_width");
  const double span = b.draw("wing_span"), chord = b.draw("wing_chord"), wpos = b.draw("wing_position");
  const double fin = b.draw("fin_height"), tail = b.draw("tail_span");
  const double tail_end = 0.5 - len / 2;  // tail at -z, nose at +z
  const double top = 0.5 - fw / 2, bottom = 0.5 + fw / 2;
  b.centered(0.5, fw, top, bottom, 0.5, len);
  // Low-mounted wings forward of center.
  const double wz = tail_end + wpos * len;
  b.centered(0.5, span, bottom - 0.07, bottom, wz, chord);
  // Vertical fin on top of the tail, horizontal stabilizer.
  b.box(0.5 - 0.035, 0.5 + 0.035, top - fin, top, tail_end, tail_end + 0.14);
  b.centered(0.5, tail, top, top + 0.06, tail_end + 0.06, 0.1);
}

void make_slab(Builder& b) {
  const double len = b.draw("plate_length"), wid = b.draw("plate_width"), h = b.draw("plate_height");
  const double riser = b.draw("riser_size"), riser_h = b.draw("riser_height"), foot = b.draw("foot_size");
  const double top = 0.5 - (h + riser_h) / 2 + riser_h;
  b.centered(0.5, len, top, top + h, 0.5, wid);
  // Riser on one corner, a single foot under the opposite corner.
  const double x0 = 0.5 - len / 2, z0 = 0.5 - wid / 2;
  b.box(x0, x0 + riser, top - riser_h, top, z0, z0 + riser * 0.8);
  b.box(0.5 + len / 2 - foot, 0.5 + len / 2, top + h, top + h + 0.1, 0.5 + wid / 2 - foot, 0.5 + wid / 2);
}

void make_twin(Builder& b) {
  const double len = b.draw("base_length"), depth = b.draw("base_depth"), h = b.draw("base_height");
  const double tw = b.draw("tower_width"), td = b.draw("tower_depth"), th = b.draw("tower_height");
  const double bottom = 0.5 + (h + th) / 2, top = bottom - h;
  b.centered(0.5, len, top, bottom, 0.5, depth);
  // One tower on the (+x, +z) corner; the half-turn copy supplies its twin.
  b.box(0.5 + len / 2 - tw, 0.5 + len / 2, top - th, top, 0.5 + depth / 2 - td, 0.5 + depth / 2);
  VoxelGrid& g = b.grid();
  const VoxelGrid turned = g.rotated_quarter(1, 2);
  for (int ix = 0; ix < g.nx(); ++ix)
    for (int iy = 0; iy < g.ny(); ++iy)
      for (int iz = 0; iz < g.nz(); ++iz)
        if (turned.at(ix, iy, iz)) g.set(ix, iy, iz, true);
}

}  // namespace

VoxelGrid generate_object(Family f, int grid_side, const FamilyRanges& ranges, Rng& rng) {
  if (grid_side < 4) throw ValidationError("grid side too small");
  FamilyRanges merged = default_ranges(f);
  for (const auto& [k, v] : ranges) merged[k] = v;
  Builder b(grid_side, merged, rng);
  switch (f) {
    case Family::Boxcar: make_boxcar(b); break;
    case Family::Winged: make_winged(b); break;
    case Family::Slab: make_slab(b); break;
    case Family::SymmetricTwin: make_twin(b); break;
  }
  return b.take();
}

RotationMatrix vertical_flip() { return Eigen::AngleAxisd(std::numbers::pi, Eigen::Vector3d::UnitY()).toRotationMatrix(); }

void SyntheticConfig::validate() const {
  if (families.empty()) throw ValidationError("at least one family is required");
  if (count < 1) throw ValidationError("count must be at least 1");
  if (views_per_object < 1) throw ValidationError("views_per_object must be at least 1");
  if (test_count < 0 || test_views_per_object < 0) throw ValidationError("test counts must be non-negative");
  if (grid_side != 8 && grid_side != 16 && grid_side != 32 && grid_side != 64)
    throw ValidationError("grid_side must be one of 8, 16, 32, 64");
  if (retained_dim < 1) throw ValidationError("retained_dim must be positive");
  camera.validate();
}

SyntheticConfig synthetic_config_from_json_text(const std::string& text) {
  using nlohmann::json;
  SyntheticConfig cfg;
  try {
    const json j = json::parse(text);
    if (j.contains("families")) {
      cfg.families.clear();
      for (const auto& f : j.at("families")) cfg.families.push_back(family_from_string(f.get<std::string>()));
    } else if (j.contains("family")) {
      cfg.families = {family_from_string(j.at("family").get<std::string>())};
    }
    cfg.count = j.value("count", cfg.count);
    cfg.views_per_object = j.value("views_per_object", cfg.views_per_object);
    cfg.test_count = j.value("test_count", cfg.test_count);
    cfg.test_views_per_object = j.value("test_views_per_object", cfg.test_views_per_object);
    cfg.grid_side = j.value("grid_side", cfg.grid_side);
    cfg.retained_dim = j.value("retained_dim", cfg.retained_dim);
    if (j.contains("camera")) cfg.camera = camera_from_json(j.at("camera"));
    if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("ranges")) {
      for (const auto& [name, params] : j.at("ranges").items()) {
        FamilyRanges r;
        for (const auto& [pname, range] : params.items()) {
          const auto v = range.get<std::vector<double>>();
          if (v.size() != 2) throw ValidationError("range '" + pname + "' must be [lo, hi]");
          r[pname] = {v[0], v[1]};
        }
        cfg.ranges[family_from_string(name)] = r;
      }
    }
  } catch (const json::exception& e) {
    throw ValidationError(std::string("dataset config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

}  // namespace posepost
