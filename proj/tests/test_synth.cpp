#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <vector>

#include "skysweep/skysweep.hpp"
#include "support/oracles.hpp"

using namespace skysweep;
namespace fs = std::filesystem;

namespace {

// Reads every regular file under root into a map keyed by relative path.
std::map<std::string, std::vector<char>> collect_tree(const fs::path& root) {
  std::map<std::string, std::vector<char>> out;
  for (const auto& entry : fs::recursive_directory_iterator(root)) {
    if (!entry.is_regular_file()) continue;
    std::ifstream is(entry.path(), std::ios::binary);
    std::vector<char> bytes((std::istreambuf_iterator<char>(is)),
                            std::istreambuf_iterator<char>());
    out.emplace(fs::relative(entry.path(), root).generic_string(), std::move(bytes));
  }
  return out;
}

ViewRecord constant_view(const CameraModel& cam, float depth) {
  ViewRecord v;
  v.cam = cam;
  v.image.width = cam.width;
  v.image.height = cam.height;
  v.image.rgb.assign(static_cast<std::size_t>(cam.width) * cam.height * 3, 0);
  for (std::size_t i = 0; i < v.image.rgb.size(); ++i)
    v.image.rgb[i] = static_cast<std::uint8_t>(i % 251);
  v.depth = Tensor<float>::full({cam.height, cam.width}, depth);
  v.fill_mask.assign(static_cast<std::size_t>(cam.width) * cam.height, 0);
  return v;
}

}  // namespace

TEST_CASE("flat scene samples an exact plane") {
  SceneConfig cfg;
  cfg.extent_x = 10;
  cfg.extent_y = 8;
  cfg.buildings = 0;
  cfg.terrain_amplitude = 0;
  SceneModel scene(cfg);
  REQUIRE(!scene.points().empty());
  for (const ColoredPoint& p : scene.points()) {
    CHECK(p.z == 0.0f);
    CHECK(p.x >= 0.0f);
    CHECK(p.x <= 10.0f);
    CHECK(p.y >= 0.0f);
    CHECK(p.y <= 8.0f);
  }
  CHECK(scene.max_elevation() == Catch::Approx(0.0).margin(1e-12));
}

TEST_CASE("scene construction is deterministic") {
  SceneConfig cfg;
  cfg.extent_x = 15;
  cfg.extent_y = 12;
  cfg.buildings = 3;
  cfg.seed = 123;
  SceneModel a(cfg);
  SceneModel b(cfg);
  REQUIRE(a.points().size() == b.points().size());
  CHECK(std::memcmp(a.points().data(), b.points().data(),
                    a.points().size() * sizeof(ColoredPoint)) == 0);
  cfg.seed = 124;
  SceneModel c(cfg);
  bool differs = c.points().size() != a.points().size();
  if (!differs)
    differs = std::memcmp(a.points().data(), c.points().data(),
                          a.points().size() * sizeof(ColoredPoint)) != 0;
  CHECK(differs);
}

TEST_CASE("a ten metre box sets the maximum elevation") {
  SceneConfig cfg;
  cfg.extent_x = 40;
  cfg.extent_y = 40;
  cfg.terrain_amplitude = 0;
  cfg.buildings = 1;
  cfg.building_min_height = 10;
  cfg.building_max_height = 10;
  SceneModel scene(cfg);
  REQUIRE(scene.boxes().size() == 1);
  CHECK(scene.max_elevation() == Catch::Approx(10.0).margin(1e-9));
  float zmax = 0;
  for (const ColoredPoint& p : scene.points()) zmax = std::max(zmax, p.z);
  CHECK(zmax == Catch::Approx(10.0).margin(1e-6));
}

TEST_CASE("flight plan arithmetic closed forms") {
  FlightConfig cfg;
  cfg.image_width = 5376;
  cfg.image_height = 768;
  cfg.flying_height = 537.6;
  cfg.gsd = 0.1;
  cfg.heading_overlap = 0.9;
  cfg.side_overlap = 0.8;
  cfg.strips = 2;
  cfg.images_per_strip = 12;
  FlightPlan plan = plan_flight(cfg);
  CHECK(plan.f == Catch::Approx(5376.0).margin(1e-12));
  CHECK(plan.footprint_x == Catch::Approx(537.6).margin(1e-9));
  CHECK(plan.dx == Catch::Approx(53.76).margin(1e-9));
  CHECK(plan.footprint_y == Catch::Approx(76.8).margin(1e-9));
  CHECK(plan.dy == Catch::Approx(15.36).margin(1e-9));

  CameraModel c00 = plan.camera(0, 0);
  CameraModel c01 = plan.camera(0, 1);
  CameraModel c10 = plan.camera(1, 0);
  CHECK(c00.x0 == Catch::Approx((5376 - 1) / 2.0));
  CHECK((c00.r - c01.r).cwiseAbs().maxCoeff() == 0.0);
  CHECK((c00.r - c10.r).cwiseAbs().maxCoeff() == 0.0);
  CHECK(c01.c.x() - c00.c.x() == Catch::Approx(53.76).margin(1e-9));
  CHECK(c01.c.y() == c00.c.y());
  CHECK(c10.c.y() - c00.c.y() == Catch::Approx(15.36).margin(1e-9));
  CHECK(c00.c.z() == Catch::Approx(537.6));
  CHECK_THROWS_AS(plan.camera(2, 0), contract_error);

  FlightConfig bad = cfg;
  bad.heading_overlap = 1.0;
  CHECK_THROWS_AS(plan_flight(bad), contract_error);
  bad = cfg;
  bad.gsd = 0;
  CHECK_THROWS_AS(plan_flight(bad), contract_error);
}

TEST_CASE("ninety percent heading overlap covers points at least nine deep") {
  FlightConfig cfg;
  cfg.image_width = 512;
  cfg.image_height = 256;
  cfg.flying_height = 64;
  cfg.gsd = 0.1;
  cfg.heading_overlap = 0.9;
  cfg.side_overlap = 0.8;
  cfg.strips = 1;
  cfg.images_per_strip = 12;
  FlightPlan plan = plan_flight(cfg);
  Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const double x = plan.x_start + rng.uniform(4.0, 7.0) * plan.dx;
    const Eigen::Vector3d pt(x, plan.y_start, 0.0);
    int seen = 0;
    for (int i = 0; i < cfg.images_per_strip; ++i) {
      Projection p;
      if (!plan.camera(0, i).try_project(pt, p)) continue;
      if (p.u >= 0 && p.u <= cfg.image_width - 1 && p.v >= 0 && p.v <= cfg.image_height - 1)
        ++seen;
    }
    CHECK(seen >= 9);
  }
}

TEST_CASE("rendering a flat scene gives exact uniform depth") {
  SceneConfig scfg;
  scfg.extent_x = 12;
  scfg.extent_y = 12;
  scfg.buildings = 0;
  scfg.terrain_amplitude = 0;
  scfg.grid = 0.05;
  SceneModel scene(scfg);
  CameraModel cam(5500, 31.5, 31.5, 64, 64, nadir_rotation(), {6, 6, 550});
  ViewRecord view = render_view(scene, cam);
  std::int64_t holes = 0;
  for (std::int64_t i = 0; i < view.depth.numel(); ++i) {
    const float d = view.depth.data()[i];
    if (d == 0.0f) {
      ++holes;
      continue;
    }
    CHECK(d == 550.0f);
  }
  CHECK(double(holes) / double(view.depth.numel()) < 0.001);
  CHECK(view.depth.data()[31 * 64 + 31] == 550.0f);
}

TEST_CASE("roofs occlude the ground underneath") {
  SceneConfig scfg;
  scfg.extent_x = 40;
  scfg.extent_y = 40;
  scfg.buildings = 1;
  scfg.terrain_amplitude = 0;
  scfg.building_min_height = 10;
  scfg.building_max_height = 10;
  scfg.grid = 0.05;
  SceneModel scene(scfg);
  REQUIRE(scene.boxes().size() == 1);
  const Box& box = scene.boxes()[0];

  CameraModel cam(640, 199.5, 199.5, 400, 400, nadir_rotation(), {20, 20, 64});
  ViewRecord view = render_view(scene, cam);

  // The pixel over the box centre sees the roof plane at 54 m.
  Projection at_roof = cam.project({0.5 * (box.x0 + box.x1), 0.5 * (box.y0 + box.y1), 10.0});
  const int cu = int(std::lround(at_roof.u));
  const int cv = int(std::lround(at_roof.v));
  REQUIRE(cu >= 0);
  REQUIRE(cu < 400);
  const float center_depth = view.depth.data()[cv * 400 + cu];
  CHECK(center_depth == Catch::Approx(54.0).margin(0.1));

  // Any ray crossing the roof plane well inside the footprint sees the roof,
  // never the ground behind it. Oblique rays entering through a side wall
  // below the roof are excluded by construction.
  std::int64_t inside = 0;
  for (int v = 0; v < 400; ++v)
    for (int u = 0; u < 400; ++u) {
      const Eigen::Vector3d at_plane = cam.unproject(u, v, 54.0);
      if (at_plane.x() < box.x0 + 0.5 || at_plane.x() > box.x1 - 0.5 ||
          at_plane.y() < box.y0 + 0.5 || at_plane.y() > box.y1 - 0.5)
        continue;
      ++inside;
      const float d = view.depth.data()[v * 400 + u];
      if (d > 0.0f) CHECK(d == Catch::Approx(54.0).margin(0.1));
    }
  CHECK(inside > 100);
}

TEST_CASE("neighbor renders are cross-view consistent") {
  FlightConfig fcfg;
  fcfg.image_width = 128;
  fcfg.image_height = 64;
  fcfg.flying_height = 64;
  fcfg.gsd = 0.1;
  fcfg.heading_overlap = 0.9;
  fcfg.side_overlap = 0.8;
  fcfg.strips = 1;
  fcfg.images_per_strip = 2;
  FlightPlan plan = plan_flight(fcfg);

  SceneConfig scfg;
  scfg.extent_x = plan.extent_x();
  scfg.extent_y = plan.extent_y();
  scfg.grid = 0.05;
  scfg.buildings = 2;
  scfg.terrain_amplitude = 0.3;
  scfg.seed = 21;
  SceneModel scene(scfg);

  ViewRecord a = render_view(scene, plan.camera(0, 0));
  ViewRecord b = render_view(scene, plan.camera(0, 1));

  std::int64_t tested = 0, consistent = 0, valid = 0;
  for (int v = 0; v < 64; ++v)
    for (int u = 0; u < 128; ++u) {
      const float da = a.depth.data()[v * 128 + u];
      if (da > 0.0f) ++valid;
      if (da <= 0.0f) continue;
      const Eigen::Vector3d x = a.cam.unproject(u, v, da);
      Projection p;
      if (!b.cam.try_project(x, p)) continue;
      const int bu = int(std::lround(p.u));
      const int bv = int(std::lround(p.v));
      if (bu < 0 || bu >= 128 || bv < 0 || bv >= 64) continue;
      const float db = b.depth.data()[bv * 128 + bu];
      if (db <= 0.0f) continue;
      ++tested;
      if (std::abs(db - p.depth) <= 2 * scfg.grid) ++consistent;
    }
  REQUIRE(tested > 4000);
  CHECK(double(valid) / (128.0 * 64.0) >= 0.999);
  CHECK(double(consistent) / double(tested) >= 0.99);
}

TEST_CASE("disparity closed forms") {
  CameraModel a(1000, 50, 50, 100, 100, nadir_rotation(), {0, 0, 100});
  CameraModel b(1000, 50, 50, 100, 100, nadir_rotation(), {10, 0, 100});
  Tensor<float> depth = Tensor<float>::full({4, 5}, 100.0f);
  Tensor<float> disp = disparity_from_depth(depth, a, b);
  for (std::int64_t i = 0; i < disp.numel(); ++i)
    CHECK(disp.data()[i] == Catch::Approx(100.0f).margin(1e-4));

  Tensor<float> far = Tensor<float>::full({4, 5}, 1e9f);
  Tensor<float> disp_far = disparity_from_depth(far, a, b);
  for (std::int64_t i = 0; i < disp_far.numel(); ++i)
    CHECK(disp_far.data()[i] == Catch::Approx(0.0f).margin(1e-4));

  depth.data()[3] = 0.0f;  // invalid propagates as invalid
  CHECK(disparity_from_depth(depth, a, b).data()[3] == 0.0f);

  CameraModel rot(1000, 50, 50, 100, 100, rotation_from_angles(0.1, 0, 0), {10, 0, 100});
  CHECK_THROWS_AS(disparity_from_depth(depth, a, rot), contract_error);
  CameraModel diag(1000, 50, 50, 100, 100, nadir_rotation(), {10, 5, 100});
  CHECK_THROWS_AS(disparity_from_depth(depth, a, diag), contract_error);
  CHECK_THROWS_AS(disparity_from_depth(depth, a, a), contract_error);
}

TEST_CASE("unit assembly counts and names") {
  auto grid_of = [](int strips, int per) {
    std::vector<std::vector<ViewRecord>> grid(strips);
    for (int s = 0; s < strips; ++s) grid[s].resize(per);
    return grid;
  };
  CHECK(make_units(grid_of(1, 3), 3).size() == 1);
  CHECK(make_units(grid_of(3, 3), 5).size() == 1);
  CHECK(make_units(grid_of(2, 5), 3).size() == 6);
  CHECK(make_units(grid_of(2, 5), 5).empty());
  CHECK_THROWS_AS(make_units(grid_of(2, 5), 4), contract_error);

  std::vector<MultiViewUnit> units = make_units(grid_of(3, 3), 5);
  CHECK(units[0].strip == 1);
  CHECK(units[0].index == 1);
  CHECK(units[0].views.size() == 5);
  CHECK(units[0].name == "002_2");
  CHECK(unit_name(5, 7) == "006_8");
}

TEST_CASE("cropping a full-overlap unit tiles the frame") {
  CameraModel cam(5500, (1536 - 1) / 2.0, (768 - 1) / 2.0, 1536, 768, nadir_rotation(),
                  {0, 0, 550});
  MultiViewUnit unit;
  unit.n = 3;
  unit.strip = 0;
  unit.index = 1;
  unit.name = unit_name(0, 1);
  ViewRecord view = constant_view(cam, 550.0f);
  unit.views = {view, view, view};

  std::vector<CroppedTile> tiles = crop_units(unit, 768, 384, 0.3);
  REQUIRE(tiles.size() == 4);
  for (std::size_t i = 0; i < tiles.size(); ++i) {
    const CroppedTile& tile = tiles[i];
    CHECK(tile.unit == "001_2");
    CHECK(tile.tile == int(i));
    REQUIRE(tile.images.size() == 3);
    REQUIRE(tile.cams.size() == 3);
    REQUIRE(tile.plans.size() == 3);
    for (int v = 0; v < 3; ++v) {
      CHECK(tile.images[v].width == 768);
      CHECK(tile.images[v].height == 384);
      CHECK(tile.depths[v].shape() == Shape{384, 768});
      // Identical views: every crop keeps the same offset, and the plan
      // brackets the constant depth.
      const DepthPlan& plan = tile.plans[v];
      CHECK(plan.d_min <= 550.0);
      CHECK(plan.d_min + (plan.count - 1) * plan.interval >= 550.0);
    }
    // Principal point shift: projection of a fixed point moves by exactly
    // the integer crop offset.
    const Eigen::Vector3d probe(3.0, -2.0, 0.0);
    Projection orig = cam.project(probe);
    Projection crop = tiles[i].cams[1].project(probe);
    const double ox = orig.u - crop.u;
    const double oy = orig.v - crop.v;
    CHECK(ox == Catch::Approx(std::round(ox)).margin(1e-9));
    CHECK(oy == Catch::Approx(std::round(oy)).margin(1e-9));
    CHECK(crop.depth == Catch::Approx(orig.depth).margin(1e-12));
  }

  CHECK_THROWS_AS(crop_units(unit, 767, 384, 0.3), contract_error);
  CHECK_THROWS_AS(crop_units(unit, 2000, 384, 0.3), contract_error);
}

TEST_CASE("depth png codec closed forms") {
  CHECK(depth_to_u16(550.0) == 55000);
  CHECK(depth_to_u16(0.0) == 0);
  CHECK(u16_to_depth(55000) == Catch::Approx(550.0));
  CHECK_THROWS_AS(depth_to_u16(700.0), format_error);
  CHECK(depth_to_u16(-1.0) == 0);  // non-positive collapses to the invalid code

  fs::path dir("tmp_depthpng");
  fs::remove_all(dir);
  fs::create_directories(dir);
  Rng rng(77);
  Tensor<float> depth = Tensor<float>::uninit({20, 30});
  for (std::int64_t i = 0; i < depth.numel(); ++i)
    depth.data()[i] = float(rng.uniform(1.0, 600.0));
  depth.data()[5] = 0.0f;
  const std::string path = (dir / "d.png").string();
  write_depth_png(path, depth);
  Tensor<float> back = read_depth_png(path);
  REQUIRE(back.shape() == depth.shape());
  for (std::int64_t i = 0; i < depth.numel(); ++i) {
    if (depth.data()[i] == 0.0f)
      CHECK(back.data()[i] == 0.0f);
    else
      // Half a centimeter of quantization plus one float32 rounding of v/100.
      CHECK(std::abs(back.data()[i] - depth.data()[i]) <= 0.005f + 1e-4f);
  }
  // Re-encoding the decoded raster is lossless.
  const std::string path2 = (dir / "d2.png").string();
  write_depth_png(path2, back);
  Tensor<float> back2 = read_depth_png(path2);
  CHECK(std::memcmp(back.data(), back2.data(), sizeof(float) * back.numel()) == 0);
  fs::remove_all(dir);
}

TEST_CASE("image tensor conversion normalizes to unit range") {
  ImageU8 img;
  img.width = 2;
  img.height = 1;
  img.rgb = {255, 0, 51, 102, 153, 204};
  Tensor<float> t = image_to_tensor(img);
  REQUIRE(t.shape() == Shape{3, 1, 2});
  CHECK(t.data()[0] == Catch::Approx(1.0f));       // r(0)
  CHECK(t.data()[1] == Catch::Approx(0.4f));       // r(1)
  CHECK(t.data()[2] == Catch::Approx(0.0f));       // g(0)
  CHECK(t.data()[3] == Catch::Approx(0.6f));       // g(1)
  CHECK(t.data()[4] == Catch::Approx(0.2f));       // b(0)
  CHECK(t.data()[5] == Catch::Approx(0.8f));       // b(1)
}

TEST_CASE("dataset generation writes a loadable consistent layout") {
  DatasetConfig cfg;
  cfg.flight.image_width = 128;
  cfg.flight.image_height = 64;
  cfg.flight.flying_height = 64;
  cfg.flight.gsd = 0.1;
  cfg.flight.heading_overlap = 0.9;
  cfg.flight.side_overlap = 0.8;
  cfg.flight.strips = 2;
  cfg.flight.images_per_strip = 4;
  cfg.flight.margin = 2;
  cfg.buildings = 2;
  cfg.terrain_amplitude = 0.3;
  cfg.grid = 0.05;
  cfg.interval = 0.3;
  cfg.n = 3;
  cfg.tile_width = 64;
  cfg.tile_height = 32;
  cfg.seed = 7;

  fs::path dir("tmp_dataset");
  fs::remove_all(dir);
  GenSummary summary = generate_dataset(cfg, dir.string());
  CHECK(summary.views == 8);
  CHECK(summary.units == 4);
  CHECK(summary.test_tiles == 0);  // interior of 2 gives an empty test area
  CHECK(summary.train_tiles >= 4);

  DatasetIndex idx = read_dataset_index(dir.string());
  CHECK(idx.n == 3);
  CHECK(idx.interval == Catch::Approx(0.3).margin(1e-12));
  CHECK(int(idx.tiles.size()) == summary.train_tiles + summary.test_tiles);

  for (const TileRef& ref : idx.tiles) {
    for (int v = 0; v < 3; ++v) {
      const std::string vid = std::to_string(v);
      CHECK(fs::exists(dir / "images" / ref.unit / vid / (ref.stem + ".png")));
      CHECK(fs::exists(dir / "depths" / ref.unit / vid / (ref.stem + ".png")));
      CHECK(fs::exists(dir / "cams" / ref.unit / vid / (ref.stem + ".txt")));
      CHECK(fs::exists(dir / "masks" / ref.unit / vid / (ref.stem + ".png")));
    }
  }
  // One disparity map per consecutive same-strip pair.
  CHECK(fs::exists(dir / "disparities" / "001_1.png"));
  CHECK(fs::exists(dir / "disparities" / "002_3.png"));

  LoadedTile tile = load_tile(idx, idx.tiles[0], 3);
  REQUIRE(tile.images.size() == 3);
  CHECK(tile.images[0].shape() == Shape{3, 32, 64});
  CHECK(tile.ref_depth.shape() == Shape{32, 64});
  for (std::int64_t i = 0; i < tile.images[0].numel(); ++i) {
    CHECK(tile.images[0].data()[i] >= 0.0f);
    CHECK(tile.images[0].data()[i] <= 1.0f);
  }
  const double d_max = tile.ref_plan.d_min + (tile.ref_plan.count - 1) * tile.ref_plan.interval;
  for (std::int64_t i = 0; i < tile.ref_depth.numel(); ++i) {
    const float d = tile.ref_depth.data()[i];
    if (d == 0.0f) continue;
    CHECK(d >= tile.ref_plan.d_min - 0.01);
    CHECK(d <= d_max + 0.01);
  }
  CHECK_THROWS_AS(load_tile(idx, idx.tiles[0], 5), contract_error);

  SECTION("generation is byte-for-byte deterministic") {
    fs::path dir2("tmp_dataset_2");
    fs::remove_all(dir2);
    generate_dataset(cfg, dir2.string());
    auto t1 = collect_tree(dir);
    auto t2 = collect_tree(dir2);
    REQUIRE(t1.size() == t2.size());
    auto it1 = t1.begin();
    auto it2 = t2.begin();
    for (; it1 != t1.end(); ++it1, ++it2) {
      CHECK(it1->first == it2->first);
      CHECK(it1->second == it2->second);
    }
    fs::remove_all(dir2);
  }

  SECTION("manifest errors are format errors") {
    CHECK_THROWS_AS(read_dataset_index("tmp_does_not_exist"), format_error);
    fs::path broken("tmp_dataset_broken");
    fs::remove_all(broken);
    fs::create_directories(broken);
    std::ofstream((broken / "manifest.txt").string()) << "something else\n";
    CHECK_THROWS_AS(read_dataset_index(broken.string()), format_error);
    fs::remove_all(broken);
  }
  fs::remove_all(dir);
}

TEST_CASE("split assigns the last quarter of each strip to test") {
  DatasetConfig cfg;
  cfg.flight.image_width = 128;
  cfg.flight.image_height = 64;
  cfg.flight.flying_height = 64;
  cfg.flight.gsd = 0.1;
  cfg.flight.heading_overlap = 0.9;
  cfg.flight.side_overlap = 0.8;
  cfg.flight.strips = 1;
  cfg.flight.images_per_strip = 10;
  cfg.flight.margin = 2;
  cfg.buildings = 2;
  cfg.grid = 0.05;
  cfg.n = 3;
  cfg.tile_width = 64;
  cfg.tile_height = 32;

  fs::path dir("tmp_dataset_split");
  fs::remove_all(dir);
  GenSummary summary = generate_dataset(cfg, dir.string());
  CHECK(summary.units == 8);

  DatasetIndex idx = read_dataset_index(dir.string());
  std::map<std::string, bool> unit_split;
  for (const TileRef& ref : idx.tiles) unit_split[ref.unit] = ref.test;
  int train_units = 0, test_units = 0;
  for (const auto& [unit, test] : unit_split) (test ? test_units : train_units)++;
  CHECK(train_units == 6);
  CHECK(test_units == 2);  // three-to-one by unit
  fs::remove_all(dir);
}
