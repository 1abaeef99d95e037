#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "skysweep/common/errors.hpp"
#include "skysweep/io/camera_txt.hpp"
#include "skysweep/io/png_io.hpp"
#include "skysweep/synth/flight.hpp"
#include "skysweep/synth/scene.hpp"
#include "skysweep/synth/units.hpp"

namespace skysweep {

struct DatasetConfig {
  FlightConfig flight;
  int buildings = 12;
  double terrain_amplitude = 0.3;
  double building_min_height = 2.0;
  double building_max_height = 6.0;
  double grid = 0.05;  // surface cell size; keep <= gsd/2 for hole-free depth
  double interval = 0.3;
  int n = 3;
  int tile_width = 256;
  int tile_height = 128;
  std::uint64_t seed = 7;
};

struct GenSummary {
  int views = 0;
  int units = 0;
  int train_tiles = 0;
  int test_tiles = 0;
};

namespace detail {

inline std::string tile_stem(int tile) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%03d", tile);
  return buf;
}

inline void write_mask_png(const std::string& path, int w, int h,
                           const std::vector<std::uint8_t>& mask) {
  ImageU8 img;
  img.width = w;
  img.height = h;
  img.rgb.resize(static_cast<std::size_t>(w) * h * 3);
  for (std::size_t i = 0; i < mask.size(); ++i) {
    const std::uint8_t v = mask[i] ? 255 : 0;
    img.rgb[i * 3 + 0] = img.rgb[i * 3 + 1] = img.rgb[i * 3 + 2] = v;
  }
  write_png_rgb8(path, img);
}

}  // namespace detail

// End-to-end generation: plan the flight, build the scene to fit it, render
// every view, cut multi-view units into tiles and write the dataset layout:
//   root/{images,depths,cams,masks}/<unit>/<view-id>/<tile>.{png,txt}
//   root/disparities/<strip>_<image>.png   (same-strip pair, ID i vs i+1)
//   root/manifest.txt
// The split assigns the last quarter of each strip's interior images to the
// test area (roughly 3:1 train:test).
inline GenSummary generate_dataset(const DatasetConfig& cfg, const std::string& root) {
  namespace fs = std::filesystem;
  if (cfg.n != 3 && cfg.n != 5) throw contract_error("generate_dataset: N must be 3 or 5");
  if (!(cfg.interval > 0)) throw contract_error("generate_dataset: interval must be positive");
  const FlightPlan plan = plan_flight(cfg.flight);

  SceneConfig scfg;
  scfg.extent_x = plan.extent_x();
  scfg.extent_y = plan.extent_y();
  scfg.grid = cfg.grid;
  scfg.terrain_amplitude = cfg.terrain_amplitude;
  scfg.buildings = cfg.buildings;
  scfg.building_min_height = cfg.building_min_height;
  scfg.building_max_height = cfg.building_max_height;
  scfg.seed = cfg.seed;
  const SceneModel scene(scfg);
  if (!(cfg.flight.flying_height > scene.max_elevation()))
    throw contract_error("generate_dataset: flying height " +
                         std::to_string(cfg.flight.flying_height) +
                         " not above max elevation " + std::to_string(scene.max_elevation()));

  GenSummary summary;
  std::vector<std::vector<ViewRecord>> grid(static_cast<std::size_t>(plan.strips));
  for (int s = 0; s < plan.strips; ++s) {
    for (int i = 0; i < plan.images_per_strip; ++i) {
      ViewRecord v = render_view(scene, plan.camera(s, i));
      v.strip = s;
      v.index = i;
      grid[static_cast<std::size_t>(s)].push_back(std::move(v));
      ++summary.views;
    }
  }

  fs::create_directories(root);
  for (const char* sub : {"images", "depths", "cams", "masks", "disparities"})
    fs::create_directories(fs::path(root) / sub);

  // Full-view disparity maps for consecutive same-strip pairs, encoded like
  // depth (value = round(px * 100)).
  for (int s = 0; s < plan.strips; ++s) {
    for (int i = 0; i + 1 < plan.images_per_strip; ++i) {
      const ViewRecord& a = grid[s][i];
      const ViewRecord& b = grid[s][i + 1];
      const Tensor<float> disp = disparity_from_depth(a.depth, a.cam, b.cam);
      std::vector<std::uint16_t> enc(static_cast<std::size_t>(disp.numel()));
      const float* d = disp.data();
      for (std::size_t k = 0; k < enc.size(); ++k)
        enc[k] = d[k] > 0 ? static_cast<std::uint16_t>(
                                std::min(std::lround(d[k] * 100.0), 65535l))
                          : 0;
      write_png_gray16((fs::path(root) / "disparities" / (unit_name(s, i) + ".png")).string(),
                       a.cam.width, a.cam.height, enc);
    }
  }

  std::vector<MultiViewUnit> units = make_units(grid, cfg.n);
  std::ostringstream manifest;
  manifest << "skysweep-dataset 1\n";
  manifest << "n " << cfg.n << "\n";
  char ibuf[32];
  std::snprintf(ibuf, sizeof ibuf, "%.12g", cfg.interval);
  manifest << "interval " << ibuf << "\n";

  for (const MultiViewUnit& unit : units) {
    const int interior = plan.images_per_strip - 2;
    const int test_count = interior / 4;
    const bool is_test = unit.index > plan.images_per_strip - 2 - test_count;
    const std::vector<CroppedTile> tiles = crop_units(unit, cfg.tile_width, cfg.tile_height,
                                                      cfg.interval);
    if (tiles.empty()) continue;
    ++summary.units;
    for (const CroppedTile& tile : tiles) {
      const std::string stem = detail::tile_stem(tile.tile);
      for (std::size_t v = 0; v < tile.images.size(); ++v) {
        const std::string vid = std::to_string(v);
        for (const char* sub : {"images", "depths", "cams", "masks"})
          fs::create_directories(fs::path(root) / sub / unit.name / vid);
        write_png_rgb8((fs::path(root) / "images" / unit.name / vid / (stem + ".png")).string(),
                       tile.images[v]);
        write_depth_png((fs::path(root) / "depths" / unit.name / vid / (stem + ".png")).string(),
                        tile.depths[v]);
        write_camera_txt((fs::path(root) / "cams" / unit.name / vid / (stem + ".txt")).string(),
                         tile.cams[v], tile.plans[v]);
        detail::write_mask_png(
            (fs::path(root) / "masks" / unit.name / vid / (stem + ".png")).string(),
            tile.cams[v].width, tile.cams[v].height, tile.fill_masks[v]);
      }
      manifest << "tile " << unit.name << " " << stem << " " << (is_test ? "test" : "train")
               << "\n";
      if (is_test)
        ++summary.test_tiles;
      else
        ++summary.train_tiles;
    }
  }
  std::ofstream mf((fs::path(root) / "manifest.txt").string());
  if (!mf) throw format_error("generate_dataset: cannot write manifest under " + root);
  mf << manifest.str();
  return summary;
}

struct TileRef {
  std::string unit;
  std::string stem;
  bool test = false;
};

struct DatasetIndex {
  std::string root;
  int n = 0;
  double interval = 0;
  std::vector<TileRef> tiles;
};

inline DatasetIndex read_dataset_index(const std::string& root) {
  namespace fs = std::filesystem;
  const std::string path = (fs::path(root) / "manifest.txt").string();
  std::ifstream is(path);
  if (!is) throw format_error("read_dataset_index: cannot open " + path);
  DatasetIndex idx;
  idx.root = root;
  std::string line;
  if (!std::getline(is, line) || line != "skysweep-dataset 1")
    throw format_error("read_dataset_index: " + path + ": bad header");
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string key;
    ss >> key;
    if (key == "n") {
      ss >> idx.n;
    } else if (key == "interval") {
      ss >> idx.interval;
    } else if (key == "tile") {
      TileRef t;
      std::string split;
      ss >> t.unit >> t.stem >> split;
      if (split != "train" && split != "test")
        throw format_error("read_dataset_index: " + path + ": bad split '" + split + "'");
      t.test = split == "test";
      idx.tiles.push_back(std::move(t));
    } else {
      throw format_error("read_dataset_index: " + path + ": unknown key '" + key + "'");
    }
    if (!ss) throw format_error("read_dataset_index: " + path + ": malformed line: " + line);
  }
  if (idx.n != 3 && idx.n != 5)
    throw format_error("read_dataset_index: " + path + ": n must be 3 or 5");
  if (!(idx.interval > 0))
    throw format_error("read_dataset_index: " + path + ": interval must be positive");
  return idx;
}

// One tile loaded for the network: images normalized to [0,1], cameras and
// the reference ground truth. Views are in file-ID order (reference = 1).
struct LoadedTile {
  std::vector<Tensor<float>> images;
  std::vector<CameraModel> cams;
  Tensor<float> ref_depth;
  DepthPlan ref_plan;
};

inline LoadedTile load_tile(const DatasetIndex& idx, const TileRef& ref, int n_views) {
  namespace fs = std::filesystem;
  if (n_views > idx.n)
    throw contract_error("load_tile: dataset stores " + std::to_string(idx.n) + " views, need " +
                         std::to_string(n_views));
  LoadedTile out;
  for (int v = 0; v < n_views; ++v) {
    const std::string vid = std::to_string(v);
    const std::string img_path =
        (fs::path(idx.root) / "images" / ref.unit / vid / (ref.stem + ".png")).string();
    const std::string cam_path =
        (fs::path(idx.root) / "cams" / ref.unit / vid / (ref.stem + ".txt")).string();
    out.images.push_back(image_to_tensor(read_png_rgb8(img_path)));
    const CameraFile cf = read_camera_txt(cam_path);
    out.cams.push_back(cf.cam);
    if (v == 1) {
      out.ref_plan = cf.plan;
      out.ref_depth = read_depth_png(
          (fs::path(idx.root) / "depths" / ref.unit / vid / (ref.stem + ".png")).string());
    }
  }
  return out;
}

}  // namespace skysweep
