// skysweep: dataset generation, training, inference, evaluation, fusion and
// gradient self-checks behind one binary. Exit codes: 0 success, 2 usage or
// contract violation, 3 data/format problem, 4 numeric failure.

#include <cblas.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "skysweep/skysweep.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace skysweep;

namespace {

// Everything configurable from the JSON file, with its defaults. Paths are
// resolved relative to the config file's directory.
struct RunConfig {
  std::uint64_t seed = 7;
  std::string dataset_root = "data";
  std::string checkpoint = "rednet.ckpt";
  std::string train_log = "train_log.csv";
  int n = 3;
  int d = 0;  // 0: use each tile's stored depth plan
  bool quarter = false;
  double lr = 1e-3;
  double decay = 0.9;
  std::int64_t decay_period = 500;
  std::int64_t epochs = 3;
  std::int64_t max_iterations = 0;
  // dataset generation
  int image_width = 512;
  int image_height = 256;
  double flying_height = 64.0;
  double gsd = 0.1;
  double heading_overlap = 0.9;
  double side_overlap = 0.8;
  int strips = 4;
  int images_per_strip = 10;
  double margin = 2.0;
  int tile_width = 256;
  int tile_height = 128;
  double interval = 0.3;
  int buildings = 12;
  double terrain_amplitude = 0.3;
  double building_height_min = 2.0;
  double building_height_max = 6.0;
  double grid = 0.05;
};

std::string resolve(const fs::path& base, const std::string& p) {
  if (p.empty()) return p;
  const fs::path q(p);
  return q.is_absolute() ? q.string() : (base / q).lexically_normal().string();
}

RunConfig load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw format_error("config: cannot open " + path);
  json j;
  try {
    is >> j;
  } catch (const json::exception& e) {
    throw format_error("config: " + path + ": " + e.what());
  }
  if (!j.is_object()) throw format_error("config: " + path + ": top level must be an object");

  static const std::set<std::string> known = {
      "seed",          "dataset_root",    "checkpoint",        "train_log",
      "n",             "d",               "quarter",           "lr",
      "decay",         "decay_period",    "epochs",            "max_iterations",
      "image_width",   "image_height",    "flying_height",     "gsd",
      "heading_overlap", "side_overlap",  "strips",            "images_per_strip",
      "margin",        "tile_width",      "tile_height",       "interval",
      "buildings",     "terrain_amplitude", "building_height_min",
      "building_height_max", "grid"};
  for (const auto& [key, value] : j.items())
    if (!known.count(key)) throw format_error("config: " + path + ": unknown key '" + key + "'");

  RunConfig c;
  try {
    c.seed = j.value("seed", c.seed);
    c.dataset_root = j.value("dataset_root", c.dataset_root);
    c.checkpoint = j.value("checkpoint", c.checkpoint);
    c.train_log = j.value("train_log", c.train_log);
    c.n = j.value("n", c.n);
    c.d = j.value("d", c.d);
    c.quarter = j.value("quarter", c.quarter);
    c.lr = j.value("lr", c.lr);
    c.decay = j.value("decay", c.decay);
    c.decay_period = j.value("decay_period", c.decay_period);
    c.epochs = j.value("epochs", c.epochs);
    c.max_iterations = j.value("max_iterations", c.max_iterations);
    c.image_width = j.value("image_width", c.image_width);
    c.image_height = j.value("image_height", c.image_height);
    c.flying_height = j.value("flying_height", c.flying_height);
    c.gsd = j.value("gsd", c.gsd);
    c.heading_overlap = j.value("heading_overlap", c.heading_overlap);
    c.side_overlap = j.value("side_overlap", c.side_overlap);
    c.strips = j.value("strips", c.strips);
    c.images_per_strip = j.value("images_per_strip", c.images_per_strip);
    c.margin = j.value("margin", c.margin);
    c.tile_width = j.value("tile_width", c.tile_width);
    c.tile_height = j.value("tile_height", c.tile_height);
    c.interval = j.value("interval", c.interval);
    c.buildings = j.value("buildings", c.buildings);
    c.terrain_amplitude = j.value("terrain_amplitude", c.terrain_amplitude);
    c.building_height_min = j.value("building_height_min", c.building_height_min);
    c.building_height_max = j.value("building_height_max", c.building_height_max);
    c.grid = j.value("grid", c.grid);
  } catch (const json::exception& e) {
    throw format_error("config: " + path + ": " + e.what());
  }
  const fs::path base = fs::path(path).parent_path();
  c.dataset_root = resolve(base, c.dataset_root);
  c.checkpoint = resolve(base, c.checkpoint);
  c.train_log = resolve(base, c.train_log);
  return c;
}

DatasetConfig dataset_config(const RunConfig& c) {
  DatasetConfig d;
  d.flight.image_width = c.image_width;
  d.flight.image_height = c.image_height;
  d.flight.flying_height = c.flying_height;
  d.flight.gsd = c.gsd;
  d.flight.heading_overlap = c.heading_overlap;
  d.flight.side_overlap = c.side_overlap;
  d.flight.strips = c.strips;
  d.flight.images_per_strip = c.images_per_strip;
  d.flight.margin = c.margin;
  d.buildings = c.buildings;
  d.terrain_amplitude = c.terrain_amplitude;
  d.building_min_height = c.building_height_min;
  d.building_max_height = c.building_height_max;
  d.grid = c.grid;
  d.interval = c.interval;
  d.n = c.n;
  d.tile_width = c.tile_width;
  d.tile_height = c.tile_height;
  d.seed = c.seed;
  return d;
}

RedNetParams<float> load_net(const std::string& checkpoint, bool quarter) {
  RedNetParams<float> net(0, quarter);
  load_checkpoint(checkpoint, net.parameters());
  return net;
}

int cmd_gen(const RunConfig& cfg, const std::string& out) {
  const std::string root = out.empty() ? cfg.dataset_root : out;
  const GenSummary s = generate_dataset(dataset_config(cfg), root);
  std::printf("root %s\nviews %d\nunits %d\ntrain_tiles %d\ntest_tiles %d\n", root.c_str(),
              s.views, s.units, s.train_tiles, s.test_tiles);
  return 0;
}

int cmd_train(const RunConfig& cfg) {
  TrainConfig tc;
  tc.dataset_root = cfg.dataset_root;
  tc.checkpoint_path = cfg.checkpoint;
  tc.lr = cfg.lr;
  tc.decay = cfg.decay;
  tc.decay_period = cfg.decay_period;
  tc.epochs = cfg.epochs;
  tc.max_iterations = cfg.max_iterations;
  tc.n_views = cfg.n;
  tc.seed = cfg.seed;

  RedNetParams<float> net(cfg.seed, cfg.quarter);
  std::FILE* log = nullptr;
  if (!cfg.train_log.empty()) {
    log = std::fopen(cfg.train_log.c_str(), "wb");
    if (!log) throw format_error("train: cannot open log " + cfg.train_log);
  }
  TrainResult r;
  try {
    r = train_rednet(net, tc, log);
  } catch (...) {
    if (log) std::fclose(log);
    throw;
  }
  if (log) std::fclose(log);
  std::printf("iterations %lld\nfinal_loss %.8g\ncheckpoint %s\n",
              static_cast<long long>(r.iterations), r.final_loss, cfg.checkpoint.c_str());
  return 0;
}

int cmd_infer(const std::string& root, const std::string& checkpoint, const std::string& out,
              int d_override, int n_override, bool quarter, const std::string& split,
              const std::string& unit_filter, bool confidence) {
  if (split != "test" && split != "train" && split != "all")
    throw contract_error("infer: --split must be test, train, or all");
  RedNetParams<float> net = load_net(checkpoint, quarter);
  const DatasetIndex index = read_dataset_index(root);
  const int n = n_override > 0 ? n_override : index.n;

  int done = 0;
  for (const TileRef& ref : index.tiles) {
    if (split == "test" && !ref.test) continue;
    if (split == "train" && ref.test) continue;
    if (!unit_filter.empty() && ref.unit != unit_filter) continue;

    const LoadedTile tile = load_tile(index, ref, n);
    DepthPlan plan = tile.ref_plan;
    if (d_override > 0) {
      if (d_override < 2) throw contract_error("infer: --d must be >= 2");
      plan.count = d_override;
    }
    auto m = measure_run(unit_inputs<float>(tile), plan, net);
    const DepthInference inf = infer_depth(m.volume, plan);

    const fs::path depth_dir = fs::path(out) / "depths" / ref.unit / "1";
    const fs::path cam_dir = fs::path(out) / "cams" / ref.unit / "1";
    fs::create_directories(depth_dir);
    fs::create_directories(cam_dir);
    write_depth_png((depth_dir / (ref.stem + ".png")).string(), inf.depth);
    write_camera_txt((cam_dir / (ref.stem + ".txt")).string(), tile.cams[1], plan);
    if (confidence) {
      const fs::path conf_dir = fs::path(out) / "confidence" / ref.unit / "1";
      fs::create_directories(conf_dir);
      write_confidence((conf_dir / (ref.stem + ".conf")).string(), inf.confidence);
    }
    std::printf("infer %s/%s d %d time_s %.3f peak_working_bytes %lld volume_bytes %lld\n",
                ref.unit.c_str(), ref.stem.c_str(), plan.count, m.wall_seconds,
                static_cast<long long>(m.working_bytes), static_cast<long long>(m.volume_bytes));
    ++done;
  }
  if (done == 0) throw degenerate_error("infer: no tiles matched the selection");
  std::printf("tiles %d\n", done);
  return 0;
}

int cmd_eval(const std::string& pred_dir, const std::string& gt_root, double interval_override,
             const std::string& out) {
  const fs::path pred_depths = fs::path(pred_dir) / "depths";
  if (!fs::is_directory(pred_depths))
    throw format_error("eval: " + pred_depths.string() + " is not a directory");
  const DatasetIndex index = read_dataset_index(gt_root);
  const double interval = interval_override > 0 ? interval_override : index.interval;

  std::vector<fs::path> preds;
  for (const auto& e : fs::recursive_directory_iterator(pred_depths))
    if (e.is_regular_file() && e.path().extension() == ".png") preds.push_back(e.path());
  std::sort(preds.begin(), preds.end());
  if (preds.empty()) throw degenerate_error("eval: no prediction depth maps under " + pred_dir);

  MetricsCounts total;
  for (const fs::path& p : preds) {
    const fs::path rel = fs::relative(p, pred_depths);
    const fs::path gt_path = fs::path(gt_root) / "depths" / rel;
    if (!fs::exists(gt_path))
      throw format_error("eval: no ground truth for " + rel.string() + " under " + gt_root);
    const Tensor<float> pred = read_depth_png(p.string());
    const Tensor<float> gt = read_depth_png(gt_path.string());
    const MetricsCounts c = evaluate_depth(pred, gt, interval);
    std::printf("eval %s %s\n", rel.string().c_str(), metrics_csv_row(c).c_str());
    total.add(c);
  }
  const std::string row = metrics_csv_row(total);
  std::printf("%s\n%s\n", metrics_csv_header(), row.c_str());
  if (!out.empty()) {
    std::ofstream os(out, std::ios::binary);
    if (!os) throw format_error("eval: cannot open " + out);
    os << metrics_csv_header() << "\n" << row << "\n";
  }
  return 0;
}

int cmd_fuse(const std::string& dir, const std::string& images_root, const std::string& out) {
  const fs::path depths = fs::path(dir) / "depths";
  if (!fs::is_directory(depths))
    throw format_error("fuse: " + depths.string() + " is not a directory");
  const fs::path img_root = images_root.empty() ? fs::path(dir) : fs::path(images_root);

  std::vector<fs::path> files;
  for (const auto& e : fs::recursive_directory_iterator(depths))
    if (e.is_regular_file() && e.path().extension() == ".png") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  if (files.empty()) throw degenerate_error("fuse: no depth maps under " + dir);

  std::vector<CloudPoint> cloud;
  for (const fs::path& p : files) {
    const fs::path rel = fs::relative(p, depths);
    const fs::path cam_path = (fs::path(dir) / "cams" / rel).replace_extension(".txt");
    const fs::path img_path = img_root / "images" / rel;
    if (!fs::exists(cam_path)) throw format_error("fuse: missing camera " + cam_path.string());
    if (!fs::exists(img_path)) throw format_error("fuse: missing image " + img_path.string());
    const Tensor<float> depth = read_depth_png(p.string());
    const CameraFile cf = read_camera_txt(cam_path.string());
    const ImageU8 img = read_png_rgb8(img_path.string());
    fuse_view(depth, cf.cam, img, cloud);
  }
  write_point_cloud(out, cloud);
  std::printf("points %zu\ncloud %s\n", cloud.size(), out.c_str());
  return 0;
}

int cmd_gradcheck() {
  const std::vector<GradCheckRow> rows = gradcheck_suite();
  bool ok = true;
  std::printf("%-24s %-12s %-10s %-8s slots\n", "op", "max_rel_err", "threshold", "status");
  for (const GradCheckRow& r : rows) {
    ok = ok && r.pass();
    std::printf("%-24s %-12.3e %-10.0e %-8s %d\n", r.op.c_str(), r.max_rel_err, r.threshold,
                r.pass() ? "pass" : "FAIL", r.checked);
    if (!r.pass()) std::printf("  worst: %s\n", r.worst.c_str());
  }
  if (!ok) throw numeric_error("gradcheck: at least one operation failed");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  int threads = 1;
  if (const char* env = std::getenv("SKYSWEEP_THREADS")) {
    threads = std::atoi(env);
    if (threads < 1) threads = 1;
  }
  openblas_set_num_threads(threads);

  CLI::App app{"skysweep: recurrent plane-sweep multi-view stereo at desk scale"};
  app.require_subcommand(1);

  std::string config_path, out, checkpoint, split = "test", unit, images_root, input, gt_root;
  std::uint64_t seed = 0;
  bool have_seed = false, quarter = false, confidence = false;
  int d = 0, n = 0;
  double interval = 0;

  auto* gen = app.add_subcommand("gen", "generate a synthetic aerial dataset");
  gen->add_option("--config", config_path, "JSON config")->required();
  gen->add_option("--out", out, "output directory (default: config dataset_root)");
  gen->add_option("--seed", seed, "override config seed")->each([&](const std::string&) {
    have_seed = true;
  });
  gen->add_option("--n", n, "views per unit (3 or 5)");

  auto* train = app.add_subcommand("train", "train the network on a dataset");
  train->add_option("--config", config_path, "JSON config")->required();
  train->add_option("--checkpoint", checkpoint, "override checkpoint path");
  train->add_option("--seed", seed, "override config seed")->each([&](const std::string&) {
    have_seed = true;
  });
  train->add_option("--n", n, "views per unit (3 or 5)");
  train->add_flag("--quarter", quarter, "quarter-resolution regularization");

  auto* infer = app.add_subcommand("infer", "run depth inference over dataset tiles");
  infer->add_option("input", input, "dataset root")->required();
  infer->add_option("--checkpoint", checkpoint, "trained checkpoint")->required();
  infer->add_option("--out", out, "output directory")->required();
  infer->add_option("--d", d, "override depth sample count");
  infer->add_option("--n", n, "views per unit");
  infer->add_flag("--quarter", quarter, "checkpoint is quarter-resolution");
  infer->add_option("--split", split, "test|train|all (default test)");
  infer->add_option("--unit", unit, "restrict to one unit");
  infer->add_flag("--confidence", confidence, "also write confidence rasters");

  auto* eval = app.add_subcommand("eval", "compare predicted depths against ground truth");
  eval->add_option("pred", input, "prediction directory (from infer)")->required();
  eval->add_option("dataset", gt_root, "dataset root with ground truth")->required();
  eval->add_option("--interval", interval, "override the dataset depth interval");
  eval->add_option("--out", out, "write the metrics CSV here");

  auto* fusec = app.add_subcommand("fuse", "fuse depth maps into a point cloud");
  fusec->add_option("dir", input, "directory with depths/ and cams/")->required();
  fusec->add_option("--images", images_root, "root holding images/ for colors (default: dir)");
  fusec->add_option("--out", out, "output cloud path")->required();

  app.add_subcommand("gradcheck", "finite-difference check of every operation");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (gen->parsed() || train->parsed()) {
      RunConfig cfg = load_config(config_path);
      if (have_seed) cfg.seed = seed;
      if (n > 0) cfg.n = n;
      if (train->parsed()) {
        if (quarter) cfg.quarter = true;
        if (!checkpoint.empty()) cfg.checkpoint = checkpoint;
        return cmd_train(cfg);
      }
      return cmd_gen(cfg, out);
    }
    if (infer->parsed()) return cmd_infer(input, checkpoint, out, d, n, quarter, split, unit,
                                          confidence);
    if (eval->parsed()) return cmd_eval(input, gt_root, interval, out);
    if (fusec->parsed()) return cmd_fuse(input, images_root, out);
    return cmd_gradcheck();
  } catch (const contract_error& e) {
    std::fprintf(stderr, "skysweep: contract: %s\n", e.what());
    return 2;
  } catch (const format_error& e) {
    std::fprintf(stderr, "skysweep: format: %s\n", e.what());
    return 3;
  } catch (const degenerate_error& e) {
    std::fprintf(stderr, "skysweep: degenerate: %s\n", e.what());
    return 3;
  } catch (const numeric_error& e) {
    std::fprintf(stderr, "skysweep: numeric: %s\n", e.what());
    return 4;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "skysweep: error: %s\n", e.what());
    return 3;
  }
}
