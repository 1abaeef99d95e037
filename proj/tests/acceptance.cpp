// Acceptance gate: one pass/fail line per criterion, exit 0 only when all
// nine hold. Tolerances are pinned here, not configurable. Artifacts live
// under acceptance_tmp/ in the working directory.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <string>
#include <sys/wait.h>
#include <vector>

#include "skysweep/skysweep.hpp"
#include "support/oracles.hpp"

namespace fs = std::filesystem;
using namespace skysweep;

namespace {

const fs::path kWork = "acceptance_tmp";

double now_s() {
  return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

std::string fmt(const char* f, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

struct Result {
  bool pass = false;
  std::string detail;
};

// ---------------------------------------------------------------- shared bits

CameraModel random_camera(Rng& rng) {
  const Eigen::Matrix3d r = rotation_from_angles(rng.uniform(-0.2, 0.2), rng.uniform(-0.2, 0.2),
                                                 rng.uniform(-3.0, 3.0));
  const Eigen::Vector3d c(rng.uniform(-60, 60), rng.uniform(-60, 60), rng.uniform(300, 700));
  return CameraModel(rng.uniform(3000, 8000), rng.uniform(370, 400), rng.uniform(250, 260), 768,
                     512, r, c);
}

// Pooled error counts over a set of tiles, running one inference per tile.
MetricsCounts pooled_metrics(RedNetParams<float>& net, const std::vector<LoadedTile>& tiles,
                             double interval, int n_views) {
  MetricsCounts total;
  for (const LoadedTile& tile : tiles) {
    UnitInputs<float> in = unit_inputs<float>(tile);
    if (n_views > 0 && static_cast<int>(in.images.size()) > n_views) {
      in.images.resize(static_cast<std::size_t>(n_views));
      in.cams.resize(static_cast<std::size_t>(n_views));
    }
    Tape<float> t(false);
    Var<float> vol = forward_volume(t, in, tile.ref_plan, net);
    const DepthInference inf = infer_depth(vol.value, tile.ref_plan);
    total.add(evaluate_depth(inf.depth, tile.ref_depth, interval));
  }
  return total;
}

std::vector<LoadedTile> load_split(const DatasetIndex& idx, bool test, int n_views) {
  std::vector<LoadedTile> tiles;
  for (const TileRef& ref : idx.tiles)
    if (ref.test == test) tiles.push_back(load_tile(idx, ref, n_views));
  return tiles;
}

// The procedural scene shared by criteria 5 and 6.
DatasetConfig scene_config() {
  DatasetConfig dc;
  dc.flight.image_width = 256;
  dc.flight.image_height = 128;
  dc.flight.flying_height = 64.0;
  dc.flight.gsd = 0.1;
  dc.flight.heading_overlap = 0.9;
  dc.flight.side_overlap = 0.8;
  dc.flight.strips = 1;
  dc.flight.images_per_strip = 7;
  dc.flight.margin = 8.0;
  dc.buildings = 10;
  dc.terrain_amplitude = 0.4;
  dc.grid = 0.05;
  dc.interval = 0.31;
  dc.n = 3;
  dc.tile_width = 128;
  dc.tile_height = 64;
  dc.seed = 13;
  return dc;
}

std::string scene_root() {
  const fs::path root = kWork / "scene5";
  if (!fs::exists(root / "manifest.txt")) generate_dataset(scene_config(), root.string());
  return root.string();
}

// --------------------------------------------------------------- criterion 1

Result c1_gradients() {
  const double t0 = now_s();
  const std::vector<GradCheckRow> rows = gradcheck_suite();
  const double dt = now_s() - t0;
  double worst = 0;
  std::string worst_op = "none";
  bool ok = !rows.empty();
  for (const GradCheckRow& r : rows) {
    ok = ok && r.pass();
    if (r.max_rel_err > worst) {
      worst = r.max_rel_err;
      worst_op = r.op;
    }
    if (!r.pass()) worst_op = r.op + " FAILED";
  }
  ok = ok && dt < 300.0;
  return {ok, fmt("%zu ops, worst rel err %.2e (%s), %.1f s (cap 300)", rows.size(), worst,
                  worst_op.c_str(), dt)};
}

// --------------------------------------------------------------- criterion 2

Result c2_geometry() {
  Rng rng(0x6e0217);
  double worst_h = 0, worst_rt = 0;
  for (int pair = 0; pair < 100; ++pair) {
    const CameraModel ref = random_camera(rng);
    const CameraModel src = random_camera(rng);
    // A sweep plane below both cameras; points on it are in front of each.
    const double d = rng.uniform(0.6, 0.9) * ref.c.z();
    const Eigen::Matrix3d h = sweep_homography(ref, src, d);
    for (int s = 0; s < 100; ++s) {
      const double u = rng.uniform(0, ref.width - 1);
      const double v = rng.uniform(0, ref.height - 1);
      const Eigen::Vector3d world = ref.unproject(u, v, d);
      const oracle::ProjOut want = oracle::project(src, world);
      const Eigen::Vector2d got = apply_homography(h, u, v);
      worst_h = std::max({worst_h, std::abs(got.x() - want.u), std::abs(got.y() - want.v)});
      const Projection back = ref.project(world);
      worst_rt = std::max({worst_rt, std::abs(back.u - u), std::abs(back.v - v)});
    }
  }
  const bool ok = worst_h < 1e-6 && worst_rt < 1e-6;
  return {ok, fmt("100 pairs x 100 px: homography vs unproject/project worst %.2e px, "
                  "round trip worst %.2e px (caps 1e-6)",
                  worst_h, worst_rt)};
}

// --------------------------------------------------------------- criterion 3

Result c3_shapes() {
  oracle::PlantedUnit p = oracle::make_planted_unit(768, 384, 3, 1, 0.5, 5);
  RedNetParams<float> full(3, false);
  Tape<float> tf(false);
  const Shape sf = forward_volume(tf, p.unit, p.plan, full).value.shape();
  RedNetParams<float> quarter(4, true);
  Tape<float> tq(false);
  const Shape sq = forward_volume(tq, p.unit, p.plan, quarter).value.shape();
  const bool ok_full = sf.rank == 3 && sf.extent[0] == 3 && sf.extent[1] == 384 &&
                       sf.extent[2] == 768;
  const bool ok_quarter = sq.rank == 3 && sq.extent[0] == 3 && sq.extent[1] == 96 &&
                          sq.extent[2] == 192;
  return {ok_full && ok_quarter,
          fmt("input 384x768: full -> %s, quarter -> %s", sf.str().c_str(), sq.str().c_str())};
}

// --------------------------------------------------------------- criterion 4

Result c4_memory() {
  oracle::PlantedUnit lo = oracle::make_planted_unit(128, 64, 16, 8, 0.5, 21);
  oracle::PlantedUnit hi = oracle::make_planted_unit(128, 64, 64, 32, 0.5, 21);
  RedNetParams<float> net(9, false);
  measure_run(lo.unit, lo.plan, net);  // warm caches before timing

  std::int64_t w16 = 0, w64 = 0;
  double t16 = 1e30, t64 = 1e30;
  for (int rep = 0; rep < 3; ++rep) {
    const RunMeasurement<float> a = measure_run(lo.unit, lo.plan, net);
    const RunMeasurement<float> b = measure_run(hi.unit, hi.plan, net);
    w16 = a.working_bytes;
    w64 = b.working_bytes;
    t16 = std::min(t16, a.wall_seconds);
    t64 = std::min(t64, b.wall_seconds);
  }
  const double mem_rel = std::abs(static_cast<double>(w64 - w16)) /
                         static_cast<double>(std::max(w16, w64));
  const double ratio = t64 / t16;
  const bool ok = mem_rel < 0.05 && ratio >= 3.0 && ratio <= 5.0;
  return {ok, fmt("working bytes D=16: %lld, D=64: %lld (rel diff %.4f, cap 0.05); "
                  "time ratio %.2f (need [3,5])",
                  static_cast<long long>(w16), static_cast<long long>(w64), mem_rel, ratio)};
}

// --------------------------------------------------------------- criterion 5

double planted_accuracy(RedNetParams<float>& net, const oracle::PlantedUnit& p) {
  Tape<float> t(false);
  Var<float> vol = forward_volume(t, p.unit, p.plan, net);
  const DepthInference inf = infer_depth(vol.value, p.plan);
  const Shape s = inf.depth.shape();
  std::int64_t good = 0, all = 0;
  for (std::int64_t y = p.border; y < s.extent[0] - p.border; ++y) {
    for (std::int64_t x = p.border; x < s.extent[1] - p.border; ++x) {
      const double d = inf.depth.data()[y * s.extent[1] + x];
      const long j = std::lround((d - p.plan.d_min) / p.plan.interval);
      ++all;
      if (j == p.k) ++good;
    }
  }
  return all ? static_cast<double>(good) / all : 0.0;
}

Result c5_overfit() {
  const double t0 = now_s();

  // Part one: a single planted textured plane, trained by hand.
  oracle::PlantedUnit p = oracle::make_planted_unit(32, 32, 8, 3, 0.5, 11);
  RedNetParams<float> pnet(1, false);
  std::vector<Parameter<float>*> params = pnet.parameters();
  std::int64_t planted_iters = 0;
  double acc = 0;
  while (planted_iters < 2000) {
    Tape<float> t(true);
    Var<float> vol = forward_volume(t, p.unit, p.plan, pnet);
    Var<float> loss = rednet_loss(t, vol, p.gt, p.plan);
    t.backward(loss);
    rmsprop_step(params, 1e-3f);
    ++planted_iters;
    if (planted_iters % 25 == 0) {
      acc = planted_accuracy(pnet, p);
      if (acc >= 0.99) break;
    }
  }
  if (acc < 0.99) acc = planted_accuracy(pnet, p);
  const bool ok_planted = acc >= 0.99;
  const double t_planted = now_s() - t0;

  // Part two: the five-unit procedural scene.
  const std::string root = scene_root();
  const DatasetIndex idx = read_dataset_index(root);
  const std::vector<LoadedTile> train_tiles = load_split(idx, false, idx.n);
  int d_max = 0;
  for (const LoadedTile& tile : train_tiles) d_max = std::max(d_max, tile.ref_plan.count);

  RedNetParams<float> net(2, false);
  TrainConfig tc;
  tc.dataset_root = root;
  tc.lr = 1e-3;
  tc.decay = 0.9;
  tc.decay_period = 500;
  tc.epochs = 0;
  tc.max_iterations = 5000;
  tc.seed = 7;
  double pct3 = 0;
  bool reached = false;
  const double scene_t0 = now_s();
  TrainResult tr = train_rednet(net, tc, nullptr, [&](const TrainStatus& st) {
    if (st.iteration < 120 || st.iteration % 60 != 0) return false;
    pct3 = pooled_metrics(net, train_tiles, idx.interval, 0).pct_lt_3interval();
    if (pct3 >= 80.0) reached = true;
    return reached || now_s() - scene_t0 > 1500.0;
  });
  if (!reached) {
    pct3 = pooled_metrics(net, train_tiles, idx.interval, 0).pct_lt_3interval();
    reached = pct3 >= 80.0;
  }
  const double total = now_s() - t0;
  const bool ok = ok_planted && reached && tr.iterations <= 5000 && total < 1800.0;
  return {ok, fmt("planted: argmax acc %.4f in %lld iters (%.0f s); scene: <3-interval %.2f%% "
                  "after %lld iters, tile D max %d; total %.0f s (cap 1800)",
                  acc, static_cast<long long>(planted_iters), t_planted, pct3,
                  static_cast<long long>(tr.iterations), d_max, total)};
}

// --------------------------------------------------------------- criterion 6

Result c6_dataset() {
  const std::string root = scene_root();
  const DatasetIndex idx = read_dataset_index(root);
  const double grid = scene_config().grid;

  std::int64_t covis = 0, consist = 0, valid_px = 0, all_px = 0;
  for (const TileRef& ref : idx.tiles) {
    std::vector<Tensor<float>> depths;
    std::vector<CameraModel> cams;
    for (int v = 0; v < idx.n; ++v) {
      const std::string vid = std::to_string(v);
      depths.push_back(read_depth_png(
          (fs::path(root) / "depths" / ref.unit / vid / (ref.stem + ".png")).string()));
      cams.push_back(read_camera_txt(
                         (fs::path(root) / "cams" / ref.unit / vid / (ref.stem + ".txt")).string())
                         .cam);
      all_px += depths.back().numel();
      const float* d = depths.back().data();
      for (std::int64_t i = 0; i < depths.back().numel(); ++i)
        if (d[i] > 0) ++valid_px;
    }
    const Tensor<float>& rd = depths[1];
    const CameraModel& rc = cams[1];
    for (int y = 0; y < rc.height; ++y) {
      for (int x = 0; x < rc.width; ++x) {
        const float d = rd.data()[static_cast<std::int64_t>(y) * rc.width + x];
        if (d <= 0) continue;
        const Eigen::Vector3d world = rc.unproject(x, y, d);
        for (int v = 0; v < idx.n; ++v) {
          if (v == 1) continue;
          Projection pr;
          if (!cams[v].try_project(world, pr)) continue;
          const long x0 = static_cast<long>(std::floor(pr.u));
          const long y0 = static_cast<long>(std::floor(pr.v));
          if (x0 < 0 || x0 + 1 >= cams[v].width || y0 < 0 || y0 + 1 >= cams[v].height) continue;
          // Compare against the other view's depth surface, bilinearly
          // sampled. A footprint that straddles a discontinuity (or a hole)
          // cannot decide sub-pixel co-visibility, so it is skipped; walls
          // foreshortened to a depth ramp of meters per pixel fall out here.
          const float* dv = depths[v].data();
          const float s00 = dv[y0 * cams[v].width + x0];
          const float s01 = dv[y0 * cams[v].width + x0 + 1];
          const float s10 = dv[(y0 + 1) * cams[v].width + x0];
          const float s11 = dv[(y0 + 1) * cams[v].width + x0 + 1];
          if (s00 <= 0 || s01 <= 0 || s10 <= 0 || s11 <= 0) continue;
          const float smin = std::min({s00, s01, s10, s11});
          const float smax = std::max({s00, s01, s10, s11});
          if (smax - smin > 6 * grid) continue;
          const double fx = pr.u - x0, fy = pr.v - y0;
          const double stored = (1 - fy) * ((1 - fx) * s00 + fx * s01) +
                                fy * ((1 - fx) * s10 + fx * s11);
          // A much nearer surface in the other view means occlusion, not error.
          if (stored < pr.depth - 6 * grid) continue;
          ++covis;
          if (std::abs(stored - pr.depth) <= 2 * grid) ++consist;
        }
      }
    }
  }
  const double consistency = covis ? 100.0 * consist / covis : 0.0;
  const double completeness = all_px ? 100.0 * valid_px / all_px : 0.0;

  // Depth maps re-encode byte-identically: the 1 cm quantization is the file.
  bool lossless = true;
  int checked = 0;
  for (const TileRef& ref : idx.tiles) {
    if (checked >= 5) break;
    const fs::path p = fs::path(root) / "depths" / ref.unit / "1" / (ref.stem + ".png");
    std::ifstream is(p, std::ios::binary);
    const std::string before((std::istreambuf_iterator<char>(is)),
                             std::istreambuf_iterator<char>());
    const Tensor<float> d = read_depth_png(p.string());
    const fs::path tmp = kWork / "roundtrip.png";
    write_depth_png(tmp.string(), d);
    std::ifstream is2(tmp, std::ios::binary);
    const std::string after((std::istreambuf_iterator<char>(is2)),
                            std::istreambuf_iterator<char>());
    lossless = lossless && before == after;
    ++checked;
  }
  const bool ok = consistency >= 99.0 && completeness >= 99.9 && lossless && covis > 100000;
  return {ok, fmt("cross-view consistency %.3f%% of %lld co-visible px (need 99); completeness "
                  "%.3f%% (need 99.9); %d depth maps re-encode losslessly: %s",
                  consistency, static_cast<long long>(covis), completeness, checked,
                  lossless ? "yes" : "NO")};
}

// --------------------------------------------------------------- criterion 7

Result c7_metrics() {
  Rng rng(77);
  double worst = 0;
  auto rel = [](double a, double b) { return std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)}); };
  for (int f = 0; f < 1000; ++f) {
    const int n = static_cast<int>(rng.uniform_int(1, 40));
    const double interval = std::exp(rng.uniform(std::log(0.05), std::log(0.5)));
    std::vector<float> pred(static_cast<std::size_t>(n)), gt(pred.size());
    // Index 0 always overlaps so the fixture is never degenerate.
    gt[0] = static_cast<float>(rng.uniform(5, 50));
    pred[0] = gt[0] + static_cast<float>(rng.uniform(-0.2, 0.2));
    for (std::size_t i = 1; i < pred.size(); ++i) {
      const double g = rng.uniform(5, 50);
      switch (rng.uniform_int(0, 6)) {
        case 0: pred[i] = 0; gt[i] = static_cast<float>(g); break;
        case 1: pred[i] = static_cast<float>(g); gt[i] = 0; break;
        case 2: pred[i] = 0; gt[i] = 0; break;
        case 3:  // gross outlier, beyond the 100-interval MAE cap
          pred[i] = static_cast<float>(g + 150 * interval);
          gt[i] = static_cast<float>(g);
          break;
        case 4:  // near the 3-interval bucket edge
          pred[i] = static_cast<float>(g + 3 * interval + rng.uniform(-0.01, 0.01) * interval);
          gt[i] = static_cast<float>(g);
          break;
        case 5:  // near the 0.6 m bucket edge
          pred[i] = static_cast<float>(g + 0.6 + rng.uniform(-0.02, 0.02));
          gt[i] = static_cast<float>(g);
          break;
        default:
          pred[i] = static_cast<float>(g + rng.uniform(-2, 2) * interval);
          gt[i] = static_cast<float>(g);
          break;
      }
    }
    Tensor<float> tp = Tensor<float>::uninit({1, n});
    Tensor<float> tg = Tensor<float>::uninit({1, n});
    std::copy(pred.begin(), pred.end(), tp.data());
    std::copy(gt.begin(), gt.end(), tg.data());
    const MetricsCounts c = evaluate_depth(tp, tg, interval);
    const oracle::MetricsRef r = oracle::metrics(pred, gt, interval);
    if (c.n_both != r.n_both) return {false, fmt("fixture %d: n_both %lld vs oracle %lld", f,
                                                 static_cast<long long>(c.n_both),
                                                 static_cast<long long>(r.n_both))};
    worst = std::max({worst, rel(c.mae_m(), r.mae), rel(c.pct_lt_3interval(), r.pct3),
                      rel(c.pct_lt_06m(), r.pct06), rel(c.completeness(), r.completeness)});
    if (worst > 1e-9) return {false, fmt("fixture %d: rel err %.3e exceeds 1e-9", f, worst)};
  }
  return {true, fmt("1000 fixtures, worst rel err %.3e (cap 1e-9)", worst)};
}

// --------------------------------------------------------------- criterion 8

Result c8_nviews() {
  const fs::path root = kWork / "scene_n5";
  DatasetConfig dc = scene_config();
  dc.flight.strips = 3;
  dc.flight.images_per_strip = 8;
  dc.buildings = 14;
  dc.interval = 0.5;
  dc.n = 5;
  dc.seed = 11;
  if (!fs::exists(root / "manifest.txt")) generate_dataset(dc, root.string());
  const DatasetIndex idx = read_dataset_index(root.string());

  const std::int64_t budget = 320;
  auto train_one = [&](int n_views, RedNetParams<float>& net) {
    TrainConfig tc;
    tc.dataset_root = root.string();
    tc.lr = 1e-3;
    tc.decay = 0.9;
    tc.decay_period = 500;
    tc.epochs = 0;
    tc.max_iterations = budget;
    tc.n_views = n_views;
    tc.seed = 7;
    return train_rednet(net, tc);
  };

  RedNetParams<float> net3(4, false);
  const TrainResult r3 = train_one(3, net3);
  RedNetParams<float> net5(4, false);
  const TrainResult r5 = train_one(5, net5);

  const std::vector<LoadedTile> test5 = load_split(idx, true, 5);
  const double mae3 = pooled_metrics(net3, test5, idx.interval, 3).mae_m();
  const double mae5 = pooled_metrics(net5, test5, idx.interval, 5).mae_m();
  const bool ok = r3.iterations == budget && r5.iterations == budget && mae5 <= mae3;
  return {ok, fmt("identical %lld-iteration budgets on the same scene: test MAE N=3 %.4f m, "
                  "N=5 %.4f m (need N=5 <= N=3)",
                  static_cast<long long>(budget), mae3, mae5)};
}

// --------------------------------------------------------------- criterion 9

struct CliRun {
  int code = -1;
};

CliRun run_cli(const fs::path& dir, const std::string& args) {
  fs::create_directories(dir);
  const std::string cmd = std::string("\"") + SKYSWEEP_CLI_PATH + "\" " + args + " > \"" +
                          (dir / "stdout.txt").string() + "\" 2> \"" +
                          (dir / "stderr.txt").string() + "\"";
  const int rc = std::system(cmd.c_str());
  CliRun r;
  r.code = WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
  return r;
}

std::map<std::string, std::string> tree_bytes(const fs::path& root) {
  std::map<std::string, std::string> out;
  if (!fs::exists(root)) return out;
  if (fs::is_regular_file(root)) {
    std::ifstream is(root, std::ios::binary);
    out[root.filename().string()] =
        std::string((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
    return out;
  }
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (!e.is_regular_file()) continue;
    std::ifstream is(e.path(), std::ios::binary);
    out[fs::relative(e.path(), root).string()] =
        std::string((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  }
  return out;
}

Result c9_determinism() {
  const fs::path base = kWork / "det";
  const char* cfg = R"({
  "dataset_root": "data",
  "checkpoint": "model.ckpt",
  "train_log": "train.csv",
  "image_width": 128,
  "image_height": 64,
  "strips": 1,
  "images_per_strip": 4,
  "buildings": 1,
  "terrain_amplitude": 0.2,
  "interval": 0.3,
  "tile_width": 64,
  "tile_height": 32,
  "seed": 7,
  "epochs": 1,
  "max_iterations": 4
})";
  std::vector<std::string> bad;
  for (const char* leg : {"a", "b"}) {
    const fs::path dir = base / leg;
    fs::create_directories(dir);
    std::ofstream(dir / "cfg.json") << cfg;
    const std::string c = "--config \"" + (dir / "cfg.json").string() + "\"";
    if (run_cli(dir, "gen " + c).code != 0) bad.push_back(std::string("gen/") + leg);
    if (run_cli(dir, "train " + c).code != 0) bad.push_back(std::string("train/") + leg);
    if (run_cli(dir, "infer \"" + (dir / "data").string() + "\" --checkpoint \"" +
                         (dir / "model.ckpt").string() + "\" --out \"" + (dir / "pred").string() +
                         "\" --split all --confidence")
            .code != 0)
      bad.push_back(std::string("infer/") + leg);
    if (run_cli(dir, "eval \"" + (dir / "pred").string() + "\" \"" + (dir / "data").string() +
                         "\" --out \"" + (dir / "metrics.csv").string() + "\"")
            .code != 0)
      bad.push_back(std::string("eval/") + leg);
  }
  if (!bad.empty()) {
    std::string what = "commands failed:";
    for (const std::string& b : bad) what += " " + b;
    return {false, what};
  }
  std::vector<std::string> diffs;
  for (const char* rel : {"data", "model.ckpt", "train.csv", "pred", "metrics.csv"}) {
    const auto a = tree_bytes(base / "a" / rel);
    const auto b = tree_bytes(base / "b" / rel);
    if (a.empty() || a != b) diffs.push_back(rel);
  }
  if (!diffs.empty()) {
    std::string what = "outputs differ across identical runs:";
    for (const std::string& d : diffs) what += " " + d;
    return {false, what};
  }
  return {true, "gen, train, infer and eval each byte-identical across two seeded runs"};
}

}  // namespace

int main(int argc, char** argv) {
  fs::remove_all(kWork);
  fs::create_directories(kWork);

  struct Criterion {
    const char* name;
    Result (*fn)();
  };
  const Criterion criteria[] = {
      {"gradient suite", c1_gradients},   {"geometry oracle", c2_geometry},
      {"shape contracts", c3_shapes},     {"memory constancy", c4_memory},
      {"overfit training", c5_overfit},   {"dataset consistency", c6_dataset},
      {"metric oracle", c7_metrics},      {"n-view behavior", c8_nviews},
      {"determinism", c9_determinism},
  };

  // Optional args select a subset of criteria by number, for iterating on one.
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));

  int failures = 0;
  int attempted = 0;
  int id = 0;
  for (const Criterion& c : criteria) {
    ++id;
    if (!only.empty() && !only.count(id)) continue;
    ++attempted;
    Result r;
    const double t0 = now_s();
    try {
      r = c.fn();
    } catch (const std::exception& e) {
      r = {false, std::string("exception: ") + e.what()};
    }
    std::printf("criterion %d %s %s: %s [%.0f s]\n", id, r.pass ? "PASS" : "FAIL", c.name,
                r.detail.c_str(), now_s() - t0);
    std::fflush(stdout);
    if (!r.pass) ++failures;
  }
  std::printf("acceptance: %d/%d criteria passed\n", attempted - failures, attempted);
  return failures == 0 ? 0 : 1;
}
