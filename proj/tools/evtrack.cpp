// Command-line front end: simulate / track / evaluate / sweep.
//
// Exit codes: 0 success, 2 usage or input error, 3 tracking failure on
// more than half of the frames, 4 internal numerical failure.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "evt/errors.hpp"
#include "evt/evaluation.hpp"
#include "evt/event_io.hpp"
#include "evt/manifest.hpp"
#include "evt/parallel.hpp"
#include "evt/sequence.hpp"
#include "evt/simulator.hpp"

namespace fs = std::filesystem;
using KV = std::map<std::string, std::string>;

namespace {

constexpr const char* kVersion = "0.1.0";

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void kv_apply(const KV& kv, const std::string& key, double& var) {
  if (auto it = kv.find(key); it != kv.end()) var = std::stod(it->second);
}
void kv_apply(const KV& kv, const std::string& key, int& var) {
  if (auto it = kv.find(key); it != kv.end()) var = std::stoi(it->second);
}
void kv_apply(const KV& kv, const std::string& key, std::uint64_t& var) {
  if (auto it = kv.find(key); it != kv.end()) var = std::stoull(it->second);
}
void kv_apply(const KV& kv, const std::string& key, std::string& var) {
  if (auto it = kv.find(key); it != kv.end()) var = it->second;
}

/// Pre-scan for --config so the file can seed the defaults before CLI11
/// applies explicit flags on top.
KV preload_config(int argc, char** argv) {
  for (int i = 1; i + 1 < argc; ++i) {
    if (std::string(argv[i]) == "--config") return evt::load_key_values(argv[i + 1]);
  }
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg.rfind("--config=", 0) == 0) return evt::load_key_values(arg.substr(9));
  }
  return {};
}

struct StageTimer {
  using Clock = std::chrono::steady_clock;
  Clock::time_point start = Clock::now();
  std::map<std::string, double>* sink;

  explicit StageTimer(std::map<std::string, double>* s) : sink(s) {}
  void mark(const std::string& stage) {
    const auto now = Clock::now();
    (*sink)[stage] = std::chrono::duration<double, std::milli>(now - start).count();
    start = now;
  }
};

std::vector<double> parse_grid(const std::string& csv) {
  std::vector<double> grid;
  std::stringstream ss(csv);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (!tok.empty()) grid.push_back(std::stod(tok));
  }
  if (grid.empty()) throw std::invalid_argument("empty sweep grid");
  return grid;
}

std::vector<std::uint64_t> parse_seeds(const std::string& csv) {
  std::vector<std::uint64_t> seeds;
  if (csv.empty()) return seeds;
  std::stringstream ss(csv);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (!tok.empty()) seeds.push_back(std::stoull(tok));
  }
  return seeds;
}

// ---------------------------------------------------------------------------

struct SimulateOpts {
  std::string scene = "checkerboard";
  std::string motion = "planar";
  double duration_s = 2.0;
  std::uint64_t seed = 1;
  double speed_mps = 0.0;
  double contrast = 0.1;
  std::uint64_t refractory_us = 0;
  double sample_rate_hz = 1000.0;
  double static_from_s = -1.0;
  double static_to_s = -1.0;
  double gradient_floor = 0.06;
  int max_points = 0;
  double fx = 160.0, fy = 160.0, cx = 120.0, cy = 90.0;
  int width = 240, height = 180;
  std::string out;

  void from_kv(const KV& kv) {
    kv_apply(kv, "scene", scene);
    kv_apply(kv, "motion", motion);
    kv_apply(kv, "duration_s", duration_s);
    kv_apply(kv, "seed", seed);
    kv_apply(kv, "speed_mps", speed_mps);
    kv_apply(kv, "contrast", contrast);
    kv_apply(kv, "refractory_us", refractory_us);
    kv_apply(kv, "sample_rate_hz", sample_rate_hz);
    kv_apply(kv, "static_from_s", static_from_s);
    kv_apply(kv, "static_to_s", static_to_s);
    kv_apply(kv, "gradient_floor", gradient_floor);
    kv_apply(kv, "max_points", max_points);
    kv_apply(kv, "fx", fx);
    kv_apply(kv, "fy", fy);
    kv_apply(kv, "cx", cx);
    kv_apply(kv, "cy", cy);
    kv_apply(kv, "width", width);
    kv_apply(kv, "height", height);
  }

  KV to_kv() const {
    return {{"scene", scene},
            {"motion", motion},
            {"duration_s", fmt_double(duration_s)},
            {"seed", std::to_string(seed)},
            {"speed_mps", fmt_double(speed_mps)},
            {"contrast", fmt_double(contrast)},
            {"refractory_us", std::to_string(refractory_us)},
            {"sample_rate_hz", fmt_double(sample_rate_hz)},
            {"static_from_s", fmt_double(static_from_s)},
            {"static_to_s", fmt_double(static_to_s)},
            {"gradient_floor", fmt_double(gradient_floor)},
            {"max_points", std::to_string(max_points)},
            {"fx", fmt_double(fx)},
            {"fy", fmt_double(fy)},
            {"cx", fmt_double(cx)},
            {"cy", fmt_double(cy)},
            {"width", std::to_string(width)},
            {"height", std::to_string(height)}};
  }
};

int cmd_simulate(const SimulateOpts& opt) {
  evt::RunManifest manifest;
  manifest.version = kVersion;
  manifest.command = "simulate";
  manifest.config = opt.to_kv();
  StageTimer timer(&manifest.timings_ms);

  fs::create_directories(opt.out);
  evt::CameraIntrinsics K{opt.fx, opt.fy, opt.cx, opt.cy, opt.width, opt.height};
  K.validate();

  const evt::SyntheticScene scene = evt::make_scene(evt::scene_from_string(opt.scene), opt.seed);
  evt::TrajectorySpec spec;
  spec.kind = evt::motion_from_string(opt.motion);
  spec.duration_s = opt.duration_s;
  spec.speed_mps = opt.speed_mps;
  spec.seed = opt.seed;
  if (opt.static_from_s >= 0.0 && opt.static_to_s > opt.static_from_s) {
    spec.static_interval_s = {opt.static_from_s, opt.static_to_s};
  }
  const evt::TrajectorySampler trajectory(spec);
  timer.mark("setup");

  evt::ContrastModel model{opt.contrast, static_cast<evt::Timestamp>(opt.refractory_us)};
  const evt::SimulatedSequence seq =
      evt::generate_events(scene, trajectory, model, K, opt.sample_rate_hz);
  timer.mark("generate_events");

  const auto [map, view] =
      evt::ground_truth_map(scene, K, seq.ground_truth[0].pose, opt.gradient_floor, opt.max_points);
  timer.mark("ground_truth_map");

  evt::write_events(fs::path(opt.out) / "events.txt", seq.events);
  evt::save_trajectory(fs::path(opt.out) / "gt_poses.txt", seq.ground_truth);
  evt::save_map(fs::path(opt.out) / "map.txt", map);
  K.save(fs::path(opt.out) / "calib.txt");
  timer.mark("write");

  manifest.outputs = {"events.txt", "gt_poses.txt", "map.txt", "calib.txt"};
  manifest.save(opt.out);
  std::printf("simulate: %zu events, %zu gt samples, %zu map points -> %s\n", seq.events.size(),
              seq.ground_truth.size(), map.points.size(), opt.out.c_str());
  return 0;
}

// ---------------------------------------------------------------------------

struct TrackOpts {
  std::string events, map, calib;
  std::string repr = "tsem";
  int em_events = 4000;
  double lambda_th = 31.0;
  double ts_period_ms = 10.0;
  double delta_ms = 30.0;
  int blur_kernel = 5;
  double blur_sigma = 1.0;
  double huber_scale = 10.0;
  int max_iterations = 50;
  double step_tolerance = 1e-6;
  double init_perturbation = 0.0;
  std::uint64_t perturbation_seed = 0;
  std::string dump_frames;
  std::string out;

  void from_kv(const KV& kv) {
    kv_apply(kv, "events", events);
    kv_apply(kv, "map", map);
    kv_apply(kv, "calib", calib);
    kv_apply(kv, "repr", repr);
    kv_apply(kv, "em_events", em_events);
    kv_apply(kv, "lambda_th", lambda_th);
    kv_apply(kv, "ts_period_ms", ts_period_ms);
    kv_apply(kv, "delta_ms", delta_ms);
    kv_apply(kv, "blur_kernel", blur_kernel);
    kv_apply(kv, "blur_sigma", blur_sigma);
    kv_apply(kv, "huber_scale", huber_scale);
    kv_apply(kv, "max_iterations", max_iterations);
    kv_apply(kv, "step_tolerance", step_tolerance);
    kv_apply(kv, "init_perturbation", init_perturbation);
    kv_apply(kv, "perturbation_seed", perturbation_seed);
  }

  KV to_kv() const {
    return {{"events", events},
            {"map", map},
            {"calib", calib},
            {"repr", repr},
            {"em_events", std::to_string(em_events)},
            {"lambda_th", fmt_double(lambda_th)},
            {"ts_period_ms", fmt_double(ts_period_ms)},
            {"delta_ms", fmt_double(delta_ms)},
            {"blur_kernel", std::to_string(blur_kernel)},
            {"blur_sigma", fmt_double(blur_sigma)},
            {"huber_scale", fmt_double(huber_scale)},
            {"max_iterations", std::to_string(max_iterations)},
            {"step_tolerance", fmt_double(step_tolerance)},
            {"init_perturbation", fmt_double(init_perturbation)},
            {"perturbation_seed", std::to_string(perturbation_seed)}};
  }

  evt::SequenceConfig sequence_config() const {
    evt::SequenceConfig cfg;
    cfg.repr.delta_ms = delta_ms;
    cfg.repr.em_event_count = em_events;
    cfg.repr.ts_period_ms = ts_period_ms;
    cfg.repr.blur_kernel = blur_kernel;
    cfg.repr.blur_sigma = blur_sigma;
    cfg.tracker.huber_scale = huber_scale;
    cfg.tracker.max_iterations = max_iterations;
    cfg.tracker.step_tolerance = step_tolerance;
    cfg.tracker.lambda_th = lambda_th;
    cfg.tracker.representation = evt::representation_from_string(repr);
    cfg.tracker.em_event_count = em_events;
    cfg.init_perturbation = init_perturbation;
    cfg.perturbation_seed = perturbation_seed;
    if (!dump_frames.empty()) {
      fs::create_directories(dump_frames);
      cfg.dump_dir = dump_frames;
    }
    return cfg;
  }
};

int cmd_track(const TrackOpts& opt) {
  evt::RunManifest manifest;
  manifest.version = kVersion;
  manifest.command = "track";
  manifest.config = opt.to_kv();
  manifest.inputs = {opt.events, opt.map, opt.calib};
  StageTimer timer(&manifest.timings_ms);

  fs::create_directories(opt.out);
  const evt::CameraIntrinsics K = evt::CameraIntrinsics::load(opt.calib);
  const evt::EventStream events = evt::parse_events(opt.events, K.width, K.height);
  const evt::SemiDenseMap map = evt::load_map(opt.map);
  timer.mark("load");

  // The map file is expressed in the initial camera frame; the reference
  // camera sits at the identity.
  const evt::PreparedTemplate tpl =
      evt::PreparedTemplate::build(evt::make_template(map, evt::PoseSE3(), K), K);
  if (tpl.view.points.empty()) throw std::runtime_error("no map point projects into the reference view");
  timer.mark("template");

  const evt::SequenceResult result = evt::track_sequence(events, tpl, K, opt.sequence_config());
  timer.mark("track");
  if (result.frames.empty()) throw std::runtime_error("event stream shorter than one trigger period");

  evt::save_trajectory(fs::path(opt.out) / "trajectory.txt", result.trajectory);
  evt::write_metrics_csv(fs::path(opt.out) / "metrics.csv", result);
  manifest.outputs = {"trajectory.txt", "metrics.csv"};
  manifest.save(opt.out);
  timer.mark("write");

  const std::size_t n = result.frames.size();
  std::printf("track: %zu frames, %d failed, em fraction %.3f -> %s\n", n, result.failed_frames,
              result.em_fraction, opt.out.c_str());
  if (result.failed_frames * 2 > static_cast<int>(n)) {
    std::fprintf(stderr, "track: tracking failed on more than half of the frames\n");
    return 3;
  }
  return 0;
}

// ---------------------------------------------------------------------------

struct EvaluateOpts {
  std::string est, gt;
  double max_dt_ms = 5.0;
  std::string out;

  void from_kv(const KV& kv) {
    kv_apply(kv, "est", est);
    kv_apply(kv, "gt", gt);
    kv_apply(kv, "max_dt_ms", max_dt_ms);
  }
  KV to_kv() const {
    return {{"est", est}, {"gt", gt}, {"max_dt_ms", fmt_double(max_dt_ms)}};
  }
};

int cmd_evaluate(const EvaluateOpts& opt) {
  evt::RunManifest manifest;
  manifest.version = kVersion;
  manifest.command = "evaluate";
  manifest.config = opt.to_kv();
  manifest.inputs = {opt.est, opt.gt};
  StageTimer timer(&manifest.timings_ms);

  const evt::Trajectory est = evt::load_trajectory(opt.est);
  const evt::Trajectory gt = evt::load_trajectory(opt.gt);
  const evt::ATEReport report =
      evt::evaluate_ate(est, gt, evt::seconds_to_us(opt.max_dt_ms * 1e-3));
  timer.mark("evaluate");

  std::printf("mean ATE translation: %.6f cm over %d matched samples\n", report.mean_cm,
              report.matched);

  if (!opt.out.empty()) {
    fs::create_directories(opt.out);
    std::FILE* f = std::fopen((fs::path(opt.out) / "ate.csv").string().c_str(), "w");
    if (!f) throw std::runtime_error("cannot write ate.csv");
    std::fprintf(f, "index,error_cm\n");
    for (std::size_t i = 0; i < report.errors_cm.size(); ++i) {
      std::fprintf(f, "%zu,%.9g\n", i, report.errors_cm[i]);
    }
    std::fclose(f);
    manifest.outputs = {"ate.csv"};
    manifest.save(opt.out);
  }
  return 0;
}

// ---------------------------------------------------------------------------

struct SweepOpts {
  TrackOpts track;
  std::string gt;
  std::string grid_csv = "10,31,100,158,251,400";
  int trials = 10;
  std::string seeds_csv;
  double max_dt_ms = 5.0;

  void from_kv(const KV& kv) {
    track.from_kv(kv);
    kv_apply(kv, "gt", gt);
    kv_apply(kv, "grid", grid_csv);
    kv_apply(kv, "trials", trials);
    kv_apply(kv, "seeds", seeds_csv);
    kv_apply(kv, "max_dt_ms", max_dt_ms);
  }
  KV to_kv() const {
    KV kv = track.to_kv();
    kv["gt"] = gt;
    kv["grid"] = grid_csv;
    kv["trials"] = std::to_string(trials);
    kv["seeds"] = seeds_csv;
    kv["max_dt_ms"] = fmt_double(max_dt_ms);
    return kv;
  }
};

int cmd_sweep(const SweepOpts& opt) {
  evt::RunManifest manifest;
  manifest.version = kVersion;
  manifest.command = "sweep";
  manifest.config = opt.to_kv();
  manifest.inputs = {opt.track.events, opt.track.map, opt.track.calib, opt.gt};
  StageTimer timer(&manifest.timings_ms);

  fs::create_directories(opt.track.out);
  const evt::CameraIntrinsics K = evt::CameraIntrinsics::load(opt.track.calib);
  evt::Dataset dataset{evt::parse_events(opt.track.events, K.width, K.height),
                       evt::load_trajectory(opt.gt), evt::load_map(opt.track.map), K};
  timer.mark("load");

  const std::vector<double> grid = parse_grid(opt.grid_csv);
  const std::vector<std::uint64_t> seeds = parse_seeds(opt.seeds_csv);
  const std::vector<evt::SweepRow> rows =
      evt::lambda_sweep(dataset, opt.track.sequence_config(), grid, opt.trials, seeds,
                        evt::seconds_to_us(opt.max_dt_ms * 1e-3));
  timer.mark("sweep");

  evt::write_sweep_csv(fs::path(opt.track.out) / "sweep.csv", rows);
  manifest.outputs = {"sweep.csv"};
  manifest.save(opt.track.out);

  std::printf("lambda_th,mean_ate_cm,em_fraction,trials\n");
  for (const evt::SweepRow& r : rows) {
    std::printf("%.9g,%.9g,%.9g,%d\n", r.lambda_th, r.mean_ate_cm, r.em_fraction, r.trials);
  }
  return 0;
}

void require_input(const std::string& value, const char* flag) {
  if (value.empty()) {
    throw std::invalid_argument(std::string("missing ") + flag + " (flag or config key)");
  }
}

void add_track_options(CLI::App* cmd, TrackOpts& opt) {
  // input paths may come from --config instead of flags, so presence is
  // validated after parsing
  cmd->add_option("--events", opt.events, "Event file (t_sec x y p per line)");
  cmd->add_option("--map", opt.map, "Semi-dense map file (X Y Z per line)");
  cmd->add_option("--calib", opt.calib, "Calibration file (fx fy cx cy width height)");
  cmd->add_option("--repr", opt.repr, "Representation: ts | em | tsem")
      ->check(CLI::IsMember({"ts", "em", "tsem"}));
  cmd->add_option("--em-events", opt.em_events, "Events aggregated per event map");
  cmd->add_option("--lambda-th", opt.lambda_th, "Degeneracy threshold (TSEM)");
  cmd->add_option("--ts-period", opt.ts_period_ms, "Time-surface trigger period [ms]");
  cmd->add_option("--delta", opt.delta_ms, "Time-surface decay rate [ms]");
  cmd->add_option("--blur-kernel", opt.blur_kernel, "Gaussian blur kernel size [px]");
  cmd->add_option("--blur-sigma", opt.blur_sigma, "Gaussian blur sigma [px]");
  cmd->add_option("--huber-scale", opt.huber_scale, "Huber scale [intensity]");
  cmd->add_option("--max-iterations", opt.max_iterations, "Gauss-Newton iteration cap");
  cmd->add_option("--step-tolerance", opt.step_tolerance, "Convergence threshold on |step|");
  cmd->add_option("--init-perturbation", opt.init_perturbation,
                  "Stddev of the seeded per-frame initial-guess perturbation");
  cmd->add_option("--perturbation-seed", opt.perturbation_seed, "Seed for the above");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"event-camera pose tracking on image-type representations"};
  app.set_version_flag("--version", std::string("evtrack ") + kVersion);
  app.require_subcommand(1);

  int threads = 0;
  app.add_option("--threads", threads, "Max worker threads (0 = runtime default, 1 = serial)");

  KV kv;
  try {
    kv = preload_config(argc, argv);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }

  SimulateOpts sim;
  sim.from_kv(kv);
  auto* sim_cmd = app.add_subcommand("simulate", "Generate a synthetic event sequence");
  sim_cmd->add_option("--config", "Flat key=value config file (flags take precedence)");
  sim_cmd->add_option("--scene", sim.scene, "Scene: office | poster | checkerboard")
      ->check(CLI::IsMember({"office", "poster", "checkerboard"}));
  sim_cmd->add_option("--motion", sim.motion, "Motion: planar | 6dof")
      ->check(CLI::IsMember({"planar", "6dof"}));
  sim_cmd->add_option("--duration", sim.duration_s, "Duration [s]");
  sim_cmd->add_option("--seed", sim.seed, "Random seed");
  sim_cmd->add_option("--speed", sim.speed_mps, "Mean speed [m/s] (0 = per-motion default)");
  sim_cmd->add_option("--contrast", sim.contrast, "Contrast threshold (log intensity)");
  sim_cmd->add_option("--refractory-us", sim.refractory_us, "Per-pixel refractory period [us]");
  sim_cmd->add_option("--rate", sim.sample_rate_hz, "Pose sampling rate [Hz]");
  sim_cmd->add_option("--static-from", sim.static_from_s, "Frozen interval start [s]");
  sim_cmd->add_option("--static-to", sim.static_to_s, "Frozen interval end [s]");
  sim_cmd->add_option("--gradient-floor", sim.gradient_floor, "Semi-dense gradient threshold");
  sim_cmd->add_option("--max-points", sim.max_points, "Cap on map points (0 = no cap)");
  sim_cmd->add_option("--fx", sim.fx, "Focal length x [px]");
  sim_cmd->add_option("--fy", sim.fy, "Focal length y [px]");
  sim_cmd->add_option("--cx", sim.cx, "Principal point x [px]");
  sim_cmd->add_option("--cy", sim.cy, "Principal point y [px]");
  sim_cmd->add_option("--width", sim.width, "Sensor width [px]");
  sim_cmd->add_option("--height", sim.height, "Sensor height [px]");
  sim_cmd->add_option("--out", sim.out, "Output directory")->required();

  TrackOpts trk;
  trk.from_kv(kv);
  auto* trk_cmd = app.add_subcommand("track", "Track a sequence against a given map");
  trk_cmd->add_option("--config", "Flat key=value config file (flags take precedence)");
  add_track_options(trk_cmd, trk);
  trk_cmd->add_option("--dump-frames", trk.dump_frames, "Dump rendered frames as PGM here");
  trk_cmd->add_option("--out", trk.out, "Output directory")->required();

  EvaluateOpts ev;
  ev.from_kv(kv);
  auto* ev_cmd = app.add_subcommand("evaluate", "Mean ATE in translation of a trajectory");
  ev_cmd->add_option("--config", "Flat key=value config file (flags take precedence)");
  ev_cmd->add_option("--est", ev.est, "Estimated trajectory");
  ev_cmd->add_option("--gt", ev.gt, "Ground-truth trajectory");
  ev_cmd->add_option("--max-dt", ev.max_dt_ms, "Association window [ms]");
  ev_cmd->add_option("--out", ev.out, "Output directory for ate.csv (optional)");

  SweepOpts sw;
  sw.from_kv(kv);
  auto* sw_cmd = app.add_subcommand("sweep", "TSEM lambda_th sweep");
  sw_cmd->add_option("--config", "Flat key=value config file (flags take precedence)");
  add_track_options(sw_cmd, sw.track);
  sw_cmd->add_option("--gt", sw.gt, "Ground-truth trajectory");
  sw_cmd->add_option("--grid", sw.grid_csv, "Comma-separated lambda_th grid");
  sw_cmd->add_option("--trials", sw.trials, "Trials per grid point");
  sw_cmd->add_option("--seeds", sw.seeds_csv, "Comma-separated per-trial seeds");
  sw_cmd->add_option("--max-dt", sw.max_dt_ms, "Association window [ms]");
  sw_cmd->add_option("--out", sw.track.out, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (threads > 0) evt::par::set_max_threads(threads);

  try {
    if (sim_cmd->parsed()) return cmd_simulate(sim);
    if (trk_cmd->parsed()) {
      require_input(trk.events, "--events");
      require_input(trk.map, "--map");
      require_input(trk.calib, "--calib");
      return cmd_track(trk);
    }
    if (ev_cmd->parsed()) {
      require_input(ev.est, "--est");
      require_input(ev.gt, "--gt");
      return cmd_evaluate(ev);
    }
    if (sw_cmd->parsed()) {
      require_input(sw.track.events, "--events");
      require_input(sw.track.map, "--map");
      require_input(sw.track.calib, "--calib");
      require_input(sw.gt, "--gt");
      return cmd_sweep(sw);
    }
  } catch (const evt::NumericalError& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return 4;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 2;
}
