// Acceptance suite: one quantitative check per release criterion, each
// printed as a PASS/FAIL line with its measured numbers and wall time.
// Returns the number of failed criteria.

#include <algorithm>
#include <chrono>
#include <cstdarg>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>
#include <vector>

#include "evt/evaluation.hpp"
#include "evt/event_io.hpp"
#include "evt/parallel.hpp"
#include "evt/representations.hpp"
#include "evt/sequence.hpp"
#include "evt/simulator.hpp"
#include "evt/tracker.hpp"
#include "oracles.hpp"

using namespace evt;
using Clock = std::chrono::steady_clock;

namespace {

int g_failures = 0;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

void report(int index, const char* name, bool pass, const std::string& detail, double elapsed_s,
            double budget_s) {
  const bool in_budget = elapsed_s < budget_s;
  const bool ok = pass && in_budget;
  if (!ok) ++g_failures;
  std::printf("[%s] criterion %d: %s  (%s; %.2fs of %.0fs budget)\n", ok ? "PASS" : "FAIL", index,
              name, detail.c_str(), elapsed_s, budget_s);
  std::fflush(stdout);
}

std::string fmt(const char* f, ...) {
  char buf[512];
  va_list args;
  va_start(args, f);
  std::vsnprintf(buf, sizeof(buf), f, args);
  va_end(args);
  return buf;
}

// Shared synthetic rig: checkerboard wall at 3 m, 240x180 camera.
const CameraIntrinsics kCam{160.0, 160.0, 120.0, 90.0, 240, 180};

struct SyntheticRun {
  SyntheticScene scene;
  TrajectorySampler sampler;
  SimulatedSequence seq;
  PreparedTemplate tpl;

  SyntheticRun(std::uint64_t seed, double duration_s,
               std::optional<std::pair<double, double>> static_interval, int max_points)
      : scene(make_scene(SceneKind::Checkerboard, seed)),
        sampler([&] {
          TrajectorySpec spec;
          spec.kind = MotionKind::Planar;
          spec.duration_s = duration_s;
          spec.seed = seed;
          spec.static_interval_s = static_interval;
          return spec;
        }()),
        seq(generate_events(scene, sampler, ContrastModel{}, kCam)),
        tpl(PreparedTemplate::build(
            ground_truth_map(scene, kCam, seq.ground_truth[0].pose, 0.06, max_points).second,
            kCam)) {}
};

double mean_reprojection_delta(const TemplateView& view, const PoseSE3& a, const PoseSE3& b) {
  double sum = 0.0;
  int count = 0;
  for (const TemplatePoint& p : view.points) {
    const auto wa = warp(p.pixel, p.depth, a, kCam);
    const auto wb = warp(p.pixel, p.depth, b, kCam);
    if (!wa || !wb) continue;
    sum += (*wa - *wb).norm();
    ++count;
  }
  return count > 0 ? sum / count : 1e18;
}

PoseSE3 perturb_by_pixels(const TemplateView& view, const PoseSE3& base, double pixels,
                          std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Vec6 dir;
  for (int i = 0; i < 6; ++i) dir[i] = gauss(rng);
  dir.head<3>() *= 0.02;
  dir.tail<3>() *= 0.01;
  const double eps = 1e-4;
  const PoseSE3 probe = base * PoseSE3::exp(eps * dir);
  const double px_per_unit = mean_reprojection_delta(view, base, probe) / eps;
  return base * PoseSE3::exp((pixels / px_per_unit) * dir);
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v.empty() ? 0.0 : v[v.size() / 2];
}

// ---------------------------------------------------------------------------

void criterion_1_time_surface_values() {
  const auto t0 = Clock::now();
  TimeSurfaceState state(8, 8);
  const Event batch[] = {{0, 1, 1, 1}, {30000, 2, 2, 1}};
  state.update(batch);
  const RepresentationConfig cfg;  // delta = 30 ms
  const EventFrame ts = render_time_surface(state, 30000, cfg);
  const bool age_zero = ts.at(2, 2) == 255.0;
  const bool age_delta = std::abs(ts.at(1, 1) - 94.0) <= 1.0;
  const bool never = ts.at(5, 5) == 0.0;
  report(1, "time-surface point values", age_zero && age_delta && never,
         fmt("age0=%g ageDelta=%g never=%g", ts.at(2, 2), ts.at(1, 1), ts.at(5, 5)),
         seconds_since(t0), 1.0);
}

void criterion_2_jacobians() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(202);
  std::uniform_real_distribution<double> px(2.0, kCam.width - 3.0), py(2.0, kCam.height - 3.0),
      pd(0.5, 15.0);

  double worst_warp = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const Vec2 x(px(rng), py(rng));
    const double d = pd(rng);
    const Mat26 J = warp_jacobian(x, d, kCam);
    const Mat26 J_fd = oracle::warp_jacobian_fd(x, d, kCam);
    worst_warp = std::max(worst_warp, (J - J_fd).norm() / J.norm());
  }

  // Smooth synthetic frames: affine images make both the interpolation
  // and the 1-px central differences exact.
  double worst_res = 0.0;
  std::uniform_real_distribution<double> slope(-2.0, 2.0);
  for (int f = 0; f < 4; ++f) {
    EventFrame frame(kCam.width, kCam.height, 0, FrameKind::NegativeTimeSurface);
    const double sx = slope(rng), sy = slope(rng);
    for (int y = 0; y < frame.height; ++y) {
      for (int x = 0; x < frame.width; ++x) frame.at(x, y) = 120.0 + sx * x + sy * y;
    }
    for (int i = 0; i < 250; ++i) {
      const Vec2 x(px(rng), py(rng));
      const double d = pd(rng);
      const auto grad = image_gradient(frame, x);
      const Vec6 J = (grad->transpose() * warp_jacobian(x, d, kCam)).transpose();
      const Vec6 J_fd = oracle::residual_jacobian_fd(frame, x, d, kCam);
      worst_res = std::max(worst_res, (J - J_fd).norm() / J.norm());
    }
  }
  report(2, "warp and residual Jacobians vs finite differences",
         worst_warp < 1e-5 && worst_res < 1e-4,
         fmt("warp rel err %.2e (<1e-5), residual rel err %.2e (<1e-4)", worst_warp, worst_res),
         seconds_since(t0), 10.0);
}

void criterion_3_synthetic_convergence(const SyntheticRun& run) {
  const auto t0 = Clock::now();
  const RepresentationConfig repr;
  const TrackerConfig tracker;

  std::mt19937_64 rng(303);
  std::uniform_real_distribution<double> px_target(0.5, 2.0);
  TimeSurfaceState state(kCam.width, kCam.height);
  const Timestamp period = seconds_to_us(repr.ts_period_ms * 1e-3);
  const Timestamp start = run.seq.events.front().t;
  Timestamp prev = start - 1;

  int frames = 0, recovered = 0;
  Trajectory est;
  for (Timestamp trigger = start + period; frames < 100; trigger += period) {
    state.update(run.seq.events.in_window(prev, trigger));
    prev = trigger;
    const EventFrame ts = render_time_surface(state, trigger, repr);

    const PoseSE3 gt_cam = run.sampler.pose_at(us_to_seconds(trigger));
    const PoseSE3 gt_rel = gt_cam.inverse();  // reference camera at identity
    const PoseSE3 start_pose = perturb_by_pixels(run.tpl.view, gt_rel, px_target(rng), rng);
    const TrackResult result = track_ts(ts, run.tpl, start_pose, kCam, tracker, repr);

    const double err_px = mean_reprojection_delta(run.tpl.view, result.pose, gt_rel);
    if (err_px <= 0.5) ++recovered;
    ++frames;
    est.push_back({trigger, result.pose.inverse()});
  }

  const ATEReport ate = evaluate_ate(est, run.seq.ground_truth, seconds_to_us(5e-3));
  const double ate_limit_cm = 0.01 * run.scene.plane_depth_m * 100.0;  // 1% of plane depth
  report(3, "synthetic convergence of the TS tracker",
         recovered >= 95 && ate.mean_cm < ate_limit_cm,
         fmt("%d/100 frames within 0.5 px, mean ATE %.3f cm (limit %.1f)", recovered, ate.mean_cm,
             ate_limit_cm),
         seconds_since(t0), 60.0);
}

// Threshold for the switching experiment. The factor is resolution- and
// point-count-dependent; on this rig the healthy regime sits at
// lambda ~ 2e6..2e7 while the frozen interval decays to ~0, and any
// threshold in roughly [1e3, 1e6] separates the two. 3e4 is the pinned
// midpoint of that calibration valley.
constexpr double kStaticSwitchLambdaTh = 3e4;

void criterion_4_degeneracy_switching(const SyntheticRun& run, SequenceResult& out) {
  const auto t0 = Clock::now();
  SequenceConfig cfg;
  cfg.tracker.representation = Representation::TSEM;
  cfg.tracker.lambda_th = kStaticSwitchLambdaTh;
  const SequenceResult result = track_sequence(run.seq.events, run.tpl, kCam, cfg);

  const Timestamp lo = seconds_to_us(0.9), hi = seconds_to_us(1.4);
  int inside = 0, inside_em = 0, outside = 0, outside_ts = 0;
  std::vector<double> lambda_in, lambda_out;
  for (const FrameRecord& f : result.frames) {
    const bool in_interval = f.trigger_time > lo && f.trigger_time <= hi;
    if (in_interval) {
      ++inside;
      inside_em += !f.failed && f.representation_used == Representation::EM;
      lambda_in.push_back(f.lambda);
    } else {
      ++outside;
      outside_ts += !f.failed && f.representation_used == Representation::TS;
      lambda_out.push_back(f.lambda);
    }
  }
  const double em_frac_in = inside > 0 ? double(inside_em) / inside : 0.0;
  const double ts_frac_out = outside > 0 ? double(outside_ts) / outside : 0.0;
  const double med_in = median(lambda_in), med_out = median(lambda_out);
  report(4, "degeneracy-driven representation switching",
         em_frac_in >= 0.8 && ts_frac_out >= 0.95 && med_in < med_out,
         fmt("EM inside %.0f%% (>=80), TS outside %.0f%% (>=95), median lambda %.3g vs %.3g",
             100 * em_frac_in, 100 * ts_frac_out, med_in, med_out),
         seconds_since(t0), 120.0);
  out = result;
}

void criterion_5_equivalence_and_monotonicity(const SyntheticRun& static_run,
                                              const SequenceResult& switching,
                                              const SyntheticRun& benign) {
  const auto t0 = Clock::now();

  // (a) with the threshold at zero the degeneracy check can never fire,
  // and the pose sequence must equal the plain TS tracker bit for bit,
  // including on the hard sequence with the frozen interval.
  SequenceConfig ts_cfg;
  ts_cfg.tracker.representation = Representation::TS;
  SequenceConfig tsem_cfg;
  tsem_cfg.tracker.representation = Representation::TSEM;
  tsem_cfg.tracker.lambda_th = 0.0;
  const SequenceResult r_ts = track_sequence(static_run.seq.events, static_run.tpl, kCam, ts_cfg);
  const SequenceResult r_tsem =
      track_sequence(static_run.seq.events, static_run.tpl, kCam, tsem_cfg);

  bool identical = r_ts.frames.size() == r_tsem.frames.size();
  if (identical) {
    for (std::size_t i = 0; i < r_ts.frames.size(); ++i) {
      const Mat4 a = r_ts.frames[i].pose_cur_ref.matrix();
      const Mat4 b = r_tsem.frames[i].pose_cur_ref.matrix();
      if ((a - b).norm() != 0.0 ||
          (!r_tsem.frames[i].failed && r_tsem.frames[i].representation_used != Representation::TS)) {
        identical = false;
        break;
      }
    }
  }

  const auto grid = default_lambda_grid();

  // (b) switching is monotone on a fixed lambda sequence: raising the
  // threshold can only add frames below it.
  bool filter_monotone = true;
  int prev_count = -1;
  for (double th : grid) {
    int count = 0;
    for (const FrameRecord& f : switching.frames) count += f.lambda < th;
    if (count < prev_count) filter_monotone = false;
    prev_count = count;
  }

  // (c) end-to-end sweep over the paper grid on the benign sequence.
  Dataset dataset{benign.seq.events, benign.seq.ground_truth, SemiDenseMap{}, kCam};
  const PoseSE3 T_w_r = benign.tpl.view.reference_pose.inverse();
  for (const TemplatePoint& p : benign.tpl.view.points) {
    dataset.map.points.push_back({T_w_r.transform(back_project(p.pixel, p.depth, kCam))});
  }
  SequenceConfig sweep_cfg;
  const std::vector<SweepRow> rows =
      lambda_sweep(dataset, sweep_cfg, grid, 1, {}, seconds_to_us(5e-3));
  bool sweep_monotone = true;
  std::string fracs;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (i > 0 && rows[i].em_fraction < rows[i - 1].em_fraction - 1e-12) sweep_monotone = false;
    fracs += fmt("%.4f ", rows[i].em_fraction);
  }

  report(5, "TSEM(0) == TS and monotone EM usage over the sweep grid",
         identical && filter_monotone && sweep_monotone,
         fmt("bit-identical=%s, lambda filter monotone=%s, sweep em fractions [%s]",
             identical ? "yes" : "no", filter_monotone ? "yes" : "no", fracs.c_str()),
         seconds_since(t0), 240.0);
}

void criterion_6_eigenvalue_oracle() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(606);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    LinearizedSystem sys;
    sys.H = oracle::random_spd(rng);
    const double ours = degeneracy_factor(sys);
    const double ref = oracle::min_eigenvalue_inverse_power(sys.H);
    worst = std::max(worst, std::abs(ours - ref) / std::max(1.0, std::abs(ref)));
  }
  report(6, "minimum-eigenvalue factor vs inverse power iteration", worst < 1e-8,
         fmt("worst deviation %.2e (<1e-8) over 1000 SPD matrices", worst), seconds_since(t0), 5.0);
}

void criterion_7_ate_correctness() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(707);
  std::normal_distribution<double> gauss(0.0, 1.0);

  auto random_traj = [&](int n) {
    Trajectory t;
    for (int i = 0; i < n; ++i) {
      Vec6 theta;
      for (int k = 0; k < 6; ++k) theta[k] = 0.4 * gauss(rng);
      t.push_back({Timestamp(i) * 10000, PoseSE3::exp(theta)});
    }
    return t;
  };

  const Trajectory gt = random_traj(60);
  const Trajectory est = random_traj(60);
  const double base = evaluate_ate(est, gt, 1000).mean_cm;
  double worst_shift = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    Vec6 theta;
    for (int k = 0; k < 6; ++k) theta[k] = gauss(rng);
    const PoseSE3 T = PoseSE3::exp(theta);
    Trajectory moved;
    for (const TrajectorySample& s : est.samples()) moved.push_back({s.t, T * s.pose});
    worst_shift = std::max(worst_shift, std::abs(evaluate_ate(moved, gt, 1000).mean_cm - base));
  }

  const double self = evaluate_ate(est, est, 1000).mean_cm;

  // known-offset degenerate case against the independent least-squares
  // oracle
  const int n = 30;
  std::vector<PairedSample> pairs;
  Eigen::Matrix3Xd src(3, n), dst(3, n);
  for (int i = 0; i < n; ++i) {
    const Vec3 g(0.05 * i, 0.0, 0.0);
    const Vec3 e = g + Vec3(0.0, 0.01, 0.0);
    src.col(i) = e;
    dst.col(i) = g;
    pairs.push_back({Timestamp(i), Timestamp(i), e, g});
  }
  const double ours = mean_ate_translation(pairs, align_se3(pairs)).mean_cm;
  const Mat4 T_oracle = oracle::umeyama_alignment(src, dst);
  double oracle_cm = 0.0;
  for (int i = 0; i < n; ++i) {
    oracle_cm +=
        (T_oracle.block<3, 3>(0, 0) * src.col(i) + T_oracle.block<3, 1>(0, 3) - dst.col(i)).norm() *
        100.0;
  }
  oracle_cm /= n;

  report(7, "ATE invariance, identity, and least-squares oracle",
         worst_shift < 1e-9 && self == 0.0 && std::abs(ours - oracle_cm) < 1e-9,
         fmt("shift %.2e (<1e-9), self %.1f, offset case |%.3g - %.3g| cm", worst_shift, self, ours,
             oracle_cm),
         seconds_since(t0), 30.0);
}

void criterion_8_performance() {
  const auto t0 = Clock::now();
  const SyntheticRun run(808, 0.4, std::nullopt, 5000);
  const RepresentationConfig repr;
  const TrackerConfig tracker;

  // one TS frame a little into the sequence
  TimeSurfaceState state(kCam.width, kCam.height);
  const Timestamp trigger = run.seq.events.front().t + seconds_to_us(0.05);
  state.update(run.seq.events.in_window(run.seq.events.front().t - 1, trigger));
  const EventFrame prepared = gaussian_blur(negate(render_time_surface(state, trigger, repr)), repr);

  std::mt19937_64 rng(808);
  const PoseSE3 gt_rel = run.sampler.pose_at(us_to_seconds(trigger)).inverse();
  std::vector<double> align_ms;
  for (int i = 0; i < 11; ++i) {
    const PoseSE3 start = perturb_by_pixels(run.tpl.view, gt_rel, 1.5, rng);
    const auto a0 = Clock::now();
    (void)align(prepared, run.tpl, start, kCam, tracker);
    align_ms.push_back(1e3 * seconds_since(a0));
  }

  TimeSurfaceState big(346, 260);
  std::vector<Event> fills;
  std::mt19937_64 rng2(809);
  for (int i = 0; i < 50000; ++i) {
    fills.push_back({Timestamp(i), std::uint16_t(rng2() % 346), std::uint16_t(rng2() % 260), 1});
  }
  big.update(fills);
  std::vector<double> render_ms;
  for (int i = 0; i < 21; ++i) {
    const auto r0 = Clock::now();
    (void)render_time_surface(big, 100000 + i, repr);
    render_ms.push_back(1e3 * seconds_since(r0));
  }

  const double align_med = median(align_ms);
  const double render_med = median(render_ms);
  report(8, "alignment and rendering latency",
         align_med < 50.0 && render_med < 20.0 && run.tpl.view.points.size() >= 4000,
         fmt("align median %.2f ms (<50) on %zu points, TS render median %.2f ms (<20) at 346x260",
             align_med, run.tpl.view.points.size(), render_med),
         seconds_since(t0), 120.0);
}

void criterion_9_simulator_determinism() {
  const auto t0 = Clock::now();
  const SyntheticScene scene = make_scene(SceneKind::Checkerboard, 909);
  TrajectorySpec spec;
  spec.kind = MotionKind::Planar;
  spec.duration_s = 0.5;
  spec.seed = 909;
  const TrajectorySampler sampler(spec);
  const SimulatedSequence a = generate_events(scene, sampler, ContrastModel{}, kCam);
  const SimulatedSequence b = generate_events(scene, sampler, ContrastModel{}, kCam);

  const auto dir = std::filesystem::temp_directory_path();
  write_events(dir / "evt_acc_a.txt", a.events);
  write_events(dir / "evt_acc_b.txt", b.events);
  std::ifstream fa(dir / "evt_acc_a.txt", std::ios::binary), fb(dir / "evt_acc_b.txt", std::ios::binary);
  std::stringstream sa, sb;
  sa << fa.rdbuf();
  sb << fb.rdbuf();
  const bool byte_identical = sa.str() == sb.str() && !sa.str().empty();
  std::filesystem::remove(dir / "evt_acc_a.txt");
  std::filesystem::remove(dir / "evt_acc_b.txt");

  bool planar_exact = true;
  for (const TrajectorySample& s : a.ground_truth.samples()) {
    const Mat4 T = s.pose.matrix();
    if (T(2, 3) != 0.0 || T(0, 2) != 0.0 || T(1, 2) != 0.0 || T(2, 0) != 0.0 || T(2, 1) != 0.0) {
      planar_exact = false;
      break;
    }
  }
  report(9, "simulator determinism and exact planarity", byte_identical && planar_exact,
         fmt("event files byte-identical=%s (%zu events), planar constraint exact=%s",
             byte_identical ? "yes" : "no", a.events.size(), planar_exact ? "yes" : "no"),
         seconds_since(t0), 60.0);
}

}  // namespace

int main() {
  std::printf("evtrack acceptance suite\n");
  const auto t0 = Clock::now();

  criterion_1_time_surface_values();
  criterion_2_jacobians();

  {
    const SyntheticRun benign(1, 1.2, std::nullopt, 0);
    criterion_3_synthetic_convergence(benign);
    const SyntheticRun static_run(404, 2.0, std::make_pair(0.9, 1.4), 0);
    SequenceResult switching;
    criterion_4_degeneracy_switching(static_run, switching);
    criterion_5_equivalence_and_monotonicity(static_run, switching, benign);
  }

  criterion_6_eigenvalue_oracle();
  criterion_7_ate_correctness();
  criterion_8_performance();
  criterion_9_simulator_determinism();

  std::printf("%d criterion(s) failed, total %.1fs\n", g_failures, seconds_since(t0));
  return g_failures;
}
