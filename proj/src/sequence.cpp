#include "evt/sequence.hpp"

#include <cstdio>
#include <random>

#include "evt/errors.hpp"

namespace evt {

SequenceResult track_sequence(const EventStream& events, const PreparedTemplate& tpl,
                              const CameraIntrinsics& K, const SequenceConfig& cfg) {
  cfg.repr.validate();
  cfg.tracker.validate();
  if (events.empty()) throw std::invalid_argument("track_sequence: empty event stream");

  const Timestamp period = seconds_to_us(cfg.repr.ts_period_ms * 1e-3);
  const Timestamp start = events.front().t;
  const Timestamp end = events.back().t;

  TimeSurfaceState state(events.width(), events.height());
  std::mt19937_64 rng(cfg.perturbation_seed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  SequenceResult result;
  const PoseSE3 T_w_r = tpl.view.reference_pose.inverse();
  PoseSE3 pose;  // reference -> current, previous frame's estimate
  Timestamp prev_trigger = start - 1;
  int em_frames = 0;
  int frame_index = 0;

  for (Timestamp trigger = start + period; trigger <= end; trigger += period, ++frame_index) {
    state.update(events.in_window(prev_trigger, trigger));
    prev_trigger = trigger;

    PoseSE3 initial = pose;
    if (cfg.init_perturbation > 0.0) {
      Vec6 noise;
      for (int i = 0; i < 6; ++i) noise[i] = cfg.init_perturbation * gauss(rng);
      initial = initial * PoseSE3::exp(noise);
    }

    FrameRecord rec;
    rec.trigger_time = trigger;
    try {
      const bool needs_ts = cfg.tracker.representation != Representation::EM;
      const bool needs_em = cfg.tracker.representation != Representation::TS;
      EventFrame ts, em;
      if (needs_ts) ts = render_time_surface(state, trigger, cfg.repr);
      if (needs_em) {
        em = render_event_map(events.last_n(trigger, cfg.tracker.em_event_count),
                              events.width(), events.height());
      }

      TrackResult tracked;
      switch (cfg.tracker.representation) {
        case Representation::TS:
          tracked = track_ts(ts, tpl, initial, K, cfg.tracker, cfg.repr);
          break;
        case Representation::EM:
          tracked = track_em(em, tpl, initial, K, cfg.tracker, cfg.repr);
          break;
        case Representation::TSEM:
          tracked = track_tsem(ts, em, tpl, initial, K, cfg.tracker, cfg.repr);
          break;
      }
      rec.representation_used = tracked.representation_used;
      rec.lambda = tracked.lambda;
      rec.iterations = tracked.iterations;
      rec.final_cost = tracked.final_cost;
      rec.valid_count = tracked.valid_count;
      rec.converged = tracked.converged;
      rec.pose_cur_ref = tracked.pose;
      pose = tracked.pose;
      if (tracked.representation_used == Representation::EM) ++em_frames;

      if (cfg.dump_dir) {
        const EventFrame& used = tracked.representation_used == Representation::EM ? em : ts;
        char name[64];
        std::snprintf(name, sizeof(name), "frame_%06d_%s.pgm", frame_index, to_string(used.kind));
        write_pgm(*cfg.dump_dir / name, used);
      }
    } catch (const InsufficientConstraintsError&) {
      rec.failed = true;
    } catch (const TrackingError&) {
      rec.failed = true;
    }
    if (rec.failed) {
      // pose held at this frame's initial guess
      rec.pose_cur_ref = initial;
      rec.converged = false;
      pose = initial;
      ++result.failed_frames;
    }
    result.frames.push_back(rec);
    result.trajectory.push_back({trigger, T_w_r * rec.pose_cur_ref.inverse()});
  }

  const int tracked_frames = static_cast<int>(result.frames.size()) - result.failed_frames;
  result.em_fraction = tracked_frames > 0 ? static_cast<double>(em_frames) / tracked_frames : 0.0;
  return result;
}

void write_metrics_csv(const std::filesystem::path& path, const SequenceResult& result) {
  std::FILE* f = std::fopen(path.string().c_str(), "w");
  if (!f) throw std::runtime_error("cannot write metrics csv: " + path.string());
  std::fprintf(f, "trigger_time,representation_used,lambda,iterations,final_cost,valid_count\n");
  for (const FrameRecord& r : result.frames) {
    std::fprintf(f, "%.6f,%s,%.9g,%d,%.9g,%d\n", us_to_seconds(r.trigger_time),
                 r.failed ? "failed" : to_string(r.representation_used), r.lambda, r.iterations,
                 r.final_cost, r.valid_count);
  }
  std::fclose(f);
}

}  // namespace evt
