#pragma once

#include <filesystem>
#include <optional>

#include "evt/evaluation_types.hpp"
#include "evt/event.hpp"
#include "evt/tracker.hpp"

namespace evt {

/// One tracked frame of a sequence run, as written to the metrics CSV.
struct FrameRecord {
  Timestamp trigger_time = 0;
  Representation representation_used = Representation::TS;
  double lambda = 0.0;
  int iterations = 0;
  double final_cost = 0.0;
  int valid_count = 0;
  bool converged = false;
  bool failed = false;      // neither representation could be linearized
  PoseSE3 pose_cur_ref;     // reference -> current at the trigger
};

struct SequenceConfig {
  RepresentationConfig repr;
  TrackerConfig tracker;
  /// Standard deviation of a seeded tangent perturbation added to each
  /// frame's initial guess. 0 disables it; this is the only source of
  /// across-trial variation.
  double init_perturbation = 0.0;
  std::uint64_t perturbation_seed = 0;
  /// When set, every prepared frame is dumped as a PGM into this directory.
  std::optional<std::filesystem::path> dump_dir;
};

struct SequenceResult {
  std::vector<FrameRecord> frames;
  Trajectory trajectory;  // camera-in-world samples at the trigger times
  int failed_frames = 0;
  double em_fraction = 0.0;  // fraction of non-failed frames tracked on the EM
};

/// Runs the configured tracker over synchronous triggers spaced
/// ts_period_ms apart, starting one period after the first event. The
/// initial guess of each frame is the previous frame's optimized pose
/// (constant-position model); the first frame starts at identity.
SequenceResult track_sequence(const EventStream& events, const PreparedTemplate& tpl,
                              const CameraIntrinsics& K, const SequenceConfig& cfg);

/// CSV: trigger_time,representation_used,lambda,iterations,final_cost,valid_count
void write_metrics_csv(const std::filesystem::path& path, const SequenceResult& result);

}  // namespace evt
