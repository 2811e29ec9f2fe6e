#pragma once

#include <span>

#include "evt/evaluation_types.hpp"
#include "evt/sequence.hpp"

namespace evt {

/// One associated estimate/ground-truth pair (positions in meters).
struct PairedSample {
  Timestamp t_est;
  Timestamp t_gt;
  Vec3 est_pos;
  Vec3 gt_pos;
};

/// Nearest-timestamp pairing within max_dt; unmatched samples are
/// dropped. Throws std::runtime_error when fewer than 2 pairs survive.
std::vector<PairedSample> associate(const Trajectory& est, const Trajectory& gt, Timestamp max_dt);

/// Least-squares rigid alignment (rotation + translation, no scale) of
/// the estimated positions onto the ground truth: orthogonal Procrustes
/// with the determinant correction for degenerate point sets.
PoseSE3 align_se3(std::span<const PairedSample> pairs);

struct ATEReport {
  double mean_cm = 0.0;
  std::vector<double> errors_cm;
  int matched = 0;
  PoseSE3 alignment;
};

/// Mean Euclidean distance between aligned estimated and ground-truth
/// positions, in centimeters.
ATEReport mean_ate_translation(std::span<const PairedSample> pairs, const PoseSE3& alignment);

/// associate + align_se3 + mean_ate_translation.
ATEReport evaluate_ate(const Trajectory& est, const Trajectory& gt, Timestamp max_dt);

/// In-memory dataset for the trial/sweep harnesses.
struct Dataset {
  EventStream events;
  Trajectory ground_truth;
  SemiDenseMap map;
  CameraIntrinsics K;
};

struct TrialsReport {
  std::vector<double> per_trial_ate_cm;
  double mean_ate_cm = 0.0;
  double em_fraction = 0.0;  // mean over trials
  int failed_frames = 0;     // total over trials
};

/// Runs the tracking pipeline once per trial. Trial i uses seeds[i] for
/// the (optional) initial-guess perturbation; with perturbation disabled
/// all trials are identical. Deterministic given the seeds.
TrialsReport run_trials(const Dataset& dataset, const SequenceConfig& cfg, int trials,
                        std::span<const std::uint64_t> seeds, Timestamp max_dt);

struct SweepRow {
  double lambda_th;
  double mean_ate_cm;
  double em_fraction;
  int trials;
};

/// Default sweep grid {10, 31, 100, 158, 251, 400}.
std::vector<double> default_lambda_grid();

/// One TSEM trial set per threshold in the grid.
std::vector<SweepRow> lambda_sweep(const Dataset& dataset, SequenceConfig cfg,
                                   std::span<const double> grid, int trials,
                                   std::span<const std::uint64_t> seeds, Timestamp max_dt);

/// CSV with header "lambda_th,mean_ate_cm,em_fraction,trials".
void write_sweep_csv(const std::filesystem::path& path, std::span<const SweepRow> rows);

}  // namespace evt
