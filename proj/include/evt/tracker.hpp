#pragma once

#include "evt/frame.hpp"
#include "evt/representations.hpp"
#include "evt/warp.hpp"

namespace evt {

enum class Representation { TS, EM, TSEM };

const char* to_string(Representation r);
Representation representation_from_string(const std::string& s);

struct TrackerConfig {
  double huber_scale = 10.0;    // intensity units
  int max_iterations = 50;
  double step_tolerance = 1e-6;
  double lambda_th = 31.0;      // degeneracy threshold on min eigenvalue
  Representation representation = Representation::TSEM;
  int em_event_count = 4000;

  void validate() const;
};

/// Gauss-Newton normal equations of the alignment objective at one
/// linearization point: H * delta = g.
struct LinearizedSystem {
  Mat66 H = Mat66::Zero();
  Vec6 g = Vec6::Zero();
  double cost = 0.0;
  int valid_count = 0;
};

struct TrackResult {
  PoseSE3 pose;  // reference -> current
  Representation representation_used = Representation::TS;
  double lambda = 0.0;  // min eigenvalue of H at the initial guess
  int iterations = 0;
  double final_cost = 0.0;
  int valid_count = 0;  // residuals inside bounds at the final linearization
  bool converged = false;
};

/// Builds H, g, cost over all template points: residual r is the negative
/// blurred frame sampled at the warped position, the row Jacobian chains
/// the image gradient with the precomputed fixed-point warp Jacobian, and
/// Huber IRLS weights keep H positive semi-definite. Points that warp out
/// of bounds or have no valid gradient are skipped.
/// Throws InsufficientConstraintsError when fewer than 6 residuals remain.
LinearizedSystem linearize(const EventFrame& frame, const PreparedTemplate& tpl,
                           const PoseSE3& T_cur_ref, const CameraIntrinsics& K,
                           const TrackerConfig& cfg);

/// Minimum eigenvalue of H, clamped at zero.
double degeneracy_factor(const LinearizedSystem& system);

/// Iterates linearize / solve / compose-on-the-right until the step norm
/// drops below tolerance or the iteration cap is hit. A step that would
/// increase the cost is rejected and terminates the loop.
/// frame must already be negative and blurred.
TrackResult align(const EventFrame& frame, const PreparedTemplate& tpl, const PoseSE3& initial,
                  const CameraIntrinsics& K, const TrackerConfig& cfg);

/// Negates and blurs the raw time surface, then aligns.
TrackResult track_ts(const EventFrame& ts_frame, const PreparedTemplate& tpl,
                     const PoseSE3& initial, const CameraIntrinsics& K, const TrackerConfig& cfg,
                     const RepresentationConfig& repr);

/// Negates and blurs the raw event map, then aligns.
TrackResult track_em(const EventFrame& em_frame, const PreparedTemplate& tpl,
                     const PoseSE3& initial, const CameraIntrinsics& K, const TrackerConfig& cfg,
                     const RepresentationConfig& repr);

/// Degeneracy-checked tracker: evaluates the factor lambda on the time
/// surface linearization at the initial guess, before any optimization.
/// Runs the TS tracker when lambda >= lambda_th and falls back to the EM
/// tracker otherwise; if the chosen representation cannot be linearized
/// the other one is tried. Throws TrackingError when both fail.
TrackResult track_tsem(const EventFrame& ts_frame, const EventFrame& em_frame,
                       const PreparedTemplate& tpl, const PoseSE3& initial,
                       const CameraIntrinsics& K, const TrackerConfig& cfg,
                       const RepresentationConfig& repr);

}  // namespace evt
