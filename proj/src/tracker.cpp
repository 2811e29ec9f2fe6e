#include "evt/tracker.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <cmath>

#include "evt/errors.hpp"
#include "evt/parallel.hpp"

namespace evt {

const char* to_string(Representation r) {
  switch (r) {
    case Representation::TS: return "ts";
    case Representation::EM: return "em";
    case Representation::TSEM: return "tsem";
  }
  return "?";
}

Representation representation_from_string(const std::string& s) {
  if (s == "ts") return Representation::TS;
  if (s == "em") return Representation::EM;
  if (s == "tsem") return Representation::TSEM;
  throw std::invalid_argument("unknown representation: " + s);
}

void TrackerConfig::validate() const {
  if (!(huber_scale > 0.0)) throw std::invalid_argument("huber_scale must be positive");
  if (max_iterations < 1) throw std::invalid_argument("max_iterations must be >= 1");
  if (!(step_tolerance > 0.0)) throw std::invalid_argument("step_tolerance must be positive");
  if (!(lambda_th >= 0.0)) throw std::invalid_argument("lambda_th must be non-negative");
  if (em_event_count <= 0) throw std::invalid_argument("em_event_count must be positive");
}

namespace {

double huber_weight(double r, double k) {
  const double a = std::abs(r);
  return a <= k ? 1.0 : k / a;
}

double huber_cost(double r, double k) {
  const double a = std::abs(r);
  return a <= k ? 0.5 * r * r : k * (a - 0.5 * k);
}

struct BlockAccumulator {
  Mat66 H = Mat66::Zero();
  Vec6 g = Vec6::Zero();
  double cost = 0.0;
  int valid = 0;
};

// Points are reduced in fixed-size blocks and the block partials are
// folded in index order, so the floating-point summation order does not
// depend on the thread count.
constexpr int kReductionBlock = 256;

}  // namespace

LinearizedSystem linearize(const EventFrame& frame, const PreparedTemplate& tpl,
                           const PoseSE3& T_cur_ref, const CameraIntrinsics& K,
                           const TrackerConfig& cfg) {
  if (!is_negative(frame.kind)) {
    throw std::invalid_argument("linearize: frame must be a negative (blurred) representation");
  }
  const auto& points = tpl.view.points;
  const int n = static_cast<int>(points.size());
  const int blocks = (n + kReductionBlock - 1) / kReductionBlock;
  std::vector<BlockAccumulator> partial(blocks);

#ifdef EVT_HAVE_OPENMP
#pragma omp parallel for schedule(static) num_threads(par::max_threads()) if (par::enabled())
#endif
  for (int b = 0; b < blocks; ++b) {
    BlockAccumulator acc;
    const int lo = b * kReductionBlock;
    const int hi = std::min(n, lo + kReductionBlock);
    for (int i = lo; i < hi; ++i) {
      const auto warped = warp(points[i].pixel, points[i].depth, T_cur_ref, K);
      if (!warped) continue;
      const auto value = bilinear_sample(frame, *warped);
      if (!value) continue;
      const auto grad = image_gradient(frame, *warped);
      if (!grad) continue;
      const double r = *value;
      const double w = huber_weight(r, cfg.huber_scale);
      const Vec6 J = (grad->transpose() * tpl.jacobians[i]).transpose();
      acc.H.noalias() += w * (J * J.transpose());
      acc.g.noalias() -= w * J * r;
      acc.cost += huber_cost(r, cfg.huber_scale);
      ++acc.valid;
    }
    partial[b] = acc;
  }

  LinearizedSystem sys;
  for (const BlockAccumulator& acc : partial) {
    sys.H += acc.H;
    sys.g += acc.g;
    sys.cost += acc.cost;
    sys.valid_count += acc.valid;
  }
  if (sys.valid_count < 6) {
    throw InsufficientConstraintsError("linearize: only " + std::to_string(sys.valid_count) +
                                       " valid residuals");
  }
  return sys;
}

double degeneracy_factor(const LinearizedSystem& system) {
  Eigen::SelfAdjointEigenSolver<Mat66> solver(system.H, Eigen::EigenvaluesOnly);
  return std::max(0.0, solver.eigenvalues()(0));
}

namespace {

Vec6 solve_step(const LinearizedSystem& sys) {
  if (sys.g.isZero(0.0)) return Vec6::Zero();
  // Tiny diagonal damping for conditioning only; this is not a
  // Levenberg-Marquardt schedule.
  const double damping = 1e-9 * sys.H.trace() / 6.0;
  Mat66 H = sys.H;
  H.diagonal().array() += damping;
  const Vec6 step = H.ldlt().solve(sys.g);
  if (!step.allFinite()) throw NumericalError("align: non-finite Gauss-Newton step");
  return step;
}

}  // namespace

TrackResult align(const EventFrame& frame, const PreparedTemplate& tpl, const PoseSE3& initial,
                  const CameraIntrinsics& K, const TrackerConfig& cfg) {
  TrackResult result;
  result.representation_used =
      frame.kind == FrameKind::NegativeEventMap ? Representation::EM : Representation::TS;

  PoseSE3 pose = initial;
  LinearizedSystem sys = linearize(frame, tpl, pose, K, cfg);
  if (!std::isfinite(sys.cost)) throw NumericalError("align: non-finite cost");
  result.lambda = degeneracy_factor(sys);

  for (int it = 0; it < cfg.max_iterations; ++it) {
    result.iterations = it + 1;
    const Vec6 step = solve_step(sys);
    if (step.norm() < cfg.step_tolerance) {
      result.converged = true;
      break;
    }
    // Backtrack along the Gauss-Newton direction until the cost drops.
    // With a nonzero residual floor the full step overshoots the valley.
    bool accepted = false;
    Vec6 trial = step;
    for (int halving = 0; halving < 8 && !accepted; ++halving, trial *= 0.5) {
      const PoseSE3 candidate = pose * PoseSE3::exp(trial);
      LinearizedSystem next;
      try {
        next = linearize(frame, tpl, candidate, K, cfg);
      } catch (const InsufficientConstraintsError&) {
        continue;  // the trial step pushed the template out of view
      }
      if (!std::isfinite(next.cost) || next.cost >= sys.cost) continue;
      pose = candidate;
      sys = next;
      accepted = true;
    }
    if (!accepted) {
      // no descent left at step-tolerance resolution
      result.converged = true;
      break;
    }
    if (it + 1 == cfg.max_iterations) result.converged = false;
  }

  result.pose = pose;
  result.final_cost = sys.cost;
  result.valid_count = sys.valid_count;
  return result;
}

TrackResult track_ts(const EventFrame& ts_frame, const PreparedTemplate& tpl,
                     const PoseSE3& initial, const CameraIntrinsics& K, const TrackerConfig& cfg,
                     const RepresentationConfig& repr) {
  if (ts_frame.kind != FrameKind::TimeSurface) throw std::invalid_argument("track_ts: expected a TS frame");
  const EventFrame prepared = gaussian_blur(negate(ts_frame), repr);
  TrackResult result = align(prepared, tpl, initial, K, cfg);
  result.representation_used = Representation::TS;
  return result;
}

TrackResult track_em(const EventFrame& em_frame, const PreparedTemplate& tpl,
                     const PoseSE3& initial, const CameraIntrinsics& K, const TrackerConfig& cfg,
                     const RepresentationConfig& repr) {
  if (em_frame.kind != FrameKind::EventMap) throw std::invalid_argument("track_em: expected an EM frame");
  const EventFrame prepared = gaussian_blur(negate(em_frame), repr);
  TrackResult result = align(prepared, tpl, initial, K, cfg);
  result.representation_used = Representation::EM;
  return result;
}

TrackResult track_tsem(const EventFrame& ts_frame, const EventFrame& em_frame,
                       const PreparedTemplate& tpl, const PoseSE3& initial,
                       const CameraIntrinsics& K, const TrackerConfig& cfg,
                       const RepresentationConfig& repr) {
  if (em_frame.trigger_time > ts_frame.trigger_time) {
    throw std::invalid_argument("track_tsem: event map postdates the time surface");
  }

  // The degeneracy check happens before any optimization, on the TS
  // linearization at the initial guess.
  double lambda = 0.0;
  bool ts_usable = true;
  const EventFrame neg_ts = gaussian_blur(negate(ts_frame), repr);
  try {
    lambda = degeneracy_factor(linearize(neg_ts, tpl, initial, K, cfg));
  } catch (const InsufficientConstraintsError&) {
    ts_usable = false;
  }

  if (ts_usable && lambda >= cfg.lambda_th) {
    try {
      TrackResult result = align(neg_ts, tpl, initial, K, cfg);
      result.representation_used = Representation::TS;
      result.lambda = lambda;
      return result;
    } catch (const InsufficientConstraintsError&) {
      ts_usable = false;
    }
  }

  try {
    TrackResult result = track_em(em_frame, tpl, initial, K, cfg, repr);
    result.lambda = lambda;
    return result;
  } catch (const InsufficientConstraintsError&) {
    if (ts_usable && lambda < cfg.lambda_th) {
      try {
        TrackResult result = align(neg_ts, tpl, initial, K, cfg);
        result.representation_used = Representation::TS;
        result.lambda = lambda;
        return result;
      } catch (const InsufficientConstraintsError&) {
      }
    }
    throw TrackingError("track_tsem: both representations have insufficient constraints");
  }
}

}  // namespace evt
