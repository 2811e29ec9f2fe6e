#include "evt/evaluation.hpp"

#include <Eigen/Geometry>
#include <Eigen/SVD>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "evt/errors.hpp"

namespace evt {

Trajectory::Trajectory(std::vector<TrajectorySample> samples) : samples_(std::move(samples)) {
  for (std::size_t i = 1; i < samples_.size(); ++i) {
    if (samples_[i].t <= samples_[i - 1].t) {
      throw std::invalid_argument("Trajectory: timestamps must be strictly increasing");
    }
  }
}

void Trajectory::push_back(const TrajectorySample& s) {
  if (!samples_.empty() && s.t <= samples_.back().t) {
    throw std::invalid_argument("Trajectory: timestamps must be strictly increasing");
  }
  samples_.push_back(s);
}

Trajectory load_trajectory(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open trajectory file: " + path.string());
  Trajectory traj;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream ss(line);
    double t, tx, ty, tz, qx, qy, qz, qw;
    if (!(ss >> t >> tx >> ty >> tz >> qx >> qy >> qz >> qw)) {
      throw ParseError("malformed trajectory line", line_no);
    }
    Eigen::Quaterniond q(qw, qx, qy, qz);
    if (std::abs(q.norm() - 1.0) > 1e-6) throw ParseError("quaternion is not unit", line_no);
    q.normalize();
    Mat4 T = Mat4::Identity();
    T.block<3, 3>(0, 0) = q.toRotationMatrix();
    T.block<3, 1>(0, 3) = Vec3(tx, ty, tz);
    try {
      traj.push_back({seconds_to_us(t), PoseSE3::from_matrix(T)});
    } catch (const std::invalid_argument& e) {
      throw ParseError(e.what(), line_no);
    }
  }
  return traj;
}

void save_trajectory(const std::filesystem::path& path, const Trajectory& trajectory) {
  std::FILE* f = std::fopen(path.string().c_str(), "w");
  if (!f) throw std::runtime_error("cannot write trajectory file: " + path.string());
  for (const TrajectorySample& s : trajectory.samples()) {
    const Eigen::Quaterniond q(Mat3(s.pose.rotation()));
    const Vec3 t = s.pose.translation();
    std::fprintf(f, "%.6f %.9f %.9f %.9f %.9f %.9f %.9f %.9f\n", us_to_seconds(s.t), t.x(), t.y(),
                 t.z(), q.x(), q.y(), q.z(), q.w());
  }
  std::fclose(f);
}

std::vector<PairedSample> associate(const Trajectory& est, const Trajectory& gt, Timestamp max_dt) {
  if (max_dt < 0) throw std::invalid_argument("associate: max_dt must be non-negative");
  std::vector<PairedSample> pairs;
  if (!gt.empty()) {
    std::size_t j = 0;
    for (const TrajectorySample& e : est.samples()) {
      while (j + 1 < gt.size() && std::abs(gt[j + 1].t - e.t) <= std::abs(gt[j].t - e.t)) ++j;
      if (std::abs(gt[j].t - e.t) <= max_dt) {
        pairs.push_back({e.t, gt[j].t, e.pose.translation(), gt[j].pose.translation()});
      }
    }
  }
  if (pairs.size() < 2) throw std::runtime_error("associate: fewer than 2 matched samples");
  return pairs;
}

PoseSE3 align_se3(std::span<const PairedSample> pairs) {
  if (pairs.size() < 2) throw std::invalid_argument("align_se3: need at least 2 pairs");
  // Bitwise-identical clouds align by the identity exactly; skipping the
  // SVD keeps ATE(est, est) at exactly zero.
  bool identical = true;
  for (const PairedSample& p : pairs) {
    if (!(p.est_pos - p.gt_pos).isZero(0.0)) {
      identical = false;
      break;
    }
  }
  if (identical) return PoseSE3();
  const double n = static_cast<double>(pairs.size());
  Vec3 mean_est = Vec3::Zero(), mean_gt = Vec3::Zero();
  for (const PairedSample& p : pairs) {
    mean_est += p.est_pos;
    mean_gt += p.gt_pos;
  }
  mean_est /= n;
  mean_gt /= n;

  Mat3 cov = Mat3::Zero();
  for (const PairedSample& p : pairs) {
    cov += (p.gt_pos - mean_gt) * (p.est_pos - mean_est).transpose();
  }
  cov /= n;

  Eigen::JacobiSVD<Mat3> svd(cov, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 S = Mat3::Identity();
  if (svd.matrixU().determinant() * svd.matrixV().determinant() < 0.0) S(2, 2) = -1.0;
  const Mat3 R = svd.matrixU() * S * svd.matrixV().transpose();
  const Vec3 t = mean_gt - R * mean_est;

  Mat4 T = Mat4::Identity();
  T.block<3, 3>(0, 0) = R;
  T.block<3, 1>(0, 3) = t;
  return PoseSE3::from_matrix(T);
}

ATEReport mean_ate_translation(std::span<const PairedSample> pairs, const PoseSE3& alignment) {
  ATEReport report;
  report.alignment = alignment;
  report.matched = static_cast<int>(pairs.size());
  report.errors_cm.reserve(pairs.size());
  double sum = 0.0;
  for (const PairedSample& p : pairs) {
    const double err_cm = (alignment.transform(p.est_pos) - p.gt_pos).norm() * 100.0;
    report.errors_cm.push_back(err_cm);
    sum += err_cm;
  }
  report.mean_cm = pairs.empty() ? 0.0 : sum / static_cast<double>(pairs.size());
  return report;
}

ATEReport evaluate_ate(const Trajectory& est, const Trajectory& gt, Timestamp max_dt) {
  const auto pairs = associate(est, gt, max_dt);
  return mean_ate_translation(pairs, align_se3(pairs));
}

TrialsReport run_trials(const Dataset& dataset, const SequenceConfig& cfg, int trials,
                        std::span<const std::uint64_t> seeds, Timestamp max_dt) {
  if (trials < 1) throw std::invalid_argument("run_trials: need at least one trial");
  const PoseSE3 reference = dataset.ground_truth.empty() ? PoseSE3() : dataset.ground_truth[0].pose;
  const PreparedTemplate tpl = PreparedTemplate::build(
      make_template(dataset.map, reference.inverse(), dataset.K), dataset.K);

  TrialsReport report;
  double em_sum = 0.0;
  for (int i = 0; i < trials; ++i) {
    SequenceConfig trial_cfg = cfg;
    trial_cfg.perturbation_seed = i < static_cast<int>(seeds.size()) ? seeds[i] : i + 1;
    const SequenceResult run = track_sequence(dataset.events, tpl, dataset.K, trial_cfg);
    const ATEReport ate = evaluate_ate(run.trajectory, dataset.ground_truth, max_dt);
    report.per_trial_ate_cm.push_back(ate.mean_cm);
    report.failed_frames += run.failed_frames;
    em_sum += run.em_fraction;
  }
  for (double v : report.per_trial_ate_cm) report.mean_ate_cm += v;
  report.mean_ate_cm /= static_cast<double>(trials);
  report.em_fraction = em_sum / trials;
  return report;
}

std::vector<double> default_lambda_grid() { return {10.0, 31.0, 100.0, 158.0, 251.0, 400.0}; }

std::vector<SweepRow> lambda_sweep(const Dataset& dataset, SequenceConfig cfg,
                                   std::span<const double> grid, int trials,
                                   std::span<const std::uint64_t> seeds, Timestamp max_dt) {
  cfg.tracker.representation = Representation::TSEM;
  std::vector<SweepRow> rows;
  rows.reserve(grid.size());
  for (double lambda_th : grid) {
    SequenceConfig run_cfg = cfg;
    run_cfg.tracker.lambda_th = lambda_th;
    const TrialsReport report = run_trials(dataset, run_cfg, trials, seeds, max_dt);
    rows.push_back({lambda_th, report.mean_ate_cm, report.em_fraction, trials});
  }
  return rows;
}

void write_sweep_csv(const std::filesystem::path& path, std::span<const SweepRow> rows) {
  std::FILE* f = std::fopen(path.string().c_str(), "w");
  if (!f) throw std::runtime_error("cannot write sweep csv: " + path.string());
  std::fprintf(f, "lambda_th,mean_ate_cm,em_fraction,trials\n");
  for (const SweepRow& r : rows) {
    std::fprintf(f, "%.9g,%.9g,%.9g,%d\n", r.lambda_th, r.mean_ate_cm, r.em_fraction, r.trials);
  }
  std::fclose(f);
}

}  // namespace evt
