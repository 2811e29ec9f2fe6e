#pragma once

#include <filesystem>
#include <vector>

#include "evt/se3.hpp"
#include "evt/types.hpp"

namespace evt {

struct TrajectorySample {
  Timestamp t;
  PoseSE3 pose;  // camera-in-world
};

/// Time-ordered pose samples. Timestamps are strictly increasing.
class Trajectory {
 public:
  Trajectory() = default;
  explicit Trajectory(std::vector<TrajectorySample> samples);

  void push_back(const TrajectorySample& s);
  std::size_t size() const { return samples_.size(); }
  bool empty() const { return samples_.empty(); }
  const TrajectorySample& operator[](std::size_t i) const { return samples_[i]; }
  const std::vector<TrajectorySample>& samples() const { return samples_; }

 private:
  std::vector<TrajectorySample> samples_;
};

/// File format: one sample per line, "t_sec tx ty tz qx qy qz qw"
/// (translation in meters, unit quaternion scalar-last).
Trajectory load_trajectory(const std::filesystem::path& path);
void save_trajectory(const std::filesystem::path& path, const Trajectory& trajectory);

}  // namespace evt
