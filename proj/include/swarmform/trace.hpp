#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "swarmform/kinematics.hpp"
#include "swarmform/pid.hpp"
#include "swarmform/scenario.hpp"

namespace swarmform {

/// State and decision of one robot at one step. Followers without a target
/// carry NaN errors.
struct TraceRecord {
  std::int64_t step = 0;
  int robot_id = 0;
  Pose2d pose;
  Twist2d twist;
  TrackingError3d error = TrackingError3d::Zero();
  double err_norm = 0;
  GainVector9d gains = GainVector9d::Zero();
  double best_fitness = 0;
  int target_id = -1;  // not serialized
};

struct Trace {
  ScenarioConfig config;
  int leader_id = 1;
  std::vector<int> robot_ids;
  std::vector<TraceRecord> records;  // step-major, robot order within a step

  std::int64_t steps() const;
  std::size_t robots() const { return robot_ids.size(); }
  /// Record of the robot at position `slot` of robot_ids at `step`.
  const TraceRecord& at(std::int64_t step, std::size_t slot) const;
  /// Error-norm series of one robot, one entry per step.
  std::vector<double> error_series(int robot_id) const;
};

/// Column header of the trace CSV.
extern const char* const kTraceHeader;

void write_trace_csv(std::ostream& os, const Trace& trace);
std::string format_trace_csv(const Trace& trace);

/// Reads a trace CSV written by write_trace_csv. The config is left default.
Trace read_trace_csv(std::istream& is, int leader_id);

/// First step from which every follower's error norm stays below `threshold`
/// for `dwell` consecutive steps. NaN errors count as above threshold.
std::optional<std::int64_t> convergence_time(const Trace& trace,
                                             double threshold, int dwell);

/// Mean follower error norm over steps >= from_step.
double mean_error_from(const Trace& trace, std::int64_t from_step);

}  // namespace swarmform
