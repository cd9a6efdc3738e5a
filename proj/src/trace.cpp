#include "swarmform/trace.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace swarmform {

const char* const kTraceHeader =
    "step,robot_id,x,y,theta,v,omega,e_x,e_y,e_theta,err_norm,"
    "kx_p,kx_i,kx_d,ky_p,ky_i,ky_d,kth_p,kth_i,kth_d,best_fitness";

std::int64_t Trace::steps() const {
  return robot_ids.empty()
             ? 0
             : static_cast<std::int64_t>(records.size() / robot_ids.size());
}

const TraceRecord& Trace::at(std::int64_t step, std::size_t slot) const {
  return records.at(static_cast<std::size_t>(step) * robot_ids.size() + slot);
}

std::vector<double> Trace::error_series(int robot_id) const {
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(steps()));
  for (const auto& r : records) {
    if (r.robot_id == robot_id) out.push_back(r.err_norm);
  }
  return out;
}

namespace {

void put(std::string& line, double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, ",%.9g", v);
  line += buf;
}

}  // namespace

void write_trace_csv(std::ostream& os, const Trace& trace) {
  os << kTraceHeader << '\n';
  std::string line;
  for (const auto& r : trace.records) {
    line = std::to_string(r.step) + ',' + std::to_string(r.robot_id);
    put(line, r.pose.x);
    put(line, r.pose.y);
    put(line, r.pose.theta);
    put(line, r.twist.v);
    put(line, r.twist.omega);
    for (int i = 0; i < 3; ++i) put(line, r.error(i));
    put(line, r.err_norm);
    for (int i = 0; i < 9; ++i) put(line, r.gains(i));
    put(line, r.best_fitness);
    line += '\n';
    os << line;
  }
}

std::string format_trace_csv(const Trace& trace) {
  std::ostringstream os;
  write_trace_csv(os, trace);
  return os.str();
}

Trace read_trace_csv(std::istream& is, int leader_id) {
  std::string line;
  if (!std::getline(is, line) || line != kTraceHeader) {
    throw std::runtime_error("trace: missing or unexpected header");
  }
  Trace t;
  t.leader_id = leader_id;
  std::size_t row = 1;
  while (std::getline(is, line)) {
    ++row;
    if (line.empty()) continue;
    std::vector<double> f;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) f.push_back(std::strtod(cell.c_str(), nullptr));
    if (f.size() != 21) {
      throw std::runtime_error("trace: row " + std::to_string(row) +
                               " has " + std::to_string(f.size()) + " fields");
    }
    TraceRecord r;
    r.step = static_cast<std::int64_t>(f[0]);
    r.robot_id = static_cast<int>(f[1]);
    r.pose = {f[2], f[3], f[4]};
    r.twist = {f[5], f[6]};
    r.error = {f[7], f[8], f[9]};
    r.err_norm = f[10];
    for (int i = 0; i < 9; ++i) r.gains(i) = f[11 + i];
    r.best_fitness = f[20];
    if (r.step == 0) t.robot_ids.push_back(r.robot_id);
    t.records.push_back(r);
  }
  return t;
}

std::optional<std::int64_t> convergence_time(const Trace& trace,
                                             double threshold, int dwell) {
  const std::int64_t n = trace.steps();
  std::int64_t run = 0;
  for (std::int64_t k = 0; k < n; ++k) {
    bool ok = true;
    for (std::size_t s = 0; s < trace.robots(); ++s) {
      const TraceRecord& r = trace.at(k, s);
      if (r.robot_id == trace.leader_id) continue;
      if (!(r.err_norm < threshold)) {
        ok = false;
        break;
      }
    }
    run = ok ? run + 1 : 0;
    if (run >= dwell) return k - dwell + 1;
  }
  return std::nullopt;
}

double mean_error_from(const Trace& trace, std::int64_t from_step) {
  double sum = 0;
  std::size_t count = 0;
  for (const auto& r : trace.records) {
    if (r.step < from_step || r.robot_id == trace.leader_id) continue;
    if (std::isnan(r.err_norm)) continue;
    sum += r.err_norm;
    ++count;
  }
  return count == 0 ? std::numeric_limits<double>::quiet_NaN()
                    : sum / static_cast<double>(count);
}

}  // namespace swarmform
