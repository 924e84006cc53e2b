#include "ecmtk/trace.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "ecmtk/errors.hpp"

namespace ecmtk {

CurrentVoltageTrace::CurrentVoltageTrace(std::vector<TraceSample> samples, bool has_voltage)
    : samples_(std::move(samples)), has_voltage_(has_voltage) {
  if (samples_.empty()) throw ArgumentError("trace must contain at least one sample");
  for (std::size_t i = 0; i < samples_.size(); ++i) {
    if (!std::isfinite(samples_[i].t) || !std::isfinite(samples_[i].current)) {
      throw ArgumentError("trace sample " + std::to_string(i) + " is not finite");
    }
    if (i > 0 && !(samples_[i].t > samples_[i - 1].t)) {
      throw ArgumentError("trace timestamps must be strictly increasing (sample " +
                          std::to_string(i) + ")");
    }
  }
}

CurrentVoltageTrace CurrentVoltageTrace::from_current(std::span<const double> times,
                                                      std::span<const double> currents) {
  if (times.size() != currents.size()) throw ArgumentError("time and current lengths differ");
  std::vector<TraceSample> samples(times.size());
  for (std::size_t i = 0; i < times.size(); ++i) {
    samples[i] = {times[i], currents[i], std::numeric_limits<double>::quiet_NaN()};
  }
  return CurrentVoltageTrace(std::move(samples), false);
}

double CurrentVoltageTrace::charge_between(std::size_t first, std::size_t last) const {
  double q = 0.0;
  for (std::size_t i = first; i < last; ++i) q += samples_[i].current * interval(i);
  return q;
}

std::vector<double> CurrentVoltageTrace::cumulative_charge() const {
  std::vector<double> q(samples_.size(), 0.0);
  for (std::size_t i = 1; i < samples_.size(); ++i) {
    q[i] = q[i - 1] + samples_[i - 1].current * interval(i - 1);
  }
  return q;
}

double CurrentVoltageTrace::max_abs_current() const {
  double m = 0.0;
  for (const auto& s : samples_) m = std::max(m, std::abs(s.current));
  return m;
}

}  // namespace ecmtk
