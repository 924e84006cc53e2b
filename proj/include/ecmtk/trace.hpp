#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace ecmtk {

struct TraceSample {
  double t = 0.0;
  double current = 0.0;  // positive = discharge
  double voltage = 0.0;
};

/// Ordered (t, I, V) records. Current is treated as a zero-order hold: the
/// value at sample k applies over [t_k, t_{k+1}).
class CurrentVoltageTrace {
 public:
  CurrentVoltageTrace() = default;
  CurrentVoltageTrace(std::vector<TraceSample> samples, bool has_voltage);

  // Current-only profile; voltages are NaN.
  static CurrentVoltageTrace from_current(std::span<const double> times,
                                          std::span<const double> currents);

  std::size_t size() const { return samples_.size(); }
  bool empty() const { return samples_.empty(); }
  bool has_voltage() const { return has_voltage_; }

  const TraceSample& operator[](std::size_t i) const { return samples_[i]; }
  std::span<const TraceSample> samples() const { return samples_; }
  auto begin() const { return samples_.begin(); }
  auto end() const { return samples_.end(); }

  double start_time() const { return samples_.front().t; }
  double end_time() const { return samples_.back().t; }

  // Duration the hold of sample i lasts; zero for the last sample.
  double interval(std::size_t i) const {
    return i + 1 < samples_.size() ? samples_[i + 1].t - samples_[i].t : 0.0;
  }

  /// Charge drawn (C) from the start of sample `first` to the start of `last`.
  double charge_between(std::size_t first, std::size_t last) const;

  /// Cumulative drawn charge at every timestamp (first element 0).
  std::vector<double> cumulative_charge() const;

  double max_abs_current() const;

 private:
  std::vector<TraceSample> samples_;
  bool has_voltage_ = false;
};

}  // namespace ecmtk
