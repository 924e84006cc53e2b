#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "ecmtk/trace.hpp"

namespace ecmtk {

enum class PulsePhase { PulseFirst, RestFirst };

struct HppcProfileSpec {
  double amplitude = 1.5;        // A
  double frequency = 2.8e-3;     // Hz
  double duty_cycle = 0.5;
  double duration = 14400.0;     // s
  double sample_interval = 2.5;  // s
  PulsePhase phase = PulsePhase::PulseFirst;

  double period() const { return 1.0 / frequency; }
  double pulse_width() const { return duty_cycle * period(); }

  // ArgumentError for bad values, AliasingError if sampling is too coarse.
  void validate() const;

  // Current of the continuous square wave at time t.
  double current_at(double t) const;

  // Whether a position within the period, in [0, 1), is inside the pulse.
  bool phase_is_on(double phase) const;
};

/// Square-wave current profile sampled at t = k * sample_interval for
/// t < duration. The trace has no voltage column.
CurrentVoltageTrace generate_profile(const HppcProfileSpec& spec);

struct ColumnMap {
  std::string time = "time_s";
  std::string current = "current_A";
  std::string voltage = "voltage_V";
  bool require_voltage = true;
  // Flip the sign of the current column (for charge-positive exports).
  bool negate_current = false;
};

/// Parses a headered CSV stream. Lines starting with '#' and blank lines are
/// skipped. Throws ParseError naming the offending line.
CurrentVoltageTrace load_trace(std::istream& in, const ColumnMap& columns = {});

/// Writes time_s,current_A[,voltage_V] with round-trip precision.
void write_trace(std::ostream& out, const CurrentVoltageTrace& trace,
                 std::span<const std::string> comments = {});

struct PulseWindow {
  std::size_t on_start = 0;  // first sample above threshold
  std::size_t on_end = 0;    // first sample of the following rest
  std::size_t rest_end = 0;  // one past the last rest sample
};

struct RestWindow {
  std::size_t begin = 0;
  std::size_t end = 0;  // one past
  int source_pulse_index = -1;  // pulse preceding the rest, -1 if none
};

struct PulseSegmentation {
  std::vector<PulseWindow> pulses;
  double threshold_used = 0.0;
  std::size_t discarded = 0;  // pulse runs shorter than the minimum width

  /// Rest windows in time order: the leading rest (if any) and the rest after
  /// every pulse. A trace with no pulses is one rest window.
  std::vector<RestWindow> rest_windows(std::size_t trace_size) const;
};

inline constexpr std::size_t kMinPulseSamples = 3;

PulseSegmentation segment_pulses(const CurrentVoltageTrace& trace, double threshold);

}  // namespace ecmtk
