#include "ecmtk/hppc.hpp"

#include <cmath>
#include <istream>
#include <limits>
#include <optional>
#include <ostream>
#include <string>

#include "ecmtk/csv.hpp"
#include "ecmtk/errors.hpp"

namespace ecmtk {

namespace {

// Phase positions closer than this to an edge are snapped onto it, so that
// samples landing exactly on an edge are classified as in exact arithmetic.
constexpr double kPhaseSnap = 1e-9;

}  // namespace

void HppcProfileSpec::validate() const {
  if (!(amplitude > 0.0) || !std::isfinite(amplitude)) {
    throw ArgumentError("amplitude must be positive");
  }
  if (!(frequency > 0.0) || !std::isfinite(frequency)) {
    throw ArgumentError("frequency must be positive");
  }
  if (!(duty_cycle > 0.0 && duty_cycle < 1.0)) {
    throw ArgumentError("duty cycle must lie in (0, 1)");
  }
  if (!(duration > 0.0) || !std::isfinite(duration)) {
    throw ArgumentError("duration must be positive");
  }
  if (!(sample_interval > 0.0) || !std::isfinite(sample_interval)) {
    throw ArgumentError("sample interval must be positive");
  }
  if (!(sample_interval < 0.5 * period())) {
    throw AliasingError("sample interval " + std::to_string(sample_interval) +
                        " s is not below the half-period " + std::to_string(0.5 * period()) +
                        " s");
  }
}

double HppcProfileSpec::current_at(double t) const {
  const double cycles = t * frequency;
  double phase = cycles - std::floor(cycles);
  if (phase > 1.0 - kPhaseSnap) phase = 0.0;
  const bool on = phase_is_on(phase);
  return on ? amplitude : 0.0;
}

bool HppcProfileSpec::phase_is_on(double phase) const {
  if (this->phase == PulsePhase::PulseFirst) return phase < duty_cycle - kPhaseSnap;
  return phase >= 1.0 - duty_cycle - kPhaseSnap;
}

CurrentVoltageTrace generate_profile(const HppcProfileSpec& spec) {
  spec.validate();
  const auto count =
      static_cast<std::size_t>(std::ceil(spec.duration / spec.sample_interval - kPhaseSnap));
  std::vector<TraceSample> samples(std::max<std::size_t>(count, 1));
  for (std::size_t k = 0; k < samples.size(); ++k) {
    const double t = static_cast<double>(k) * spec.sample_interval;
    samples[k] = {t, spec.current_at(t), std::numeric_limits<double>::quiet_NaN()};
  }
  return CurrentVoltageTrace(std::move(samples), false);
}

CurrentVoltageTrace load_trace(std::istream& in, const ColumnMap& columns) {
  std::string line;
  std::size_t line_no = 0;
  std::optional<std::size_t> time_col, current_col, voltage_col;
  std::size_t header_line = 0;
  bool have_header = false;
  std::vector<TraceSample> samples;

  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view trimmed = csv::trim(line);
    if (trimmed.empty() || trimmed.front() == '#') continue;
    const auto fields = csv::split(trimmed);

    if (!have_header) {
      for (std::size_t i = 0; i < fields.size(); ++i) {
        const std::string_view name = csv::trim(fields[i]);
        if (name == columns.time) time_col = i;
        if (name == columns.current) current_col = i;
        if (name == columns.voltage) voltage_col = i;
      }
      if (!time_col) throw ParseError(line_no, "missing column '" + columns.time + "'");
      if (!current_col) throw ParseError(line_no, "missing column '" + columns.current + "'");
      if (!voltage_col && columns.require_voltage) {
        throw ParseError(line_no, "missing column '" + columns.voltage + "'");
      }
      have_header = true;
      header_line = line_no;
      continue;
    }

    const auto field = [&](std::size_t col, const std::string& name) -> double {
      if (col >= fields.size()) throw ParseError(line_no, "missing value for '" + name + "'");
      double v = 0.0;
      if (!csv::parse_double(fields[col], v)) {
        throw ParseError(line_no, "non-numeric value '" + std::string(csv::trim(fields[col])) +
                                      "' in column '" + name + "'");
      }
      return v;
    };

    TraceSample s;
    s.t = field(*time_col, columns.time);
    s.current = field(*current_col, columns.current);
    if (columns.negate_current) s.current = -s.current;
    s.voltage = std::numeric_limits<double>::quiet_NaN();
    if (voltage_col) s.voltage = field(*voltage_col, columns.voltage);
    if (!std::isfinite(s.t) || !std::isfinite(s.current)) {
      throw ParseError(line_no, "non-finite time or current");
    }
    if (!samples.empty() && !(s.t > samples.back().t)) {
      throw ParseError(line_no, s.t == samples.back().t ? "duplicate timestamp"
                                                        : "time is not strictly increasing");
    }
    samples.push_back(s);
  }

  if (!have_header) throw ParseError(line_no, "no header row");
  if (samples.empty()) throw ParseError(header_line, "no data rows after header");
  return CurrentVoltageTrace(std::move(samples), voltage_col.has_value());
}

void write_trace(std::ostream& out, const CurrentVoltageTrace& trace,
                 std::span<const std::string> comments) {
  csv::write_comments(out, comments);
  out << (trace.has_voltage() ? "time_s,current_A,voltage_V\n" : "time_s,current_A\n");
  for (const auto& s : trace) {
    if (trace.has_voltage()) {
      const double row[] = {s.t, s.current, s.voltage};
      csv::write_row(out, row);
    } else {
      const double row[] = {s.t, s.current};
      csv::write_row(out, row);
    }
  }
}

std::vector<RestWindow> PulseSegmentation::rest_windows(std::size_t trace_size) const {
  std::vector<RestWindow> rests;
  const std::size_t lead_end = pulses.empty() ? trace_size : pulses.front().on_start;
  if (lead_end > 0) rests.push_back({0, lead_end, -1});
  for (std::size_t i = 0; i < pulses.size(); ++i) {
    if (pulses[i].rest_end > pulses[i].on_end) {
      rests.push_back({pulses[i].on_end, pulses[i].rest_end, static_cast<int>(i)});
    }
  }
  return rests;
}

PulseSegmentation segment_pulses(const CurrentVoltageTrace& trace, double threshold) {
  if (!(threshold > 0.0) || !std::isfinite(threshold)) {
    throw ArgumentError("segment_pulses: threshold must be positive");
  }
  PulseSegmentation seg;
  seg.threshold_used = threshold;

  const std::size_t n = trace.size();
  std::size_t i = 0;
  while (i < n) {
    if (std::abs(trace[i].current) <= threshold) {
      ++i;
      continue;
    }
    const std::size_t start = i;
    while (i < n && std::abs(trace[i].current) > threshold) ++i;
    if (i - start < kMinPulseSamples) {
      ++seg.discarded;
      continue;
    }
    seg.pulses.push_back({start, i, n});
  }
  for (std::size_t p = 0; p + 1 < seg.pulses.size(); ++p) {
    seg.pulses[p].rest_end = seg.pulses[p + 1].on_start;
  }
  return seg;
}

}  // namespace ecmtk
