#include <CLI11.hpp>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include "config.hpp"
#include "ecmtk/cli.hpp"
#include "ecmtk/csv.hpp"
#include "ecmtk/ocv_fit.hpp"
#include "ecmtk/param_fit.hpp"
#include "ecmtk/reference_data.hpp"
#include "ecmtk/table_io.hpp"
#include "output.hpp"

namespace ecmtk::cli {

namespace fs = std::filesystem;

namespace {

struct CommonOptions {
  std::string config;
  std::string out_dir = ".";
  std::uint64_t seed = 0;
  bool quiet = false;
  std::vector<std::string> overrides;
};

struct Context {
  RunConfig config;
  fs::path out_dir;
  std::uint64_t seed = 0;
  bool quiet = false;
  std::ostream* out = nullptr;

  std::ostream& log() const { return *out; }
};

using Json = nlohmann::ordered_json;

void add_common(CLI::App* cmd, CommonOptions& opts) {
  cmd->add_option("--config", opts.config, "INI run description");
  cmd->add_option("--out", opts.out_dir, "output directory (created if missing)");
  cmd->add_option("--seed", opts.seed, "seed for measurement noise");
  cmd->add_flag("--quiet", opts.quiet, "suppress the summary on stdout");
  cmd->add_option("--set", opts.overrides, "override a config value, section.key=value");
}

EcmState initial_state(const RunConfig& config) {
  EcmState s;
  s.soc = config.number("model.initial_soc");
  if (s.soc < 0.0 || s.soc > 1.0) throw ConfigurationError("model.initial_soc must lie in [0, 1]");
  return s;
}

std::size_t rising_edges(const CurrentVoltageTrace& trace) {
  std::size_t n = 0;
  for (std::size_t k = 0; k < trace.size(); ++k) {
    const bool on = trace[k].current != 0.0;
    const bool prev_on = k > 0 && trace[k - 1].current != 0.0;
    if (on && !prev_on) ++n;
  }
  return n;
}

int cmd_hppc_gen(const Context& ctx) {
  const HppcProfileSpec spec = ctx.config.profile_spec();
  const CurrentVoltageTrace profile = generate_profile(spec);
  const auto header = header_lines(ctx.config, "hppc-gen");
  write_file(ctx.out_dir / "profile.csv",
             [&](std::ostream& os) { write_trace(os, profile, header); });
  if (!ctx.quiet) {
    ctx.log() << "period_s=" << csv::format_double(spec.period())
              << " pulse_width_s=" << csv::format_double(spec.pulse_width())
              << " periods=" << csv::format_double(spec.duration * spec.frequency)
              << " pulses=" << rising_edges(profile) << " rows=" << profile.size() << '\n';
  }
  return 0;
}

int cmd_simulate(const Context& ctx) {
  const RunConfig& cfg = ctx.config;
  const CellSpec cell = cfg.cell();
  const SocParameterTable table = cfg.parameter_table();
  const OcvPolynomial poly = cfg.ocv();
  const CurrentVoltageTrace profile = cfg.profile_or_trace();
  const double noise = cfg.number("simulate.noise_v");
  if (noise < 0.0) throw ConfigurationError("simulate.noise_v must be non-negative");

  const SimulationResult sim =
      simulate(profile, cell, table, poly, initial_state(cfg), cfg.simulation_options());

  std::mt19937_64 rng(ctx.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<double> voltage(sim.trace.size());
  for (std::size_t k = 0; k < voltage.size(); ++k) {
    voltage[k] = sim.trace[k].voltage + (noise > 0.0 ? noise * gauss(rng) : 0.0);
  }

  const auto header = header_lines(cfg, "simulate");
  write_file(ctx.out_dir / "simulation.csv", [&](std::ostream& os) {
    csv::write_comments(os, header);
    os << "time_s,current_A,voltage_V,soc\n";
    for (std::size_t k = 0; k < sim.trace.size(); ++k) {
      const double row[] = {sim.trace[k].t, sim.trace[k].current, voltage[k], sim.states[k].soc};
      csv::write_row(os, row);
    }
  });

  double v_min = std::numeric_limits<double>::infinity();
  for (double v : voltage) v_min = std::min(v_min, v);
  Json doc = report(cfg, "simulate");
  doc["seed"] = ctx.seed;
  doc["termination_reason"] = std::string(to_string(sim.reason));
  doc["termination_time_s"] = sim.termination_time;
  doc["final_time_s"] = sim.trace.end_time();
  doc["final_soc"] = sim.states.back().soc;
  doc["min_voltage_v"] = v_min;
  doc["rows"] = sim.trace.size();
  doc["soc_clamped"] = sim.soc_clamped;
  doc["noise_v"] = noise;
  write_json(ctx.out_dir / "simulate_summary.json", doc);

  if (cfg.flag("simulate.plot_script")) {
    write_file(ctx.out_dir / "simulation.gp", [&](std::ostream& os) {
      csv::write_comments(os, header);
      os << "set datafile separator ','\n"
            "set key autotitle columnhead\n"
            "set xlabel 'time [s]'\n"
            "set ylabel 'voltage [V]'\n"
            "set y2label 'SOC'\n"
            "set y2tics\n"
            "plot 'simulation.csv' using 1:3 with lines, \\\n"
            "     'simulation.csv' using 1:4 axes x1y2 with lines\n";
    });
  }

  if (!ctx.quiet) {
    ctx.log() << "termination=" << to_string(sim.reason)
              << " t_end_s=" << csv::format_double(sim.termination_time)
              << " final_soc=" << csv::format_double(sim.states.back().soc)
              << " min_voltage_v=" << csv::format_double(v_min) << '\n';
  }
  return 0;
}

int cmd_fit_ocv(const Context& ctx) {
  const RunConfig& cfg = ctx.config;
  const CellSpec cell = cfg.cell();
  const CurrentVoltageTrace trace = cfg.measured_trace();
  const double threshold = cfg.positive("fit_ocv.current_threshold_a");
  const long degree = cfg.integer("fit_ocv.degree");
  const long min_rest = cfg.integer("fit_ocv.min_rest_samples");
  if (degree < 0) throw ConfigurationError("fit_ocv.degree must be non-negative");
  if (min_rest < 1) throw ConfigurationError("fit_ocv.min_rest_samples must be at least 1");
  const auto polarization_table = cfg.existing_path("fit_ocv.polarization_table_csv");

  const PulseSegmentation seg = segment_pulses(trace, threshold);
  const OcvSampleSet points = extract_ocv_points(trace, seg, cell, initial_state(cfg).soc,
                                                 static_cast<std::size_t>(min_rest));
  const FitReport fit = fit_polynomial(points, static_cast<int>(degree));

  std::vector<double> polarization;
  if (polarization_table) {
    std::ifstream in(*polarization_table);
    const SocParameterTable table = load_parameter_table(in);
    polarization =
        residual_polarization(trace, points, cell, table, fit.coefficients, initial_state(cfg).soc);
  }

  const auto header = header_lines(cfg, "fit-ocv");
  write_file(ctx.out_dir / "ocv_points.csv", [&](std::ostream& os) {
    csv::write_comments(os, header);
    os << "soc,ocv_V,source_pulse_index,peak_mismatch";
    os << (polarization.empty() ? "\n" : ",residual_polarization_V\n");
    for (std::size_t i = 0; i < points.points.size(); ++i) {
      const OcvSample& p = points.points[i];
      os << csv::format_double(p.soc) << ',' << csv::format_double(p.ocv) << ','
         << p.source_pulse_index << ',' << (p.peak_mismatch ? 1 : 0);
      if (!polarization.empty()) os << ',' << csv::format_double(polarization[i]);
      os << '\n';
    }
  });

  std::size_t mismatches = 0;
  for (const auto& p : points.points) mismatches += p.peak_mismatch ? 1 : 0;
  Json doc = report(cfg, "fit-ocv");
  doc["coefficients_high_first"] = fit.coefficients.coefficients();
  doc["degree"] = fit.coefficients.degree();
  doc["r_squared"] = fit.r_squared;
  doc["residual_rms_v"] = fit.residual_rms;
  doc["n_points"] = fit.n_points;
  doc["excluded_windows"] = points.excluded_windows;
  doc["peak_mismatch_count"] = mismatches;
  doc["pulses_detected"] = seg.pulses.size();
  write_json(ctx.out_dir / "ocv_fit.json", doc);

  if (!ctx.quiet) {
    ctx.log() << "n_points=" << fit.n_points << " r_squared=" << csv::format_double(fit.r_squared)
              << " residual_rms_v=" << csv::format_double(fit.residual_rms) << '\n';
  }
  return 0;
}

InitStrategy parse_init(const std::string& s) {
  if (s == "edge") return InitStrategy::EdgeEstimate;
  if (s == "mid") return InitStrategy::MidBounds;
  if (s == "table") return InitStrategy::Provided;
  throw ConfigurationError("fit_params.init must be edge, mid or table");
}

FitStrategy parse_strategy(const std::string& s) {
  if (s == "block") return FitStrategy::BlockThenPolish;
  if (s == "global") return FitStrategy::Global;
  throw ConfigurationError("fit_params.strategy must be block or global");
}

int cmd_fit_params(const Context& ctx) {
  const RunConfig& cfg = ctx.config;
  const long n_breakpoints = cfg.integer("fit_params.breakpoints");
  if (n_breakpoints < 2) throw ConfigurationError("fit_params.breakpoints must be at least 2");

  FitOptions options;
  options.init = parse_init(cfg.raw("fit_params.init"));
  options.strategy = parse_strategy(cfg.raw("fit_params.strategy"));
  options.max_iterations = static_cast<int>(cfg.integer("fit_params.max_iterations"));
  options.block_sweeps = static_cast<int>(cfg.integer("fit_params.block_sweeps"));
  options.block_iterations = static_cast<int>(cfg.integer("fit_params.block_iterations"));
  if (options.max_iterations < 0 || options.block_sweeps < 0 || options.block_iterations < 0) {
    throw ConfigurationError("fit_params iteration counts must be non-negative");
  }
  IdentifiabilityOptions ident;
  ident.floor = cfg.positive("fit_params.sensitivity_floor_v");

  FitProblem problem{
      .trace = cfg.measured_trace(),
      .poly = cfg.ocv(),
      .spec = cfg.cell(),
      .breakpoints = reference::default_breakpoints(static_cast<std::size_t>(n_breakpoints)),
      .bounds = {},
      .initial_table = std::nullopt,
      .initial_soc = initial_state(cfg).soc,
  };
  if (options.init == InitStrategy::Provided) {
    if (!cfg.existing_path("model.table_csv")) {
      throw ConfigurationError("fit_params.init=table needs model.table_csv");
    }
    problem.initial_table = cfg.parameter_table();
    problem.breakpoints.assign(problem.initial_table->breakpoints().begin(),
                               problem.initial_table->breakpoints().end());
  }

  const FitResult result = fit(problem, options);
  const auto sens = identifiability_report(problem, result, ident);

  const auto header = header_lines(cfg, "fit-params");
  write_file(ctx.out_dir / "params.csv",
             [&](std::ostream& os) { write_parameter_table(os, result.table, header); });
  write_file(ctx.out_dir / "identifiability.csv", [&](std::ostream& os) {
    csv::write_comments(os, header);
    os << "SOC,component,value,sensitivity_V,weakly_identified,reason\n";
    for (const auto& s : sens) {
      os << csv::format_double(s.soc) << ',' << component_name(s.component) << ','
         << csv::format_double(s.value) << ',' << csv::format_double(s.sensitivity) << ','
         << (s.weakly_identified ? 1 : 0) << ',' << to_string(s.reason) << '\n';
    }
  });

  std::vector<std::string> weak;
  for (const auto& s : sens) {
    if (s.weakly_identified) {
      weak.push_back(std::string(component_name(s.component)) + "@" + csv::format_double(s.soc) +
                     ":" + std::string(to_string(s.reason)));
    }
  }
  std::vector<Json> per_bp;
  for (double v : result.per_breakpoint_rms) per_bp.push_back(number_or_null(v));

  Json doc = report(cfg, "fit-params");
  doc["rms_error_v"] = result.rms_error;
  doc["max_error_v"] = result.max_error;
  doc["iterations"] = result.iterations;
  doc["converged"] = result.converged;
  doc["stop_reason"] = result.stop_reason;
  doc["truncated"] = result.truncated;
  doc["breakpoints"] = result.table.breakpoints().size();
  doc["per_breakpoint_rms_v"] = per_bp;
  doc["weakly_identified"] = weak;
  write_json(ctx.out_dir / "fit_params.json", doc);

  if (!ctx.quiet) {
    ctx.log() << "rms_error_v=" << csv::format_double(result.rms_error)
              << " iterations=" << result.iterations << " converged=" << result.converged
              << " weakly_identified=" << weak.size() << '\n';
  }
  if (!std::isfinite(result.rms_error)) throw NumericError("fit produced a non-finite error");
  if (cfg.flag("fit_params.require_convergence") && !result.converged) {
    ctx.log() << "fit did not converge (" << result.stop_reason << ")\n";
    return 1;
  }
  return 0;
}

int cmd_thermal(const Context& ctx) {
  const RunConfig& cfg = ctx.config;
  const CellSpec cell = cfg.cell();
  const EcmInputs ecm{cell,
                      cfg.parameter_table(),
                      cfg.ocv(),
                      cfg.profile_or_trace(),
                      initial_state(cfg),
                      cfg.simulation_options()};
  const CylMesh mesh = cfg.mesh(cell);
  const MaterialMap materials = cfg.materials();
  const ThermalBoundary boundary = cfg.boundary();

  CosimOptions options;
  options.dt_thermal = cfg.positive("thermal.dt_s");
  options.snapshot_interval = cfg.number("thermal.snapshot_interval_s");
  if (!cfg.raw("thermal.reference_capacity_mah").empty()) {
    options.reference_capacity = mah_to_coulombs(cfg.positive("thermal.reference_capacity_mah"));
  }

  const CosimResult result = cosimulate(ecm, mesh, materials, boundary, options);
  const auto header = header_lines(cfg, "thermal");

  write_file(ctx.out_dir / "temperature_trace.csv",
             [&](std::ostream& os) { write_temperature_trace(os, result.trace, header); });
  write_file(ctx.out_dir / "field_final.csv",
             [&](std::ostream& os) { write_field_csv(os, mesh, result.final_field, header); });
  const std::string title = "ecmtk " + std::string(kToolVersion) + " thermal config-fnv1a " +
                            config_digest(cfg) + " t=" +
                            csv::format_double(result.final_field.t);
  if (cfg.flag("thermal.write_vtk")) {
    write_file(ctx.out_dir / "field_final.vtk",
               [&](std::ostream& os) { write_field_vtk(os, mesh, result.final_field, title); });
  }
  for (std::size_t i = 0; i < result.snapshots.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "field_%04zu.csv", i);
    write_file(ctx.out_dir / name, [&](std::ostream& os) {
      write_field_csv(os, mesh, result.snapshots[i], header);
    });
  }

  double spread_max = 0.0;
  double t_peak = result.initial_temperature;
  for (const auto& s : result.trace) {
    spread_max = std::max(spread_max, s.t_max - s.t_min);
    t_peak = std::max(t_peak, s.t_max);
  }
  Json doc = report(cfg, "thermal");
  doc["initial_temperature_k"] = result.initial_temperature;
  doc["final_t_avg_k"] = result.trace.back().t_avg;
  doc["temperature_rise_k"] = result.rise();
  doc["final_spread_k"] = result.final_spread();
  doc["max_spread_k"] = spread_max;
  doc["peak_temperature_k"] = t_peak;
  doc["end_time_s"] = result.final_field.t;
  doc["termination_reason"] = std::string(to_string(result.ecm.reason));
  doc["thermal_steps"] = result.trace.size() - 1;
  doc["cells"] = mesh.cell_count();
  write_json(ctx.out_dir / "thermal_summary.json", doc);

  if (!ctx.quiet) {
    ctx.log() << "rise_k=" << csv::format_double(result.rise())
              << " final_spread_k=" << csv::format_double(result.final_spread())
              << " end_time_s=" << csv::format_double(result.final_field.t) << '\n';
  }
  return 0;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Equivalent-circuit battery toolkit", "ecmtk"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kToolVersion));

  CommonOptions opts;
  std::optional<double> amps, freq, duty, duration, dt;
  std::optional<std::string> phase;

  CLI::App* gen = app.add_subcommand("hppc-gen", "write a square-wave HPPC current profile");
  add_common(gen, opts);
  gen->add_option("--amps", amps, "pulse amplitude, A");
  gen->add_option("--freq", freq, "pulse frequency, Hz");
  gen->add_option("--duty", duty, "duty cycle in (0, 1)");
  gen->add_option("--duration", duration, "profile length, s");
  gen->add_option("--dt", dt, "sample interval, s");
  gen->add_option("--phase", phase, "pulse_first or rest_first");

  CLI::App* sim = app.add_subcommand("simulate", "simulate the circuit over a profile");
  CLI::App* ocv = app.add_subcommand("fit-ocv", "extract OCV points and fit the polynomial");
  CLI::App* params = app.add_subcommand("fit-params", "identify the SOC parameter table");
  CLI::App* thermal = app.add_subcommand("thermal", "electro-thermal cosimulation");
  for (CLI::App* cmd : {sim, ocv, params, thermal}) add_common(cmd, opts);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? 0 : 2;
  }

  try {
    Context ctx;
    if (!opts.config.empty()) ctx.config.load_file(opts.config);
    for (const auto& o : opts.overrides) ctx.config.set_assignment(o);
    const auto set_number = [&](const char* key, const std::optional<double>& v) {
      if (v) ctx.config.set(key, csv::format_double(*v));
    };
    set_number("profile.amplitude_a", amps);
    set_number("profile.frequency_hz", freq);
    set_number("profile.duty", duty);
    set_number("profile.duration_s", duration);
    set_number("profile.sample_interval_s", dt);
    if (phase) ctx.config.set("profile.phase", *phase);

    ctx.out_dir = opts.out_dir;
    ctx.seed = opts.seed;
    ctx.quiet = opts.quiet;
    ctx.out = &out;
    std::error_code ec;
    fs::create_directories(ctx.out_dir, ec);
    if (ec) throw FileError("cannot create output directory '" + ctx.out_dir.string() + "'");

    if (gen->parsed()) return cmd_hppc_gen(ctx);
    if (sim->parsed()) return cmd_simulate(ctx);
    if (ocv->parsed()) return cmd_fit_ocv(ctx);
    if (params->parsed()) return cmd_fit_params(ctx);
    if (thermal->parsed()) return cmd_thermal(ctx);
    return 2;
  } catch (const std::invalid_argument& e) {
    // ArgumentError, ConfigurationError and FileError all land here.
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace ecmtk::cli
