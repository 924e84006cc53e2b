#pragma once

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>

#include "ecmtk/ecm.hpp"
#include "ecmtk/hppc.hpp"

namespace ecmtk::fixtures {

inline SocParameterTable flat_table(const RcParameters& p) { return SocParameterTable({0.0, 1.0}, {p, p}); }

// Voltages of `profile` simulated through the model, optionally with
// Gaussian noise. The cutoff and depletion stops are off.
inline CurrentVoltageTrace synthesize(const CurrentVoltageTrace& profile, const CellSpec& spec,
                                      const SocParameterTable& table, const OcvPolynomial& poly,
                                      double noise_sd = 0.0, unsigned seed = 1,
                                      double initial_soc = 1.0) {
  EcmState init;
  init.soc = initial_soc;
  const SimulationResult sim = simulate(profile, spec, table, poly, init, {2.5, false, false});
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, noise_sd > 0.0 ? noise_sd : 1.0);
  std::vector<TraceSample> samples(sim.trace.samples().begin(), sim.trace.samples().end());
  if (noise_sd > 0.0) {
    for (auto& s : samples) s.voltage += gauss(rng);
  }
  return CurrentVoltageTrace(std::move(samples), true);
}

inline std::filesystem::path fresh_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("ecmtk_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

inline void write_text(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

// Runs the built tool; stdout and stderr land in `log`. Returns the exit code.
inline int run_tool(const std::string& args, const std::filesystem::path& log) {
  const std::string cmd =
      std::string("\"") + ECMTK_TOOL_PATH + "\" " + args + " > \"" + log.string() + "\" 2>&1";
  const int status = std::system(cmd.c_str());
  if (status == -1) return -1;
  return WEXITSTATUS(status);
}

}  // namespace ecmtk::fixtures
