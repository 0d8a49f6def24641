#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "modnls/fourier_state.hpp"
#include "modnls/modulation.hpp"
#include "modnls/nls_solver.hpp"

namespace modnls::io {

/// printf("%.17g"): round-trips every double.
std::string format_double(double v);

/// CSV `t,w` plus `<file>.json` sidecar {label, seed, hurst, dt, n}.
void write_path(const ModulationPath& path, const std::filesystem::path& file);
/// CSV rows only, to a stream.
void write_path_csv(const ModulationPath& path, std::ostream& out);
/// Reads a `t,w` CSV; the grid must be uniform. Sidecar metadata is used
/// when present.
ModulationPath read_path(const std::filesystem::path& file);

/// CSV `k,re,im` plus sidecar {N, box_length, alpha_norms}.
void write_state(const FourierState& state, const std::filesystem::path& file,
                 const std::vector<double>& alphas = {0.0, 0.5, 1.0});
FourierState read_state(const std::filesystem::path& file, double box_length = 2 * std::numbers::pi);

/// CSV `t,re_0,im_0,...` for the given frame plus sidecar with exponents and
/// norm histories.
void write_trajectory(const ControlledTrajectory& traj, const std::filesystem::path& file, bool phi_frame = false);

/// Lowercase hex SHA-256 of a file's bytes.
std::string sha256_file(const std::filesystem::path& file);

struct Manifest {
  std::string command;
  std::string version;
  /// Serialized JSON of the resolved configuration.
  std::string config_json;
  std::map<std::string, std::string> input_digests;
  std::vector<std::pair<std::string, double>> timings;
  std::vector<std::string> outputs;
};

/// Writes `<dir>/manifest.json`, replacing any previous one.
void write_manifest(const Manifest& manifest, const std::filesystem::path& dir);

}  // namespace modnls::io
