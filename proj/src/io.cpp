#include "modnls/io.hpp"

#include <openssl/evp.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <nlohmann/json.hpp>
#include <sstream>

#include "modnls/error.hpp"

namespace modnls::io {

using nlohmann::json;

namespace {

std::ofstream open_out(const std::filesystem::path& file) {
  if (file.has_parent_path()) std::filesystem::create_directories(file.parent_path());
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  if (!out) throw InvalidArgument("cannot open output file " + file.string());
  return out;
}

std::ifstream open_in(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw InvalidArgument("cannot open input file " + file.string());
  return in;
}

std::filesystem::path sidecar(const std::filesystem::path& file) {
  std::filesystem::path p = file;
  p += ".json";
  return p;
}

void write_json(const json& j, const std::filesystem::path& file) {
  auto out = open_out(file);
  out << j.dump(2) << '\n';
}

std::vector<std::vector<double>> read_numeric_csv(const std::filesystem::path& file, std::size_t columns) {
  auto in = open_in(file);
  std::string line;
  if (!std::getline(in, line)) throw InvalidArgument("empty CSV " + file.string());
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        std::size_t used = 0;
        row.push_back(std::stod(cell, &used));
      } catch (const std::exception&) {
        throw InvalidArgument("malformed number '" + cell + "' in " + file.string());
      }
    }
    if (row.size() != columns) throw InvalidArgument("wrong column count in " + file.string());
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_path_csv(const ModulationPath& path, std::ostream& out) {
  out << "t,w\n";
  for (std::size_t i = 0; i < path.size(); ++i) {
    out << format_double(path.node_time(i)) << ',' << format_double(path.values()[i]) << '\n';
  }
}

void write_path(const ModulationPath& path, const std::filesystem::path& file) {
  {
    auto out = open_out(file);
    write_path_csv(path, out);
  }
  json meta{{"label", path.label()}, {"dt", path.dt()}, {"n", path.size()}, {"t0", path.t0()}};
  meta["seed"] = path.seed() ? json(*path.seed()) : json(nullptr);
  meta["hurst"] = path.hurst() ? json(*path.hurst()) : json(nullptr);
  write_json(meta, sidecar(file));
}

ModulationPath read_path(const std::filesystem::path& file) {
  const auto rows = read_numeric_csv(file, 2);
  if (rows.size() < 2) throw InvalidArgument("path file needs at least two rows: " + file.string());
  const double t0 = rows[0][0];
  const double dt = (rows.back()[0] - t0) / static_cast<double>(rows.size() - 1);
  std::vector<double> values;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const double expected = t0 + static_cast<double>(i) * dt;
    if (std::abs(rows[i][0] - expected) > 1e-9 * std::max(1.0, std::abs(expected))) {
      throw InvalidArgument("path file grid is not uniform: " + file.string());
    }
    values.push_back(rows[i][1]);
  }
  std::string label = file.stem().string();
  std::optional<std::uint64_t> seed;
  std::optional<double> hurst;
  double sidecar_dt = dt;
  if (std::filesystem::exists(sidecar(file))) {
    auto in = open_in(sidecar(file));
    const json meta = json::parse(in, nullptr, false);
    if (meta.is_discarded()) throw InvalidArgument("malformed sidecar " + sidecar(file).string());
    if (meta.contains("label") && meta["label"].is_string()) label = meta["label"];
    if (meta.contains("seed") && meta["seed"].is_number()) seed = meta["seed"].get<std::uint64_t>();
    if (meta.contains("hurst") && meta["hurst"].is_number()) hurst = meta["hurst"].get<double>();
    if (meta.contains("dt") && meta["dt"].is_number()) sidecar_dt = meta["dt"];
  }
  return ModulationPath(t0, sidecar_dt, std::move(values), label, seed, hurst);
}

void write_state(const FourierState& state, const std::filesystem::path& file, const std::vector<double>& alphas) {
  {
    auto out = open_out(file);
    out << "k,re,im\n";
    for (int k = -state.cutoff(); k <= state.cutoff(); ++k) {
      out << k << ',' << format_double(state[k].real()) << ',' << format_double(state[k].imag()) << '\n';
    }
  }
  json norms = json::object();
  for (double a : alphas) norms[format_double(a)] = state.norm(a);
  write_json({{"N", state.cutoff()}, {"box_length", state.box_length()}, {"alpha_norms", norms}}, sidecar(file));
}

FourierState read_state(const std::filesystem::path& file, double box_length) {
  const auto rows = read_numeric_csv(file, 3);
  if (rows.empty() || rows.size() % 2 == 0) throw InvalidArgument("state file needs 2N+1 rows: " + file.string());
  const int N = static_cast<int>(rows.size() / 2);
  if (std::filesystem::exists(sidecar(file))) {
    auto in = open_in(sidecar(file));
    const json meta = json::parse(in, nullptr, false);
    if (!meta.is_discarded() && meta.contains("box_length")) box_length = meta["box_length"];
  }
  FourierState state(N, box_length);
  for (const auto& row : rows) {
    const int k = static_cast<int>(std::lround(row[0]));
    if (std::abs(k) > N || row[0] != k) throw InvalidArgument("state file has an invalid mode index: " + file.string());
    state[k] = {row[1], row[2]};
  }
  return state;
}

void write_trajectory(const ControlledTrajectory& traj, const std::filesystem::path& file, bool phi_frame) {
  if (traj.grid.empty()) throw InvalidArgument("write_trajectory: empty trajectory");
  const auto& nodes = phi_frame ? traj.phi_nodes : traj.psi_nodes;
  const int N = nodes.front().cutoff();
  {
    auto out = open_out(file);
    out << 't';
    for (int i = 0; i < 2 * N + 1; ++i) out << ",re_" << i << ",im_" << i;
    out << '\n';
    for (std::size_t r = 0; r < traj.grid.size(); ++r) {
      out << format_double(traj.grid[r]);
      for (const auto& c : nodes[r].coeffs()) out << ',' << format_double(c.real()) << ',' << format_double(c.imag());
      out << '\n';
    }
  }
  write_json({{"frame", phi_frame ? "phi" : "psi"},
              {"N", N},
              {"mode_of_column_0", -N},
              {"alpha", traj.alpha},
              {"holder_exponent", 0.5},
              {"local_only", traj.local_only},
              {"l2", traj.l2_history},
              {"h_alpha", traj.halpha_history}},
             sidecar(file));
}

std::string sha256_file(const std::filesystem::path& file) {
  auto in = open_in(file);
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  if (ctx == nullptr || EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1) {
    EVP_MD_CTX_free(ctx);
    throw std::runtime_error("sha256: digest initialization failed");
  }
  char buf[1 << 16];
  while (in) {
    in.read(buf, sizeof buf);
    if (in.gcount() > 0) EVP_DigestUpdate(ctx, buf, static_cast<std::size_t>(in.gcount()));
  }
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx, digest, &len);
  EVP_MD_CTX_free(ctx);
  std::ostringstream hex;
  for (unsigned int i = 0; i < len; ++i) hex << std::hex << std::setw(2) << std::setfill('0') << int(digest[i]);
  return hex.str();
}

void write_manifest(const Manifest& manifest, const std::filesystem::path& dir) {
  json timings = json::array();
  for (const auto& [phase, seconds] : manifest.timings) timings.push_back({{"phase", phase}, {"seconds", seconds}});
  json j{{"command", manifest.command},
         {"version", manifest.version},
         {"config", json::parse(manifest.config_json)},
         {"inputs", manifest.input_digests},
         {"timings", timings},
         {"outputs", manifest.outputs}};
  write_json(j, dir / "manifest.json");
}

}  // namespace modnls::io
