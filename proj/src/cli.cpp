#include "modnls/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <nlohmann/json.hpp>
#include <random>
#include <sstream>
#include <thread>

#include "modnls/error.hpp"
#include "modnls/io.hpp"
#include "modnls/modulation.hpp"
#include "modnls/nls_solver.hpp"
#include "modnls/nls_torus.hpp"
#include "modnls/numeric.hpp"
#include "modnls/rng.hpp"
#include "modnls/strichartz_line.hpp"
#include "modnls/young.hpp"

namespace modnls::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Globals {
  std::uint64_t seed = 1;
  unsigned threads = 1;
  std::string out;
  std::string config_file;
  bool verbose = false;
};

/// Per-run state shared by all subcommands: resolved config, timings and
/// the files written.
struct Run {
  std::string command;
  Globals globals;
  json config;
  std::map<std::string, std::string> inputs;
  std::vector<std::pair<std::string, double>> timings;
  std::vector<fs::path> outputs;
  std::ostream* out = nullptr;
  std::ostream* err = nullptr;

  template <class F>
  auto timed(const std::string& phase, F&& f) {
    const auto start = std::chrono::steady_clock::now();
    auto finish = [&] {
      timings.emplace_back(phase, std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
    };
    if constexpr (std::is_void_v<decltype(f())>) {
      f();
      finish();
    } else {
      auto result = f();
      finish();
      return result;
    }
  }

  void add_input(const fs::path& file) { inputs[file.string()] = io::sha256_file(file); }
};

// Runs fn(i) for i in [0, n) on `threads` workers; results are slotted by
// index so output order never depends on scheduling.
void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& fn) {
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
  if (threads == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(n);
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < threads; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

json load_config(const std::string& file, Run& run) {
  if (file.empty()) return json::object();
  std::ifstream in(file);
  if (!in) throw InvalidArgument("cannot open config file " + file);
  json j = json::parse(in, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw InvalidArgument("config file is not a JSON object: " + file);
  run.add_input(file);
  return j;
}

template <class T>
T get(const json& j, const std::string& key) {
  if (!j.contains(key)) throw InvalidArgument("missing config key '" + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw InvalidArgument("config key '" + key + "' has the wrong type");
  }
}

std::string fmt(double v) { return io::format_double(v); }

fs::path output_dir(const Run& run, bool out_is_file) {
  if (run.globals.out.empty()) return {};
  const fs::path out(run.globals.out);
  if (!out_is_file) return out;
  return out.has_parent_path() ? out.parent_path() : fs::path(".");
}

void finish(Run& run, bool out_is_file) {
  const fs::path dir = output_dir(run, out_is_file);
  if (dir.empty()) return;
  fs::create_directories(dir);
  io::Manifest m;
  m.command = run.command;
  m.version = kVersion;
  json resolved = run.config;
  resolved["seed"] = run.globals.seed;
  resolved["threads"] = run.globals.threads;
  resolved["out"] = run.globals.out;
  m.config_json = resolved.dump();
  m.input_digests = run.inputs;
  m.timings = run.timings;
  for (const auto& p : run.outputs) m.outputs.push_back(fs::relative(p, dir).string());
  io::write_manifest(m, dir);
}

std::ofstream open_csv(Run& run, const fs::path& file) {
  if (file.has_parent_path()) fs::create_directories(file.parent_path());
  std::ofstream out(file, std::ios::trunc);
  if (!out) throw InvalidArgument("cannot open output " + file.string());
  run.outputs.push_back(file);
  return out;
}

// "fbm:0.4" | "linear:1" | object with kind/hurst/slope/n/span | {file}.
json normalize_modulation(const json& m) {
  if (m.is_string()) {
    const std::string s = m.get<std::string>();
    const auto colon = s.find(':');
    const std::string kind = s.substr(0, colon);
    json j{{"kind", kind}};
    if (colon != std::string::npos) {
      const double v = std::stod(s.substr(colon + 1));
      j[kind == "fbm" ? "hurst" : "slope"] = v;
    }
    return j;
  }
  return m;
}

ModulationPath build_modulation(const json& spec_in, double span, std::uint64_t seed, Run& run) {
  const json spec = normalize_modulation(spec_in);
  if (spec.contains("file")) {
    const fs::path file = get<std::string>(spec, "file");
    run.add_input(file);
    return io::read_path(file);
  }
  const std::string kind = spec.value("kind", std::string("fbm"));
  const std::size_t n = spec.value("n", std::size_t{4097});
  span = spec.value("span", span);
  if (n < 2 || !(span > 0)) throw InvalidArgument("modulation: need n >= 2 and a positive span");
  const double dt = span / static_cast<double>(n - 1);
  if (kind == "fbm") return gen_fbm(spec.value("hurst", 0.5), n, dt, derive_seed(seed, "modulation"));
  if (kind == "linear") return gen_linear(spec.value("slope", 1.0), n, dt);
  throw InvalidArgument("modulation kind must be fbm or linear, got '" + kind + "'");
}

FourierState build_initial(const json& cfg, int N, std::uint64_t seed, Run& run) {
  json init = cfg.contains("initial") ? cfg["initial"] : json("gaussian_decay");
  if (init.is_string()) init = json{{"kind", init.get<std::string>()}};
  if (init.contains("file")) {
    const fs::path file = get<std::string>(init, "file");
    run.add_input(file);
    FourierState s = io::read_state(file);
    if (s.cutoff() != N) s = s.embed(N);
    return s;
  }
  const std::string kind = init.value("kind", std::string("gaussian_decay"));
  FourierState s(N);
  if (kind == "gaussian_decay") {
    for (int k = -N; k <= N; ++k) s[k] = std::exp(-static_cast<double>(k * k) / 8.0);
  } else if (kind == "single_mode") {
    const int mode = init.value("mode", 1);
    if (std::abs(mode) > N) throw InvalidArgument("initial: single mode outside the cutoff");
    s[mode] = init.value("amplitude", 0.2);
  } else if (kind == "random") {
    std::mt19937_64 rng(derive_seed(seed, "initial"));
    std::normal_distribution<double> normal;
    for (int k = -N; k <= N; ++k) s[k] = {normal(rng), normal(rng)};
  } else {
    throw InvalidArgument("initial kind must be gaussian_decay, single_mode, random or file");
  }
  if (init.contains("norm")) {
    const double target = get<double>(init, "norm");
    const double current = s.norm(0.0);
    if (current > 0) s.coeffs() = std::complex<double>(target / current) * s.coeffs();
  }
  return s;
}

SolveConfig build_solve_config(const json& cfg, std::uint64_t seed, Run& run) {
  SolveConfig c;
  const std::string eq = cfg.value("equation", std::string("cubic"));
  if (eq == "cubic") {
    c.equation.kind = EquationKind::CubicNLS;
  } else if (eq == "dnls") {
    c.equation.kind = EquationKind::DerivativeNLS;
    c.equation.theta = cfg.value("theta", 1.0);
  } else {
    throw InvalidArgument("equation must be cubic or dnls");
  }
  c.equation.cutoff_N = cfg.value("N", 16);
  if (c.equation.cutoff_N < 1) throw InvalidArgument("N must be >= 1");
  c.alpha = cfg.value("alpha", 0.5);
  c.T = cfg.value("T", 1.0);
  c.sign = cfg.value("sign", 1.0);
  c.record_every = cfg.value("record_every", std::size_t{1});
  const json scheme = cfg.value("scheme", json{{"euler", 1024}});
  if (scheme.contains("euler")) {
    c.scheme = SchemeKind::Euler;
    c.euler_steps = get<std::size_t>(scheme, "euler");
  } else if (scheme.contains("picard")) {
    c.scheme = SchemeKind::Picard;
    const json p = scheme["picard"];
    c.picard_params.abs_tol = p.value("tol", 1e-8);
    c.picard_max_iter = p.value("max_iter", 60);
    c.picard_grid = p.value("grid", std::size_t{256});
  } else {
    throw InvalidArgument("scheme must be {\"euler\": n} or {\"picard\": {...}}");
  }
  const json mod = cfg.value("modulation", json{{"kind", "fbm"}, {"hurst", 0.35}});
  c.equation.modulation = std::make_shared<const ModulationPath>(build_modulation(mod, c.T, seed, run));
  c.equation.phi_cache = std::make_shared<PhiCache>();
  return c;
}

// ---- subcommands -----------------------------------------------------------

int cmd_gen_path(Run& run) {
  const json& c = run.config;
  const std::string kind = c.value("kind", std::string("fbm"));
  const std::size_t n = c.value("n", std::size_t{1025});
  const double dt = c.value("dt", 1.0 / 1024);
  const double t0 = c.value("t0", 0.0);
  ModulationPath path = [&] {
    if (kind == "fbm") return gen_fbm(c.value("hurst", 0.5), n, dt, derive_seed(run.globals.seed, "modulation"), t0);
    if (kind == "linear") return gen_linear(c.value("slope", 1.0), n, dt, t0);
    throw InvalidArgument("--kind must be fbm or linear");
  }();
  if (run.globals.out.empty()) {
    io::write_path_csv(path, *run.out);
    return 0;
  }
  const fs::path file(run.globals.out);
  io::write_path(path, file);
  run.outputs.push_back(file);
  run.outputs.push_back(fs::path(file.string() + ".json"));
  return 0;
}

int cmd_irregularity(Run& run) {
  const json& c = run.config;
  ModulationPath path = c.contains("path") ? [&] {
    const fs::path file = get<std::string>(c, "path");
    run.add_input(file);
    return io::read_path(file);
  }()
                                           : build_modulation(c.value("modulation", json{{"kind", "fbm"}}), 1.0,
                                                              run.globals.seed, run);
  const auto grid = symmetric_a_grid(c.value("amax", 100.0), c.value("apoints", std::size_t{201}));
  const auto est = run.timed("scan", [&] {
    return irregularity_norm(path, c.value("rho", 0.5), c.value("gamma", 0.5), grid, c.value("stride", std::size_t{1}));
  });
  std::ostringstream csv;
  csv << "rho,gamma,norm_estimate,a_grid_max,pair_count,argmax_a,argmax_s,argmax_t\n"
      << fmt(est.rho) << ',' << fmt(est.gamma) << ',' << fmt(est.norm_estimate) << ',' << fmt(est.a_grid_max) << ','
      << est.pair_count << ',' << fmt(est.argmax_a) << ',' << fmt(est.argmax_s) << ',' << fmt(est.argmax_t) << '\n';
  if (run.globals.out.empty()) {
    *run.out << csv.str();
  } else {
    open_csv(run, run.globals.out) << csv.str();
  }
  return 0;
}

int cmd_euler_rate(Run& run) {
  const json& c = run.config;
  const double gamma = c.value("gamma", 0.75);
  const double lambda = c.value("lambda", 1.0);
  const double T = c.value("T", 1.0);
  const double x0 = c.value("x0", 1.0);
  const auto n_list = c.value("n_list", std::vector<std::size_t>{64, 128, 256, 512, 1024, 2048, 4096});
  if (n_list.empty()) throw InvalidArgument("n_list must be nonempty");
  const std::size_t path_n = c.value("path_n", n_list.back() + 1);
  if (!(gamma > 0.5 && gamma <= 1)) throw InvalidArgument("gamma must lie in (1/2, 1]");
  const double dt = T / static_cast<double>(path_n - 1);
  const auto Z = std::make_shared<const ModulationPath>(
      gamma >= 1 ? gen_linear(1.0, path_n, dt) : gen_fbm(gamma, path_n, dt, derive_seed(run.globals.seed, "driver")));
  OperatorPath X;
  X.gamma = gamma;
  X.eval = [Z, lambda](double s, double t, const Vector& x) {
    return std::complex<double>(lambda * ((*Z)(t) - (*Z)(s))) * x;
  };
  const auto table = run.timed("study", [&] {
    return convergence_study(X, Vector{x0}, T, n_list, [Z, lambda, x0](double t) {
      return Vector{x0 * std::exp(lambda * ((*Z)(t) - (*Z)(0.0)))};
    });
  });
  std::ostringstream csv;
  csv << "n,max_error\n";
  for (const auto& row : table.rows) csv << row.n << ',' << fmt(row.max_error) << '\n';
  csv << "slope," << fmt(table.slope) << '\n';
  if (run.globals.out.empty()) {
    *run.out << csv.str();
  } else {
    open_csv(run, run.globals.out) << csv.str();
  }
  return 0;
}

int cmd_solve(Run& run) {
  if (run.globals.out.empty()) throw InvalidArgument("solve requires --out DIR");
  const fs::path dir(run.globals.out);
  const SolveConfig config = build_solve_config(run.config, run.globals.seed, run);
  const FourierState phi0 = build_initial(run.config, config.equation.cutoff_N, run.globals.seed, run);
  const auto traj = run.timed("solve", [&] { return solve_controlled(config, phi0); });
  const auto report = conservation_report(traj);
  run.timed("write", [&] {
    io::write_trajectory(traj, dir / "trajectory_psi.csv", false);
    io::write_trajectory(traj, dir / "trajectory_phi.csv", true);
  });
  for (auto name : {"trajectory_psi.csv", "trajectory_psi.csv.json", "trajectory_phi.csv", "trajectory_phi.csv.json"}) {
    run.outputs.push_back(dir / name);
  }
  json timings = json::object();
  for (const auto& [k, v] : run.timings) timings[k] = v;
  const json rep{{"max_l2_drift", report.max_l2_drift},
                 {"l2_initial", traj.l2_history.front()},
                 {"l2_final", traj.l2_history.back()},
                 {"halpha_max", *std::max_element(traj.halpha_history.begin(), traj.halpha_history.end())},
                 {"alpha", traj.alpha},
                 {"local_only", traj.local_only},
                 {"picard_windows", traj.picard_windows},
                 {"phi_cache_hit_rate", config.equation.phi_cache->hit_rate()},
                 {"timings", timings}};
  open_csv(run, dir / "report.json") << rep.dump(2) << '\n';
  return 0;
}

int cmd_galerkin(Run& run) {
  const SolveConfig config = build_solve_config(run.config, run.globals.seed, run);
  const int ref = run.config.value("reference_N", 24);
  const auto Ls = run.config.value("L", std::vector<int>{4, 8, 12, 16});
  SolveConfig ref_config = config;
  ref_config.equation.cutoff_N = ref;
  const FourierState phi0 = build_initial(run.config, ref, run.globals.seed, run);
  const auto rows = run.timed("solve", [&] { return galerkin_convergence(ref_config, phi0, Ls, ref); });
  std::ostringstream csv;
  csv << "L,distance\n";
  for (const auto& r : rows) csv << r.L << ',' << fmt(r.distance) << '\n';
  if (run.globals.out.empty()) {
    *run.out << csv.str();
  } else {
    open_csv(run, run.globals.out) << csv.str();
  }
  return 0;
}

int cmd_mod_continuity(Run& run) {
  SolveConfig config = build_solve_config(run.config, run.globals.seed, run);
  const FourierState phi0 = build_initial(run.config, config.equation.cutoff_N, run.globals.seed, run);
  const std::string mode = run.config.value("mode", std::string("mollify"));
  const auto widths = run.config.value("widths", std::vector<double>{0.125, 0.0625, 0.03125, 0.015625, 0.0078125});
  std::vector<ModulationPath> seq;
  for (double v : widths) {
    if (mode == "mollify") {
      seq.push_back(mollify(*config.equation.modulation, v));
    } else if (mode == "shift") {
      seq.push_back(shifted(*config.equation.modulation, v));
    } else {
      throw InvalidArgument("mode must be mollify or shift");
    }
  }
  std::vector<std::vector<ContinuityRow>> cells(seq.size());
  run.timed("solve", [&] {
    parallel_for(seq.size(), run.globals.threads,
                 [&](std::size_t i) { cells[i] = modulation_continuity(config, phi0, {seq[i]}); });
  });
  std::ostringstream csv;
  csv << "parameter,path_gap,trajectory_gap,ratio\n";
  for (std::size_t i = 0; i < seq.size(); ++i) {
    const auto& r = cells[i].front();
    csv << fmt(widths[i]) << ',' << fmt(r.path_gap) << ',' << fmt(r.trajectory_gap) << ',' << fmt(r.ratio) << '\n';
  }
  if (run.globals.out.empty()) {
    *run.out << csv.str();
  } else {
    open_csv(run, run.globals.out) << csv.str();
  }
  return 0;
}

int cmd_x_bench(Run& run) {
  const json& c = run.config;
  const int N = c.value("N", 32);
  const std::size_t pairs = c.value("pairs", std::size_t{16});
  if (N < 1 || pairs < 2) throw InvalidArgument("x-bench needs N >= 1 and pairs >= 2");
  XOperatorSpec spec;
  spec.cutoff_N = N;
  spec.modulation = std::make_shared<const ModulationPath>(
      build_modulation(c.value("modulation", json{{"kind", "fbm"}, {"hurst", 0.35}}), 1.0, run.globals.seed, run));
  spec.phi_cache = std::make_shared<PhiCache>();
  std::mt19937_64 rng(derive_seed(run.globals.seed, "states"));
  std::normal_distribution<double> normal;
  FourierState psi(N);
  for (int k = -N; k <= N; ++k) psi[k] = {normal(rng), normal(rng)};
  psi.coeffs() = std::complex<double>(1.0 / psi.norm(0.0)) * psi.coeffs();

  std::ostringstream csv;
  csv << "pair,s,t,norm,cold_seconds,warm_seconds\n";
  std::vector<double> lengths, norms;
  for (std::size_t i = 0; i < pairs; ++i) {
    const double len = std::ldexp(1.0, -static_cast<int>(i % 10) - 1);
    const double s = 0.25 * static_cast<double>(i) / static_cast<double>(pairs);
    const double t = s + len;
    const auto clock = [&] {
      const auto t0 = std::chrono::steady_clock::now();
      FourierState x = x_apply(spec, s, t, psi, psi, psi);
      return std::make_pair(std::move(x), std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    };
    const auto [x, cold] = clock();
    const auto warm = clock().second;
    const double nrm = x.norm(0.0);
    lengths.push_back(len);
    norms.push_back(nrm);
    csv << i << ',' << fmt(s) << ',' << fmt(t) << ',' << fmt(nrm) << ',' << fmt(cold) << ',' << fmt(warm) << '\n';
  }
  const double slope = fit_loglog_slope(lengths, norms);
  double constant = 0;
  for (std::size_t i = 0; i < lengths.size(); ++i) constant = std::max(constant, norms[i] / std::pow(lengths[i], slope));
  csv << "hit_rate," << fmt(spec.phi_cache->hit_rate()) << '\n';
  csv << "holder_exponent," << fmt(slope) << '\n';
  csv << "holder_constant," << fmt(constant) << '\n';
  if (run.globals.out.empty()) {
    *run.out << csv.str();
  } else {
    open_csv(run, run.globals.out) << csv.str();
  }
  return 0;
}

BoxField gaussian_packet(std::size_t M, double L, double sigma, double center, double wavenumber,
                         std::complex<double> amplitude) {
  return BoxField::from_function(M, L, [=](double x) {
    const double d = x - center;
    return amplitude * std::exp(-d * d / (2 * sigma * sigma)) * std::polar(1.0, wavenumber * x);
  });
}

int cmd_strichartz(Run& run) {
  const json& c = run.config;
  const double p = c.value("p", 5.0);
  const auto Ts = c.value("T", std::vector<double>{0.125, 0.25, 0.5, 1.0});
  const std::size_t seeds = c.value("seeds", std::size_t{10});
  const std::size_t quad = c.value("quad_points", std::size_t{64});
  const std::size_t M = c.value("grid_points", std::size_t{4096});
  const double L = c.value("box_length", 64.0);
  const double smoothing = c.value("smoothing", 0.0);
  const json mod = normalize_modulation(c.value("modulation", json("fbm:0.4")));
  const double span = *std::max_element(Ts.begin(), Ts.end());
  const BoxField g = gaussian_packet(M, L, 1.0, 0.0, 0.0, 1.0);

  std::vector<StrichartzFit> fits(seeds);
  run.timed("fit", [&] {
    parallel_for(seeds, run.globals.threads, [&](std::size_t i) {
      Run scratch;
      const ModulationPath w = build_modulation(mod, span, derive_seed(run.globals.seed, "seed" + std::to_string(i)), scratch);
      fits[i] = strichartz_fit(w, [&](double) { return g; }, p, Ts, quad, smoothing);
    });
  });
  std::ostringstream csv;
  csv << "seed,T,duhamel_norm,source_norm,ratio,smoothing\n";
  for (std::size_t i = 0; i < seeds; ++i) {
    for (const auto& r : fits[i].rows) {
      csv << i << ',' << fmt(r.T) << ',' << fmt(r.duhamel_norm) << ',' << fmt(r.source_norm) << ',' << fmt(r.ratio)
          << ',' << fmt(r.smoothing) << '\n';
    }
  }
  csv << "fit,seed,slope,max_constant\n";
  for (std::size_t i = 0; i < seeds; ++i) {
    csv << "fit," << i << ',' << fmt(fits[i].slope) << ',' << fmt(fits[i].max_constant) << '\n';
  }
  if (run.globals.out.empty()) {
    *run.out << csv.str();
  } else {
    open_csv(run, run.globals.out) << csv.str();
  }
  return 0;
}

int cmd_nls_line(Run& run) {
  if (run.globals.out.empty()) throw InvalidArgument("nls-line requires --out DIR");
  const fs::path dir(run.globals.out);
  const json& c = run.config;
  const double mu = c.value("mu", 4.0);
  const double T = c.value("T", 0.5);
  const std::size_t n = c.value("n_steps", std::size_t{256});
  const double tol = c.value("tol", 1e-12);
  const double norm = c.value("norm", 0.3);
  const std::size_t M = c.value("grid_points", std::size_t{8192});
  const double L = c.value("box_length", 128.0);
  const ModulationPath w = build_modulation(c.value("modulation", json("fbm:0.4")), T, run.globals.seed, run);
  BoxField u0 = gaussian_packet(M, L, c.value("sigma", 1.0), 0.0, c.value("wavenumber", 0.0), 1.0);
  u0 = std::complex<double>(norm / u0.l2_norm()) * u0;

  const auto sol = run.timed("solve", [&] { return mild_solve_power(w, u0, mu, T, n, tol, c.value("sign", 1.0)); });
  const auto refined = run.timed("solve_refined", [&] { return mild_solve_power(w, u0, mu, T, 2 * sol.steps_used, tol, c.value("sign", 1.0)); });
  const auto drift = [](const LineSolution& s) {
    double d = 0;
    for (double v : s.l2) d = std::max(d, std::abs(v - s.l2.front()));
    return d;
  };
  {
    auto out = open_csv(run, dir / "line_norms.csv");
    out << "t,l2,h1\n";
    for (std::size_t i = 0; i < sol.times.size(); ++i) {
      out << fmt(sol.times[i]) << ',' << fmt(sol.l2[i]) << ',' << fmt(sol.h1[i]) << '\n';
    }
  }
  {
    auto out = open_csv(run, dir / "final_field.csv");
    out << "x,re,im\n";
    const auto& u = sol.final_field;
    for (std::size_t j = 0; j < u.grid_points(); ++j) {
      out << fmt(u.x(j)) << ',' << fmt(u.values()[j].real()) << ',' << fmt(u.values()[j].imag()) << '\n';
    }
  }
  const json rep{{"l2_drift", drift(sol)},
                 {"l2_drift_refined", drift(refined)},
                 {"steps", sol.steps_used},
                 {"halvings", sol.halvings},
                 {"h1_final", sol.h1.back()}};
  open_csv(run, dir / "report.json") << rep.dump(2) << '\n';
  return 0;
}

int cmd_gn(Run& run) {
  const json& c = run.config;
  const double p = c.value("p", 4.0);
  const double eps = c.value("eps", 0.1);
  const std::size_t corpus = c.value("corpus", std::size_t{100});
  const std::size_t M = c.value("grid_points", std::size_t{16384});
  const double L = c.value("box_length", 256.0);
  const auto lambdas = c.value("lambdas", std::vector<double>{0.25, 1.0, 4.0});
  std::mt19937_64 rng(derive_seed(run.globals.seed, "gn-corpus"));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::ostringstream csv;
  csv << "index,lambda,lhs,rhs,ratio\n";
  double max_ratio = 0, max_spread = 0;
  for (std::size_t i = 0; i < corpus; ++i) {
    struct Packet {
      double sigma, center, k;
      std::complex<double> a;
    };
    std::vector<Packet> packets(1 + static_cast<std::size_t>(unit(rng) * 3));
    for (auto& pk : packets) {
      pk.sigma = 0.3 + 0.5 * unit(rng);
      pk.center = -2 + 4 * unit(rng);
      pk.k = -3 + 6 * unit(rng);
      pk.a = std::polar(0.2 + unit(rng), 2 * std::numbers::pi * unit(rng));
    }
    double lo = INFINITY, hi = 0;
    for (double lam : lambdas) {
      const BoxField f = BoxField::from_function(M, L, [&](double x) {
        std::complex<double> v = 0;
        for (const auto& pk : packets) {
          const double d = lam * x - pk.center;
          v += pk.a * std::exp(-d * d / (2 * pk.sigma * pk.sigma)) * std::polar(1.0, pk.k * lam * x);
        }
        return v;
      });
      if (!f.guard_ok()) throw InvalidArgument("gn: corpus field " + std::to_string(i) + " violates the box guard");
      const GNResult r = gn_check(f, p, eps);
      csv << i << ',' << fmt(lam) << ',' << fmt(r.lhs) << ',' << fmt(r.rhs) << ',' << fmt(r.ratio) << '\n';
      max_ratio = std::max(max_ratio, r.ratio);
      lo = std::min(lo, r.ratio);
      hi = std::max(hi, r.ratio);
    }
    max_spread = std::max(max_spread, hi / lo - 1);
  }
  csv << "max_ratio," << fmt(max_ratio) << '\n';
  csv << "max_scale_spread," << fmt(max_spread) << '\n';
  if (run.globals.out.empty()) {
    *run.out << csv.str();
  } else {
    open_csv(run, run.globals.out) << csv.str();
  }
  return 0;
}

// ---- flag plumbing ---------------------------------------------------------

template <class T>
void flag(CLI::App* sub, json& overrides, const std::string& name, const std::string& key, const std::string& help) {
  auto* opt = sub->add_option_function<T>(
      name, [&overrides, key](const T& v) { overrides[key] = v; }, help);
  if constexpr (!std::is_same_v<T, std::string> && requires { typename T::value_type; }) opt->delimiter(',');
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Spectral laboratory for modulated nonlinear Schrödinger equations", "modnls"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1, 1);
  Globals globals;
  app.add_option("--seed", globals.seed, "global seed; per-component seeds are derived from it");
  app.add_option("--threads", globals.threads, "worker threads for independent experiment cells")
      ->check(CLI::PositiveNumber);
  app.add_option("--out", globals.out, "output file or directory (command dependent)");
  app.add_flag("--verbose", globals.verbose, "print the resolved configuration");

  json overrides = json::object();
  std::string config_file;
  std::map<std::string, std::function<int(Run&)>> handlers;
  const auto add = [&](const std::string& name, const std::string& help, std::function<int(Run&)> fn) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->fallthrough();
    sub->add_option("--config", config_file, "JSON configuration; flags override its entries");
    handlers[name] = std::move(fn);
    return sub;
  };

  auto* gen = add("gen-path", "generate a modulation path", cmd_gen_path);
  flag<std::string>(gen, overrides, "--kind", "kind", "fbm or linear");
  flag<double>(gen, overrides, "--hurst", "hurst", "Hurst index");
  flag<double>(gen, overrides, "--slope", "slope", "slope of a linear path");
  flag<std::size_t>(gen, overrides, "--n", "n", "number of grid nodes");
  flag<double>(gen, overrides, "--dt", "dt", "grid spacing");

  auto* irr = add("irregularity", "estimate the (rho,gamma)-irregularity norm", cmd_irregularity);
  flag<std::string>(irr, overrides, "--path", "path", "path CSV");
  flag<double>(irr, overrides, "--rho", "rho", "rho");
  flag<double>(irr, overrides, "--gamma", "gamma", "gamma");
  flag<double>(irr, overrides, "--amax", "amax", "a-grid extent");
  flag<std::size_t>(irr, overrides, "--apoints", "apoints", "a-grid points");
  flag<std::size_t>(irr, overrides, "--stride", "stride", "pair stride");

  auto* eul = add("euler-rate", "Euler convergence rate on a scalar modulated problem", cmd_euler_rate);
  flag<double>(eul, overrides, "--gamma", "gamma", "Hölder exponent of the driver");
  flag<std::vector<std::size_t>>(eul, overrides, "--n", "n_list", "step counts");

  auto* sol = add("solve", "solve modulated NLS on the torus", cmd_solve);
  auto* gal = add("galerkin", "Galerkin convergence study", cmd_galerkin);
  auto* mod = add("mod-continuity", "continuity in the modulation", cmd_mod_continuity);
  for (auto* s : {sol, gal, mod}) {
    flag<int>(s, overrides, "--N", "N", "Fourier cutoff");
    flag<double>(s, overrides, "--T", "T", "final time");
    flag<double>(s, overrides, "--alpha", "alpha", "Sobolev exponent for reports");
    flag<std::string>(s, overrides, "--equation", "equation", "cubic or dnls");
  }
  flag<std::vector<int>>(gal, overrides, "--L", "L", "cutoffs");
  flag<int>(gal, overrides, "--ref-N", "reference_N", "reference cutoff");
  flag<std::vector<double>>(mod, overrides, "--widths", "widths", "mollifier widths or shifts");

  auto* xb = add("x-bench", "benchmark the cubic operator kernel", cmd_x_bench);
  flag<int>(xb, overrides, "--N", "N", "Fourier cutoff");
  flag<std::size_t>(xb, overrides, "--pairs", "pairs", "number of (s,t) pairs");

  auto* st = add("strichartz", "Strichartz scaling fit on the periodic box", cmd_strichartz);
  flag<double>(st, overrides, "--p", "p", "time exponent p");
  flag<std::vector<double>>(st, overrides, "--T", "T", "final times");
  flag<std::size_t>(st, overrides, "--seeds", "seeds", "number of modulation seeds");
  flag<std::string>(st, overrides, "--modulation", "modulation", "fbm:H or linear:slope");
  flag<double>(st, overrides, "--smoothing", "smoothing", "alpha of the smoothing diagnostic (0 = off)");

  auto* nl = add("nls-line", "power-nonlinearity mild solve on the periodic box", cmd_nls_line);
  flag<double>(nl, overrides, "--mu", "mu", "power mu");
  flag<double>(nl, overrides, "--T", "T", "final time");
  flag<std::size_t>(nl, overrides, "--steps", "n_steps", "time steps");

  auto* gn = add("gn", "Gagliardo-Nirenberg ratio over a random corpus", cmd_gn);
  flag<double>(gn, overrides, "--p", "p", "Lebesgue exponent");
  flag<double>(gn, overrides, "--eps", "eps", "epsilon");
  flag<std::size_t>(gn, overrides, "--corpus", "corpus", "corpus size");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    err << "status=ok\n";
    return 0;
  } catch (const CLI::CallForVersion&) {
    out << kVersion << '\n';
    err << "status=ok\n";
    return 0;
  } catch (const CLI::ParseError& e) {
    err << e.what() << "\n" << app.help();
    err << "status=usage_error\n";
    return 1;
  }

  Run r;
  r.command = app.get_subcommands().front()->get_name();
  r.globals = globals;
  r.out = &out;
  r.err = &err;
  const bool out_is_file = r.command != "solve" && r.command != "nls-line";
  try {
    r.config = load_config(config_file, r);
    r.config.merge_patch(overrides);
    if (globals.verbose) err << "config " << r.config.dump() << '\n';
    const int code = handlers.at(r.command)(r);
    finish(r, out_is_file);
    err << "status=ok\n";
    return code;
  } catch (const InvalidArgument& e) {
    err << "error: " << e.what() << '\n' << "status=usage_error\n";
    return 1;
  } catch (const NumericalFailure& e) {
    err << "error: " << e.what() << '\n' << "status=" << e.kind();
    if (!std::isnan(e.time())) err << " t=" << fmt(e.time());
    err << '\n';
    return 2;
  } catch (const nlohmann::json::exception& e) {
    err << "error: bad configuration value: " << e.what() << '\n' << "status=usage_error\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n' << "status=internal_error\n";
    return 2;
  }
}

}  // namespace modnls::cli
