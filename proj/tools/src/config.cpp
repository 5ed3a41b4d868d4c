#include "mblab/cli/config.hpp"

#include <cstdlib>

#include "mblab/error.hpp"
#include "mblab/evolve.hpp"
#include "mblab/io.hpp"

namespace mblab::cli {

namespace {

const char* source_name(CouplingSource s) {
  switch (s) {
    case CouplingSource::Default: return "default";
    case CouplingSource::Device: return "device";
    case CouplingSource::Matrix: return "matrix";
  }
  return "default";
}

CouplingSource parse_source(const std::string& s) {
  if (s == "default") return CouplingSource::Default;
  if (s == "device") return CouplingSource::Device;
  if (s == "matrix") return CouplingSource::Matrix;
  fail(ErrorCode::ConfigError, "couplings.source must be default, device or matrix, got '" + s + "'");
}

template <class T>
void read(const nlohmann::json& j, const char* key, T& into) {
  if (j.contains(key)) into = j.at(key).get<T>();
}

void read_opt(const nlohmann::json& j, const char* key, std::optional<double>& into) {
  if (!j.contains(key)) return;
  if (j.at(key).is_null()) {
    into.reset();
  } else {
    into = j.at(key).get<double>();
  }
}

}  // namespace

nlohmann::json to_json(const RunConfig& c) {
  nlohmann::json j;
  j["n_sites"] = c.n_sites;
  j["n_excitations"] = c.n_excitations;
  j["couplings"] = {{"source", source_name(c.couplings.source)},
                    {"nearest_mhz", c.couplings.nearest_mhz},
                    {"long_range_mhz", c.couplings.long_range_mhz},
                    {"device_file", c.couplings.device_file},
                    {"J_mhz", c.couplings.lower_mhz}};
  j["eps_grid"] = c.eps_grid;
  j["v_grid_mhz"] = c.v_grid_mhz;
  j["realizations"] = c.realizations;
  j["schedule"] = {{"t_max_ns", c.t_max_ns}, {"dt_ns", c.dt_ns}};
  j["snapshot_times_ns"] = c.snapshot_times_ns;
  j["eps_tol"] = c.eps_tol;
  j["observables"] = {
      {"pr", c.observables.pr},
      {"f_q", c.observables.f_q},
      {"fisher_convention", c.observables.fisher == FisherConvention::Variance ? "variance" : "qfi"},
      {"shots",
       {{"enabled", c.observables.shots.enabled},
        {"n_shots", c.observables.shots.n_shots},
        {"post_select", c.observables.shots.post_select},
        {"readout_errors", c.observables.shots.readout_errors}}}};
  j["krylov"] = {{"dim", c.krylov_dim}, {"tol", c.krylov_tol}};
  j["master_seed"] = c.master_seed;
  j["output_dir"] = c.output_dir;
  j["workers"] = c.workers;
  j["fit"] = {{"window_lo_ns", c.fit.window_lo_ns ? nlohmann::json(*c.fit.window_lo_ns) : nlohmann::json()},
              {"window_hi_ns", c.fit.window_hi_ns ? nlohmann::json(*c.fit.window_hi_ns) : nlohmann::json()},
              {"baseline_lo_mhz", c.fit.baseline_lo_mhz},
              {"baseline_hi_mhz", c.fit.baseline_hi_mhz},
              {"per_eps_baseline", c.fit.per_eps_baseline}};
  j["dos_bins"] = c.dos_bins;
  j["diagonalization_cap"] = c.diagonalization_cap;
  j["finite_size"] = {{"min_sites", c.finite_size.min_sites},
                      {"eps", c.finite_size.eps},
                      {"v_grid_mhz", c.finite_size.v_mhz},
                      {"realizations", c.finite_size.realizations},
                      {"t_final_ns", c.finite_size.t_final_ns},
                      {"diagonalization_cap", c.finite_size.diagonalization_cap}};
  return j;
}

RunConfig config_from_json(const nlohmann::json& j) {
  RunConfig c;
  try {
    read(j, "n_sites", c.n_sites);
    read(j, "n_excitations", c.n_excitations);
    if (j.contains("couplings")) {
      const auto& k = j.at("couplings");
      if (k.contains("source")) c.couplings.source = parse_source(k.at("source").get<std::string>());
      read(k, "nearest_mhz", c.couplings.nearest_mhz);
      read(k, "long_range_mhz", c.couplings.long_range_mhz);
      read(k, "device_file", c.couplings.device_file);
      read(k, "J_mhz", c.couplings.lower_mhz);
    }
    read(j, "eps_grid", c.eps_grid);
    read(j, "v_grid_mhz", c.v_grid_mhz);
    read(j, "realizations", c.realizations);
    if (j.contains("schedule")) {
      read(j.at("schedule"), "t_max_ns", c.t_max_ns);
      read(j.at("schedule"), "dt_ns", c.dt_ns);
    }
    read(j, "snapshot_times_ns", c.snapshot_times_ns);
    read(j, "eps_tol", c.eps_tol);
    if (j.contains("observables")) {
      const auto& o = j.at("observables");
      read(o, "pr", c.observables.pr);
      read(o, "f_q", c.observables.f_q);
      if (o.contains("fisher_convention")) {
        const auto s = o.at("fisher_convention").get<std::string>();
        if (s == "variance") {
          c.observables.fisher = FisherConvention::Variance;
        } else if (s == "qfi") {
          c.observables.fisher = FisherConvention::PureStateQfi;
        } else {
          fail(ErrorCode::ConfigError, "observables.fisher_convention must be variance or qfi");
        }
      }
      if (o.contains("shots")) {
        const auto& s = o.at("shots");
        read(s, "enabled", c.observables.shots.enabled);
        read(s, "n_shots", c.observables.shots.n_shots);
        read(s, "post_select", c.observables.shots.post_select);
        read(s, "readout_errors", c.observables.shots.readout_errors);
      }
    }
    if (j.contains("krylov")) {
      read(j.at("krylov"), "dim", c.krylov_dim);
      read(j.at("krylov"), "tol", c.krylov_tol);
    }
    read(j, "master_seed", c.master_seed);
    read(j, "output_dir", c.output_dir);
    read(j, "workers", c.workers);
    if (j.contains("fit")) {
      const auto& f = j.at("fit");
      read_opt(f, "window_lo_ns", c.fit.window_lo_ns);
      read_opt(f, "window_hi_ns", c.fit.window_hi_ns);
      read(f, "baseline_lo_mhz", c.fit.baseline_lo_mhz);
      read(f, "baseline_hi_mhz", c.fit.baseline_hi_mhz);
      read(f, "per_eps_baseline", c.fit.per_eps_baseline);
    }
    read(j, "dos_bins", c.dos_bins);
    read(j, "diagonalization_cap", c.diagonalization_cap);
    if (j.contains("finite_size")) {
      const auto& f = j.at("finite_size");
      read(f, "min_sites", c.finite_size.min_sites);
      read(f, "eps", c.finite_size.eps);
      read(f, "v_grid_mhz", c.finite_size.v_mhz);
      read(f, "realizations", c.finite_size.realizations);
      read(f, "t_final_ns", c.finite_size.t_final_ns);
      read(f, "diagonalization_cap", c.finite_size.diagonalization_cap);
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::ConfigError, std::string("malformed config: ") + e.what());
  }
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(io::read_file(path));
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::ConfigError, path.string() + ": " + e.what());
  }
  return config_from_json(j);
}

void validate(const RunConfig& c) {
  auto check = [](bool ok, const std::string& what) {
    if (!ok) fail(ErrorCode::ConfigError, what);
  };
  check(c.n_sites >= 2 && c.n_sites <= kMaxSites, "n_sites must lie in [2, 32]");
  check(c.n_excitations >= 1 && c.n_excitations < c.n_sites, "n_excitations must lie in [1, n_sites)");
  check(!c.eps_grid.empty(), "eps_grid must be non-empty");
  for (double e : c.eps_grid) check(e >= 0.0 && e <= 1.0, "eps_grid values must lie in [0, 1]");
  check(!c.v_grid_mhz.empty(), "v_grid_mhz must be non-empty");
  for (double v : c.v_grid_mhz) check(v >= 0.0, "v_grid_mhz values must be >= 0");
  check(c.realizations >= 1, "realizations must be >= 1");
  check(c.t_max_ns >= 0.0 && c.dt_ns > 0.0, "schedule needs t_max_ns >= 0 and dt_ns > 0");
  check(c.eps_tol > 0.0, "eps_tol must be positive");
  check(c.krylov_dim >= 2, "krylov.dim must be >= 2");
  check(c.krylov_tol > 0.0, "krylov.tol must be positive");
  check(c.workers >= 1, "workers must be >= 1");
  check(c.dos_bins >= 1, "dos_bins must be >= 1");
  check(c.observables.shots.n_shots >= 1, "observables.shots.n_shots must be >= 1");
  check(c.fit.baseline_lo_mhz <= c.fit.baseline_hi_mhz, "fit baseline band needs lo <= hi");
  check(c.finite_size.min_sites >= 4, "finite_size.min_sites must be >= 4");
  check(c.finite_size.realizations >= 1, "finite_size.realizations must be >= 1");
  if (c.couplings.source == CouplingSource::Device) {
    check(!c.couplings.device_file.empty(), "couplings.device_file is required for source=device");
  }
  if (c.couplings.source == CouplingSource::Matrix) {
    const auto n = static_cast<std::size_t>(c.n_sites);
    check(c.couplings.lower_mhz.size() == n * (n - 1) / 2, "couplings.J_mhz needs n_sites(n_sites-1)/2 entries");
  }
}

std::string config_hash(const RunConfig& c) {
  nlohmann::json j = to_json(c);
  j.erase("output_dir");
  j.erase("workers");
  if (c.couplings.source == CouplingSource::Device) {
    j["couplings"]["device_file_hash"] = io::file_hash(c.couplings.device_file);
    j["couplings"].erase("device_file");
  }
  return io::hex64(io::fnv1a64(j.dump()));
}

std::string run_id(const RunConfig& c) { return "run-" + config_hash(c).substr(0, 12); }

std::filesystem::path output_root(const RunConfig& c, const std::optional<std::string>& flag) {
  if (flag) return *flag;
  if (const char* env = std::getenv("MBLAB_OUTPUT_ROOT"); env != nullptr && *env != '\0') return env;
  return c.output_dir;
}

CouplingMatrix build_couplings(const RunConfig& c) {
  switch (c.couplings.source) {
    case CouplingSource::Default:
      return default_device_couplings(c.n_sites, c.couplings.nearest_mhz, c.couplings.long_range_mhz);
    case CouplingSource::Device: {
      const DeviceParameters p = io::load_device_parameters(c.couplings.device_file);
      const CouplingMatrix full = coupling_from_device(p);
      if (full.n_sites() == c.n_sites) return full;
      if (full.n_sites() < c.n_sites) {
        fail(ErrorCode::ConfigError, "device file describes " + std::to_string(full.n_sites()) +
                                         " qubits but n_sites is " + std::to_string(c.n_sites));
      }
      std::vector<int> keep(static_cast<std::size_t>(c.n_sites));
      for (int i = 0; i < c.n_sites; ++i) keep[static_cast<std::size_t>(i)] = i;
      return restrict_sites(full, keep);
    }
    case CouplingSource::Matrix: {
      nlohmann::json j{{"n_sites", c.n_sites}, {"J_mhz", c.couplings.lower_mhz}};
      return io::model_from_json(j).couplings;
    }
  }
  fail(ErrorCode::ConfigError, "unknown coupling source");
}

std::pair<std::vector<double>, std::vector<double>> readout_fidelities(const RunConfig& c) {
  if (!c.observables.shots.readout_errors || c.couplings.device_file.empty()) return {};
  const DeviceParameters p = io::load_device_parameters(c.couplings.device_file);
  if (p.readout_f0.size() < static_cast<std::size_t>(c.n_sites) ||
      p.readout_f1.size() < static_cast<std::size_t>(c.n_sites)) {
    return {};
  }
  const auto n = static_cast<std::ptrdiff_t>(c.n_sites);
  return {{p.readout_f0.begin(), p.readout_f0.begin() + n}, {p.readout_f1.begin(), p.readout_f1.begin() + n}};
}

std::vector<double> schedule(const RunConfig& c) { return uniform_schedule(c.t_max_ns, c.dt_ns); }

}  // namespace mblab::cli
