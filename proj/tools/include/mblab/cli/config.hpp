#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mblab/analysis.hpp"
#include "mblab/model.hpp"
#include "mblab/observables.hpp"

namespace mblab::cli {

enum class CouplingSource { Default, Device, Matrix };

struct CouplingConfig {
  CouplingSource source = CouplingSource::Default;
  double nearest_mhz = kDefaultNearestNeighborMhz;
  double long_range_mhz = kDefaultLongRangeMhz;
  std::string device_file;             // for Device
  std::vector<double> lower_mhz;       // for Matrix: strict lower triangle, row by row
};

struct ShotConfig {
  bool enabled = false;
  std::size_t n_shots = 10000;
  bool post_select = true;
  bool readout_errors = true;  // use the device file's F0/F1 when available
};

struct ObservableConfig {
  bool pr = true;
  bool f_q = true;
  FisherConvention fisher = FisherConvention::Variance;
  ShotConfig shots;
};

struct FitConfig {
  std::optional<double> window_lo_ns;  // unset: the amplitude-dependent default
  std::optional<double> window_hi_ns;
  double baseline_lo_mhz = 38.0;
  double baseline_hi_mhz = 50.0;
  bool per_eps_baseline = false;
};

struct FiniteSizeConfig {
  int min_sites = 14;
  std::vector<double> eps{0.2, 0.5};
  std::vector<double> v_mhz{4.0, 16.0, 50.0};
  std::size_t realizations = 10;
  double t_final_ns = 1500.0;
  std::size_t diagonalization_cap = 13000;
};

struct RunConfig {
  int n_sites = 19;
  int n_excitations = 9;
  CouplingConfig couplings;
  std::vector<double> eps_grid = default_eps_grid();
  std::vector<double> v_grid_mhz{4.0, 8.0, 12.0, 16.0, 20.0, 26.0, 32.0, 38.0, 44.0, 50.0};
  std::size_t realizations = 20;
  double t_max_ns = 1500.0;
  double dt_ns = 20.0;
  std::vector<double> snapshot_times_ns{1000.0};
  double eps_tol = kDefaultEpsTolerance;
  ObservableConfig observables;
  int krylov_dim = 30;
  double krylov_tol = 1e-10;
  std::uint64_t master_seed = 1;
  std::string output_dir = "out";
  int workers = 1;
  FitConfig fit;
  int dos_bins = 20;
  std::size_t diagonalization_cap = kDefaultDiagonalizationCap;
  FiniteSizeConfig finite_size;
};

nlohmann::json to_json(const RunConfig& c);
RunConfig config_from_json(const nlohmann::json& j);  // missing keys keep their defaults
RunConfig load_config(const std::filesystem::path& path);

// Throws ConfigError naming the offending field.
void validate(const RunConfig& c);

// Hash of everything that affects results (not the output location or worker count).
std::string config_hash(const RunConfig& c);
std::string run_id(const RunConfig& c);

// Output root resolution: explicit flag, then $MBLAB_OUTPUT_ROOT, then the config value.
std::filesystem::path output_root(const RunConfig& c, const std::optional<std::string>& flag);

CouplingMatrix build_couplings(const RunConfig& c);
// Readout fidelities for the shot model; empty when unavailable or disabled.
std::pair<std::vector<double>, std::vector<double>> readout_fidelities(const RunConfig& c);

std::vector<double> schedule(const RunConfig& c);

}  // namespace mblab::cli
