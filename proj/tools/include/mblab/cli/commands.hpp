#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "mblab/cli/config.hpp"
#include "mblab/prepare.hpp"

namespace mblab::cli {

struct TrajectoryTable {
  std::vector<double> t_ns;
  std::vector<double> i_gen;
  std::vector<double> pr;   // empty when disabled
  std::vector<double> f_q;  // empty when disabled
  std::vector<double> norm;
  std::vector<double> energy_mhz;
};

// Evolves one instance on the configured schedule and tabulates its observables.
TrajectoryTable simulate(const HamiltonianOperator& h, const QuenchInstance& q, const RunConfig& c,
                         const std::optional<std::filesystem::path>& state_dump = std::nullopt);

void write_trajectory_csv(const std::filesystem::path& path, const TrajectoryTable& t,
                          const std::string& config_hash, const QuenchInstance& q);

std::string cell_file_name(double eps, double v_mhz, std::size_t realization);

struct SweepResult {
  std::filesystem::path run_dir;
  std::size_t processed = 0;  // units computed in this invocation
  std::size_t done = 0;
  std::size_t gaps = 0;
  std::size_t pending = 0;
  bool complete = false;
};

// Resumable (eps, V, realization) sweep. With max_units set, stops after that
// many newly computed units and leaves the rest pending.
SweepResult cmd_sweep(const RunConfig& c, const std::filesystem::path& root,
                      std::optional<std::size_t> max_units = std::nullopt);

std::filesystem::path cmd_rmap(const RunConfig& c, const std::filesystem::path& root);

struct FitResult {
  std::size_t fitted = 0;
  std::size_t skipped = 0;
  std::size_t vc_rows = 0;
};

// Reads <run_dir>/summary/averaged.csv and writes fits.csv and vc.csv beside it.
FitResult cmd_fit(const std::filesystem::path& run_dir, const FitConfig& fit);

std::filesystem::path cmd_dos(const RunConfig& c, const std::filesystem::path& root);
std::filesystem::path cmd_finite_size(const RunConfig& c, const std::filesystem::path& root);

// Single instance at eps_grid[0], v_grid_mhz[0]; returns the trajectory CSV path.
std::filesystem::path cmd_evolve(const RunConfig& c, const std::filesystem::path& root, std::size_t realization,
                                 bool dump_states);

}  // namespace mblab::cli
