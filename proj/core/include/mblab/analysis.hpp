#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "mblab/evolve.hpp"
#include "mblab/model.hpp"
#include "mblab/observables.hpp"
#include "mblab/prepare.hpp"
#include "mblab/spectrum.hpp"

namespace mblab {

struct Series {
  std::vector<double> times_ns;
  std::vector<double> values;
};

struct AveragedSeries {
  std::vector<double> times_ns;
  std::vector<double> mean;
  std::vector<double> sem;  // sample standard deviation / sqrt(k); zero for k = 1
  std::size_t k = 0;
};

// Pointwise mean and standard error over realizations sharing one time grid.
AveragedSeries disorder_average(std::span<const Series> series);

struct FitWindow {
  double lo_ns = 100.0;
  double hi_ns = 1500.0;
};

// [100, 1000] ns at V <= 4 MHz where the fast decay reaches the noise floor
// sooner, [100, 1500] ns otherwise.
FitWindow default_fit_window(double amplitude_mhz);

struct PowerLawFit {
  double xi = 0.0;
  double xi_err = 0.0;
  double log_prefactor = 0.0;
  double t_lo_ns = 0.0;
  double t_hi_ns = 0.0;
  double r_squared = 1.0;
  std::size_t points = 0;
};

// Ordinary least squares of log I against log t inside the window; xi is
// minus the slope and xi_err its standard error.
PowerLawFit fit_power_law(std::span<const double> times_ns, std::span<const double> values,
                          const FitWindow& window);
PowerLawFit fit_power_law(const AveragedSeries& series, const FitWindow& window);

inline constexpr std::size_t kMinFitPoints = 5;

struct XiPoint {
  double v_mhz = 0.0;
  double xi = 0.0;
  double xi_err = 0.0;
};

struct BaselineBand {
  double lo_mhz = 38.0;
  double hi_mhz = 50.0;
};

struct Baseline {
  double value = 0.0;
  double err = 0.0;
  std::size_t count = 0;
};

// Mean xi over points with V inside the band. The uncertainty is the sample
// spread of those values, or the lone point's fit error when only one exists.
Baseline baseline_xi(std::span<const XiPoint> points, const BaselineBand& band = {});

struct VcEstimate {
  double vc_mhz = 0.0;
  double vc_err = 0.0;   // half the grid interval bracketing the crossing
  double baseline = 0.0;
  double baseline_err = 0.0;
};

// Smallest V where xi(V) first drops to baseline + err, interpolated linearly
// between grid points. The curve must be sorted by V.
VcEstimate estimate_vc(std::span<const XiPoint> curve, const Baseline& baseline);
VcEstimate estimate_vc(std::span<const XiPoint> curve, const BaselineBand& band = {});

// sum_a |c_a|^2 O_aa for an observable diagonal in the Fock basis.
double diagonal_ensemble(const EigenSystem& eigs, const StateVector& psi0,
                         std::span<const double> observable_diagonal);
double diagonal_ensemble_imbalance(const EigenSystem& eigs, const StateVector& psi0,
                                   const ImbalancePattern& pattern, const SectorBasis& basis);
// Infinite-time Fock distribution sum_a |c_a|^2 |<n|a>|^2.
std::vector<double> diagonal_ensemble_probabilities(const EigenSystem& eigs, const StateVector& psi0);

struct FiniteSizeOptions {
  std::vector<double> eps_targets{0.2, 0.5};
  std::vector<double> v_grid_mhz{4.0, 16.0, 50.0};
  std::size_t realizations = 10;
  double t_final_ns = 1500.0;
  // Dense diagonalization (and the diagonal ensemble) is skipped above this.
  std::size_t diagonalization_cap = 13000;
  double eps_tol = kDefaultEpsTolerance;
  std::uint64_t master_seed = 1;
  int workers = 1;
  KrylovOptions krylov{};
};

struct FiniteSizeRow {
  int n_sites = 0;
  std::size_t dim = 0;
  double eps = 0.0;
  double v_mhz = 0.0;
  double i_gen_final = 0.0;
  double i_gen_final_sem = 0.0;
  double i_gen_de = std::numeric_limits<double>::quiet_NaN();
  double i_gen_de_sem = std::numeric_limits<double>::quiet_NaN();
  std::size_t count = 0;  // realizations that reached the target density
  std::size_t gaps = 0;
};

// Subsets of a device obtained by dropping its highest-index sites, from the
// full size down to min_size.
std::vector<std::vector<int>> trailing_removal_subsets(int n_full, int min_size);

// Imbalance at t_final and its diagonal ensemble per (subset, V, eps), each
// subset run at N1 = floor(N/2).
std::vector<FiniteSizeRow> finite_size_series(const CouplingMatrix& device,
                                              std::span<const std::vector<int>> site_subsets,
                                              const FiniteSizeOptions& options);

}  // namespace mblab
