#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "mblab/model.hpp"

namespace mblab {

// Reference <r> values: Poisson 2 ln 2 - 1 and the large-N GOE value.
inline constexpr double kPoissonMeanR = 0.38629436111989057;
inline constexpr double kGoeMeanR = 0.5307;

inline constexpr std::size_t kDefaultDiagonalizationCap = 5000;

// Closed sub-interval [eps_lo, eps_hi] of normalized energy density.
struct SpectralWindow {
  SpectralWindow(double lo, double hi);
  double eps_lo;
  double eps_hi;
  bool contains(double eps) const noexcept { return eps >= eps_lo && eps <= eps_hi; }
};

struct EigenSystem {
  Eigen::VectorXd energies;                // ascending, MHz
  std::optional<Eigen::MatrixXd> vectors;  // orthonormal columns over the sector

  std::size_t size() const noexcept { return static_cast<std::size_t>(energies.size()); }
  double e_min() const { return energies(0); }
  double e_max() const { return energies(energies.size() - 1); }
};

struct ExtremalOptions {
  double tol = 1e-10;  // residual bound relative to the spectral width
  int max_iterations = 400;
  std::uint64_t seed = 0x5eed;
};

struct SpectralBounds {
  double e_min = 0.0;
  double e_max = 0.0;
  int iterations = 0;
  double residual = 0.0;  // worst of the two Ritz residual estimates, MHz
};

// Lanczos with full reorthogonalization for the two ends of the spectrum.
SpectralBounds extremal_eigenvalues(const HamiltonianOperator& h, const ExtremalOptions& options = {});

// (E - E_min) / (E_max - E_min).
double energy_density(double e, double e_min, double e_max);

// Dense symmetric eigendecomposition (LAPACK). Throws DimensionTooLarge above `cap`.
EigenSystem full_spectrum(const HamiltonianOperator& h, bool want_vectors,
                          std::size_t cap = kDefaultDiagonalizationCap);
EigenSystem full_spectrum(Eigen::MatrixXd symmetric, bool want_vectors);

struct GapRatios {
  std::vector<double> r;
  std::size_t degenerate_excluded = 0;
};

// r_a = min(d_a, d_a+1) / max(d_a, d_a+1) over consecutive gaps. Pairs whose
// gaps are both below 1e-12 * degeneracy_scale are skipped and counted; the
// scale defaults to the width of `energies`.
GapRatios gap_ratios(std::span<const double> energies, std::optional<double> degeneracy_scale = {});

struct MeanGapRatio {
  double mean = 0.0;
  std::size_t count = 0;  // number of r values averaged
  std::size_t levels = 0;
  std::size_t degenerate_excluded = 0;
};

// Mean r over the consecutive levels whose energy density lies in `window`,
// with densities taken relative to the first and last energy.
MeanGapRatio mean_r_in_window(const EigenSystem& eigs, const SpectralWindow& window);
MeanGapRatio mean_r_in_window(std::span<const double> energies, double e_min, double e_max,
                              const SpectralWindow& window);

// Mean r over the central `fraction` of the levels by index.
MeanGapRatio mean_r_central(std::span<const double> energies, double fraction = 0.5);

inline constexpr std::size_t kMinLevelsForStatistics = 10;

class Histogram {
 public:
  Histogram(int n_bins, double lo, double hi);

  // Values outside [lo, hi] are ignored; hi itself falls in the last bin.
  void add(double value);
  void add(std::span<const double> values);

  int n_bins() const noexcept { return static_cast<int>(counts_.size()); }
  double lo() const noexcept { return lo_; }
  double hi() const noexcept { return hi_; }
  double center(int bin) const;
  std::size_t count(int bin) const { return counts_.at(static_cast<std::size_t>(bin)); }
  std::size_t total() const noexcept { return total_; }

  // Normalized bin masses (sum to one); EmptyInput when nothing was binned.
  std::vector<double> masses() const;

 private:
  double lo_;
  double hi_;
  std::vector<std::size_t> counts_;
  std::size_t total_ = 0;
};

Histogram dos_histogram(std::span<const double> values, int n_bins, double lo, double hi);

// Half the L1 distance between the normalized masses of two same-binned histograms.
double total_variation(const Histogram& a, const Histogram& b);

}  // namespace mblab
