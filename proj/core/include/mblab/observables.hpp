#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "mblab/basis.hpp"
#include "mblab/evolve.hpp"

namespace mblab {

// beta_m = 1/N1 on sites occupied in the reference Fock state, -1/N0 elsewhere.
class ImbalancePattern {
 public:
  explicit ImbalancePattern(const FockState& reference);

  int n_sites() const noexcept { return static_cast<int>(beta_.size()); }
  std::span<const double> beta() const noexcept { return beta_; }
  const FockState& reference() const noexcept { return reference_; }

  // Eigenvalue of the (diagonal) imbalance operator on one Fock state.
  double value(Bits occupation) const noexcept;

  // value() for every state of the sector, in basis order.
  std::vector<double> diagonal(const SectorBasis& basis) const;

 private:
  FockState reference_;
  std::vector<double> beta_;
};

// <psi|n_m|psi> per site; sums to N1 for a normalized state.
std::vector<double> occupations(const StateVector& psi, const SectorBasis& basis);

// sum_m beta_m <n_m>.
double generalized_imbalance(const StateVector& psi, const SectorBasis& basis,
                             const ImbalancePattern& pattern);

std::vector<double> fock_probabilities(const StateVector& psi);

// 1 / sum p^2.
double participation_ratio(std::span<const double> p);

enum class FisherConvention {
  Variance,       // <I^2> - <I>^2
  PureStateQfi,   // 4 (<I^2> - <I>^2)
};

// Variance of the imbalance operator in the Fock distribution p.
double fisher_information(std::span<const double> p, const ImbalancePattern& pattern,
                          const SectorBasis& basis,
                          FisherConvention convention = FisherConvention::Variance);

// Same, with the imbalance diagonal already tabulated.
double fisher_information(std::span<const double> p, std::span<const double> imbalance_diagonal,
                          FisherConvention convention = FisherConvention::Variance);

struct ShotModel {
  std::size_t n_shots = 10000;
  // P(read 0 | prepared 0) and P(read 1 | prepared 1) per site; empty = ideal.
  std::vector<double> f0;
  std::vector<double> f1;
  bool post_select = true;
};

struct ShotResult {
  // Indexed by sector ordinal when post-selected, otherwise by the raw 2^N
  // bit pattern.
  std::vector<double> probabilities;
  bool over_sector = true;
  double sector_fraction = 1.0;  // corrected mass found inside the sector
};

// Draws n_shots bitstrings from p, applies per-site readout flips, undoes them
// with the tensor-product inverse confusion matrix (negative entries clipped
// and renormalized), and optionally post-selects onto the sector.
ShotResult sample_and_postselect(std::span<const double> p, const SectorBasis& basis,
                                 const ShotModel& model, std::uint64_t seed);

}  // namespace mblab
