#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "mblab/basis.hpp"
#include "mblab/model.hpp"
#include "mblab/spectrum.hpp"

namespace mblab {

inline constexpr double kDefaultEpsTolerance = 0.025;

struct QuenchInstance {
  DisorderRealization disorder;
  FockState initial_state;
  std::size_t basis_index = 0;
  double energy_mhz = 0.0;
  double eps_target = 0.0;
  double eps_achieved = 0.0;
  double tolerance = kDefaultEpsTolerance;
  double e_min_mhz = 0.0;
  double e_max_mhz = 0.0;
};

// Picks the Fock state whose diagonal energy density is closest to eps_target
// by scanning the whole sector; ties go to the lowest basis index. Throws
// TargetEnergyUnreachable (value = best gap) when nothing lies within tol.
QuenchInstance select_initial_state(const SectorBasis& basis, const DisorderRealization& disorder,
                                    double e_min, double e_max, double eps_target,
                                    double tol = kDefaultEpsTolerance);

// Same scan over precomputed diagonal energies (e.g. HamiltonianOperator::diagonal()).
QuenchInstance select_initial_state(const SectorBasis& basis, std::span<const double> diagonal,
                                    const DisorderRealization& disorder, double e_min, double e_max,
                                    double eps_target, double tol = kDefaultEpsTolerance);

// Stream tags for derive_seed, so independent products of one master seed never
// share disorder draws.
enum class SeedStream : std::uint64_t { Sweep = 0, LevelStatistics = 1, DensityOfStates = 2, FiniteSize = 3 };

// Seed of realization k in cell (eps_index, v_index).
std::uint64_t cell_seed(std::uint64_t master_seed, std::size_t eps_index, std::size_t v_index,
                        std::size_t realization, SeedStream stream = SeedStream::Sweep);

struct EnsembleGap {
  std::size_t eps_index = 0;
  std::size_t v_index = 0;
  std::size_t realization = 0;
  std::uint64_t seed = 0;
  double eps_target = 0.0;
  double amplitude_mhz = 0.0;
  double best_gap = 0.0;
};

struct EnsembleCell {
  std::size_t eps_index = 0;
  std::size_t v_index = 0;
  std::size_t realization = 0;
  QuenchInstance instance;
};

struct Ensemble {
  std::vector<EnsembleCell> instances;
  std::vector<EnsembleGap> gaps;
};

struct EnsembleOptions {
  double tol = kDefaultEpsTolerance;
  ExtremalOptions extremal{};
  int workers = 1;
};

// One fresh disorder realization per (eps, V, k) cell; unreachable targets are
// recorded as gaps. Output order is (V, eps, k) regardless of worker count.
Ensemble build_ensemble(std::shared_ptr<const SectorBasis> basis, const CouplingMatrix& couplings,
                        std::span<const double> eps_grid, std::span<const double> v_grid,
                        std::size_t k, std::uint64_t master_seed, const EnsembleOptions& options = {});

// The 0.05, 0.10, ..., 0.95 mesh of target densities.
std::vector<double> default_eps_grid();

}  // namespace mblab
