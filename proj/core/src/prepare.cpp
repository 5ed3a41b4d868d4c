#include "mblab/prepare.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "mblab/error.hpp"
#include "mblab/parallel.hpp"
#include "mblab/random.hpp"

namespace mblab {

QuenchInstance select_initial_state(const SectorBasis& basis, std::span<const double> diagonal,
                                    const DisorderRealization& disorder, double e_min, double e_max,
                                    double eps_target, double tol) {
  require(eps_target >= 0.0 && eps_target <= 1.0, ErrorCode::InvalidArgument,
          "eps_target must lie in [0, 1]");
  require(tol > 0.0, ErrorCode::InvalidArgument, "tolerance must be positive");
  require(diagonal.size() == basis.size(), ErrorCode::ShapeMismatch,
          "diagonal length does not match the sector");
  require(disorder.n_sites() == basis.n_sites(), ErrorCode::ShapeMismatch,
          "disorder and basis have different site counts");

  std::size_t best = 0;
  double best_gap = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < diagonal.size(); ++i) {
    const double gap = std::abs(energy_density(diagonal[i], e_min, e_max) - eps_target);
    if (gap < best_gap) {
      best_gap = gap;
      best = i;
    }
  }
  if (!(best_gap <= tol)) {
    fail(ErrorCode::TargetEnergyUnreachable,
         "no Fock state within " + std::to_string(tol) + " of eps=" + std::to_string(eps_target) +
             " (closest gap " + std::to_string(best_gap) + ")",
         best_gap);
  }

  QuenchInstance q;
  q.disorder = disorder;
  q.initial_state = basis.state_at(best);
  q.basis_index = best;
  q.energy_mhz = diagonal_energy(q.initial_state, disorder);
  q.eps_target = eps_target;
  q.eps_achieved = energy_density(q.energy_mhz, e_min, e_max);
  q.tolerance = tol;
  q.e_min_mhz = e_min;
  q.e_max_mhz = e_max;
  return q;
}

QuenchInstance select_initial_state(const SectorBasis& basis, const DisorderRealization& disorder,
                                    double e_min, double e_max, double eps_target, double tol) {
  require(disorder.n_sites() == basis.n_sites(), ErrorCode::ShapeMismatch,
          "disorder and basis have different site counts");
  std::vector<double> diagonal(basis.size());
  for (std::size_t i = 0; i < basis.size(); ++i) {
    diagonal[i] = diagonal_energy(FockState(basis.bits_at(i), basis.n_sites()), disorder);
  }
  return select_initial_state(basis, diagonal, disorder, e_min, e_max, eps_target, tol);
}

std::uint64_t cell_seed(std::uint64_t master_seed, std::size_t eps_index, std::size_t v_index,
                        std::size_t realization, SeedStream stream) {
  return derive_seed(master_seed, {static_cast<std::uint64_t>(stream), eps_index, v_index, realization});
}

Ensemble build_ensemble(std::shared_ptr<const SectorBasis> basis, const CouplingMatrix& couplings,
                        std::span<const double> eps_grid, std::span<const double> v_grid,
                        std::size_t k, std::uint64_t master_seed, const EnsembleOptions& options) {
  require(!eps_grid.empty() && !v_grid.empty(), ErrorCode::InvalidArgument, "grids must be non-empty");
  require(k >= 1, ErrorCode::InvalidArgument, "need at least one realization per cell");

  const auto hops = std::make_shared<const HoppingTable>(basis, couplings);
  const std::size_t n_units = v_grid.size() * eps_grid.size() * k;

  struct Slot {
    std::optional<EnsembleCell> cell;
    std::optional<EnsembleGap> gap;
  };
  std::vector<Slot> slots(n_units);

  parallel_for(n_units, options.workers, [&](std::size_t u) {
    const std::size_t r = u % k;
    const std::size_t e = (u / k) % eps_grid.size();
    const std::size_t v = u / (k * eps_grid.size());
    const std::uint64_t seed = cell_seed(master_seed, e, v, r);
    const HamiltonianOperator h(hops, sample_disorder(basis->n_sites(), v_grid[v], seed));
    const SpectralBounds bounds = extremal_eigenvalues(h, options.extremal);
    try {
      slots[u].cell = EnsembleCell{e, v, r,
                                   select_initial_state(*basis, h.diagonal(), h.disorder(),
                                                        bounds.e_min, bounds.e_max, eps_grid[e],
                                                        options.tol)};
    } catch (const Error& err) {
      if (err.code() != ErrorCode::TargetEnergyUnreachable) throw;
      slots[u].gap = EnsembleGap{e, v, r, seed, eps_grid[e], v_grid[v], err.value().value_or(0.0)};
    }
  });

  Ensemble out;
  for (Slot& s : slots) {
    if (s.cell) out.instances.push_back(std::move(*s.cell));
    if (s.gap) out.gaps.push_back(*s.gap);
  }
  return out;
}

std::vector<double> default_eps_grid() {
  std::vector<double> grid;
  for (int i = 1; i <= 19; ++i) grid.push_back(i / 20.0);
  return grid;
}

}  // namespace mblab
