#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "mblab/basis.hpp"
#include "mblab/model.hpp"
#include "mblab/spectrum.hpp"

namespace mblab {

using StateVector = Eigen::VectorXcd;

// Unit amplitude on one Fock state of the sector.
StateVector fock_vector(const SectorBasis& basis, const FockState& state);

// 0, dt, 2 dt, ... up to and including t_max (when it lands on the grid).
std::vector<double> uniform_schedule(double t_max_ns, double dt_ns);

struct KrylovOptions {
  int krylov_dim = 30;
  double tol = 1e-10;  // bound on the per-step residual estimate, absolute
  bool full_reorthogonalization = true;
  bool track_energy = true;
  bool keep_states = false;
  std::size_t max_substeps = 50'000'000;
};

struct Trajectory {
  std::vector<double> times_ns;
  std::vector<double> norm;
  std::vector<double> energy_mhz;  // empty unless track_energy
  std::vector<StateVector> states;  // empty unless keep_states
  std::size_t substeps = 0;
  std::size_t matvecs = 0;
};

// Called once per scheduled time with the propagated state.
using TrajectoryObserver = std::function<void(std::size_t index, double t_ns, const StateVector& psi)>;

// e^{-iHt} through Lanczos-Krylov projection with adaptive sub-stepping. One
// Krylov space is reused for every scheduled time it can reach within `tol`.
class KrylovPropagator {
 public:
  KrylovPropagator(const HamiltonianOperator& h, KrylovOptions options = {});

  // Advances psi in place by dt (ns); dt may be negative.
  void propagate(StateVector& psi, double dt_ns);

  // Propagates psi0 through the ascending offsets (all >= 0), invoking emit for
  // each; psi0 is left at the last offset.
  void propagate_through(StateVector& psi, std::span<const double> offsets_ns,
                         const std::function<void(std::size_t, const StateVector&)>& emit);

  std::size_t substeps() const noexcept { return substeps_; }
  std::size_t matvecs() const noexcept { return matvecs_; }

 private:
  struct Projection;
  void build(const StateVector& psi, Projection& p);

  const HamiltonianOperator* h_;
  KrylovOptions options_;
  Eigen::MatrixXcd basis_;
  std::size_t substeps_ = 0;
  std::size_t matvecs_ = 0;
};

Trajectory evolve_krylov(const HamiltonianOperator& h, const StateVector& psi0,
                         std::span<const double> schedule_ns, const KrylovOptions& options = {},
                         const TrajectoryObserver& observer = {});

inline constexpr std::size_t kDenseEvolutionCap = 2000;

// Propagation by exact eigendecomposition: Q exp(-i Lambda t) Q^T psi0.
class DensePropagator {
 public:
  explicit DensePropagator(const HamiltonianOperator& h, std::size_t cap = kDenseEvolutionCap);
  explicit DensePropagator(EigenSystem eigs);

  StateVector at(const StateVector& psi0, double t_ns) const;
  const EigenSystem& eigensystem() const noexcept { return eigs_; }

 private:
  EigenSystem eigs_;
};

StateVector evolve_dense(const HamiltonianOperator& h, const StateVector& psi0, double t_ns,
                         std::size_t cap = kDenseEvolutionCap);

}  // namespace mblab
