#pragma once

#include <complex>
#include <cstdint>
#include <memory>
#include <numbers>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include "mblab/basis.hpp"

namespace mblab {

// Hamiltonian parameters are ordinary frequencies f = omega / 2pi in MHz and
// times are in ns, so a phase accumulates at 2pi * 1e-3 rad per (MHz ns).
inline constexpr double kRadPerMhzNs = 2.0 * std::numbers::pi * 1e-3;

// Symmetric, zero-diagonal hopping amplitudes in MHz.
class CouplingMatrix {
 public:
  explicit CouplingMatrix(int n_sites);
  explicit CouplingMatrix(Eigen::MatrixXd couplings);

  int n_sites() const noexcept { return static_cast<int>(j_.rows()); }
  double operator()(int m, int n) const { return j_(m, n); }
  void set(int m, int n, double value_mhz);
  const Eigen::MatrixXd& matrix() const noexcept { return j_; }

  // Number of unordered pairs with a nonzero coupling.
  std::size_t nonzero_pairs() const;

 private:
  Eigen::MatrixXd j_;
};

struct DeviceParameters {
  std::vector<double> g_mhz;   // qubit-resonator couplings g_m / 2pi
  double delta_mhz = -568.0;   // common qubit-resonator detuning
  std::optional<Eigen::MatrixXd> lambda_mhz;  // direct couplings, symmetric
  // Readout fidelities P(read 0 | 0) and P(read 1 | 1); empty when unknown.
  std::vector<double> readout_f0;
  std::vector<double> readout_f1;
};

// J_mn = lambda_mn + g_m g_n / delta. Warns on stderr when |delta| < 10 max|g|.
CouplingMatrix coupling_from_device(const DeviceParameters& params);

inline constexpr double kDefaultNearestNeighborMhz = 2.65;
inline constexpr double kDefaultLongRangeMhz = -0.5;

// Chain-ordered stand-in for the measured couplings: a single nearest-neighbor
// value and one shared value for every longer-range pair.
CouplingMatrix default_device_couplings(int n_sites = 19,
                                        double nearest_mhz = kDefaultNearestNeighborMhz,
                                        double long_range_mhz = kDefaultLongRangeMhz);

// Sub-device made of the listed sites (in the given order).
CouplingMatrix restrict_sites(const CouplingMatrix& couplings, std::span<const int> keep);

// Same size, with every coupling touching a removed site set to zero.
CouplingMatrix decouple_sites(const CouplingMatrix& couplings, std::span<const int> removed);

struct DisorderRealization {
  double amplitude_mhz = 0.0;
  std::vector<double> values_mhz;
  std::uint64_t seed = 0;

  int n_sites() const noexcept { return static_cast<int>(values_mhz.size()); }
};

// Independent V_m uniform on [-V, V]; identical (V, seed) gives identical values.
DisorderRealization sample_disorder(int n_sites, double amplitude_mhz, std::uint64_t seed);

// Sum of V_m over occupied sites.
double diagonal_energy(const FockState& state, const DisorderRealization& disorder);

// Off-diagonal structure of the hopping term on one sector. Independent of the
// disorder, so one table serves every realization of a sweep.
class HoppingTable {
 public:
  HoppingTable(std::shared_ptr<const SectorBasis> basis, CouplingMatrix couplings);

  const SectorBasis& basis() const noexcept { return *basis_; }
  const std::shared_ptr<const SectorBasis>& basis_ptr() const noexcept { return basis_; }
  const CouplingMatrix& couplings() const noexcept { return couplings_; }

  std::size_t dim() const noexcept { return basis_->size(); }
  std::size_t nonzeros() const noexcept { return targets_.size(); }
  std::size_t row_begin(std::size_t row) const noexcept { return offsets_[row]; }
  std::size_t row_end(std::size_t row) const noexcept { return offsets_[row + 1]; }
  std::uint32_t target(std::size_t e) const noexcept { return targets_[e]; }
  double value(std::size_t e) const noexcept { return pair_values_[pairs_[e]]; }

  std::size_t max_row_connections() const noexcept;

 private:
  std::shared_ptr<const SectorBasis> basis_;
  CouplingMatrix couplings_;
  std::vector<std::size_t> offsets_;
  std::vector<std::uint32_t> targets_;
  std::vector<std::uint16_t> pairs_;
  std::vector<double> pair_values_;
};

// Sector-restricted XY Hamiltonian with on-site disorder, applied matrix-free
// from a shared HoppingTable plus a per-realization diagonal.
class HamiltonianOperator {
 public:
  HamiltonianOperator(std::shared_ptr<const HoppingTable> hops, DisorderRealization disorder);

  const SectorBasis& basis() const noexcept { return hops_->basis(); }
  const std::shared_ptr<const SectorBasis>& basis_ptr() const noexcept { return hops_->basis_ptr(); }
  const std::shared_ptr<const HoppingTable>& hopping() const noexcept { return hops_; }
  const CouplingMatrix& couplings() const noexcept { return hops_->couplings(); }
  const DisorderRealization& disorder() const noexcept { return disorder_; }
  std::size_t dim() const noexcept { return diagonal_.size(); }
  std::span<const double> diagonal() const noexcept { return diagonal_; }

  void apply(std::span<const double> in, std::span<double> out) const;
  void apply(std::span<const std::complex<double>> in, std::span<std::complex<double>> out) const;
  Eigen::VectorXd apply(const Eigen::VectorXd& in) const;
  Eigen::VectorXcd apply(const Eigen::VectorXcd& in) const;

  // <psi|H|psi> for a state of any norm (not divided by the norm).
  double expectation(const Eigen::VectorXcd& psi) const;

  // H + c * identity.
  HamiltonianOperator shifted(double c) const;

  Eigen::SparseMatrix<double> to_sparse() const;
  Eigen::MatrixXd to_dense() const;

 private:
  std::shared_ptr<const HoppingTable> hops_;
  DisorderRealization disorder_;
  std::vector<double> diagonal_;
};

HamiltonianOperator build_hamiltonian(std::shared_ptr<const SectorBasis> basis,
                                      const CouplingMatrix& couplings,
                                      const DisorderRealization& disorder);

HamiltonianOperator build_hamiltonian(std::shared_ptr<const HoppingTable> hops,
                                      const DisorderRealization& disorder);

}  // namespace mblab
