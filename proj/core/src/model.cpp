#include "mblab/model.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <iostream>
#include <string>

#include "mblab/error.hpp"
#include "mblab/random.hpp"

namespace mblab {

CouplingMatrix::CouplingMatrix(int n_sites) {
  require(n_sites >= 0 && n_sites <= kMaxSites, ErrorCode::InvalidArgument,
          "coupling matrix size must lie in [0, 32]");
  j_ = Eigen::MatrixXd::Zero(n_sites, n_sites);
}

CouplingMatrix::CouplingMatrix(Eigen::MatrixXd couplings) : j_(std::move(couplings)) {
  require(j_.rows() == j_.cols(), ErrorCode::ShapeMismatch, "coupling matrix must be square");
  require(j_.rows() <= kMaxSites, ErrorCode::InvalidArgument, "at most 32 sites");
  for (Eigen::Index m = 0; m < j_.rows(); ++m) {
    require(j_(m, m) == 0.0, ErrorCode::InvalidArgument, "coupling matrix diagonal must be zero");
    for (Eigen::Index n = m + 1; n < j_.cols(); ++n) {
      require(j_(m, n) == j_(n, m), ErrorCode::InvalidArgument,
              "coupling matrix must be symmetric");
    }
  }
}

void CouplingMatrix::set(int m, int n, double value_mhz) {
  require(m >= 0 && n >= 0 && m < n_sites() && n < n_sites(), ErrorCode::IndexOutOfRange,
          "site index outside coupling matrix");
  require(m != n, ErrorCode::InvalidArgument, "diagonal couplings are fixed at zero");
  j_(m, n) = value_mhz;
  j_(n, m) = value_mhz;
}

std::size_t CouplingMatrix::nonzero_pairs() const {
  std::size_t count = 0;
  for (int m = 0; m < n_sites(); ++m) {
    for (int n = m + 1; n < n_sites(); ++n) count += j_(m, n) != 0.0;
  }
  return count;
}

CouplingMatrix coupling_from_device(const DeviceParameters& params) {
  if (params.delta_mhz == 0.0) {
    fail(ErrorCode::DivisionByZeroDetuning, "qubit-resonator detuning must be nonzero");
  }
  const int n = static_cast<int>(params.g_mhz.size());
  if (params.lambda_mhz) {
    require(params.lambda_mhz->rows() == n && params.lambda_mhz->cols() == n,
            ErrorCode::ShapeMismatch, "lambda must be n_sites x n_sites");
  }
  double g_max = 0.0;
  for (double g : params.g_mhz) g_max = std::max(g_max, std::abs(g));
  if (std::abs(params.delta_mhz) < 10.0 * g_max) {
    std::cerr << "warning: |delta| = " << std::abs(params.delta_mhz)
              << " MHz is not much larger than max|g| = " << g_max
              << " MHz; the dispersive coupling is unreliable\n";
  }

  CouplingMatrix out(n);
  for (int m = 0; m < n; ++m) {
    for (int k = m + 1; k < n; ++k) {
      const double direct = params.lambda_mhz ? (*params.lambda_mhz)(m, k) : 0.0;
      out.set(m, k, direct + params.g_mhz[m] * params.g_mhz[k] / params.delta_mhz);
    }
  }
  return out;
}

CouplingMatrix default_device_couplings(int n_sites, double nearest_mhz, double long_range_mhz) {
  CouplingMatrix out(n_sites);
  for (int m = 0; m < n_sites; ++m) {
    for (int n = m + 1; n < n_sites; ++n) out.set(m, n, n == m + 1 ? nearest_mhz : long_range_mhz);
  }
  return out;
}

CouplingMatrix restrict_sites(const CouplingMatrix& couplings, std::span<const int> keep) {
  const int n = static_cast<int>(keep.size());
  for (int s : keep) {
    require(s >= 0 && s < couplings.n_sites(), ErrorCode::IndexOutOfRange,
            "kept site " + std::to_string(s) + " outside device");
  }
  CouplingMatrix out(n);
  for (int a = 0; a < n; ++a) {
    for (int b = a + 1; b < n; ++b) {
      require(keep[a] != keep[b], ErrorCode::InvalidArgument, "duplicate site in subset");
      out.set(a, b, couplings(keep[a], keep[b]));
    }
  }
  return out;
}

CouplingMatrix decouple_sites(const CouplingMatrix& couplings, std::span<const int> removed) {
  Eigen::MatrixXd j = couplings.matrix();
  for (int s : removed) {
    require(s >= 0 && s < couplings.n_sites(), ErrorCode::IndexOutOfRange,
            "removed site " + std::to_string(s) + " outside device");
    j.row(s).setZero();
    j.col(s).setZero();
  }
  return CouplingMatrix(std::move(j));
}

DisorderRealization sample_disorder(int n_sites, double amplitude_mhz, std::uint64_t seed) {
  if (!(amplitude_mhz >= 0.0)) {
    fail(ErrorCode::NegativeAmplitude, "disorder amplitude must be >= 0", amplitude_mhz);
  }
  require(n_sites >= 0 && n_sites <= kMaxSites, ErrorCode::InvalidArgument,
          "n_sites must lie in [0, 32]");
  DisorderRealization d;
  d.amplitude_mhz = amplitude_mhz;
  d.seed = seed;
  d.values_mhz.resize(static_cast<std::size_t>(n_sites));
  Rng rng(seed);
  for (double& v : d.values_mhz) v = amplitude_mhz * (2.0 * rng.uniform() - 1.0);
  return d;
}

double diagonal_energy(const FockState& state, const DisorderRealization& disorder) {
  require(state.n_sites() == disorder.n_sites(), ErrorCode::ShapeMismatch,
          "state and disorder have different site counts");
  double e = 0.0;
  for (int m = 0; m < state.n_sites(); ++m) {
    if (state.occupied(m)) e += disorder.values_mhz[static_cast<std::size_t>(m)];
  }
  return e;
}

HoppingTable::HoppingTable(std::shared_ptr<const SectorBasis> basis, CouplingMatrix couplings)
    : basis_(std::move(basis)), couplings_(std::move(couplings)) {
  require(basis_ != nullptr, ErrorCode::InvalidArgument, "null basis");
  const int n = basis_->n_sites();
  require(couplings_.n_sites() == n, ErrorCode::ShapeMismatch,
          "coupling matrix has " + std::to_string(couplings_.n_sites()) +
              " sites but the basis has " + std::to_string(n));

  pair_values_.resize(static_cast<std::size_t>(n * n));
  for (int m = 0; m < n; ++m) {
    for (int k = 0; k < n; ++k) pair_values_[static_cast<std::size_t>(m * n + k)] = couplings_(m, k);
  }

  const std::size_t dim = basis_->size();
  const auto per_row = static_cast<std::size_t>(basis_->n_excitations()) *
                       static_cast<std::size_t>(n - basis_->n_excitations());
  offsets_.reserve(dim + 1);
  targets_.reserve(dim * per_row);
  pairs_.reserve(dim * per_row);
  offsets_.push_back(0);
  const std::uint32_t full = n == kMaxSites ? ~0u : ((1u << n) - 1u);
  for (std::size_t row = 0; row < dim; ++row) {
    const Bits s = basis_->bits_at(row);
    for (Bits occ = s; occ != 0; occ &= occ - 1) {
      const int m = std::countr_zero(occ);
      for (Bits emp = ~s & full; emp != 0; emp &= emp - 1) {
        const int k = std::countr_zero(emp);
        if (couplings_(m, k) == 0.0) continue;
        const Bits hopped = s ^ (Bits{1} << m) ^ (Bits{1} << k);
        targets_.push_back(static_cast<std::uint32_t>(basis_->rank(hopped)));
        pairs_.push_back(static_cast<std::uint16_t>(m * n + k));
      }
    }
    offsets_.push_back(targets_.size());
  }
}

std::size_t HoppingTable::max_row_connections() const noexcept {
  std::size_t best = 0;
  for (std::size_t r = 0; r + 1 < offsets_.size(); ++r) best = std::max(best, offsets_[r + 1] - offsets_[r]);
  return best;
}

HamiltonianOperator::HamiltonianOperator(std::shared_ptr<const HoppingTable> hops,
                                         DisorderRealization disorder)
    : hops_(std::move(hops)), disorder_(std::move(disorder)) {
  require(hops_ != nullptr, ErrorCode::InvalidArgument, "null hopping table");
  const SectorBasis& b = hops_->basis();
  require(disorder_.n_sites() == b.n_sites(), ErrorCode::ShapeMismatch,
          "disorder realization has " + std::to_string(disorder_.n_sites()) +
              " sites but the basis has " + std::to_string(b.n_sites()));
  diagonal_.resize(b.size());
  for (std::size_t i = 0; i < b.size(); ++i) {
    double e = 0.0;
    for (Bits s = b.bits_at(i); s != 0; s &= s - 1) {
      e += disorder_.values_mhz[static_cast<std::size_t>(std::countr_zero(s))];
    }
    diagonal_[i] = e;
  }
}

namespace {

template <class T>
void apply_impl(const HoppingTable& hops, std::span<const double> diag, std::span<const T> in,
                std::span<T> out) {
  const std::size_t dim = diag.size();
  require(in.size() == dim && out.size() == dim, ErrorCode::ShapeMismatch,
          "vector length does not match the sector dimension");
  require(in.data() != out.data(), ErrorCode::InvalidArgument, "apply cannot run in place");
  for (std::size_t i = 0; i < dim; ++i) {
    T acc = diag[i] * in[i];
    const std::size_t end = hops.row_end(i);
    for (std::size_t e = hops.row_begin(i); e < end; ++e) acc += hops.value(e) * in[hops.target(e)];
    out[i] = acc;
  }
}

}  // namespace

void HamiltonianOperator::apply(std::span<const double> in, std::span<double> out) const {
  apply_impl<double>(*hops_, diagonal_, in, out);
}

void HamiltonianOperator::apply(std::span<const std::complex<double>> in,
                                std::span<std::complex<double>> out) const {
  apply_impl<std::complex<double>>(*hops_, diagonal_, in, out);
}

Eigen::VectorXd HamiltonianOperator::apply(const Eigen::VectorXd& in) const {
  Eigen::VectorXd out(in.size());
  apply(std::span<const double>(in.data(), static_cast<std::size_t>(in.size())),
        std::span<double>(out.data(), static_cast<std::size_t>(out.size())));
  return out;
}

Eigen::VectorXcd HamiltonianOperator::apply(const Eigen::VectorXcd& in) const {
  Eigen::VectorXcd out(in.size());
  apply(std::span<const std::complex<double>>(in.data(), static_cast<std::size_t>(in.size())),
        std::span<std::complex<double>>(out.data(), static_cast<std::size_t>(out.size())));
  return out;
}

double HamiltonianOperator::expectation(const Eigen::VectorXcd& psi) const {
  return psi.dot(apply(psi)).real();
}

HamiltonianOperator HamiltonianOperator::shifted(double c) const {
  HamiltonianOperator out = *this;
  for (double& d : out.diagonal_) d += c;
  return out;
}

Eigen::SparseMatrix<double> HamiltonianOperator::to_sparse() const {
  const std::size_t dim = this->dim();
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(dim + hops_->nonzeros());
  for (std::size_t i = 0; i < dim; ++i) {
    const auto row = static_cast<Eigen::Index>(i);
    if (diagonal_[i] != 0.0) triplets.emplace_back(row, row, diagonal_[i]);
    for (std::size_t e = hops_->row_begin(i); e < hops_->row_end(i); ++e) {
      triplets.emplace_back(row, static_cast<Eigen::Index>(hops_->target(e)), hops_->value(e));
    }
  }
  Eigen::SparseMatrix<double> m(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  m.setFromTriplets(triplets.begin(), triplets.end());
  return m;
}

Eigen::MatrixXd HamiltonianOperator::to_dense() const {
  const std::size_t dim = this->dim();
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(dim),
                                            static_cast<Eigen::Index>(dim));
  for (std::size_t i = 0; i < dim; ++i) {
    const auto row = static_cast<Eigen::Index>(i);
    m(row, row) = diagonal_[i];
    for (std::size_t e = hops_->row_begin(i); e < hops_->row_end(i); ++e) {
      m(row, static_cast<Eigen::Index>(hops_->target(e))) += hops_->value(e);
    }
  }
  return m;
}

HamiltonianOperator build_hamiltonian(std::shared_ptr<const SectorBasis> basis,
                                      const CouplingMatrix& couplings,
                                      const DisorderRealization& disorder) {
  return HamiltonianOperator(std::make_shared<const HoppingTable>(std::move(basis), couplings),
                             disorder);
}

HamiltonianOperator build_hamiltonian(std::shared_ptr<const HoppingTable> hops,
                                      const DisorderRealization& disorder) {
  return HamiltonianOperator(std::move(hops), disorder);
}

}  // namespace mblab
