#include "mblab/observables.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <string>

#include "mblab/error.hpp"
#include "mblab/random.hpp"

namespace mblab {

ImbalancePattern::ImbalancePattern(const FockState& reference) : reference_(reference) {
  const int n = reference.n_sites();
  const int n1 = reference.n_excitations();
  const int n0 = n - n1;
  require(n1 > 0 && n0 > 0, ErrorCode::InvalidArgument,
          "imbalance needs at least one occupied and one empty site");
  beta_.resize(static_cast<std::size_t>(n));
  for (int m = 0; m < n; ++m) {
    beta_[static_cast<std::size_t>(m)] = reference.occupied(m) ? 1.0 / n1 : -1.0 / n0;
  }
}

double ImbalancePattern::value(Bits occupation) const noexcept {
  double v = 0.0;
  for (Bits s = occupation; s != 0; s &= s - 1) v += beta_[static_cast<std::size_t>(std::countr_zero(s))];
  return v;
}

std::vector<double> ImbalancePattern::diagonal(const SectorBasis& basis) const {
  require(basis.n_sites() == n_sites(), ErrorCode::ShapeMismatch,
          "pattern and basis have different site counts");
  std::vector<double> d(basis.size());
  for (std::size_t i = 0; i < basis.size(); ++i) d[i] = value(basis.bits_at(i));
  return d;
}

std::vector<double> occupations(const StateVector& psi, const SectorBasis& basis) {
  require(static_cast<std::size_t>(psi.size()) == basis.size(), ErrorCode::ShapeMismatch,
          "state length does not match the sector dimension");
  std::vector<double> occ(static_cast<std::size_t>(basis.n_sites()), 0.0);
  for (std::size_t i = 0; i < basis.size(); ++i) {
    const double p = std::norm(psi(static_cast<Eigen::Index>(i)));
    for (Bits s = basis.bits_at(i); s != 0; s &= s - 1) occ[static_cast<std::size_t>(std::countr_zero(s))] += p;
  }
  return occ;
}

double generalized_imbalance(const StateVector& psi, const SectorBasis& basis,
                             const ImbalancePattern& pattern) {
  require(pattern.n_sites() == basis.n_sites(), ErrorCode::ShapeMismatch,
          "pattern and basis have different site counts");
  const auto occ = occupations(psi, basis);
  double v = 0.0;
  for (std::size_t m = 0; m < occ.size(); ++m) v += pattern.beta()[m] * occ[m];
  return v;
}

std::vector<double> fock_probabilities(const StateVector& psi) {
  std::vector<double> p(static_cast<std::size_t>(psi.size()));
  for (Eigen::Index i = 0; i < psi.size(); ++i) p[static_cast<std::size_t>(i)] = std::norm(psi(i));
  return p;
}

double participation_ratio(std::span<const double> p) {
  double s2 = 0.0;
  for (double x : p) s2 += x * x;
  if (!(s2 > 0.0)) fail(ErrorCode::EmptyInput, "participation ratio of an all-zero distribution");
  return 1.0 / s2;
}

double fisher_information(std::span<const double> p, std::span<const double> imbalance_diagonal,
                          FisherConvention convention) {
  require(p.size() == imbalance_diagonal.size(), ErrorCode::ShapeMismatch,
          "distribution and imbalance diagonal differ in length");
  double mass = 0.0;
  double mean = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    mass += p[i];
    mean += p[i] * imbalance_diagonal[i];
  }
  require(mass > 0.0, ErrorCode::EmptyInput, "empty distribution");
  mean /= mass;
  double var = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double d = imbalance_diagonal[i] - mean;
    var += p[i] * d * d;
  }
  var /= mass;
  return convention == FisherConvention::PureStateQfi ? 4.0 * var : var;
}

double fisher_information(std::span<const double> p, const ImbalancePattern& pattern,
                          const SectorBasis& basis, FisherConvention convention) {
  const auto diag = pattern.diagonal(basis);
  return fisher_information(p, diag, convention);
}

ShotResult sample_and_postselect(std::span<const double> p, const SectorBasis& basis,
                                 const ShotModel& model, std::uint64_t seed) {
  const int n = basis.n_sites();
  require(p.size() == basis.size(), ErrorCode::ShapeMismatch,
          "distribution length does not match the sector dimension");
  require(n <= 26, ErrorCode::DimensionTooLarge, "shot model keeps the full 2^N register; N <= 26");
  require(model.n_shots > 0, ErrorCode::InvalidArgument, "need at least one shot");
  const bool noisy = !model.f0.empty() || !model.f1.empty();
  if (noisy) {
    require(model.f0.size() == static_cast<std::size_t>(n) && model.f1.size() == static_cast<std::size_t>(n),
            ErrorCode::ShapeMismatch, "readout fidelities must be given for every site");
    for (std::size_t m = 0; m < model.f0.size(); ++m) {
      require(model.f0[m] > 0.5 && model.f0[m] <= 1.0 && model.f1[m] > 0.5 && model.f1[m] <= 1.0,
              ErrorCode::InvalidArgument, "readout fidelities must lie in (0.5, 1]");
    }
  }

  std::vector<double> cdf(p.size());
  std::partial_sum(p.begin(), p.end(), cdf.begin());
  require(!cdf.empty() && cdf.back() > 0.0, ErrorCode::EmptyInput, "empty distribution");

  Rng rng(seed);
  const std::size_t space = std::size_t{1} << n;
  std::vector<double> raw(space, 0.0);
  for (std::size_t shot = 0; shot < model.n_shots; ++shot) {
    const double u = rng.uniform() * cdf.back();
    auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    if (it == cdf.end()) --it;
    Bits bits = basis.bits_at(static_cast<std::size_t>(it - cdf.begin()));
    if (noisy) {
      for (int m = 0; m < n; ++m) {
        const bool one = (bits >> m) & 1u;
        const double err = one ? 1.0 - model.f1[static_cast<std::size_t>(m)]
                               : 1.0 - model.f0[static_cast<std::size_t>(m)];
        if (rng.uniform() < err) bits ^= Bits{1} << m;
      }
    }
    raw[bits] += 1.0;
  }
  for (double& x : raw) x /= static_cast<double>(model.n_shots);

  if (noisy) {
    // measured = M true with M = [[F0, 1-F1], [1-F0, F1]] on every site.
    for (int m = 0; m < n; ++m) {
      const double f0 = model.f0[static_cast<std::size_t>(m)];
      const double f1 = model.f1[static_cast<std::size_t>(m)];
      const double det = f0 + f1 - 1.0;
      const double i00 = f1 / det, i01 = -(1.0 - f1) / det;
      const double i10 = -(1.0 - f0) / det, i11 = f0 / det;
      const std::size_t bit = std::size_t{1} << m;
      for (std::size_t x = 0; x < space; ++x) {
        if (x & bit) continue;
        const double a = raw[x];
        const double b = raw[x | bit];
        raw[x] = i00 * a + i01 * b;
        raw[x | bit] = i10 * a + i11 * b;
      }
    }
    double total = 0.0;
    for (double& x : raw) {
      x = std::max(x, 0.0);
      total += x;
    }
    for (double& x : raw) x /= total;
  }

  ShotResult out;
  double in_sector = 0.0;
  for (std::size_t i = 0; i < basis.size(); ++i) in_sector += raw[basis.bits_at(i)];
  out.sector_fraction = in_sector;
  if (!model.post_select) {
    out.probabilities = std::move(raw);
    out.over_sector = false;
    return out;
  }
  if (!(in_sector > 0.0)) fail(ErrorCode::AllShotsRejected, "no shot landed inside the sector");
  out.probabilities.resize(basis.size());
  for (std::size_t i = 0; i < basis.size(); ++i) out.probabilities[i] = raw[basis.bits_at(i)] / in_sector;
  out.over_sector = true;
  return out;
}

}  // namespace mblab
