#include <doctest.h>

#include <numeric>
#include <random>

#include "mblab/observables.hpp"
#include "expect_error.hpp"
#include "oracles.hpp"

using namespace mblab;
using doctest::Approx;

namespace {

// Dense diagonal operator of n_m over the sector.
Eigen::VectorXd number_diagonal(const SectorBasis& b, int m) {
  Eigen::VectorXd d(static_cast<Eigen::Index>(b.size()));
  for (std::size_t i = 0; i < b.size(); ++i) d(static_cast<Eigen::Index>(i)) = (b.bits_at(i) >> m) & 1u;
  return d;
}

}  // namespace

TEST_CASE("imbalance pattern weights") {
  const FockState ref = FockState::from_string("1010101010101010100");
  const ImbalancePattern p(ref);
  double occ = 0.0, emp = 0.0;
  for (int m = 0; m < 19; ++m) (ref.occupied(m) ? occ : emp) += p.beta()[static_cast<std::size_t>(m)];
  CHECK(occ == Approx(1.0).epsilon(1e-15));
  CHECK(emp == Approx(-1.0).epsilon(1e-15));
  CHECK(p.value(ref.occupation()) == Approx(1.0).epsilon(1e-15));
  CHECK(code_of([] { ImbalancePattern(FockState(0, 4)); }) == ErrorCode::InvalidArgument);
  CHECK(code_of([] { ImbalancePattern(FockState(0b1111u, 4)); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("imbalance of special states at paper scale") {
  auto basis = enumerate_sector(19, 9);
  const FockState ref = basis->state_at(12345);
  const ImbalancePattern p(ref);
  CHECK(generalized_imbalance(fock_vector(*basis, ref), *basis, p) == Approx(1.0).epsilon(1e-12));

  const auto d = static_cast<Eigen::Index>(basis->size());
  const StateVector uniform = StateVector::Constant(d, 1.0 / std::sqrt(static_cast<double>(d)));
  CHECK(std::abs(generalized_imbalance(uniform, *basis, p)) < 1e-12);

  Bits anti = 0;
  int placed = 0;
  for (int m = 0; m < 19 && placed < 9; ++m) {
    if (!ref.occupied(m)) {
      anti |= Bits{1} << m;
      ++placed;
    }
  }
  CHECK(p.value(anti) == Approx(-0.9).epsilon(1e-12));
  for (double x : p.diagonal(*basis)) {
    CHECK(x >= -0.9 - 1e-12);
    CHECK(x <= 1.0 + 1e-12);
  }
}

TEST_CASE("occupations") {
  auto basis = enumerate_sector(2, 1);
  const auto f = occupations(fock_vector(*basis, FockState::from_string("10")), *basis);
  CHECK(f == std::vector<double>{0.0, 1.0});
  StateVector sup(2);
  sup << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
  const auto s = occupations(sup, *basis);
  CHECK(s[0] == Approx(0.5));
  CHECK(s[1] == Approx(0.5));

  auto b8 = enumerate_sector(8, 4);
  std::mt19937_64 rng(12);
  const StateVector psi = oracle::random_state(70, rng);
  const auto occ = occupations(psi, *b8);
  double total = 0.0;
  for (int m = 0; m < 8; ++m) {
    const double expect = (psi.adjoint() * number_diagonal(*b8, m).cast<std::complex<double>>().asDiagonal() * psi)(0).real();
    CHECK(std::abs(occ[static_cast<std::size_t>(m)] - expect) < 1e-12);
    total += occ[static_cast<std::size_t>(m)];
  }
  CHECK(total == Approx(4.0).epsilon(1e-12));

  const ImbalancePattern p(b8->state_at(5));
  double linear = 0.0;
  for (int m = 0; m < 8; ++m) linear += p.beta()[static_cast<std::size_t>(m)] * occ[static_cast<std::size_t>(m)];
  CHECK(generalized_imbalance(psi, *b8, p) == Approx(linear).epsilon(1e-14));
  CHECK(code_of([&] { generalized_imbalance(psi, *enumerate_sector(8, 3), p); }) == ErrorCode::ShapeMismatch);
  CHECK(code_of([&] { generalized_imbalance(StateVector(psi.head(69)), *b8, p); }) == ErrorCode::ShapeMismatch);
}

TEST_CASE("Fock probabilities and participation ratio") {
  auto basis = enumerate_sector(8, 4);
  const auto delta = fock_probabilities(fock_vector(*basis, basis->state_at(3)));
  CHECK(delta[3] == 1.0);
  CHECK(participation_ratio(delta) == 1.0);

  const StateVector uniform = StateVector::Constant(70, 1.0 / std::sqrt(70.0));
  const auto u = fock_probabilities(uniform);
  for (double x : u) CHECK(x == Approx(1.0 / 70.0));
  CHECK(participation_ratio(u) == Approx(70.0));

  const std::vector<double> half{0.5, 0.5, 0.0, 0.0};
  CHECK(participation_ratio(half) == 2.0);
  std::vector<double> shuffled{0.1, 0.2, 0.3, 0.4}, reversed{0.4, 0.3, 0.2, 0.1};
  CHECK(participation_ratio(shuffled) == participation_ratio(reversed));
  const std::vector<double> zero(4, 0.0);
  CHECK(code_of([&] { participation_ratio(zero); }) == ErrorCode::EmptyInput);

  std::mt19937_64 rng(3);
  const auto p = fock_probabilities(oracle::random_state(70, rng));
  CHECK(std::accumulate(p.begin(), p.end(), 0.0) == Approx(1.0).epsilon(1e-12));
}

TEST_CASE("imbalance variance") {
  auto basis = enumerate_sector(19, 9);
  const FockState ref = basis->state_at(777);
  const ImbalancePattern pattern(ref);
  std::vector<double> p(basis->size(), 0.0);
  p[777] = 1.0;
  CHECK(fisher_information(p, pattern, *basis) == 0.0);

  Bits anti = 0;
  int placed = 0;
  for (int m = 0; m < 19 && placed < 9; ++m) {
    if (!ref.occupied(m)) {
      anti |= Bits{1} << m;
      ++placed;
    }
  }
  p[777] = 0.5;
  p[basis->rank(anti)] = 0.5;
  CHECK(fisher_information(p, pattern, *basis) == Approx(0.9025).epsilon(1e-12));
  CHECK(fisher_information(p, pattern, *basis, FisherConvention::PureStateQfi) == Approx(4 * 0.9025).epsilon(1e-12));
}

TEST_CASE("imbalance variance matches dense operators") {
  auto basis = enumerate_sector(8, 4);
  const HamiltonianOperator h = build_hamiltonian(basis, default_device_couplings(8), sample_disorder(8, 16.0, 2));
  const FockState ref = basis->state_at(20);
  const ImbalancePattern pattern(ref);
  const StateVector psi = evolve_dense(h, fock_vector(*basis, ref), 300.0);
  const auto diag = pattern.diagonal(*basis);
  const Eigen::VectorXcd d = Eigen::Map<const Eigen::VectorXd>(diag.data(), 70).cast<std::complex<double>>();
  const Eigen::MatrixXcd op = d.asDiagonal();
  const double mean = (psi.adjoint() * op * psi)(0).real();
  const double sq = (psi.adjoint() * op * op * psi)(0).real();
  CHECK(std::abs(fisher_information(fock_probabilities(psi), pattern, *basis) - (sq - mean * mean)) < 1e-12);
  for (std::size_t i = 0; i < 70; ++i) {
    std::vector<double> delta(70, 0.0);
    delta[i] = 1.0;
    CHECK(fisher_information(delta, diag) == 0.0);
  }
}

TEST_CASE("ideal readout recovers the distribution") {
  auto basis = enumerate_sector(6, 3);
  std::mt19937_64 rng(21);
  const auto p = fock_probabilities(oracle::random_state(20, rng));
  ShotModel m;
  m.n_shots = 2'000'000;
  const ShotResult r = sample_and_postselect(p, *basis, m, 7);
  REQUIRE(r.probabilities.size() == 20);
  CHECK(r.over_sector);
  double l1 = 0.0;
  for (std::size_t i = 0; i < 20; ++i) l1 += std::abs(r.probabilities[i] - p[i]);
  CHECK(l1 < 0.01);
  CHECK(r.sector_fraction == Approx(1.0));

  m.n_shots = 37;
  const ShotResult few = sample_and_postselect(p, *basis, m, 8);
  CHECK(std::accumulate(few.probabilities.begin(), few.probabilities.end(), 0.0) == Approx(1.0));
  for (double x : few.probabilities) CHECK(std::abs(x * 37.0 - std::round(x * 37.0)) < 1e-9);

  CHECK(sample_and_postselect(p, *basis, m, 8).probabilities == few.probabilities);
}

TEST_CASE("post-selection lowers the participation ratio of a localized state") {
  auto basis = enumerate_sector(10, 5);
  const HamiltonianOperator h = build_hamiltonian(basis, default_device_couplings(10), sample_disorder(10, 50.0, 4));
  const StateVector psi = evolve_dense(h, fock_vector(*basis, basis->state_at(100)), 500.0);
  const auto p = fock_probabilities(psi);
  ShotModel m;
  m.n_shots = 20000;
  m.f0 = std::vector<double>(10, 0.97);
  m.f1 = std::vector<double>(10, 0.92);
  const ShotResult selected = sample_and_postselect(p, *basis, m, 5);
  m.post_select = false;
  const ShotResult raw = sample_and_postselect(p, *basis, m, 5);
  CHECK_FALSE(raw.over_sector);
  CHECK(raw.probabilities.size() == 1024);
  CHECK(selected.sector_fraction < 1.0);
  CHECK(participation_ratio(selected.probabilities) <= participation_ratio(raw.probabilities));
  CHECK(participation_ratio(selected.probabilities) >= participation_ratio(p) * 0.5);
}

TEST_CASE("shot model validation") {
  auto basis = enumerate_sector(4, 2);
  const std::vector<double> p(6, 1.0 / 6.0);
  ShotModel m;
  m.f0 = {0.9, 0.9, 0.9};
  m.f1 = {0.9, 0.9, 0.9, 0.9};
  CHECK(code_of([&] { sample_and_postselect(p, *basis, m, 1); }) == ErrorCode::ShapeMismatch);
  m.f0 = {0.9, 0.9, 0.4, 0.9};
  CHECK(code_of([&] { sample_and_postselect(p, *basis, m, 1); }) == ErrorCode::InvalidArgument);
  m.n_shots = 0;
  CHECK(code_of([&] { sample_and_postselect(p, *basis, ShotModel{0, {}, {}, true}, 1); }) == ErrorCode::InvalidArgument);
  const std::vector<double> short_p(5, 0.2);
  CHECK(code_of([&] { sample_and_postselect(short_p, *basis, ShotModel{}, 1); }) == ErrorCode::ShapeMismatch);
}
