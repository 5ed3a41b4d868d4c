#include <doctest.h>

#include <algorithm>
#include <random>

#include "mblab/analysis.hpp"
#include "oracles.hpp"

using namespace mblab;
using doctest::Approx;

namespace {

struct Instance {
  std::shared_ptr<const SectorBasis> basis;
  HamiltonianOperator h;
};

Instance random_instance(std::mt19937_64& rng, int n_lo, int n_hi, double v) {
  std::uniform_int_distribution<int> size(n_lo, n_hi);
  const int n = size(rng);
  std::uniform_int_distribution<int> fill(1, n - 1);
  auto basis = enumerate_sector(n, fill(rng));
  return {basis, build_hamiltonian(basis, oracle::random_couplings(n, rng), sample_disorder(n, v, rng()))};
}

}  // namespace

TEST_CASE("rank round trip over random sectors") {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 40; ++trial) {
    std::uniform_int_distribution<int> size(1, 16);
    const int n = size(rng);
    std::uniform_int_distribution<int> fill(0, n);
    const SectorBasis b(n, fill(rng));
    std::uniform_int_distribution<std::size_t> pick(0, b.size() - 1);
    for (int s = 0; s < 200; ++s) {
      const std::size_t k = pick(rng);
      CHECK(b.index_of(b.state_at(k)) == k);
    }
  }
}

TEST_CASE("sector size is the binomial coefficient") {
  for (int n = 0; n <= 20; ++n) {
    for (int k = 0; k <= n; ++k) {
      const SectorBasis b(n, k);
      REQUIRE(b.size() == binomial(n, k));
      CHECK(std::is_sorted(b.states().begin(), b.states().end()));
      CHECK(std::adjacent_find(b.states().begin(), b.states().end()) == b.states().end());
    }
  }
}

TEST_CASE("enumeration is a pure function of its inputs") {
  const SectorBasis a(16, 8), b(16, 8);
  CHECK(std::equal(a.states().begin(), a.states().end(), b.states().begin(), b.states().end()));
}

TEST_CASE("Hamiltonian is Hermitian on random vectors") {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 20; ++trial) {
    const Instance in = random_instance(rng, 4, 10, 20.0);
    if (in.h.dim() > 1000) continue;
    const auto d = static_cast<Eigen::Index>(in.h.dim());
    const StateVector psi = oracle::random_state(d, rng), phi = oracle::random_state(d, rng);
    const std::complex<double> lhs = phi.dot(in.h.apply(psi));
    const std::complex<double> rhs = in.h.apply(phi).dot(psi);
    CHECK(std::abs(lhs - rhs) < 1e-12);
  }
}

TEST_CASE("matrix-free apply equals the materialized sparse product") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 12; ++trial) {
    const Instance in = random_instance(rng, 6, 13, 30.0);
    if (in.h.dim() > 5000) continue;
    const auto d = static_cast<Eigen::Index>(in.h.dim());
    const Eigen::SparseMatrix<double> s = in.h.to_sparse();
    std::normal_distribution<double> g(0.0, 1.0);
    Eigen::VectorXd x(d);
    for (Eigen::Index i = 0; i < d; ++i) x(i) = g(rng);
    const Eigen::VectorXd y = s * x;
    CHECK((in.h.apply(x) - y).cwiseAbs().maxCoeff() < 1e-13 * std::max(1.0, y.cwiseAbs().maxCoeff()));
  }
}

TEST_CASE("hopping never leaves the sector") {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 10; ++trial) {
    const Instance in = random_instance(rng, 4, 12, 1.0);
    const HoppingTable& t = *in.h.hopping();
    const SectorBasis& b = in.h.basis();
    for (std::size_t row = 0; row < t.dim(); ++row) {
      for (std::size_t e = t.row_begin(row); e < t.row_end(row); ++e) {
        REQUIRE(t.target(e) < b.size());
        const Bits diff = b.bits_at(row) ^ b.bits_at(t.target(e));
        CHECK(std::popcount(diff) == 2);
      }
    }
  }
}

TEST_CASE("gap ratios are shift and scale invariant") {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> step(1, 64);
  std::vector<double> e{0.0};
  for (int i = 0; i < 500; ++i) e.push_back(e.back() + step(rng) / 16.0);
  std::vector<double> shifted, scaled;
  for (double x : e) {
    shifted.push_back(x + 1024.0);
    scaled.push_back(x * 8.0);
  }
  const auto r = gap_ratios(e).r;
  CHECK(gap_ratios(shifted).r == r);
  CHECK(gap_ratios(scaled).r == r);

  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> f(300);
  for (double& x : f) x = u(rng);
  std::sort(f.begin(), f.end());
  std::vector<double> g;
  for (double x : f) g.push_back(3.7 * x - 12.1);
  const auto rf = gap_ratios(f).r, rg = gap_ratios(g).r;
  REQUIRE(rf.size() == rg.size());
  for (std::size_t i = 0; i < rf.size(); ++i) CHECK(std::abs(rf[i] - rg[i]) < 1e-9);
}

TEST_CASE("energy density is affine invariant") {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(-50.0, 50.0), pos(0.1, 10.0);
  for (int i = 0; i < 1000; ++i) {
    double lo = u(rng), hi = u(rng);
    if (lo > hi) std::swap(lo, hi);
    if (hi - lo < 1.0) continue;
    const double e = lo + (hi - lo) * (u(rng) + 50.0) / 100.0;
    const double a = pos(rng), b = u(rng);
    CHECK(std::abs(energy_density(a * e + b, a * lo + b, a * hi + b) - energy_density(e, lo, hi)) < 1e-12);
  }
}

TEST_CASE("extremes bracket every Fock diagonal energy") {
  std::mt19937_64 rng(7);
  for (double v : {4.0, 16.0, 50.0}) {
    for (int n : {8, 11, 14}) {
      auto basis = enumerate_sector(n, n / 2);
      const HamiltonianOperator h = build_hamiltonian(basis, default_device_couplings(n), sample_disorder(n, v, rng()));
      const SpectralBounds b = extremal_eigenvalues(h);
      const auto [lo, hi] = std::minmax_element(h.diagonal().begin(), h.diagonal().end());
      CHECK(b.e_min <= *lo);
      CHECK(b.e_max >= *hi);
    }
  }
}

TEST_CASE("selected states lie inside the spectrum and score unit imbalance") {
  auto basis = enumerate_sector(12, 6);
  const std::vector<double> v{4.0, 16.0, 50.0};
  const Ensemble e = build_ensemble(basis, default_device_couplings(12), default_eps_grid(), v, 2, 5);
  REQUIRE(!e.instances.empty());
  for (const auto& c : e.instances) {
    const QuenchInstance& q = c.instance;
    CHECK(q.energy_mhz >= q.e_min_mhz);
    CHECK(q.energy_mhz <= q.e_max_mhz);
    CHECK(std::abs(q.eps_achieved - q.eps_target) <= q.tolerance);
    const ImbalancePattern p(q.initial_state);
    CHECK(generalized_imbalance(fock_vector(*basis, q.initial_state), *basis, p) == Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("unitarity and energy conservation") {
  auto basis = enumerate_sector(10, 5);
  for (double v : {4.0, 16.0, 50.0}) {
    const HamiltonianOperator h = build_hamiltonian(basis, default_device_couplings(10), sample_disorder(10, v, 21));
    const SpectralBounds b = extremal_eigenvalues(h);
    const Trajectory tr = evolve_krylov(h, fock_vector(*basis, basis->state_at(50)), uniform_schedule(1500.0, 20.0));
    for (std::size_t i = 0; i < tr.times_ns.size(); ++i) {
      CHECK(std::abs(tr.norm[i] - 1.0) < 1e-9);
      CHECK(std::abs(tr.energy_mhz[i] - tr.energy_mhz[0]) <= 1e-8 * (b.e_max - b.e_min));
    }
  }
}

TEST_CASE("time evolution composes and reverses") {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 6; ++trial) {
    const Instance in = random_instance(rng, 5, 9, 16.0);
    if (in.h.dim() > 500 || in.h.dim() < 2) continue;
    const StateVector psi0 = oracle::random_state(static_cast<Eigen::Index>(in.h.dim()), rng);
    KrylovPropagator prop(in.h);
    StateVector a = psi0;
    prop.propagate(a, 130.0);
    prop.propagate(a, 270.0);
    StateVector b = psi0;
    prop.propagate(b, 400.0);
    CHECK((a - b).cwiseAbs().maxCoeff() < 1e-8);
    prop.propagate(b, -400.0);
    CHECK((b - psi0).cwiseAbs().maxCoeff() < 1e-8);
  }
}

TEST_CASE("observable identities on evolved states") {
  std::mt19937_64 rng(9);
  auto basis = enumerate_sector(10, 5);
  const HamiltonianOperator h = build_hamiltonian(basis, default_device_couplings(10), sample_disorder(10, 16.0, 4));
  for (int trial = 0; trial < 5; ++trial) {
    std::uniform_int_distribution<std::size_t> pick(0, basis->size() - 1);
    const FockState ref = basis->state_at(pick(rng));
    const ImbalancePattern p(ref);
    const StateVector psi = evolve_dense(h, fock_vector(*basis, ref), 100.0 + 200.0 * trial);
    const auto occ = occupations(psi, *basis);
    double lin = 0.0;
    for (std::size_t m = 0; m < occ.size(); ++m) lin += p.beta()[m] * occ[m];
    CHECK(generalized_imbalance(psi, *basis, p) == Approx(lin).epsilon(1e-14));

    auto probs = fock_probabilities(psi);
    const double pr = participation_ratio(probs);
    std::shuffle(probs.begin(), probs.end(), rng);
    CHECK(participation_ratio(probs) == Approx(pr).epsilon(1e-12));
    CHECK(pr >= 1.0);
    CHECK(pr <= static_cast<double>(basis->size()));
  }
}

TEST_CASE("diagonal ensembles ignore global phases") {
  std::mt19937_64 rng(10);
  auto basis = enumerate_sector(9, 4);
  const HamiltonianOperator h = build_hamiltonian(basis, default_device_couplings(9), sample_disorder(9, 16.0, 2));
  const EigenSystem es = full_spectrum(h, true);
  std::uniform_real_distribution<double> angle(0.0, 6.28);
  for (int trial = 0; trial < 10; ++trial) {
    const StateVector psi = oracle::random_state(static_cast<Eigen::Index>(basis->size()), rng);
    const ImbalancePattern p(basis->state_at(static_cast<std::size_t>(trial)));
    const double de = diagonal_ensemble_imbalance(es, psi, p, *basis);
    CHECK(diagonal_ensemble_imbalance(es, StateVector(std::polar(1.0, angle(rng)) * psi), p, *basis) ==
          Approx(de).epsilon(1e-12));
  }
}
