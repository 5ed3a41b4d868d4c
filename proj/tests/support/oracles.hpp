#pragma once

#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <map>
#include <random>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include "mblab/model.hpp"

namespace oracle {

// Sector states found by a plain scan over all 2^n patterns.
inline std::vector<std::uint32_t> scan_sector(int n, int k) {
  std::vector<std::uint32_t> out;
  for (std::uint64_t b = 0; b < (std::uint64_t{1} << n); ++b) {
    if (std::popcount(b) == k) out.push_back(static_cast<std::uint32_t>(b));
  }
  return out;
}

// Dense Hamiltonian assembled pair by pair with an ordered map for lookup.
inline Eigen::MatrixXd brute_hamiltonian(int n, int k, const Eigen::MatrixXd& j,
                                         const std::vector<double>& v) {
  const auto states = scan_sector(n, k);
  std::map<std::uint32_t, int> index;
  for (std::size_t i = 0; i < states.size(); ++i) index[states[i]] = static_cast<int>(i);
  const auto d = static_cast<Eigen::Index>(states.size());
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(d, d);
  for (Eigen::Index c = 0; c < d; ++c) {
    const std::uint32_t s = states[static_cast<std::size_t>(c)];
    for (int m = 0; m < n; ++m) {
      if (s >> m & 1u) h(c, c) += v[static_cast<std::size_t>(m)];
    }
    for (int m = 0; m < n; ++m) {
      for (int q = 0; q < n; ++q) {
        if (!(s >> m & 1u) || (s >> q & 1u)) continue;
        const std::uint32_t t = s ^ (1u << m) ^ (1u << q);
        h(index.at(t), c) += j(q, m);
      }
    }
  }
  return h;
}

inline Eigen::MatrixXcd propagator(const Eigen::MatrixXd& h, double t_ns) {
  const Eigen::MatrixXcd a =
      std::complex<double>(0.0, -mblab::kRadPerMhzNs * t_ns) * h.cast<std::complex<double>>();
  return a.exp();
}

inline Eigen::MatrixXd goe(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::MatrixXd a(n, n);
  for (int i = 0; i < n; ++i) {
    for (int c = 0; c < n; ++c) a(i, c) = g(rng);
  }
  return (a + a.transpose()) / 2.0;
}

inline Eigen::VectorXcd random_state(Eigen::Index d, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::VectorXcd v(d);
  for (Eigen::Index i = 0; i < d; ++i) v(i) = {g(rng), g(rng)};
  return v / v.norm();
}

inline mblab::CouplingMatrix random_couplings(int n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  mblab::CouplingMatrix j(n);
  for (int a = 0; a < n; ++a) {
    for (int b = a + 1; b < n; ++b) j.set(a, b, u(rng));
  }
  return j;
}

}  // namespace oracle
