#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace mblab {

using Bits = std::uint32_t;
inline constexpr int kMaxSites = 32;

// Product state of n_sites two-level sites; bit m holds the occupation of site m.
class FockState {
 public:
  FockState() = default;
  FockState(Bits occupation, int n_sites);

  // Parses "1010..." written most-significant site first.
  static FockState from_string(std::string_view bits);

  Bits occupation() const noexcept { return occupation_; }
  int n_sites() const noexcept { return n_sites_; }
  int n_excitations() const noexcept;
  bool occupied(int site) const noexcept { return (occupation_ >> site) & 1u; }

  // Most-significant site first, length n_sites.
  std::string to_string() const;

  friend bool operator==(const FockState&, const FockState&) = default;

 private:
  Bits occupation_ = 0;
  int n_sites_ = 0;
};

// All Fock states with a fixed number of excitations, in ascending integer order.
// Index lookup uses the combinatorial number system, so no hash table is kept.
class SectorBasis {
 public:
  SectorBasis(int n_sites, int n_excitations);

  int n_sites() const noexcept { return n_sites_; }
  int n_excitations() const noexcept { return n_excitations_; }
  std::size_t size() const noexcept { return states_.size(); }

  std::span<const Bits> states() const noexcept { return states_; }
  Bits bits_at(std::size_t k) const noexcept { return states_[k]; }

  FockState state_at(std::size_t k) const;
  std::size_t index_of(const FockState& state) const;

  // Unchecked rank of a bit pattern already known to lie in the sector.
  std::size_t rank(Bits bits) const noexcept;
  bool contains(Bits bits) const noexcept;

 private:
  int n_sites_;
  int n_excitations_;
  std::vector<Bits> states_;
  // binom_[n][k] for n <= n_sites, k <= n_excitations
  std::vector<std::vector<std::uint64_t>> binom_;
};

std::uint64_t binomial(int n, int k);

std::shared_ptr<const SectorBasis> enumerate_sector(int n_sites, int n_excitations);

// Largest sector for n sites under the convention N1 = floor(N/2).
inline int half_filling(int n_sites) { return n_sites / 2; }

// External qubit labels are 1-based: site 0 is Q1.
std::string qubit_label(int site);

}  // namespace mblab
