#include "mblab/basis.hpp"

#include <bit>

#include "mblab/error.hpp"

namespace mblab {

FockState::FockState(Bits occupation, int n_sites) : occupation_(occupation), n_sites_(n_sites) {
  require(n_sites >= 0 && n_sites <= kMaxSites, ErrorCode::InvalidSector,
          "n_sites must lie in [0, 32]");
  if (n_sites < kMaxSites) {
    require((occupation >> n_sites) == 0, ErrorCode::InvalidArgument,
            "occupation has bits above n_sites");
  }
}

FockState FockState::from_string(std::string_view bits) {
  require(bits.size() <= static_cast<std::size_t>(kMaxSites), ErrorCode::InvalidArgument,
          "bit string longer than 32 sites");
  Bits occ = 0;
  for (char c : bits) {
    require(c == '0' || c == '1', ErrorCode::InvalidArgument,
            "bit string must contain only '0' and '1'");
    occ = (occ << 1) | static_cast<Bits>(c == '1');
  }
  return FockState(occ, static_cast<int>(bits.size()));
}

int FockState::n_excitations() const noexcept { return std::popcount(occupation_); }

std::string FockState::to_string() const {
  std::string s(static_cast<std::size_t>(n_sites_), '0');
  for (int m = 0; m < n_sites_; ++m) {
    if (occupied(m)) s[static_cast<std::size_t>(n_sites_ - 1 - m)] = '1';
  }
  return s;
}

std::uint64_t binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  k = std::min(k, n - k);
  std::uint64_t r = 1;
  for (int i = 1; i <= k; ++i) r = r * static_cast<std::uint64_t>(n - k + i) / static_cast<std::uint64_t>(i);
  return r;
}

SectorBasis::SectorBasis(int n_sites, int n_excitations)
    : n_sites_(n_sites), n_excitations_(n_excitations) {
  if (n_sites < 0 || n_sites > kMaxSites || n_excitations < 0 || n_excitations > n_sites) {
    fail(ErrorCode::InvalidSector, "need 0 <= n_excitations <= n_sites <= 32, got (" +
                                       std::to_string(n_sites) + ", " +
                                       std::to_string(n_excitations) + ")");
  }

  binom_.assign(static_cast<std::size_t>(n_sites) + 1,
                std::vector<std::uint64_t>(static_cast<std::size_t>(n_excitations) + 1, 0));
  for (int n = 0; n <= n_sites; ++n) {
    for (int k = 0; k <= n_excitations; ++k) binom_[n][k] = binomial(n, k);
  }

  const std::uint64_t count = binomial(n_sites, n_excitations);
  states_.reserve(count);
  if (n_excitations == 0) {
    states_.push_back(0);
    return;
  }
  // Gosper's hack walks k-subsets in ascending integer order.
  std::uint64_t v = (std::uint64_t{1} << n_excitations) - 1;
  const std::uint64_t limit = std::uint64_t{1} << n_sites;
  while (v < limit) {
    states_.push_back(static_cast<Bits>(v));
    const std::uint64_t t = v | (v - 1);
    v = (t + 1) | (((~t & (t + 1)) - 1) >> (std::countr_zero(v) + 1));
  }
}

std::size_t SectorBasis::rank(Bits bits) const noexcept {
  // Colex rank: sum over set bits c_1 < c_2 < ... of C(c_j, j).
  std::size_t r = 0;
  int j = 1;
  while (bits != 0) {
    const int c = std::countr_zero(bits);
    r += static_cast<std::size_t>(binom_[c][j]);
    bits &= bits - 1;
    ++j;
  }
  return r;
}

bool SectorBasis::contains(Bits bits) const noexcept {
  if (n_sites_ < kMaxSites && (bits >> n_sites_) != 0) return false;
  return std::popcount(bits) == n_excitations_;
}

FockState SectorBasis::state_at(std::size_t k) const {
  if (k >= states_.size()) {
    fail(ErrorCode::IndexOutOfRange, "index " + std::to_string(k) + " outside sector of size " +
                                         std::to_string(states_.size()));
  }
  return FockState(states_[k], n_sites_);
}

std::size_t SectorBasis::index_of(const FockState& state) const {
  if (state.n_sites() != n_sites_ || !contains(state.occupation())) {
    fail(ErrorCode::NotInSector, "state " + state.to_string() + " is not in sector (" +
                                     std::to_string(n_sites_) + ", " +
                                     std::to_string(n_excitations_) + ")");
  }
  return rank(state.occupation());
}

std::shared_ptr<const SectorBasis> enumerate_sector(int n_sites, int n_excitations) {
  return std::make_shared<const SectorBasis>(n_sites, n_excitations);
}

std::string qubit_label(int site) { return "Q" + std::to_string(site + 1); }

}  // namespace mblab
