#include <doctest.h>

#include "mblab/basis.hpp"
#include "expect_error.hpp"
#include "oracles.hpp"

using namespace mblab;

TEST_CASE("sector sizes") {
  CHECK(SectorBasis(19, 9).size() == 92378);
  CHECK(SectorBasis(14, 7).size() == 3432);
  CHECK(SectorBasis(2, 1).size() == 2);
  CHECK(SectorBasis(0, 0).size() == 1);
  CHECK(SectorBasis(5, 0).size() == 1);
  CHECK(SectorBasis(5, 5).size() == 1);
}

TEST_CASE("two-site ordering and lookup") {
  SectorBasis b(2, 1);
  CHECK(b.state_at(0).to_string() == "01");
  CHECK(b.state_at(1).to_string() == "10");
  CHECK(b.index_of(FockState::from_string("01")) == 0);
  CHECK(b.index_of(FockState::from_string("10")) == 1);
  CHECK(SectorBasis(4, 2).index_of(FockState::from_string("0011")) == 0);
}

TEST_CASE("last state of the 19-site sector") {
  SectorBasis b(19, 9);
  CHECK(b.state_at(92377).to_string() == "1111111110000000000");
}

TEST_CASE("enumeration matches a brute-force scan") {
  for (int n = 1; n <= 12; ++n) {
    for (int k = 0; k <= n; ++k) {
      SectorBasis b(n, k);
      const auto expect = oracle::scan_sector(n, k);
      REQUIRE(b.size() == expect.size());
      for (std::size_t i = 0; i < expect.size(); ++i) CHECK(b.bits_at(i) == expect[i]);
    }
  }
}

TEST_CASE("fock strings") {
  const FockState s = FockState::from_string("1010");
  CHECK(s.n_sites() == 4);
  CHECK(s.occupation() == 0b1010u);
  CHECK(s.occupied(1));
  CHECK_FALSE(s.occupied(0));
  CHECK(s.n_excitations() == 2);
  CHECK(s.to_string() == "1010");
  CHECK(code_of([] { FockState::from_string("10x1"); }) == ErrorCode::InvalidArgument);
  CHECK(code_of([] { FockState(0b100u, 2); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("basis errors") {
  CHECK(code_of([] { SectorBasis(4, 5); }) == ErrorCode::InvalidSector);
  CHECK(code_of([] { SectorBasis(33, 1); }) == ErrorCode::InvalidSector);
  CHECK(code_of([] { SectorBasis(3, -1); }) == ErrorCode::InvalidSector);
  SectorBasis b(4, 2);
  CHECK(code_of([&] { b.state_at(6); }) == ErrorCode::IndexOutOfRange);
  CHECK(code_of([&] { b.index_of(FockState::from_string("0111")); }) == ErrorCode::NotInSector);
  CHECK(code_of([&] { b.index_of(FockState::from_string("011")); }) == ErrorCode::NotInSector);
  CHECK_FALSE(b.contains(0b0111u));
  CHECK(b.contains(0b0110u));
}

TEST_CASE("binomials and labels") {
  CHECK(binomial(19, 9) == 92378);
  CHECK(binomial(32, 16) == 601080390ull);
  CHECK(binomial(3, 5) == 0);
  CHECK(half_filling(19) == 9);
  CHECK(half_filling(14) == 7);
  CHECK(qubit_label(0) == "Q1");
  CHECK(qubit_label(18) == "Q19");
}

TEST_CASE("shared enumeration") {
  auto b = enumerate_sector(8, 4);
  CHECK(b->size() == 70);
}
