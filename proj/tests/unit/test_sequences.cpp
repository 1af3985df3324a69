#include <cstdio>
#include <fstream>

#include "doctest.h"
#include "otfs_rach/sequences.hpp"

using namespace otfs;

TEST_CASE("is_prime") {
  CHECK(is_prime(2));
  CHECK(is_prime(139));
  CHECK_FALSE(is_prime(1));
  CHECK_FALSE(is_prime(138));
  CHECK_FALSE(is_prime(121));
}

TEST_CASE("zc sequence values") {
  const CVec x = zc_sequence(ZcRoot::make(1, 139));
  CHECK(std::abs(x[0] - cplx(1.0)) < 1e-15);
  CHECK(std::abs(x[1] - std::polar(1.0, -kTwoPi / 139)) < 1e-12);
  for (int u : {1, 17, 64, 138}) {
    const CVec y = zc_sequence(ZcRoot::make(u, 139));
    CHECK(std::abs(y[0] - cplx(1.0)) < 1e-15);
    for (const auto& z : y) CHECK(std::abs(std::abs(z) - 1.0) < 1e-12);
    for (int l = 0; l < 139; ++l) {
      const cplx ref = std::exp(cplx(0, -kPi * u * l * (l + 1.0) / 139));
      CHECK(std::abs(y[l] - ref) < 1e-10);
    }
  }
}

TEST_CASE("zc root validation") {
  CHECK_THROWS_AS(ZcRoot::make(0, 139), DomainError);
  CHECK_THROWS_AS(ZcRoot::make(139, 139), DomainError);
  CHECK_THROWS_AS(ZcRoot::make(1, 138), DomainError);
}

TEST_CASE("distinct-root periodic cross-correlation has constant magnitude sqrt(M)") {
  const int M = 139;
  for (auto [u, v] : {std::pair{1, 2}, {5, 64}, {17, 101}, {137, 138}}) {
    const CVec a = zc_sequence(ZcRoot::make(u, M));
    const CVec b = zc_sequence(ZcRoot::make(v, M));
    for (int s = 0; s < M; ++s) {
      cplx acc = 0;
      for (int l = 0; l < M; ++l) acc += a[l] * std::conj(b[(l + s) % M]);
      CHECK(std::abs(std::abs(acc) - std::sqrt(double(M))) < 1e-9);
    }
  }
}

TEST_CASE("zc periodic autocorrelation is an impulse") {
  const int M = 139;
  const CVec a = zc_sequence(ZcRoot::make(7, M));
  for (int s = 0; s < M; ++s) {
    cplx acc = 0;
    for (int l = 0; l < M; ++l) acc += a[l] * std::conj(a[(l + s) % M]);
    CHECK(std::abs(acc) == doctest::Approx(s == 0 ? M : 0.0).epsilon(1e-9));
  }
}

TEST_CASE("preamble root set") {
  const auto d = preamble_root_set(139, 64);
  REQUIRE(d.size() == 64);
  for (int i = 0; i < 64; ++i) CHECK(d[i].u == i + 1);
  const auto t = preamble_root_set(139, 3, std::vector<int>{3, 7, 11});
  CHECK(t[0].u == 3);
  CHECK(t[1].u == 7);
  CHECK(t[2].u == 11);
  CHECK_THROWS_AS(preamble_root_set(139, 139), CapacityError);
  CHECK_THROWS_AS(preamble_root_set(139, 4, std::vector<int>{3, 7, 11}), CapacityError);
  CHECK_THROWS_AS(preamble_root_set(139, 2, std::vector<int>{3, 3}), DomainError);
  CHECK_THROWS_AS(preamble_root_set(139, 1, std::vector<int>{139}), DomainError);
}

TEST_CASE("root table file") {
  const std::string path = "roots_test.txt";
  {
    std::ofstream f(path);
    f << "# custom order\n5\n\n  9  # trailing comment\n2\n";
  }
  const auto t = load_root_table(path);
  CHECK(t == std::vector<int>{5, 9, 2});
  {
    std::ofstream f(path);
    f << "5\n5\n";
  }
  CHECK_THROWS_AS(load_root_table(path), DomainError);
  {
    std::ofstream f(path);
    f << "5 6\n";
  }
  CHECK_THROWS_AS(load_root_table(path), DomainError);
  std::remove(path.c_str());
  CHECK_THROWS_AS(load_root_table("does/not/exist.txt"), IoError);
}

TEST_CASE("extended sequence") {
  const ZcRoot r = ZcRoot::make(3, 139);
  const CVec x = zc_sequence(r);
  const CVec e0 = extended_sequence(r, 0, 4);
  const CVec e1 = extended_sequence(r, 1, 4);
  REQUIRE(e0.size() == 278);
  for (int l = 0; l < 139; ++l) {
    CHECK(e0[l] == x[l]);
    CHECK(e0[l + 139] == x[l]);
    CHECK(e1[l] == x[l]);
    CHECK(std::abs(e1[l + 139] - cplx(0, -1) * x[l]) < 1e-15);
  }
  CHECK_THROWS_AS(extended_sequence(r, 4, 4), DomainError);
}
