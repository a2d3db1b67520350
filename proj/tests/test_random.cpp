#include <doctest.h>

#include <cmath>
#include <set>

#include "aucmi/random.hpp"

using aucmi::Philox4x32;
using aucmi::RandomStream;

TEST_CASE("philox known-answer vectors") {
  // Reference outputs of Philox4x32-10 from the Random123 distribution.
  using B = Philox4x32::Block;
  CHECK(Philox4x32::encrypt(B{0, 0, 0, 0}, {0, 0}) ==
        B{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
  CHECK(Philox4x32::encrypt(B{0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff},
                            {0xffffffff, 0xffffffff}) ==
        B{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
  CHECK(Philox4x32::encrypt(B{0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344},
                            {0xa4093822, 0x299f31d0}) ==
        B{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("streams are reproducible and separated by path") {
  RandomStream a(42, {1, 2}), b(42, {1, 2}), c(42, {1, 3}), d(43, {1, 2});
  for (int i = 0; i < 100; ++i) {
    const double x = a.uniform();
    CHECK(x == b.uniform());
    CHECK(x != c.uniform());
    CHECK(x != d.uniform());
  }
}

TEST_CASE("derived streams ignore how much of the parent was consumed") {
  RandomStream a(7, {0});
  const RandomStream child_before = a.derive({5});
  for (int i = 0; i < 17; ++i) a.normal();
  RandomStream child_after = a.derive({5});
  RandomStream cb = child_before;
  for (int i = 0; i < 20; ++i) CHECK(cb.uniform() == child_after.uniform());
}

TEST_CASE("derive appends to the parent path") {
  RandomStream p1(9, {1}), p2(9, {2});
  RandomStream a = p1.derive({2}), b = p2.derive({1});
  CHECK(a.id() != b.id());
  CHECK(RandomStream(9, {1, 2}).id() == a.id());
  CHECK(RandomStream(9, {2, 1}).id() == b.id());
}

TEST_CASE("uniform and normal moments") {
  RandomStream rng(3, {});
  const int n = 200000;
  double su = 0, su2 = 0, sn = 0, sn2 = 0;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform(), z = rng.normal();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    su += u;
    su2 += u * u;
    sn += z;
    sn2 += z * z;
  }
  CHECK(std::abs(su / n - 0.5) < 4 * std::sqrt(1.0 / 12 / n));
  CHECK(std::abs(su2 / n - 1.0 / 3) < 0.003);
  CHECK(std::abs(sn / n) < 4 / std::sqrt(double(n)));
  CHECK(std::abs(sn2 / n - 1.0) < 4 * std::sqrt(2.0 / n));
}

TEST_CASE("index covers its range") {
  RandomStream rng(11, {});
  std::set<std::size_t> seen;
  for (int i = 0; i < 1000; ++i) {
    const auto k = rng.index(7);
    CHECK(k < 7);
    seen.insert(k);
  }
  CHECK(seen.size() == 7);
}
