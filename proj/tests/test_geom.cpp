#include <algorithm>
#include <random>

#include "doctest.h"
#include "tkdr/geom.hpp"

using namespace tkdr;

TEST_CASE("bit vector examples") {
  BitVec v({true, false, true, true, false});
  CHECK(v.select1(2) == 3);
  CHECK(v.select1(3) == 4);
  CHECK(v.select0(2) == 5);
  CHECK(v.rank1(4) == 3);
  CHECK_THROWS_WITH(v.select1(4), "select out of range");
}

TEST_CASE("bit vector against scan") {
  std::mt19937_64 rng(11);
  for (int round = 0; round < 6; ++round) {
    const std::size_t m = round < 3 ? 1 + rng() % 3000 : 100000;
    const double density = (round % 3 + 1) / 4.0;
    std::vector<bool> bits(m);
    std::bernoulli_distribution coin(density);
    for (std::size_t i = 0; i < m; ++i) bits[i] = coin(rng);
    BitVec v(bits);
    std::uint64_t ones = 0, zeros = 0;
    for (std::size_t p = 1; p <= m; ++p) {
      if (bits[p - 1]) {
        ++ones;
        REQUIRE(v.select1(ones) == p);
      } else {
        ++zeros;
        REQUIRE(v.select0(zeros) == p);
      }
      REQUIRE(v.rank1(p) == ones);
    }
    CHECK(v.ones() == ones);
  }
}

TEST_CASE("rank dictionary") {
  RankDict d({2, 2, 5});
  CHECK(d.rank_of(5) == 2);
  CHECK(d.rank_of(1) == 0);
  CHECK(d.rank_of(6) == 3);
  CHECK(d.select_pos(3) == 5);

  std::mt19937_64 rng(5);
  std::vector<std::uint64_t> vals(10000);
  for (auto& x : vals) x = rng() % 20000;
  RankDict big(vals);
  std::sort(vals.begin(), vals.end());
  for (int q = 0; q < 10000; ++q) {
    std::int64_t x = static_cast<std::int64_t>(rng() % 20010) - 5;
    auto expect = static_cast<std::uint64_t>(std::count_if(vals.begin(), vals.end(), [&](std::uint64_t v) {
      return static_cast<std::int64_t>(v) < x;
    }));
    REQUIRE(big.rank_of(x) == expect);
  }
  for (std::size_t i = 1; i <= vals.size(); i += 7) CHECK(big.select_pos(i) == vals[i - 1]);
}

TEST_CASE("three-sided examples") {
  ThreeSided s({{1, 5, 0}, {2, 3, 1}, {3, 9, 2}}, 2);
  auto r = s.query_sorted(1, 3, 4);
  REQUIRE(r.size() == 2);
  CHECK(r[0].payload == 2);
  CHECK(r[1].payload == 0);
  CHECK(s.query_sorted(2, 2, 10).empty());
}

TEST_CASE("three-sided against naive filter") {
  std::mt19937_64 rng(21);
  for (std::uint64_t block : {1u, 2u, 16u, 64u}) {
    std::vector<Point2> pts(10000);
    for (std::uint32_t i = 0; i < pts.size(); ++i) {
      pts[i] = Point2{static_cast<std::uint32_t>(rng() % 5000), static_cast<std::uint32_t>(rng() % 10000), i};
    }
    ThreeSided s(pts, block);
    for (int q = 0; q < 1000; ++q) {
      std::uint32_t a = rng() % 5000, b = rng() % 5000, tau = rng() % 10000;
      if (a > b) std::swap(a, b);
      std::vector<std::uint32_t> expect;
      for (const auto& p : pts) {
        if (p.x >= a && p.x <= b && p.y >= tau) expect.push_back(p.payload);
      }
      std::vector<Point2> out;
      IoTape tape(block);
      s.query(a, b, tau, out, &tape);
      std::vector<std::uint32_t> got;
      for (const auto& p : out) got.push_back(p.payload);
      std::sort(got.begin(), got.end());
      REQUIRE(got == expect);
      CHECK(tape.total() >= 1);
    }
  }
}

TEST_CASE("persistent stabbing examples") {
  PersistentStabbing s({{1, 4, 7, 0}, {2, 2, 9, 1}, {3, 8, 1, 2}});
  auto r = s.stab_all(2, 2);
  REQUIRE(r.size() == 2);
  CHECK(r[0].score == 9);
  CHECK(r[1].score == 7);
  CHECK(s.stab_all(0, 1).empty());
  CHECK(s.stab_all(5, 1).size() == 1);
  CHECK(s.stab_all(9, 1).empty());
}

TEST_CASE("persistent stabbing against naive filter") {
  std::mt19937_64 rng(8);
  std::vector<WeightedInterval> iv(10000);
  for (std::uint32_t i = 0; i < iv.size(); ++i) {
    std::uint32_t a = rng() % 20000, len = rng() % 3000;
    iv[i] = WeightedInterval{a, a + len, static_cast<Score>(i + 1), i};
  }
  std::shuffle(iv.begin(), iv.end(), rng);
  PersistentStabbing s(iv);
  for (int q = 0; q < 1000; ++q) {
    std::uint32_t x = rng() % 24000;
    Score tau = static_cast<Score>(rng() % 10000);
    std::vector<Score> expect;
    for (const auto& i : iv) {
      if (i.start <= x && x <= i.end && i.weight >= tau) expect.push_back(i.weight);
    }
    std::sort(expect.rbegin(), expect.rend());
    auto first = s.stab_all(x, tau);
    auto second = s.stab_all(x, tau);  // persistence: versions are not consumed
    CHECK(first == second);
    std::vector<Score> got;
    for (const auto& it : first) got.push_back(it.score);
    REQUIRE(got == expect);
  }
}

TEST_CASE("online sorted range") {
  OnlineSortedRange s({4, 1, 3});
  auto c = s.query(1, 3);
  CHECK(c.next()->score == 4);
  CHECK(c.next()->score == 3);
  CHECK(c.next()->score == 1);
  CHECK_FALSE(c.next());
  auto d = s.query(2, 2);
  CHECK(d.next()->score == 1);
  CHECK_THROWS(s.query(0, 2));

  std::mt19937_64 rng(4);
  std::vector<Score> a(10000);
  for (auto& x : a) x = static_cast<Score>(rng() % 100000);
  OnlineSortedRange big(a);
  for (int q = 0; q < 1000; ++q) {
    std::uint64_t i = 1 + rng() % a.size(), j = 1 + rng() % a.size();
    if (i > j) std::swap(i, j);
    std::vector<Score> expect(a.begin() + static_cast<long>(i - 1), a.begin() + static_cast<long>(j));
    std::sort(expect.rbegin(), expect.rend());
    auto cur = big.query(i, j);
    for (std::size_t t = 0; t < std::min<std::size_t>(10, expect.size()); ++t) {
      auto item = cur.next();
      REQUIRE(item);
      REQUIRE(item->score == expect[t]);
      REQUIRE(a[item->payload - 1] == item->score);
    }
  }
}

TEST_CASE("geometry serialization") {
  std::mt19937_64 rng(2);
  std::vector<Point2> pts(500);
  for (std::uint32_t i = 0; i < pts.size(); ++i) pts[i] = Point2{i, static_cast<std::uint32_t>(rng() % 900), i};
  ThreeSided t(pts, 8);
  std::vector<WeightedInterval> iv;
  for (std::uint32_t i = 0; i < 300; ++i) iv.push_back({i, i + static_cast<std::uint32_t>(rng() % 50), i + 1, i});
  PersistentStabbing ps(iv);
  Writer w;
  t.save(w);
  ps.save(w);
  Reader r(w.data());
  auto t2 = ThreeSided::load(r);
  auto ps2 = PersistentStabbing::load(r);
  CHECK(r.done());
  for (std::uint32_t x = 0; x < 400; x += 13) {
    CHECK(t2.query_sorted(x, x + 100, 300) == t.query_sorted(x, x + 100, 300));
    CHECK(ps2.stab_all(x, 5) == ps.stab_all(x, 5));
  }
}
