#include <doctest.h>

#include <algorithm>
#include <sstream>

#include <moran/branchtree.hpp>
#include <moran/error.hpp>
#include <moran/oracle.hpp>
#include <moran/qsmap.hpp>

#include "gen.hpp"

using namespace moran;

namespace {

constexpr int kCases = 40;

MoranSpec spec_for(std::uint64_t seed) {
  SplitMix64 rng(seed * 7919 + 13);
  const bool lr = rng.between(0, 1) == 1;
  const int gaps = static_cast<int>(rng.between(0, 2));
  return gen::random_spec(rng, lr, gaps);
}

Rational random_point(SplitMix64& rng, const Rational& lo, const Rational& hi) {
  return lo + (hi - lo) * fraction(static_cast<long>(rng.between(0, 1000)), 1000);
}

}  // namespace

TEST_SUITE("properties") {
  TEST_CASE("random specs validate") {
    for (std::uint64_t s = 0; s < kCases; ++s) {
      const MoranSpec spec = spec_for(s);
      const ValidationReport r = validate_spec(spec, 8);
      INFO("seed " << s << ": " << r.message);
      CHECK(r.pass);
    }
  }

  TEST_CASE("star identities") {
    for (std::uint64_t s = 0; s < kCases; ++s) {
      const MoranSpec spec = spec_for(s);
      for (const auto& c : check_star_identities(first_reconstruct(spec, 8))) {
        INFO("seed " << s << " k=" << c.k);
        CHECK(c.ok());
      }
    }
  }

  TEST_CASE("levels match the oracle") {
    for (std::uint64_t s = 0; s < kCases; ++s) {
      const MoranSpec spec = spec_for(s);
      const StarState st = first_reconstruct(spec, 4);
      const LevelSet lv = build_level(spec, 4);
      const LevelSet sl = star_level(st, 4);
      const auto nl = oracle::naive_level(spec, 4);
      const auto ns = oracle::naive_star_level(spec, 4);
      REQUIRE(lv.intervals.size() == nl.size());
      for (std::size_t i = 0; i < nl.size(); ++i) {
        CHECK(lv.intervals[i].lo == nl[i].first);
        CHECK(lv.intervals[i].hi == nl[i].second);
        CHECK(sl.intervals[i].lo == ns[i].first);
        CHECK(sl.intervals[i].hi == ns[i].second);
      }
    }
  }

  TEST_CASE("box counts match the oracle") {
    for (std::uint64_t s = 0; s < kCases; ++s) {
      const MoranSpec spec = spec_for(s);
      SplitMix64 rng(s + 1000);
      const int k = static_cast<int>(rng.between(2, 5));
      std::vector<Rational> eps;
      for (int j = 0; j < 3; ++j) {
        eps.push_back(spec.length() / fraction(static_cast<long>(rng.between(2, 400)), static_cast<long>(rng.between(1, 3))));
      }
      std::sort(eps.begin(), eps.end(), [](const Rational& a, const Rational& b) { return a > b; });
      eps.erase(std::unique(eps.begin(), eps.end()), eps.end());
      const Construction c(spec, k);
      const BoxCount one = box_count(c, k, eps);
      const BoxCount many = box_count(c, k, eps, 3);
      const auto naive = oracle::naive_level(spec, k);
      for (std::size_t j = 0; j < eps.size(); ++j) {
        INFO("seed " << s << " eps " << to_string(eps[j]));
        CHECK(one.counts[j] == oracle::naive_box_count(naive, eps[j]));
        CHECK(many.counts[j] == one.counts[j]);
      }
    }
  }

  TEST_CASE("window mass") {
    for (std::uint64_t s = 0; s < kCases; ++s) {
      const MoranSpec spec = spec_for(s);
      const StarState st = first_reconstruct(spec, 4);
      const Rational hlo = st.star_lo(0, spec.lo), hhi = st.star_hi(0, spec.lo);
      CHECK(mu_window(st, hlo, hhi, 3) == 1);
      CHECK(mu_window(st, spec.lo - 1, spec.hi + 1, 2) == 1);
      SplitMix64 rng(s + 99);
      for (int i = 0; i < 20; ++i) {
        Rational a = random_point(rng, spec.lo, spec.hi), b = random_point(rng, spec.lo, spec.hi);
        if (b < a) std::swap(a, b);
        const Rational m = mu_window(st, a, b, 3);
        CHECK(m == oracle::naive_mu_window(spec, 3, a, b));
        CHECK(m <= mu_window(st, a, b, 2));
      }
    }
  }

  TEST_CASE("export round trip") {
    for (std::uint64_t s = 0; s < 10; ++s) {
      const LevelSet lv = build_level(spec_for(s), 3);
      std::stringstream io;
      export_level(lv, io);
      CHECK(import_level(io) == lv);
    }
  }

  TEST_CASE("branch tree checks") {
    for (std::uint64_t s = 0; s < kCases; ++s) {
      const MoranSpec spec = spec_for(s);
      const StarState st = first_reconstruct(spec, 6);
      const bool a_ok = check_conditions(spec, 5).a_applicable;
      for (Condition cond : {Condition::A, Condition::B}) {
        if (cond == Condition::A && !a_ok) continue;
        const Schedule sch = choose_M(spec, cond, 5);
        const BranchTree t = build_T(st, sch, sch.m[5]);
        for (const auto& c : check_branches(t, st)) {
          INFO("seed " << s << " " << to_string(cond) << " m=" << c.m);
          CHECK(c.ok());
        }
        const QsStats q = stats_series(t, st);
        CHECK(theta_bound_violations(q).empty());
      }
    }
  }

  TEST_CASE("image mass is conserved") {
    const char* maps[] = {"identity", "affine:5/2,-3", "power:3", "power:2+affine:1,1", "pl:-5:-5,0:1,10:2"};
    for (std::uint64_t s = 0; s < 12; ++s) {
      const MoranSpec spec = spec_for(s);
      const StarState st = first_reconstruct(spec, 5);
      const Schedule sch = choose_M(spec, Condition::B, 4);
      const BranchTree t = build_T(st, sch, sch.m[4]);
      const QsMapSpec f = parse_map(maps[s % 5]);
      const ImageTree img = image_tree(f, t, t.max_m(), kDefaultPrecision, 4000);
      const ImageMeasure mu = build_mu_d(img, 0.3 + 0.05 * static_cast<double>(s));
      for (int m = 0; m <= img.depth(); ++m) {
        INFO("seed " << s << " m=" << m);
        CHECK(mu.level_total(m) == 1);
        for (std::size_t i = 0; i < mu.max_mass[static_cast<std::size_t>(m)].size(); ++i) {
          CHECK(mu.min_mass[static_cast<std::size_t>(m)][i] <= mu.max_mass[static_cast<std::size_t>(m)][i]);
        }
      }
      CHECK(mu_d_ball(img, mu, img.root_lo, img.levels[0][0].length) == 1);
    }
  }

  TEST_CASE("affine images scale exactly") {
    for (std::uint64_t s = 0; s < 10; ++s) {
      const MoranSpec spec = spec_for(s);
      const StarState st = first_reconstruct(spec, 4);
      const Schedule sch = choose_M(spec, Condition::B, 3);
      const BranchTree t = build_T(st, sch, sch.m[3]);
      const ImageTree img = image_tree(parse_map("affine:3,1/7"), t, t.max_m());
      std::vector<Rational> a, b;
      t.for_each_branch(t.max_m(), [&](const Rational& lo, const Rational&, std::uint32_t) { a.push_back(3 * lo + Rational(1, 7)); });
      img.for_each_branch(img.depth(), [&](const Rational& lo, const Rational&, std::uint32_t) { b.push_back(lo); });
      CHECK(a == b);
    }
  }
}
