#include <doctest.h>

#include <sstream>

#include <moran/error.hpp>
#include <moran/oracle.hpp>
#include <moran/reconstruct.hpp>

using namespace moran;

TEST_SUITE("reconstruct") {
  TEST_CASE("identities on every preset through k = 12") {
    for (const auto& spec : presets()) {
      const StarState st = first_reconstruct(spec, 12);
      const auto checks = check_star_identities(st);
      REQUIRE(checks.size() == 12);
      for (const auto& c : checks) {
        INFO(spec.name << " k=" << c.k);
        CHECK(c.delta_identity);
        CHECK(c.gap_shift);
        CHECK(c.boundary);
        CHECK(c.slack_identity);
        CHECK(c.alpha_identity);
        CHECK(c.alpha_dominates);
        CHECK(c.boundary_dominated);
        CHECK(c.consistency);
        CHECK(c.nesting);
      }
    }
  }

  TEST_CASE("skew10 with several seeds") {
    for (std::uint64_t seed : {1u, 7u, 1234u}) {
      MoranSpec s = preset("skew10");
      s.gaps = GapPolicy::seeded(seed);
      for (const auto& c : check_star_identities(first_reconstruct(s, 12))) CHECK(c.ok());
    }
  }

  TEST_CASE("lr_quarter values") {
    const StarState st = first_reconstruct(preset("lr_quarter"), 4);
    CHECK(st.level(1).delta == Rational(15, 64));
    CHECK(st.level(0).delta == Rational(1) - Rational(1, 16));
    CHECK(st.level(1).L == Rational(1, 128));
    // e*_1 = e_1 + (n_1 - 1)(L_2 + R_2)
    const Rational e1 = Rational(1) - 2 * Rational(1, 4) - 2 * Rational(1, 32);
    CHECK(st.level(1).slack == e1 + 2 * Rational(1, 128));
    for (int k = 0; k <= 4; ++k) CHECK(st.level(k).delta == st.base().level(k).delta - 2 * st.base().level(k + 1).L);
  }

  TEST_CASE("counts are unchanged") {
    for (const auto& spec : presets()) {
      const StarState st = first_reconstruct(spec, 8);
      for (int k = 0; k <= 8; ++k) CHECK(st.level(k).count == st.base().level(k).count);
    }
  }

  TEST_CASE("star level matches the oracle") {
    for (const auto& spec : presets()) {
      const int K = spec.n_at(1) >= 10 ? 3 : 6;
      const StarState st = first_reconstruct(spec, K);
      for (int k = 0; k <= K; ++k) {
        const LevelSet s = star_level(st, k);
        const auto naive = oracle::naive_star_level(spec, k);
        REQUIRE(s.intervals.size() == naive.size());
        for (std::size_t i = 0; i < naive.size(); ++i) {
          CHECK(s.intervals[i].lo == naive[i].first);
          CHECK(s.intervals[i].hi == naive[i].second);
        }
      }
    }
  }

  TEST_CASE("star stats") {
    const StarState st = first_reconstruct(preset("cantor3"), 5);
    const StarStats s = star_stats(st, 3);
    CHECK(s.delta == Rational(1, 27));
    CHECK(s.alpha_bar == Rational(1, 27));
    CHECK(s.count == 8);
    CHECK(s.total_length == Rational(8, 27));
  }

  TEST_CASE("needs one extra level") {
    MoranSpec s = preset("cantor3");
    s.c = SequenceRule::prefix({Rational(1, 3), Rational(1, 3)});
    CHECK_NOTHROW(first_reconstruct(s, 1));
    CHECK_THROWS_AS(first_reconstruct(s, 2), Error);
  }

  TEST_CASE("star csv") {
    std::ostringstream out;
    write_star_csv(first_reconstruct(preset("cantor3"), 3), out);
    CHECK(out.str().rfind("k,delta_star", 0) == 0);
  }
}
