#include <doctest.h>

#include <cmath>

#include <moran/error.hpp>
#include <moran/oracle.hpp>

using namespace moran;

TEST_SUITE("oracle") {
  TEST_CASE("cantor3 cells") {
    const auto lv = oracle::naive_level(preset("cantor3"), 6);
    CHECK(lv.size() == 64);
    CHECK(oracle::naive_box_count(lv, Rational(1, 243)) == 32);
    CHECK(oracle::naive_box_count(lv, Rational(1, 729)) == 64);
  }

  TEST_CASE("unit interval") {
    CHECK(oracle::naive_box_count({{Rational(0), Rational(1)}}, Rational(1, 10)) == 10);
  }

  TEST_CASE("errors") {
    try {
      oracle::naive_box_count({}, Rational(1, 2));
      FAIL("expected domain");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::domain);
    }
    CHECK_THROWS_AS(oracle::naive_box_count({{Rational(0), Rational(1)}}, Rational(0)), Error);
    try {
      std::vector<oracle::Span> many(oracle::kIntervalCap + 1, {Rational(0), Rational(1)});
      oracle::naive_box_count(many, Rational(1, 2));
      FAIL("expected cap");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::cap_exceeded);
    }
  }

  TEST_CASE("star level trims") {
    const auto s = oracle::naive_star_level(preset("lr_quarter"), 1);
    REQUIRE(s.size() == 2);
    CHECK(s[0].first == Rational(1, 32) + Rational(1, 128));
    CHECK(s[0].second - s[0].first == Rational(15, 64));
  }

  TEST_CASE("window mass") {
    const MoranSpec s = preset("cantor3");
    CHECK(oracle::naive_mu_window(s, 2, Rational(0), Rational(1, 3)) == Rational(1, 2));
    CHECK(oracle::naive_mu_window(s, 2, Rational(1, 9), Rational(2, 9)) == Rational(1, 2));
    CHECK(oracle::naive_mu_window(s, 2, Rational(1, 3), Rational(5, 9)) == Rational(1, 4));
    CHECK(oracle::naive_mu_window(s, 2, Rational(4, 9), Rational(5, 9)) == 0);
  }

  TEST_CASE("sweep at t = 0 sees the whole set") {
    const auto r = oracle::exhaustive_mu_sweep(preset("cantor3"), 2, 0.0, false);
    CHECK(r.value == doctest::Approx(1.0));
    CHECK(r.exact == 1);
    CHECK(r.method == "endpoint-pairs/all");
    CHECK(r.witness.first == 0);
  }

  TEST_CASE("banded sweep") {
    const auto r = oracle::exhaustive_mu_sweep(preset("cantor3"), 1, 0.5);
    CHECK(r.method == "endpoint-pairs/band");
    CHECK(r.size > 0);
    CHECK(r.value > 0);
    const Rational len = r.witness.second - r.witness.first;
    CHECK(len >= Rational(1, 9));
    CHECK(len < Rational(1, 3));
  }

  TEST_CASE("closed forms") {
    CHECK(oracle::cantor3_dimension() == doctest::Approx(0.6309297535714574));
    CHECK(oracle::cantor3_ratio_factor(0.9) == doctest::Approx(std::pow(3.0, 0.9) / 2));
    CHECK(oracle::dim1_binary_log_ratio(0, 0.9) == 0);
    CHECK(oracle::dim1_binary_log_ratio(1, 1.0) == doctest::Approx(std::log(4.0 / 3.0)));
  }
}
