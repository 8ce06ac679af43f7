#include <doctest.h>

#include <functional>
#include <sstream>

#include <moran/error.hpp>
#include <moran/spec.hpp>

using namespace moran;

namespace {

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  return ErrorKind::io;  // sentinel: nothing thrown
}

MoranSpec simple(Rational c, unsigned long n = 2) {
  MoranSpec s;
  s.name = "simple";
  s.n = SequenceRule::constant(Rational(static_cast<long>(n)));
  s.c = SequenceRule::constant(c);
  s.L = SequenceRule::constant(0);
  s.R = SequenceRule::constant(0);
  return s;
}

}  // namespace

TEST_SUITE("spec") {
  TEST_CASE("cantor3 validates with e_k = 3^-k") {
    const auto rep = validate_spec(preset("cantor3"), 10);
    CHECK(rep.pass);
    REQUIRE(rep.levels.size() == 10);
    for (const auto& l : rep.levels) CHECK(l.slack == pow_rational(Rational(1, 3), l.k));
  }

  TEST_CASE("n c = 1 fails at level 1") {
    const auto rep = validate_spec(simple(Rational(1, 2)), 5);
    CHECK_FALSE(rep.pass);
    REQUIRE(rep.failed_level);
    CHECK(*rep.failed_level == 1);
    CHECK(kind_of([&] { level_table(simple(Rational(1, 2)), 3); }) == ErrorKind::invalid_spec);
  }

  TEST_CASE("wide10 slack is half the parent") {
    const auto rep = validate_spec(preset("wide10"), 6);
    CHECK(rep.pass);
    Rational parent = 1;
    for (const auto& l : rep.levels) {
      CHECK(l.slack == parent / 2);
      parent /= 20;
    }
    CHECK(slack(preset("wide10"), 2) == Rational(1, 40));
    CHECK(slack(preset("cantor3"), 1) == Rational(1, 3));
  }

  TEST_CASE("touching children give zero slack") {
    MoranSpec s = simple(Rational(1, 4));
    s.L = SequenceRule::constant(Rational(1, 4));
    s.R = SequenceRule::prefix({Rational(1, 4)});
    CHECK(slack(s, 1) == 0);
    // R is undefined past the prefix
    CHECK(kind_of([&] { level_table(s, 2); }) == ErrorKind::not_evaluable);
    const auto rep = validate_spec(s, 3);
    CHECK_FALSE(rep.pass);
    CHECK(*rep.failed_level == 2);
  }

  TEST_CASE("negative slack is inconsistent") {
    MoranSpec s = simple(Rational(1, 3));
    s.L = SequenceRule::constant(Rational(1, 4));
    s.R = SequenceRule::constant(Rational(1, 4));
    CHECK(kind_of([&] { level_table(s, 1); }) == ErrorKind::inconsistent);
    CHECK(kind_of([&] { slack(s, 1); }) == ErrorKind::inconsistent);
  }

  TEST_CASE("presets") {
    CHECK(preset("cantor3").n_at(4) == 2);
    CHECK(preset("cantor3").c_at(4) == Rational(1, 3));
    CHECK(preset("dim1_binary").c_at(3) == Rational(63, 128));
    CHECK(kind_of([] { preset("nope"); }) == ErrorKind::not_found);
    CHECK(presets().size() == preset_names().size());
    for (const auto& s : presets()) CHECK(validate_spec(s, 8).pass);
  }

  TEST_CASE("sequence rules") {
    const auto p = SequenceRule::periodic({Rational(1), Rational(2), Rational(3)});
    CHECK(p.at(1) == 1);
    CHECK(p.at(4) == 1);
    CHECK(p.at(6) == 3);
    const auto h = SequenceRule::table("harmonic", {Rational(1), Rational(2)});
    CHECK(h.at(2) == Rational(1, 4));
    CHECK_FALSE(SequenceRule::table("harmonic", {Rational(1), Rational(-3)}).evaluable(3));
    CHECK_FALSE(SequenceRule::table("unknown", {}).evaluable(1));
    CHECK(kind_of([] { SequenceRule::prefix({Rational(1)}).at(2); }) == ErrorKind::not_evaluable);
  }

  TEST_CASE("seeded gaps sum to the slack") {
    const MoranSpec s = preset("skew10");
    const auto levels = level_table(s, 4);
    GapTable t(s, levels);
    for (int k = 1; k <= 4; ++k) {
      for (std::uint64_t key = 0; key < t.keys_at(k); ++key) {
        Rational sum = 0;
        for (const auto& g : t.gaps(k, key)) {
          CHECK(sgn(g) >= 0);
          sum += g;
        }
        CHECK(sum == levels[static_cast<std::size_t>(k)].slack);
      }
    }
    CHECK(t.keys_at(1) == 1);
    CHECK(t.keys_at(2) == 10);
    CHECK(t.keys_at(3) == 64);
  }

  TEST_CASE("weighted gaps follow the weights") {
    MoranSpec s = simple(Rational(1, 5), 3);
    s.gaps = GapPolicy::weighted({Rational(1), Rational(3)});
    const auto g = s.gaps.interior_gaps(1, 3, Rational(2, 5), 0);
    REQUIRE(g.size() == 2);
    CHECK(g[0] == Rational(1, 10));
    CHECK(g[1] == Rational(3, 10));
  }

  TEST_CASE("json round trip") {
    for (const auto& s : presets()) {
      const auto j = to_json(s);
      const MoranSpec back = spec_from_json(j);
      CHECK(to_json(back) == j);
      CHECK(level_table(back, 5).back().delta == level_table(s, 5).back().delta);
    }
    const auto bad = nlohmann::json::parse(R"({"n": {"kind": "constant"}})");
    CHECK(kind_of([&] { spec_from_json(bad); }) == ErrorKind::parse);
    CHECK(kind_of([] { load_spec_file("/nonexistent/spec.json"); }) == ErrorKind::io);
  }

  TEST_CASE("json schema with numbers and decimals") {
    const auto j = nlohmann::json::parse(R"({
      "name": "dec",
      "n": {"kind": "constant", "values": [3]},
      "c": {"kind": "constant", "values": ["0.2"]},
      "L": {"kind": "constant", "values": ["0"]},
      "R": {"kind": "constant", "values": [0]},
      "gaps": {"kind": "weighted", "weights": ["1", "2"]},
      "interval": {"lo": "-1", "hi": "1"}})");
    const MoranSpec s = spec_from_json(j);
    CHECK(s.c_at(1) == Rational(1, 5));
    CHECK(s.length() == 2);
    CHECK(validate_spec(s, 4).pass);
  }
}
