#include <doctest.h>

#include <cmath>
#include <sstream>

#include <moran/error.hpp>
#include <moran/oracle.hpp>
#include <moran/qsmap.hpp>

using namespace moran;

namespace {

struct Built {
  StarState st;
  BranchTree tree;
};

Built build(const char* name, int K, Condition cond = Condition::A) {
  const MoranSpec s = preset(name);
  StarState st = first_reconstruct(s, K + 1);
  const Schedule sch = choose_M(s, cond, K);
  BranchTree t = build_T(st, sch, sch.m[static_cast<std::size_t>(K)]);
  return {std::move(st), std::move(t)};
}

Rational pow3(int k) {
  Rational r = 1;
  for (int j = 0; j < k; ++j) r /= 3;
  return r;
}

}  // namespace

TEST_SUITE("qsmap") {
  TEST_CASE("parsing") {
    const QsMapSpec a = parse_map("affine:3,-1");
    REQUIRE(a.parts.size() == 1);
    CHECK(a.parts[0].kind == MapKind::affine);
    CHECK(a.parts[0].a == 3);
    CHECK(a.parts[0].b == -1);
    const QsMapSpec c = parse_map("power:2+affine:1/2,0");
    REQUIRE(c.parts.size() == 2);
    CHECK(c.parts[0].kind == MapKind::power);
    CHECK(describe(c) == "power:2+affine:1/2,0");
    CHECK(map_from_json(to_json(c)).parts.size() == 2);
    CHECK(describe(map_from_json(to_json(parse_map("pl:0:0,1/2:1/4,1:1")))) == "pl:0:0,1/2:1/4,1:1");
    CHECK(is_affine(parse_map("identity+affine:2,1")));
    CHECK_FALSE(is_affine(c));
    CHECK(is_exact(c));
    CHECK_FALSE(is_exact(parse_map("power:1/2")));
    CHECK(affine_coeffs(parse_map("affine:2,1+affine:3,0")) == std::pair<Rational, Rational>(6, 3));
    for (const char* bad : {"", "cube:2", "affine:1", "power", "identity:3", "pl:0", "affine:x,1"}) {
      CHECK_THROWS_AS(parse_map(bad), Error);
    }
  }

  TEST_CASE("validation") {
    CHECK_THROWS_AS(validate_map(parse_map("affine:-1,0")), Error);
    CHECK_THROWS_AS(validate_map(parse_map("affine:0,1")), Error);
    CHECK_THROWS_AS(validate_map(parse_map("power:0")), Error);
    CHECK_THROWS_AS(validate_map(parse_map("pl:0:0,1:1,1:2")), Error);
    CHECK_THROWS_AS(validate_map(parse_map("pl:0:1,1:0")), Error);
    CHECK_NOTHROW(validate_map(parse_map("pl:0:0,1/3:4/3,2/3:5/3,1:2")));
  }

  TEST_CASE("evaluation") {
    const QsMapSpec sq = parse_map("power:2");
    CHECK(exact_image(sq, Rational(1, 4)) == Rational(1, 16));
    CHECK(exact_image(sq, Rational(1, 2)) == Rational(1, 4));
    CHECK(exact_image(sq, Rational(-1, 2)) == Rational(-1, 4));
    const QsMapSpec af = parse_map("affine:3,-1");
    CHECK(exact_image(af, Rational(0)) == -1);
    CHECK(exact_image(af, Rational(1)) == 2);
    const Enclosure e = eval(af, Rational(1, 3));
    CHECK(e.lo == e.hi);
    CHECK(e.lo == 0);
    CHECK(exact_image(parse_map("pl:0:0,1/2:1/4,1:1"), Rational(3, 4)) == Rational(5, 8));
    CHECK(exact_image(parse_map("affine:2,0+power:2"), Rational(1, 2)) == 1);
    CHECK_THROWS_AS(exact_image(parse_map("power:1/2"), Rational(2)), Error);
  }

  TEST_CASE("outward rounding") {
    const QsMapSpec f = parse_map("power:1/2+affine:1,1/3");
    for (const Rational& x : {Rational(2), Rational(1, 3), Rational(7, 5)}) {
      const Enclosure lo = eval(f, x, 24);
      const Enclosure hi = eval(f, x, 256);
      CHECK(lo.lo < lo.hi);
      CHECK(lo.lo <= hi.lo);
      CHECK(hi.hi <= lo.hi);
      CHECK(hi.hi - hi.lo < Rational(1, 1000000) * (lo.hi - lo.lo));
    }
    const Enclosure two = eval(parse_map("power:1/2"), Rational(4), 20);
    CHECK(two.lo <= 2);
    CHECK(two.hi >= 2);
  }

  TEST_CASE("triple audits") {
    for (const char* name : {"identity", "affine:3,-1"}) {
      const QsMapSpec f = parse_map(name);
      const TripleAudit a = qs_triple_audit(f, Rational(0), Rational(1), 2000, 5, default_eta(f));
      CHECK(a.worst == 1.0);
      CHECK(a.samples + a.skipped == 2000);
    }
    const QsMapSpec sq = parse_map("power:2");
    const Rational lo(1, 4), hi(1);
    const Eta eta = fit_eta(sq, lo, hi, 24, 1.25);
    CHECK_FALSE(eta.linear);
    CHECK(eta.a == 2);
    CHECK(eta.C >= 1.25);
    const TripleAudit fresh = qs_triple_audit(sq, lo, hi, 5000, 77, eta);
    CHECK(fresh.worst <= 1.0);
    const TripleAudit same = qs_triple_audit(sq, lo, hi, 5000, 77, eta);
    CHECK(same.worst == fresh.worst);
    CHECK(same.x == fresh.x);
  }

  TEST_CASE("image tree shapes") {
    const Built b = build("cantor3", 6);
    const ImageTree id = image_tree(parse_map("identity"), b.tree, 6);
    CHECK(id.compressed);
    CHECK(id.exact);
    CHECK(id.depth() == 6);
    CHECK(id.count(6) == 64);
    const ImageTree sq = image_tree(parse_map("power:2"), b.tree, 6);
    CHECK_FALSE(sq.compressed);
    CHECK(sq.exact);
    CHECK(sq.levels[6].size() == 64);
    std::vector<std::pair<Rational, Rational>> img;
    sq.for_each_branch(2, [&](const Rational& lo, const Rational& hi, std::uint32_t) { img.emplace_back(lo, hi); });
    REQUIRE(img.size() == 4);
    CHECK(img[1].first == Rational(4, 81));
    CHECK(img[1].second == Rational(1, 9));
    const ImageTree cut = image_tree(parse_map("power:2"), b.tree, 6, kDefaultPrecision, 10);
    CHECK(cut.depth() == 2);
    CHECK(cut.requested == 6);
    const ImageTree rt = image_tree(parse_map("power:1/2"), b.tree, 4);
    CHECK_FALSE(rt.exact);
  }

  TEST_CASE("mu_d on cantor3") {
    const Built b = build("cantor3", 8);
    const ImageTree id = image_tree(parse_map("identity"), b.tree, 8);
    for (double d : {0.3, 0.5, 0.9}) {
      const ImageMeasure mu = build_mu_d(id, d);
      for (int m = 0; m <= 8; ++m) {
        CHECK(mu.level_total(m) == 1);
        const Rational want = Rational(1) / Rational(Integer(1) << static_cast<unsigned>(m));
        for (const auto& x : mu.max_mass[static_cast<std::size_t>(m)]) CHECK(x == want);
        for (const auto& x : mu.min_mass[static_cast<std::size_t>(m)]) CHECK(x == want);
      }
    }
    CHECK_THROWS_AS(build_mu_d(id, 1.0), Error);
  }

  TEST_CASE("unequal siblings") {
    const Built b = build("cantor3", 1);
    const ImageTree t = image_tree(parse_map("pl:0:0,1/3:4/3,2/3:5/3,1:2"), b.tree, 1);
    const ImageMeasure mu = build_mu_d(t, 0.5);
    REQUIRE(mu.share[0][0].size() == 2);
    CHECK(mu.share[0][0][0].get_d() == doctest::Approx(2.0 / 3).epsilon(1e-15));
    CHECK(mu.share[0][0][1].get_d() == doctest::Approx(1.0 / 3).epsilon(1e-15));
    CHECK(mu.level_total(1) == 1);
  }

  TEST_CASE("power map mass is conserved") {
    const Built b = build("wide10", 2);
    for (const char* f : {"power:2", "power:1/2+affine:1,1", "pl:0:0,1/2:1/4,1:1"}) {
      const ImageTree t = image_tree(parse_map(f), b.tree, b.tree.max_m());
      const ImageMeasure mu = build_mu_d(t, 0.9);
      for (int m = 0; m <= t.depth(); ++m) CHECK(mu.level_total(m) == 1);
    }
  }

  TEST_CASE("ratio series controls") {
    const Built c = build("cantor3", 20);
    const ImageTree ic = image_tree(parse_map("identity"), c.tree, 20);
    const RatioSeries rc = mass_ratio_series(ic, build_mu_d(ic, 0.9), 20);
    const double f = oracle::cantor3_ratio_factor(0.9);
    CHECK(std::abs(rc.min_step - f) < 1e-9);
    CHECK(std::abs(rc.max_step - f) < 1e-9);
    CHECK(std::abs(rc.growth_rate - std::log(f)) < 1e-9);

    const Built d = build("dim1_binary", 30);
    const ImageTree id = image_tree(parse_map("identity"), d.tree, 30);
    const RatioSeries rd = mass_ratio_series(id, build_mu_d(id, 0.9), 30);
    for (int m = 0; m <= 30; ++m) {
      CHECK(std::log(rd.max_ratio[static_cast<std::size_t>(m)]) ==
            doctest::Approx(oracle::dim1_binary_log_ratio(m, 0.9)).epsilon(1e-9));
    }
    CHECK(rd.growth_rate < 0.02);
  }

  TEST_CASE("balls") {
    const Built b = build("cantor3", 8);
    const ImageTree id = image_tree(parse_map("identity"), b.tree, 8);
    const ImageMeasure mu = build_mu_d(id, 0.5);
    CHECK(mu_d_ball(id, mu, Rational(0), pow3(3)) == Rational(1, 8));
    CHECK(mu_d_ball(id, mu, Rational(1, 2), Rational(1, 10)) == 0);
    CHECK(mu_d_ball(id, mu, Rational(1, 2), Rational(1, 2)) == 1);
    const BallAudit a = ball_audit(id, mu, Rational(0), {pow3(1), pow3(2), pow3(5), Rational(2)});
    CHECK(a.clamped);
    CHECK(a.r.back() == 1);
    CHECK(a.mass[2] == Rational(1, 32));
    CHECK(a.ratio[2] == doctest::Approx(std::pow(std::sqrt(3.0) / 2, 5)));
    CHECK_THROWS_AS(ball_audit(id, mu, Rational(3), {pow3(1)}), Error);
    const Rational x = pick_point(id, 11);
    CHECK(x == pick_point(id, 11));
    CHECK(mu_d_ball(id, mu, x, Rational(0)) > 0);
  }

  TEST_CASE("cantor3 statistics") {
    const Built b = build("cantor3", 6);
    const QsStats s = stats_series(b.tree, b.st);
    CHECK(s.M == 3);
    REQUIRE(s.rows.size() == 7);
    for (int m = 0; m < 6; ++m) {
      const auto& r = s.rows[static_cast<std::size_t>(m)];
      CHECK(*r.beta == Rational(1, 3));
      CHECK(*r.theta == Rational(2, 3));
      CHECK(*r.kappa == Rational(1, 3));
      CHECK(r.l_Tm == Rational(Integer(1) << static_cast<unsigned>(m)) * pow3(m));
    }
    for (int m = 1; m <= 6; ++m) {
      const auto& r = s.rows[static_cast<std::size_t>(m)];
      CHECK(*r.chi == Rational(1, 3));
      CHECK(*r.lambda_star == Rational(1, 3));
      CHECK(*r.lambda_under == Rational(1, 3));
      CHECK(*r.gamma_star == Rational(1, 3));
    }
    CHECK_FALSE(s.rows[0].chi);
    CHECK_FALSE(s.rows[6].beta);
    CHECK(theta_bound_violations(s).empty());
    const Trend t = trend_at(s, 4, 0.5);
    CHECK(t.beta_avg == doctest::Approx(1.0 / 3));
    CHECK(t.log_theta == doctest::Approx(std::log(1.5)));
    CHECK(t.chi_miss == 0);
    CHECK(t.log_length == doctest::Approx(std::log(1.5) / std::log(3.0)));
    const auto counts = stats_counts(s, 0.5, 0.5);
    REQUIRE(counts.size() == 6);
    CHECK(counts.back().H == 6);
    CHECK(counts.back().R == 6);
    CHECK(counts.back().PR == 6);
    std::ostringstream csv;
    write_qs_stats_csv(s, csv);
    CHECK(csv.str().rfind("m,beta,theta,chi,kappa,lambda_star,lambda_under,gamma_star,gamma_under,l_Tm\n", 0) == 0);
  }

  TEST_CASE("wide10 statistics") {
    const Built b = build("wide10", 4);
    const QsStats s = stats_series(b.tree, b.st);
    CHECK(theta_bound_violations(s).empty());
    for (std::size_t m = 1; m < s.rows.size(); ++m) {
      CHECK(*s.rows[m].chi < 1);
      CHECK(s.rows[m].l_Tm <= s.rows[m - 1].l_Tm);
    }
    // first step: widest of three branches over the parent
    CHECK(*s.rows[1].chi == Rational(1, 5) + Rational(1, 6));
  }

  TEST_CASE("averaging counts") {
    const SparseCounts l = sparse_counts({1, 0.5, 0.1, 0.05}, 0.2);
    CHECK(l.V == std::vector<std::size_t>{0, 0, 0, 1, 2});
    CHECK(l.cesaro[2] == doctest::Approx(0.75));
    CHECK(l.fraction(4) == doctest::Approx(0.5));
    CHECK(l.fraction(0) == 1.0);
    const SparseCounts z = sparse_counts({0.9, 0.9, 0.9}, 0.9);
    CHECK(z.V.back() == 0);
    CHECK_THROWS_AS(sparse_counts({-1}, 0.1), Error);
  }

  TEST_CASE("sandwich fits") {
    const SandwichFit id = sandwich_audit(parse_map("identity"), Rational(0), Rational(1), 2000, 3);
    CHECK(id.p == 1);
    CHECK(id.q == doctest::Approx(1.0));
    CHECK(id.lambda == doctest::Approx(1.0));
    CHECK(id.k_rho == doctest::Approx(2.0));
    const SandwichFit sq = sandwich_audit(parse_map("power:2"), Rational(1, 4), Rational(1), 4000, 3);
    CHECK(sq.q <= 2.05);
    CHECK(sq.p >= 0.45);
    CHECK(sq.p <= 1);
    CHECK(sq.lambda > 0);
    CHECK(sq.pairs > 1000);
  }
}
