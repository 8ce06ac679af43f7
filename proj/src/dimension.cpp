#include "moran/dimension.hpp"

#include <algorithm>
#include <cmath>

#include "moran/error.hpp"
#include "moran/parallel.hpp"

namespace moran {

DimSeries dim_series(const StarState& state, int K) {
  if (K < 1 || K > state.depth()) throw Error(ErrorKind::precondition, "dimension series needs 1 <= K <= star depth");
  const Rational len0 = state.base().spec().length();
  DimSeries out;
  out.depth = K;
  out.s.reserve(static_cast<std::size_t>(K));
  for (int k = 1; k <= K; ++k) {
    const StarLevel& lv = state.level(k);
    const Rational shrink = len0 / lv.delta;
    if (shrink <= 1) {
      throw Error(ErrorKind::domain, "delta*_" + std::to_string(k) + " >= |I_0|, no contraction").at_level(k);
    }
    BigFloat num = log_big(Rational(lv.count));
    BigFloat den = log_big(shrink);
    mpfr_div(num.get(), num.get(), den.get(), MPFR_RNDN);
    out.s.push_back(num.to_double());
  }
  out.window_hi = K;
  out.window_lo = std::max(1, K / 2);
  out.tail_min = out.at(out.window_lo);
  for (int k = out.window_lo; k <= K; ++k) out.tail_min = std::min(out.tail_min, out.at(k));
  return out;
}

DimSeries dim_formula_seq(const MoranSpec& spec, int K) { return dim_series(first_reconstruct(spec, K), K); }

ConditionCert check_conditions(const Construction& c, int K) {
  if (K < 1 || K > c.depth()) throw Error(ErrorKind::precondition, "conditions need 1 <= K <= depth");
  ConditionCert cert;
  cert.depth = K;
  cert.a_applicable = true;
  for (int k = 1; k <= K; ++k) {
    const LevelStats st = level_stats(c, k);
    const LevelParams& p = c.level(k);
    ConditionLevel lv;
    lv.k = k;
    if (sgn(st.alpha_under) > 0) {
      lv.gap_ratio = st.alpha_bar / st.alpha_under;
    } else {
      cert.a_applicable = false;
    }
    lv.length_ratio = st.alpha_bar / p.delta;
    lv.spread_ratio = Rational(p.n) * st.alpha_under / c.level(k - 1).delta;
    if (k == 1 || lv.gap_ratio > cert.omega1) {
      cert.omega1 = lv.gap_ratio;
      cert.omega1_witness = k;
    }
    if (k == 1 || lv.length_ratio > cert.omega2) {
      cert.omega2 = lv.length_ratio;
      cert.omega2_witness = k;
    }
    if (k == 1 || lv.spread_ratio < cert.omega3) {
      cert.omega3 = lv.spread_ratio;
      cert.omega3_witness = k;
    }
    cert.levels.push_back(lv);
  }
  if (!cert.a_applicable) {
    cert.omega1 = 0;
    cert.omega1_witness = 0;
  }
  cert.c_applicable = sgn(cert.omega3) > 0;
  return cert;
}

ConditionCert check_conditions(const MoranSpec& spec, int K) { return check_conditions(Construction(spec, K), K); }

bool certificate_tight(const ConditionCert& cert, const Rational& shrink) {
  if (sgn(shrink) <= 0 || cert.levels.empty()) return false;
  const auto& lv = [&](int k) -> const ConditionLevel& { return cert.levels.at(static_cast<std::size_t>(k) - 1); };
  bool ok = lv(cert.omega2_witness).length_ratio > cert.omega2 - shrink;
  if (cert.a_applicable) ok = ok && lv(cert.omega1_witness).gap_ratio > cert.omega1 - shrink;
  if (cert.c_applicable) ok = ok && lv(cert.omega3_witness).spread_ratio < cert.omega3 + shrink;
  return ok;
}

std::vector<double> cover_sum(const StarState& state, double t, int K) {
  if (K < 1 || K > state.depth()) throw Error(ErrorKind::precondition, "cover sum needs 1 <= K <= star depth");
  const Rational len0 = state.base().spec().length();
  std::vector<double> out;
  for (int k = 1; k <= K; ++k) {
    const StarLevel& lv = state.level(k);
    BigFloat lg = log_big(lv.delta / len0);
    BigFloat tt(t, kLogPrecision);
    mpfr_mul(lg.get(), lg.get(), tt.get(), MPFR_RNDN);
    BigFloat ln = log_big(Rational(lv.count));
    mpfr_add(lg.get(), lg.get(), ln.get(), MPFR_RNDN);
    mpfr_exp(lg.get(), lg.get(), MPFR_RNDN);
    out.push_back(lg.to_double());
  }
  return out;
}

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  if (n < 2 || y.size() != n) throw Error(ErrorKind::degenerate, "line fit needs at least two points");
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0) throw Error(ErrorKind::degenerate, "line fit with identical abscissae");
  LineFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  return f;
}

namespace {

void check_eps(const std::vector<Rational>& eps) {
  if (eps.empty()) throw Error(ErrorKind::precondition, "no grid sizes");
  for (std::size_t i = 0; i < eps.size(); ++i) {
    if (sgn(eps[i]) <= 0) throw Error(ErrorKind::precondition, "grid sizes must be positive");
    if (i > 0 && eps[i] >= eps[i - 1]) throw Error(ErrorKind::precondition, "grid sizes must be decreasing");
  }
}

Integer floor_mul(const Rational& x, const Rational& inv) { return floor_of(x * inv); }

LineFit fit_counts(const std::vector<Rational>& eps, const std::vector<Integer>& counts) {
  if (eps.size() < 2) return {};
  std::vector<double> x, y;
  for (std::size_t i = 0; i < eps.size(); ++i) {
    x.push_back(-log_of(eps[i]));
    y.push_back(log_of(counts[i]));
  }
  return fit_line(x, y);
}

// Cells [first, last] of a half-open interval.
std::pair<Integer, Integer> cell_range(const Rational& lo, const Rational& hi, const Rational& inv) {
  Integer first = floor_mul(lo, inv);
  Integer last = ceil_of(hi * inv) - 1;
  return {first, last};
}

}  // namespace

BoxCounter::BoxCounter(std::vector<Rational> eps) : eps_(std::move(eps)) {
  check_eps(eps_);
  for (const auto& e : eps_) inv_.push_back(1 / e);
  counts_.assign(eps_.size(), 0);
  last_.assign(eps_.size(), 0);
}

void BoxCounter::feed(const Rational& lo, const Rational& hi) {
  if (hi <= lo) return;
  for (std::size_t i = 0; i < eps_.size(); ++i) {
    auto [first, last] = cell_range(lo, hi, inv_[i]);
    if (any_ && first <= last_[i]) first = last_[i] + 1;
    if (last >= first) {
      counts_[i] += last - first + 1;
      last_[i] = last;
    }
  }
  any_ = true;
}

BoxCount BoxCounter::result() const {
  if (!any_) throw Error(ErrorKind::domain, "box count of an empty interval list");
  BoxCount out;
  out.eps = eps_;
  out.counts = counts_;
  out.fit = fit_counts(eps_, counts_);
  return out;
}

BoxCount box_count(const std::vector<std::pair<Rational, Rational>>& intervals, const std::vector<Rational>& eps) {
  if (intervals.empty()) throw Error(ErrorKind::domain, "box count of an empty interval list");
  BoxCounter counter(eps);
  for (const auto& [lo, hi] : intervals) counter.feed(lo, hi);
  return counter.result();
}

BoxCount box_count(const Construction& c, int k, const std::vector<Rational>& eps, unsigned threads) {
  check_eps(eps);
  if (k < 0 || k > c.depth()) throw Error(ErrorKind::precondition, "level outside construction depth");
  std::vector<Integer> counts(eps.size());
  parallel_for(eps.size(), threads, [&](std::size_t i) {
    const Rational inv = 1 / eps[i];
    Integer total = 0;
    Integer last = 0;
    bool any = false;
    auto take = [&](Integer first, const Integer& lst) {
      if (any && first <= last) first = last + 1;
      if (lst >= first) {
        total += lst - first + 1;
        last = lst;
      }
      any = true;
    };
    auto rec = [&](auto& self, int j, const Rational& lo, std::uint64_t key) -> void {
      const Rational hi = lo + c.level(j).delta;
      auto [first, lst] = cell_range(lo, hi, inv);
      if (any && lst <= last) return;  // every cell already counted
      if (j == k || first == lst) {
        take(first, lst);
        return;
      }
      const unsigned long n = c.level(j + 1).n;
      for (unsigned long l = 1; l <= n; ++l) {
        self(self, j + 1, lo + c.child_offset(j + 1, key, l), c.child_key(j + 1, key, l));
      }
    };
    rec(rec, 0, c.spec().lo, 0);
    counts[i] = total;
  });
  BoxCount out;
  out.eps = eps;
  out.counts = std::move(counts);
  out.fit = fit_counts(out.eps, out.counts);
  return out;
}

std::vector<Rational> geometric_eps(const Rational& base, int from, int to) {
  if (base <= 1) throw Error(ErrorKind::precondition, "grid base must exceed 1");
  std::vector<Rational> out;
  for (int j = from; j <= to; ++j) out.push_back(pow_rational(base, -j));
  return out;
}

}  // namespace moran
