#include "moran/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "moran/error.hpp"

namespace moran::oracle {

namespace {

struct Node {
  Rational lo;
  std::uint64_t rank;  // position within its level
};

// Level k as (lo, rank); delta ends up as the level-k length.
std::vector<Node> expand(const MoranSpec& spec, int k, Rational& delta) {
  std::vector<Node> cur{{spec.lo, 0}};
  delta = spec.hi - spec.lo;
  const std::uint64_t P = spec.gaps.key_space();
  for (int j = 1; j <= k; ++j) {
    const unsigned long n = spec.n_at(j);
    const Rational d = delta * spec.c_at(j);
    const Rational L = spec.L_at(j), R = spec.R_at(j);
    const Rational e = delta - Rational(n) * d - L - R;
    if (sgn(e) < 0) throw Error(ErrorKind::inconsistent, "negative slack").at_level(j);
    if (cur.size() * n > kIntervalCap) throw Error(ErrorKind::cap_exceeded, "oracle level too large").at_level(j);
    std::vector<Node> next;
    for (const auto& p : cur) {
      const auto g = spec.gaps.interior_gaps(j, n, e, p.rank % P);
      Rational x = p.lo + L;
      for (unsigned long l = 0; l < n; ++l) {
        next.push_back({x, p.rank * n + l});
        x += d;
        if (l + 1 < n) x += g[l];
      }
    }
    cur = std::move(next);
    delta = d;
  }
  return cur;
}

double ratio(const Rational& mass, const Rational& len, double t) {
  if (sgn(mass) == 0) return 0;
  mpfr_t m, l, tt;
  mpfr_inits2(128, m, l, tt, static_cast<mpfr_ptr>(nullptr));
  mpfr_set_q(m, mass.get_mpq_t(), MPFR_RNDN);
  mpfr_set_q(l, len.get_mpq_t(), MPFR_RNDN);
  mpfr_set_d(tt, t, MPFR_RNDN);
  mpfr_pow(l, l, tt, MPFR_RNDN);
  mpfr_div(m, m, l, MPFR_RNDN);
  const double out = mpfr_get_d(m, MPFR_RNDN);
  mpfr_clears(m, l, tt, static_cast<mpfr_ptr>(nullptr));
  return out;
}

}  // namespace

std::vector<Span> naive_level(const MoranSpec& spec, int k) {
  Rational delta;
  std::vector<Span> out;
  for (const auto& n : expand(spec, k, delta)) out.emplace_back(n.lo, n.lo + delta);
  return out;
}

std::vector<Span> naive_star_level(const MoranSpec& spec, int k) {
  const Rational L = spec.L_at(k + 1), R = spec.R_at(k + 1);
  std::vector<Span> out;
  for (const auto& [lo, hi] : naive_level(spec, k)) out.emplace_back(lo + L, hi - R);
  return out;
}

Integer naive_box_count(const std::vector<Span>& intervals, const Rational& eps) {
  if (intervals.empty()) throw Error(ErrorKind::domain, "no intervals");
  if (intervals.size() > kIntervalCap) throw Error(ErrorKind::cap_exceeded, "too many intervals for the oracle");
  if (sgn(eps) <= 0) throw Error(ErrorKind::precondition, "eps must be positive");
  std::set<Integer> cells;
  std::size_t walked = 0;
  for (const auto& [lo, hi] : intervals) {
    if (hi <= lo) continue;
    Integer j = floor_of(lo / eps);
    // walk cells while the cell starts before hi
    while (Rational(j) * eps < hi) {
      if (++walked > kCellCap) throw Error(ErrorKind::cap_exceeded, "cell walk too long");
      cells.insert(j);
      ++j;
    }
  }
  return Integer(static_cast<unsigned long>(cells.size()));
}

Rational naive_mu_window(const MoranSpec& spec, int k, const Rational& a, const Rational& b) {
  const auto level = naive_star_level(spec, k);
  unsigned long hit = 0;
  for (const auto& [lo, hi] : level) {
    if (lo <= b && hi >= a) ++hit;
  }
  return Rational(hit) / Rational(static_cast<unsigned long>(level.size()));
}

OracleResult exhaustive_mu_sweep(const MoranSpec& spec, int k, double t, bool band) {
  const auto level = naive_star_level(spec, k + 1);
  std::vector<Rational> pts;
  for (const auto& [lo, hi] : level) {
    pts.push_back(lo);
    pts.push_back(hi);
  }
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  if (pts.size() * (pts.size() - 1) / 2 > kPairCap) throw Error(ErrorKind::cap_exceeded, "too many endpoint pairs");

  const Rational small = level.front().second - level.front().first;
  const auto upper = naive_star_level(spec, k).front();
  const Rational big = upper.second - upper.first;
  const Rational unit = Rational(1) / Rational(static_cast<unsigned long>(level.size()));

  OracleResult out;
  out.method = band ? "endpoint-pairs/band" : "endpoint-pairs/all";
  out.value = -1;
  for (std::size_t j = pts.size(); j-- > 0;) {
    for (std::size_t i = 0; i < j; ++i) {
      const Rational& a = pts[i];
      const Rational& b = pts[j];
      const Rational len = b - a;
      if (band && (len < small || len >= big)) continue;
      ++out.size;
      unsigned long hit = 0;
      for (const auto& [lo, hi] : level) {
        if (lo <= b && hi >= a) ++hit;
      }
      const Rational mu = unit * Rational(hit);
      const double r = ratio(mu, len, t);
      const bool left = out.value == r && (a < out.witness.first || (a == out.witness.first && b < out.witness.second));
      if (r > out.value || left) {
        out.value = r;
        out.exact = mu;
        out.witness = {a, b};
      }
    }
  }
  if (out.value < 0) out.value = 0;
  return out;
}

double cantor3_dimension() { return std::log(2.0) / std::log(3.0); }

double dim1_binary_log_ratio(int k, double d) {
  // c_j = (1 - 4^{-j}) / 2
  double log_delta = 0;
  for (int j = 1; j <= k; ++j) log_delta += -std::log(2.0) + std::log1p(-std::pow(4.0, -j));
  return -k * std::log(2.0) - d * log_delta;
}

double cantor3_ratio_factor(double d) { return std::pow(3.0, d) / 2; }

}  // namespace moran::oracle
