#include "moran/measure.hpp"

#include <algorithm>

#include "moran/error.hpp"
#include "moran/parallel.hpp"

namespace moran {

std::string_view to_string(Condition c) {
  switch (c) {
    case Condition::A: return "A";
    case Condition::B: return "B";
    case Condition::C: return "C";
  }
  return "A";
}

Condition parse_condition(std::string_view s) {
  if (s == "A" || s == "a") return Condition::A;
  if (s == "B" || s == "b") return Condition::B;
  if (s == "C" || s == "c") return Condition::C;
  throw Error(ErrorKind::parse, "condition must be A, B or C");
}

Rational mu_window(const StarState& state, const Rational& a, const Rational& b, int k) {
  if (a > b) throw Error(ErrorKind::domain, "window with a > b");
  if (k < 0 || k > state.depth()) throw Error(ErrorKind::precondition, "window depth outside star depth");
  const Construction& c = state.base();
  Rational total = 0;
  auto rec = [&](auto& self, int j, const Rational& lo, std::uint64_t key) -> void {
    const Rational slo = state.star_lo(j, lo);
    const Rational shi = state.star_hi(j, lo);
    if (shi < a || slo > b) return;
    if (j == k || (a <= slo && shi <= b)) {
      total += Rational(1) / Rational(c.level(j).count);
      return;
    }
    const unsigned long n = c.level(j + 1).n;
    for (unsigned long l = 1; l <= n; ++l) {
      self(self, j + 1, lo + c.child_offset(j + 1, key, l), c.child_key(j + 1, key, l));
    }
  };
  rec(rec, 0, c.spec().lo, 0);
  return total;
}

Rational frostman_constant(const ConditionCert& cert, Condition cond) {
  switch (cond) {
    case Condition::A:
      if (!cert.a_applicable) throw Error(ErrorKind::inapplicable, "condition A needs positive interior gaps");
      return 32 * cert.omega1;
    case Condition::B:
      return 32 * (4 * cert.omega2 + 1);
    case Condition::C: {
      if (!cert.c_applicable) throw Error(ErrorKind::inapplicable, "condition C needs omega3 > 0");
      Rational inv = 1 / cert.omega3;
      return 8 * (inv > 1 ? inv : Rational(1));
    }
  }
  return 0;
}

int frostman_k0(const StarState& state, double t) {
  const Rational len0 = state.base().spec().length();
  BigFloat tt(t, kLogPrecision);
  auto holds = [&](int k) {
    const StarLevel& lv = state.level(k);
    BigFloat lg = log_big(lv.delta / len0);
    mpfr_mul(lg.get(), lg.get(), tt.get(), MPFR_RNDN);
    BigFloat ln = log_big(Rational(lv.count));
    mpfr_add(lg.get(), lg.get(), ln.get(), MPFR_RNDN);
    return lg.sign() > 0;
  };
  int k = state.depth();
  if (!holds(k)) {
    throw Error(ErrorKind::regime, "N_k (delta*_k)^t <= 1 at the deepest level; t is not below the formula value")
        .at_level(k);
  }
  while (k > 1 && holds(k - 1)) --k;
  return k;
}

namespace {

struct Best {
  double ratio = -1;
  std::optional<Window> w;
};

// Leftmost window wins ties.
void offer(Best& best, double ratio, const Window& w) {
  if (ratio > best.ratio) {
    best.ratio = ratio;
    best.w = w;
  } else if (ratio == best.ratio && best.w && (w.a < best.w->a || (w.a == best.w->a && w.b < best.w->b))) {
    best.w = w;
  }
}

LevelAudit exhaustive_level(const StarState& state, int k, double t, unsigned threads) {
  const Construction& c = state.base();
  const int d = k + 1;
  std::vector<Rational> los, his;
  for_each_interval(c, d, [&](const Rational& lo, const Rational&, std::uint64_t, const Address&) {
    los.push_back(state.star_lo(d, lo));
    his.push_back(state.star_hi(d, lo));
  });
  std::vector<Rational> pts;
  pts.reserve(2 * los.size());
  for (std::size_t i = 0; i < los.size(); ++i) {
    pts.push_back(los[i]);
    pts.push_back(his[i]);
  }
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());

  // For a window [a, b]: count = #{lo_i <= b} - #{hi_i < a}.
  const std::size_t P = pts.size();
  std::vector<std::size_t> lo_le(P), hi_lt(P);
  for (std::size_t i = 0; i < P; ++i) {
    lo_le[i] = static_cast<std::size_t>(std::upper_bound(los.begin(), los.end(), pts[i]) - los.begin());
    hi_lt[i] = static_cast<std::size_t>(std::lower_bound(his.begin(), his.end(), pts[i]) - his.begin());
  }
  const Rational min_len = state.level(d).delta;
  const Rational max_len = state.level(k).delta;
  const Rational unit = Rational(1) / Rational(c.level(d).count);

  const auto chunks = make_chunks(P, threads);
  std::vector<Best> bests(chunks.size());
  std::vector<std::size_t> seen(chunks.size(), 0);
  parallel_chunks(P, threads, [&](const Chunk& ch) {
    Best& best = bests[ch.index];
    for (std::size_t i = ch.begin; i < ch.end; ++i) {
      for (std::size_t j = i + 1; j < P; ++j) {
        const Rational len = pts[j] - pts[i];
        if (len < min_len) continue;
        if (len >= max_len) break;
        ++seen[ch.index];
        const Rational mu = unit * Rational(static_cast<unsigned long>(lo_le[j] - hi_lt[i]));
        offer(best, mass_ratio(mu, len, t), Window{pts[i], pts[j], k, mu});
      }
    }
  });
  LevelAudit out;
  out.k = k;
  Best total;
  for (std::size_t i = 0; i < bests.size(); ++i) {
    out.windows += seen[i];
    if (bests[i].w) offer(total, bests[i].ratio, *bests[i].w);
  }
  out.worst_ratio = std::max(0.0, total.ratio);
  out.witness = total.w;
  return out;
}

LevelAudit sampled_level(const StarState& state, int k, const AuditOptions& opt) {
  const Construction& c = state.base();
  const int d = k + 1;
  const Rational hull_lo = state.star_lo(0, c.spec().lo);
  const Rational hull_len = state.level(0).delta;
  const Rational min_len = state.level(d).delta;
  const Rational span = state.level(k).delta - min_len;

  const auto chunks = make_chunks(opt.samples, opt.threads);
  std::vector<Best> bests(chunks.size());
  parallel_chunks(opt.samples, opt.threads, [&](const Chunk& ch) {
    for (std::size_t i = ch.begin; i < ch.end; ++i) {
      SplitMix64 rng(stream_key(opt.seed, static_cast<std::uint64_t>(k), i));
      const Rational len = min_len + span * rational_from_double(rng.uniform());
      const Rational a = hull_lo - len + (hull_len + len) * rational_from_double(rng.uniform());
      const Rational b = a + len;
      const Rational mu = mu_window(state, a, b, d);
      offer(bests[ch.index], mass_ratio(mu, len, opt.t), Window{a, b, k, mu});
    }
  });
  LevelAudit out;
  out.k = k;
  out.windows = opt.samples;
  Best total;
  for (const auto& b : bests) {
    if (b.w) offer(total, b.ratio, *b.w);
  }
  out.worst_ratio = std::max(0.0, total.ratio);
  out.witness = total.w;
  return out;
}

}  // namespace

WindowAudit frostman_audit(const StarState& state, const ConditionCert& cert, const AuditOptions& opt) {
  if (opt.k_min < 1 || opt.k_max < opt.k_min) throw Error(ErrorKind::precondition, "audit needs 1 <= k_min <= k_max");
  if (state.depth() < opt.k_max + 1) throw Error(ErrorKind::precondition, "audit needs star depth k_max + 1");
  if (!(opt.t > 0)) throw Error(ErrorKind::precondition, "audit exponent must be positive");

  const DimSeries dims = dim_series(state, state.depth());
  if (opt.t >= dims.tail_min) {
    throw Error(ErrorKind::regime, "t = " + format_double(opt.t) + " is not below the trailing minimum " +
                                       format_double(dims.tail_min) + " of the formula series");
  }

  WindowAudit out;
  out.t = opt.t;
  out.condition = opt.condition;
  out.mode = opt.mode;
  out.constant = frostman_constant(cert, opt.condition);
  out.k0 = frostman_k0(state, opt.t);
  out.k_first = std::max(opt.k_min, out.k0);
  out.k_last = opt.k_max;
  if (opt.mode == AuditMode::exhaustive) {
    // Keep the quadratic endpoint sweep within the pair cap.
    while (out.k_last >= out.k_first) {
      const Integer pts = 2 * state.level(out.k_last + 1).count;
      if (pts * pts <= Integer(static_cast<unsigned long>(2 * opt.pair_cap))) break;
      --out.k_last;
    }
  }
  Best total;
  for (int k = out.k_first; k <= out.k_last; ++k) {
    LevelAudit lv = opt.mode == AuditMode::exhaustive ? exhaustive_level(state, k, opt.t, opt.threads)
                                                      : sampled_level(state, k, opt);
    if (lv.witness) offer(total, lv.worst_ratio, *lv.witness);
    out.levels.push_back(std::move(lv));
  }
  out.worst_ratio = std::max(0.0, total.ratio);
  out.witness = total.w;
  out.pass = BigFloat(out.worst_ratio, kDefaultPrecision).compare(out.constant) <= 0;
  return out;
}

}  // namespace moran
