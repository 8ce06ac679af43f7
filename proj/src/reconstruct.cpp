#include "moran/reconstruct.hpp"

#include <ostream>

#include "moran/error.hpp"

namespace moran {

StarState::StarState(Construction base, int depth) : base_(std::move(base)), depth_(depth) {
  if (base_.depth() < depth + 1) throw Error(ErrorKind::precondition, "star state needs one extra level");
  levels_.resize(static_cast<std::size_t>(depth) + 1);
  for (int k = 0; k <= depth; ++k) {
    const LevelParams& p = base_.level(k);
    const LevelParams& next = base_.level(k + 1);
    StarLevel& s = levels_[static_cast<std::size_t>(k)];
    s.k = k;
    s.count = p.count;
    s.delta = p.delta - next.L - next.R;
    if (sgn(s.delta) <= 0) {
      throw Error(ErrorKind::degenerate,
                  "trimmed length delta*_" + std::to_string(k) + " = " + to_string(s.delta) + " is not positive")
          .at_level(k);
    }
    s.L = next.L;
    s.R = next.R;
    s.total_length = Rational(s.count) * s.delta;
    if (k == 0) {
      s.c = 1;
      continue;
    }
    const StarLevel& prev = levels_[static_cast<std::size_t>(k) - 1];
    s.c = s.delta / prev.delta;

    // Measure the star gaps from trimmed endpoints, one pattern per key.
    bool first = true;
    for (std::uint64_t key = 0; key < base_.keys_at(k); ++key) {
      Rational sum = 0;
      Rational prev_hi;
      for (unsigned long l = 1; l <= p.n; ++l) {
        const Rational lo = star_child_offset(k, key, l);
        const Rational hi = lo + s.delta;
        if (l == 1) {
          if (key == 0) s.boundary_left = lo;
        } else {
          const Rational gap = lo - prev_hi;
          sum += gap;
          if (first || gap > s.alpha_bar) s.alpha_bar = gap;
          if (first || gap < s.alpha_under) s.alpha_under = gap;
          first = false;
        }
        prev_hi = hi;
      }
      if (key == 0) {
        s.slack = sum;
        s.boundary_right = prev.delta - prev_hi;
      }
    }
  }
}

StarState first_reconstruct(const MoranSpec& spec, int K) {
  if (K < 0) throw Error(ErrorKind::precondition, "depth must be >= 0");
  return StarState(Construction(spec, K + 1), K);
}

StarStats star_stats(const StarState& state, int k) {
  if (k < 0 || k > state.depth()) throw Error(ErrorKind::precondition, "level outside star depth");
  const StarLevel& s = state.level(k);
  return {s.alpha_bar, s.alpha_under, s.slack, s.delta, s.count, s.total_length};
}

LevelSet star_level(const StarState& state, int k, std::size_t budget) {
  LevelSet base = build_level(state.base(), k, budget);
  for (auto& iv : base.intervals) {
    const Rational lo = iv.lo;
    iv.lo = state.star_lo(k, lo);
    iv.hi = state.star_hi(k, lo);
  }
  return base;
}

std::vector<StarCheck> check_star_identities(const StarState& state) {
  const Construction& c = state.base();
  std::vector<StarCheck> out;
  for (int k = 1; k <= state.depth(); ++k) {
    const LevelParams& p = c.level(k);
    const LevelParams& next = c.level(k + 1);
    const StarLevel& s = state.level(k);
    const StarLevel& sp = state.level(k - 1);
    const Rational shift = next.L + next.R;
    const LevelStats base = level_stats(c, k);

    StarCheck chk;
    chk.k = k;
    chk.delta_identity = s.delta == p.delta - next.L - next.R;
    chk.gap_shift = true;
    chk.boundary = true;
    chk.consistency = true;
    chk.nesting = true;
    for (std::uint64_t key = 0; key < c.keys_at(k); ++key) {
      const auto& eta = c.interior_gaps(k, key);
      Rational sum = 0;
      for (unsigned long l = 1; l <= p.n; ++l) {
        const Rational lo = state.star_child_offset(k, key, l);
        const Rational hi = lo + s.delta;
        if (l == 1 && lo != next.L) chk.boundary = false;
        if (l == p.n && sp.delta - hi != next.R) chk.boundary = false;
        if (l < p.n) {
          const Rational gap = state.star_child_offset(k, key, l + 1) - hi;
          if (gap != eta[l - 1] + shift) chk.gap_shift = false;
          sum += gap;
        }
        // Child basic interval I_{sigma*l} relative to lo(I*_sigma).
        const Rational base_lo = c.child_offset(k, key, l) - p.L;
        if (base_lo < 0 || base_lo + p.delta > sp.delta) chk.nesting = false;
      }
      if (sum + next.L + next.R + Rational(p.n) * s.delta != sp.delta) chk.consistency = false;
      if (sum != s.slack) chk.consistency = false;
    }
    // I*_sigma within I_sigma.
    if (sgn(sp.L) < 0 || sgn(sp.R) < 0) chk.nesting = false;

    chk.slack_identity = s.slack == p.slack + Rational(p.n - 1) * shift;
    chk.alpha_identity = s.alpha_bar == base.alpha_bar + shift && s.alpha_under == base.alpha_under + shift;
    chk.alpha_dominates = base.alpha_under <= s.alpha_under && base.alpha_bar <= s.alpha_bar;
    chk.boundary_dominated = s.L + s.R <= s.alpha_under && s.alpha_under <= s.alpha_bar;
    out.push_back(chk);
  }
  return out;
}

void write_star_csv(const StarState& state, std::ostream& out) {
  out << "k,delta_star,alpha_bar_star,alpha_under_star,e_star,L_star,R_star\n";
  for (int k = 0; k <= state.depth(); ++k) {
    const StarLevel& s = state.level(k);
    out << k << ',' << to_string(s.delta) << ',';
    if (k == 0) {
      out << ",,,";
    } else {
      out << to_string(s.alpha_bar) << ',' << to_string(s.alpha_under) << ',' << to_string(s.slack) << ',';
    }
    out << to_string(s.L) << ',' << to_string(s.R) << '\n';
  }
}

}  // namespace moran
