#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "moran/tree.hpp"

namespace moran {

// Trimmed ("star") quantities for one level. Gap fields describe the star
// children of level k inside a level-(k-1) star parent, so they are only
// meaningful for k >= 1.
struct StarLevel {
  int k = 0;
  Integer count;             // N*_k = N_k
  Rational delta;            // delta*_k = delta_k - L_{k+1} - R_{k+1}
  Rational c;                // c*_k = delta*_k / delta*_{k-1}
  Rational L;                // L*_k = L_{k+1}
  Rational R;                // R*_k = R_{k+1}
  Rational slack;            // e*_k, measured from star endpoints
  Rational alpha_bar;        // max interior star gap, measured
  Rational alpha_under;      // min interior star gap, measured
  Rational boundary_left;    // measured left star gap, expected L*_k
  Rational boundary_right;   // measured right star gap, expected R*_k
  Rational total_length;     // l(E*_k)
};

class StarState {
 public:
  StarState(Construction base, int depth);

  int depth() const { return depth_; }
  const Construction& base() const { return base_; }
  const StarLevel& level(int k) const { return levels_.at(static_cast<std::size_t>(k)); }

  // Star interval of the level-k basic interval whose left end is `lo`.
  Rational star_lo(int k, const Rational& lo) const { return lo + base_.level(k + 1).L; }
  Rational star_hi(int k, const Rational& lo) const { return lo + base_.level(k).delta - base_.level(k + 1).R; }

  // lo(I*_{sigma*l}) - lo(I*_sigma) for a level-(k-1) parent with key `key`.
  Rational star_child_offset(int k, std::uint64_t key, unsigned long l) const {
    return base_.child_offset(k, key, l) + base_.level(k + 1).L - base_.level(k).L;
  }

 private:
  Construction base_;
  int depth_;
  std::vector<StarLevel> levels_;
};

struct StarStats {
  Rational alpha_bar;
  Rational alpha_under;
  Rational slack;
  Rational delta;
  Integer count;
  Rational total_length;
};

// Needs the spec valid through K+1 (delta*_K references L_{K+1}, R_{K+1}).
// Throws degenerate when some delta*_k <= 0.
StarState first_reconstruct(const MoranSpec& spec, int K);

StarStats star_stats(const StarState& state, int k);

// The star level set: every level-k interval trimmed by L_{k+1} and R_{k+1}.
LevelSet star_level(const StarState& state, int k, std::size_t budget = kDefaultNodeBudget);

struct StarCheck {
  int k = 0;
  bool delta_identity = false;      // delta*_k == delta_k - L_{k+1} - R_{k+1}
  bool gap_shift = false;           // eta*_l == eta_l + L_{k+1} + R_{k+1}, every key and l
  bool boundary = false;            // eta*_0 == L_{k+1}, eta*_n == R_{k+1}
  bool slack_identity = false;      // e*_k == e_k + (n_k - 1)(L_{k+1} + R_{k+1})
  bool alpha_identity = false;      // alpha*_k == alpha_k + L_{k+1} + R_{k+1}, both extremes
  bool alpha_dominates = false;     // alpha_under_k <= alpha_under*_k, alpha_bar_k <= alpha_bar*_k
  bool boundary_dominated = false;  // L*_k + R*_k <= alpha_under*_k <= alpha_bar*_k
  bool consistency = false;         // sum of star gaps + n_k delta*_k == delta*_{k-1}
  bool nesting = false;             // E_{k} within E*_{k-1} within E_{k-1}, per key pattern

  bool ok() const {
    return delta_identity && gap_shift && boundary && slack_identity && alpha_identity && alpha_dominates &&
           boundary_dominated && consistency && nesting;
  }
};

// Identity checks for k = 1..depth, all exact.
std::vector<StarCheck> check_star_identities(const StarState& state);

// Columns k, delta_star, alpha_bar_star, alpha_under_star, e_star, L_star, R_star.
void write_star_csv(const StarState& state, std::ostream& out);

}  // namespace moran
