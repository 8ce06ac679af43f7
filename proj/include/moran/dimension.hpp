#pragma once

#include <utility>
#include <vector>

#include "moran/reconstruct.hpp"

namespace moran {

struct DimSeries {
  int depth = 0;
  std::vector<double> s;  // s[k-1] = log N_k / -log(delta*_k / |I_0|)
  int window_lo = 1;      // trailing window [max(1, K/2), K]
  int window_hi = 0;
  double tail_min = 0;

  double at(int k) const { return s.at(static_cast<std::size_t>(k) - 1); }
};

DimSeries dim_series(const StarState& state, int K);
DimSeries dim_formula_seq(const MoranSpec& spec, int K);

struct ConditionLevel {
  int k = 0;
  Rational gap_ratio;      // alpha_bar_k / alpha_under_k (0 when alpha_under_k = 0)
  Rational length_ratio;   // alpha_bar_k / delta_k
  Rational spread_ratio;   // n_k alpha_under_k / delta_{k-1}
};

struct ConditionCert {
  int depth = 0;
  bool a_applicable = false;
  Rational omega1;
  int omega1_witness = 0;
  Rational omega2;
  int omega2_witness = 0;
  bool c_applicable = false;
  Rational omega3;
  int omega3_witness = 0;
  std::vector<ConditionLevel> levels;
};

ConditionCert check_conditions(const Construction& c, int K);
ConditionCert check_conditions(const MoranSpec& spec, int K);

// Decreasing a returned constant by `shrink` (a positive rational) breaks the
// inequality at the witness level. Used to confirm certificates are tight.
bool certificate_tight(const ConditionCert& cert, const Rational& shrink);

// N_k (delta*_k / |I_0|)^t for k = 1..K.
std::vector<double> cover_sum(const StarState& state, double t, int K);

struct LineFit {
  double slope = 0;
  double intercept = 0;
};
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

struct BoxCount {
  std::vector<Rational> eps;
  std::vector<Integer> counts;
  LineFit fit;  // log N(eps) against log(1/eps)
};

// Cells [j eps, (j+1) eps) on a grid anchored at 0; intervals are treated as
// [lo, hi), so a cell counts when it overlaps an interval in positive length.
class BoxCounter {
 public:
  explicit BoxCounter(std::vector<Rational> eps);
  // Intervals must arrive sorted by lo, interiors disjoint.
  void feed(const Rational& lo, const Rational& hi);
  BoxCount result() const;

 private:
  std::vector<Rational> eps_;
  std::vector<Rational> inv_;
  std::vector<Integer> counts_;
  std::vector<Integer> last_;
  bool any_ = false;
};

BoxCount box_count(const std::vector<std::pair<Rational, Rational>>& intervals, const std::vector<Rational>& eps);
// Level-k intervals of the construction, streamed with subtree pruning.
BoxCount box_count(const Construction& c, int k, const std::vector<Rational>& eps, unsigned threads = 1);

// eps_j = base^{-j} for j = from..to.
std::vector<Rational> geometric_eps(const Rational& base, int from, int to);

}  // namespace moran
