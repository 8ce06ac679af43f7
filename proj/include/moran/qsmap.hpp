#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "moran/branchtree.hpp"

namespace moran {

enum class MapKind { identity, affine, power, pl };

struct MapPart {
  MapKind kind = MapKind::identity;
  Rational a = 1;  // affine slope, or the power exponent
  Rational b = 0;  // affine shift
  std::vector<std::pair<Rational, Rational>> knots;  // pl breakpoints (x, y)
};

// Parts are applied first to last: f = parts.back() o ... o parts.front().
struct QsMapSpec {
  std::vector<MapPart> parts;
};

// "identity", "affine:a,b", "power:a", "pl:x0:y0,x1:y1,...", joined by '+'
// for a composition, e.g. "power:2+affine:3,-1".
QsMapSpec parse_map(std::string_view text);
std::string describe(const QsMapSpec& f);
nlohmann::json to_json(const QsMapSpec& f);
QsMapSpec map_from_json(const nlohmann::json& j);

// Throws invalid_spec unless every part is strictly increasing.
void validate_map(const QsMapSpec& f);
bool is_affine(const QsMapSpec& f);
// Rational points map to rational points (identity, affine, pl, integer powers).
bool is_exact(const QsMapSpec& f);
std::pair<Rational, Rational> affine_coeffs(const QsMapSpec& f);

struct Enclosure {
  Rational lo;
  Rational hi;
};

// Outward enclosure of f(x) at `precision` bits; lo == hi when exact.
Enclosure eval(const QsMapSpec& f, const Rational& x, mpfr_prec_t precision = kDefaultPrecision);
Rational exact_image(const QsMapSpec& f, const Rational& x);

// Candidate distortion modulus: C t (linear) or C max(t^a, t^(1/a)) (power).
struct Eta {
  bool linear = true;
  double C = 1;
  double a = 1;
  double operator()(double t) const;
  std::string describe() const;
};

// Linear families get their exact modulus; power-like maps get C = 1 and
// should be fitted with fit_eta.
Eta default_eta(const QsMapSpec& f);

struct TripleAudit {
  double worst = 0;
  std::size_t samples = 0;
  std::size_t skipped = 0;  // coincident points
  Rational a, b, x;         // worst triple
};

TripleAudit qs_triple_audit(const QsMapSpec& f, const Rational& lo, const Rational& hi, std::size_t samples,
                            std::uint64_t seed, const Eta& eta, mpfr_prec_t precision = kDefaultPrecision);
// Dense grid sweep of the triple quotient; returns eta with C scaled by margin.
Eta fit_eta(const QsMapSpec& f, const Rational& lo, const Rational& hi, unsigned grid, double margin,
            mpfr_prec_t precision = kDefaultPrecision);

inline constexpr std::size_t kDefaultImageBudget = std::size_t{1} << 17;

struct ImageNode {
  Rational length;
  Integer multiplicity;
  std::vector<ChildRef> children;
};

struct ImageTree {
  Rational root_lo;
  bool compressed = false;  // affine map: nodes are the branch classes
  bool exact = false;       // endpoints are exact images
  mpfr_prec_t precision = kDefaultPrecision;
  int requested = 0;        // depth asked for
  std::vector<std::vector<ImageNode>> levels;

  int depth() const { return static_cast<int>(levels.size()) - 1; }
  Integer count(int m) const;

  template <class F>
  void for_each_branch(int m, F&& f) const {
    auto rec = [&](auto& self, int j, std::uint32_t node, const Rational& lo) -> void {
      const ImageNode& n = levels[static_cast<std::size_t>(j)][node];
      if (j == m) {
        f(lo, lo + n.length, node);
        return;
      }
      for (const auto& ch : n.children) self(self, j + 1, ch.cls, lo + ch.offset);
    };
    rec(rec, 0, 0, root_lo);
  }
};

// f(T_m) for m <= depth. Non-affine maps are expanded branch by branch up to
// the largest depth whose node count fits `budget`.
ImageTree image_tree(const QsMapSpec& f, const BranchTree& tree, int depth, mpfr_prec_t precision = kDefaultPrecision,
                     std::size_t budget = kDefaultImageBudget);

struct ImageMeasure {
  double d = 0;
  // share[m][node][i]: fraction of the node mass given to child i.
  std::vector<std::vector<std::vector<Rational>>> share;
  std::vector<std::vector<Rational>> max_mass;  // over the copies of a node
  std::vector<std::vector<Rational>> min_mass;
  std::vector<std::vector<Rational>> total;     // summed over copies

  Rational level_total(int m) const;
};

ImageMeasure build_mu_d(const ImageTree& image, double d, mpfr_prec_t precision = kDefaultPrecision);

struct RatioSeries {
  std::vector<double> max_ratio;  // index m = 0..K
  double growth_rate = 0;         // slope of log max_ratio against m
  double min_step = 0;            // extremes of max_ratio[m+1] / max_ratio[m]
  double max_step = 0;
};

RatioSeries mass_ratio_series(const ImageTree& image, const ImageMeasure& mu, int K);

// mu_d of the closed ball [x - r, x + r], from the deepest built level.
Rational mu_d_ball(const ImageTree& image, const ImageMeasure& mu, const Rational& x, const Rational& r);

struct BallAudit {
  Rational x;
  std::vector<Rational> r;
  std::vector<Rational> mass;
  std::vector<double> ratio;  // mass / r^d
  double sup_ratio = 0;
  bool clamped = false;       // some r exceeded the hull length
};

BallAudit ball_audit(const ImageTree& image, const ImageMeasure& mu, const Rational& x,
                     const std::vector<Rational>& r_grid);
// Left endpoint of a deepest branch picked by a seeded descent.
Rational pick_point(const ImageTree& image, std::uint64_t seed);

struct QsStatsRow {
  int m = 0;
  std::optional<Rational> beta, theta, chi, kappa;
  std::optional<Rational> lambda_star, lambda_under, gamma_star, gamma_under;
  Rational l_Tm;
};

struct QsStats {
  unsigned long M = 3;
  std::vector<QsStatsRow> rows;  // m = 0..max_m
};

QsStats stats_series(const BranchTree& tree, const StarState& state);

// Rows where 1 - (M^2 + 1) beta_m > 0 and Theta_m falls below it.
std::vector<int> theta_bound_violations(const QsStats& stats);

struct SparseCounts {
  std::vector<std::size_t> V;  // V[m] = #{i < m : w_i < eps}, m = 0..size
  std::vector<double> cesaro;  // (1/m) sum_{i<m} w_i, cesaro[0] = 0
  double fraction(std::size_t m) const { return m == 0 ? 1.0 : static_cast<double>(V[m]) / static_cast<double>(m); }
};

SparseCounts sparse_counts(const std::vector<double>& w, double eps);

struct CountRow {
  int m = 0;
  std::size_t H = 0;   // #{0 <= j < m : beta_j < eps}
  std::size_t R = 0;   // #{1 <= j <= m : chi_j < alpha}
  std::size_t PR = 0;  // #{1 <= j <= m : beta_{j-1} < eps and chi_j < alpha}
};

std::vector<CountRow> stats_counts(const QsStats& stats, double eps, double alpha);

struct Trend {
  int m = 0;
  double beta_avg = 0;    // (1/m) sum beta_j
  double log_length = 0;  // -(1/m) log_M l(T_m)
  double log_theta = 0;   // -(1/m) sum log Theta_j
  double chi_miss = 0;    // 1 - #S(m, alpha) / m
};

// Needs m <= max_m.
Trend trend_at(const QsStats& stats, int m, double alpha);

struct SandwichFit {
  double p = 0;
  double q = 0;
  double lambda = 0;
  double k_rho = 0;  // max |f(rho I)| / |f(I)|
  double rho = 2;
  std::size_t pairs = 0;
};

SandwichFit sandwich_audit(const QsMapSpec& f, const Rational& lo, const Rational& hi, std::size_t pairs,
                           std::uint64_t seed, double rho = 2, mpfr_prec_t precision = kDefaultPrecision);

void write_qs_stats_csv(const QsStats& stats, std::ostream& out);
void write_ratio_csv(const RatioSeries& s, std::ostream& out);

}  // namespace moran
