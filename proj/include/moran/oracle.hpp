#pragma once

// Slow brute-force counterparts used by the tests. Only the spec module is
// shared with the main code; every traversal here is written from scratch.

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "moran/spec.hpp"

namespace moran::oracle {

using Span = std::pair<Rational, Rational>;

struct OracleResult {
  double value = 0;
  Rational exact;         // exact companion (mass of the worst window, count, ...)
  std::string method;
  std::size_t size = 0;   // intervals or windows examined
  Span witness;
};

inline constexpr std::size_t kIntervalCap = 100'000;
inline constexpr std::size_t kPairCap = 1'000'000;
inline constexpr std::size_t kCellCap = 20'000'000;

// Level-k basic intervals, left to right.
std::vector<Span> naive_level(const MoranSpec& spec, int k);
// Level-k trimmed intervals [lo + L_{k+1}, hi - R_{k+1}].
std::vector<Span> naive_star_level(const MoranSpec& spec, int k);

// Cells [j eps, (j+1) eps) meeting some [lo, hi) in a set of positive length.
Integer naive_box_count(const std::vector<Span>& intervals, const Rational& eps);

// Star intervals of level k meeting [a, b], times 1/N_k.
Rational naive_mu_window(const MoranSpec& spec, int k, const Rational& a, const Rational& b);

// Worst mu(U)/|U|^t over windows spanned by distinct endpoints of the
// level-(k+1) star intervals. With `band` only delta*_{k+1} <= |U| < delta*_k
// is kept; without it every pair counts.
OracleResult exhaustive_mu_sweep(const MoranSpec& spec, int k, double t, bool band = true);

double cantor3_dimension();
// log of 2^{-k} / delta_k^d for the dim1_binary preset.
double dim1_binary_log_ratio(int k, double d);
// Per-level growth 3^d / 2 of the identity-map ratio on cantor3.
double cantor3_ratio_factor(double d);

}  // namespace moran::oracle
