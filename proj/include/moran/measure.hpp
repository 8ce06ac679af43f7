#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "moran/dimension.hpp"

namespace moran {

enum class Condition { A, B, C };

std::string_view to_string(Condition c);
Condition parse_condition(std::string_view s);

// mu(U) for U = [a, b]: star intervals of level k carry mass 1/N_k and a
// window collects every level-k star interval it meets (closed intersection).
Rational mu_window(const StarState& state, const Rational& a, const Rational& b, int k);

// Bound constant for the chosen condition. Throws inapplicable.
Rational frostman_constant(const ConditionCert& cert, Condition cond);

// Smallest k such that N_j (delta*_j / |I_0|)^t > 1 for every j in [k, depth].
// Throws regime when the last level already fails.
int frostman_k0(const StarState& state, double t);

enum class AuditMode { exhaustive, sampled };

struct AuditOptions {
  Condition condition = Condition::A;
  double t = 0.5;
  int k_min = 1;
  int k_max = 4;
  AuditMode mode = AuditMode::exhaustive;
  std::uint64_t seed = 1;
  std::size_t samples = 20000;
  std::size_t pair_cap = 1'000'000;
  unsigned threads = 1;
};

struct Window {
  Rational a;
  Rational b;
  int k = 0;
  Rational mu;
};

struct LevelAudit {
  int k = 0;
  std::size_t windows = 0;
  double worst_ratio = 0;
  std::optional<Window> witness;
};

struct WindowAudit {
  double t = 0;
  Condition condition = Condition::A;
  AuditMode mode = AuditMode::exhaustive;
  int k0 = 1;
  int k_first = 1;  // first audited level, max(k_min, k0)
  int k_last = 0;   // last audited level after the pair cap clamp
  Rational constant;
  double worst_ratio = 0;
  std::optional<Window> witness;
  std::vector<LevelAudit> levels;
  bool pass = false;
};

// Needs a star state of depth >= k_max + 1.
WindowAudit frostman_audit(const StarState& state, const ConditionCert& cert, const AuditOptions& opt);

}  // namespace moran
