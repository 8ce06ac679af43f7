#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "moran/numeric.hpp"

namespace moran {

// A sequence indexed by level k >= 1, evaluated exactly.
// 
//   constant        values = {v}
//   periodic        values = {v_1, ..., v_p}, repeating
//   explicit_prefix values = {v_1, ..., v_p}, undefined beyond p
//   table_function  a named closed form with rational parameters:
//                     affine_power(p, q, r):  p + q * r^k
//                     harmonic(p, q):         p / (k + q)
struct SequenceRule {
  enum class Kind { constant, periodic, explicit_prefix, table_function };

  Kind kind = Kind::constant;
  std::vector<Rational> values;
  std::string function;

  static SequenceRule constant(Rational v);
  static SequenceRule periodic(std::vector<Rational> v);
  static SequenceRule prefix(std::vector<Rational> v);
  static SequenceRule table(std::string name, std::vector<Rational> params);

  bool evaluable(int k) const;
  Rational at(int k) const;
};

// How interior gaps are laid out inside each parent. Boundary gaps are
// never generated here; they are always L_k on the left and R_k on the right.
// 
// Gap patterns are selected by a key derived from the parent's position:
// key(sigma) = rank(sigma) mod key_space(), where rank is the left-to-right
// index of sigma within its level. Uniform and weighted policies have a key
// space of 1 (gaps independent of sigma); seeded_random draws `pool`
// independent patterns per level.
struct GapPolicy {
  enum class Kind { uniform, weighted, seeded_random };

  Kind kind = Kind::uniform;
  std::vector<Rational> weights;  // weighted: applied cyclically to gaps 1..n-1
  std::uint64_t seed = 0;         // seeded_random
  std::uint32_t pool = 64;        // seeded_random

  static GapPolicy uniform();
  static GapPolicy weighted(std::vector<Rational> w);
  static GapPolicy seeded(std::uint64_t seed, std::uint32_t pool = 64);

  std::uint64_t key_space() const;
  bool sigma_independent() const { return key_space() == 1; }

  // Interior gaps eta_{sigma,1..n-1} for a level-k parent whose key is `key`.
  // They are nonnegative and sum exactly to `slack`.
  std::vector<Rational> interior_gaps(int k, unsigned long n, const Rational& slack,
                                      std::uint64_t key) const;

  // Key of child l (1-based) of a parent with key `parent_key` and n children.
  std::uint64_t child_key(std::uint64_t parent_key, unsigned long n, unsigned long l) const;
};

struct MoranSpec {
  std::string name;
  SequenceRule n, c, L, R;
  GapPolicy gaps;
  Rational lo{0};
  Rational hi{1};

  Rational length() const { return hi - lo; }

  unsigned long n_at(int k) const;
  Rational c_at(int k) const { return c.at(k); }
  Rational L_at(int k) const { return L.at(k); }
  Rational R_at(int k) const { return R.at(k); }
};

// Per-level constants of a spec. Index 0 holds the initial interval
// (n = 1, delta = |I_0|, no gaps).
struct LevelParams {
  int k = 0;
  unsigned long n = 1;
  Rational c{1};
  Rational L{0};
  Rational R{0};
  Rational delta;  // |I_0| * c_1 ... c_k
  Rational slack;  // e_k = delta_{k-1} - n_k delta_k - L_k - R_k
  Integer count{1};  // N_k = n_1 ... n_k
};

// Level table for k = 0..K. Throws not_evaluable (naming k), invalid_spec,
// or inconsistent on the first violation.
std::vector<LevelParams> level_table(const MoranSpec& spec, int K);

// e_k, exact. Throws inconsistent when negative.
Rational slack(const MoranSpec& spec, int k);

// Interior gap patterns for levels 1..K, one vector per distinct key in use.
class GapTable {
 public:
  GapTable(const MoranSpec& spec, const std::vector<LevelParams>& levels);

  int depth() const { return static_cast<int>(table_.size()) - 1; }
  // Number of keys used by parents at level k-1 that generate level k.
  std::uint64_t keys_at(int k) const { return table_.at(k).size(); }
  const std::vector<Rational>& gaps(int k, std::uint64_t key) const;

 private:
  std::vector<std::vector<std::vector<Rational>>> table_;
};

struct LevelCheck {
  int k = 0;
  unsigned long n = 0;
  Rational c, L, R, slack;
  bool n_ok = false;
  bool nc_ok = false;
  bool lr_ok = false;
  bool slack_ok = false;
  bool gaps_ok = false;

  bool ok() const { return n_ok && nc_ok && lr_ok && slack_ok && gaps_ok; }
};

struct ValidationReport {
  int depth = 0;
  std::vector<LevelCheck> levels;
  bool pass = false;
  std::optional<int> failed_level;
  std::string message;
};

ValidationReport validate_spec(const MoranSpec& spec, int K);

std::vector<std::string> preset_names();
MoranSpec preset(std::string_view name);
std::vector<MoranSpec> presets();

// Config schema (JSON):
//   { "name": "...",
//     "n": {"kind": "constant", "values": ["2"]},
//     "c": {"kind": "table-function", "function": "affine_power", "values": ["1/2","-1/2","1/4"]},
//     "L": {...}, "R": {...},
//     "gaps": {"kind": "uniform"} | {"kind": "weighted", "weights": ["1","2"]}
//           | {"kind": "seeded-random", "seed": 42, "pool": 64},
//     "interval": {"lo": "0/1", "hi": "1/1"} }
nlohmann::json to_json(const MoranSpec& spec);
MoranSpec spec_from_json(const nlohmann::json& j);
MoranSpec load_spec_file(const std::string& path);

}  // namespace moran
