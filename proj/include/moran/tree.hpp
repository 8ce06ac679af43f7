#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <utility>
#include <vector>

#include "moran/spec.hpp"

namespace moran {

using Address = std::vector<std::uint32_t>;

inline constexpr std::size_t kDefaultNodeBudget = std::size_t{1} << 21;

// A validated spec together with everything needed to place intervals:
// level constants, interior gap patterns, and child offsets per pattern key.
class Construction {
 public:
  Construction(MoranSpec spec, int depth);

  const MoranSpec& spec() const { return spec_; }
  int depth() const { return depth_; }
  const LevelParams& level(int k) const { return levels_.at(static_cast<std::size_t>(k)); }
  const std::vector<LevelParams>& levels() const { return levels_; }
  const GapTable& gap_table() const { return gaps_; }

  std::uint64_t keys_at(int k) const { return gaps_.keys_at(k); }
  const std::vector<Rational>& interior_gaps(int k, std::uint64_t key) const { return gaps_.gaps(k, key); }

  // lo(I_{sigma*l}) - lo(I_sigma) for a level-(k-1) parent with pattern key `key`, l in 1..n_k.
  const Rational& child_offset(int k, std::uint64_t key, unsigned long l) const;
  std::uint64_t child_key(int k, std::uint64_t key, unsigned long l) const {
    return spec_.gaps.child_key(key, level(k).n, l);
  }

  // eta_{sigma,0..n_k}: L_k, interior gaps, R_k.
  std::vector<Rational> node_gaps(int k, std::uint64_t key) const;

 private:
  MoranSpec spec_;
  int depth_;
  std::vector<LevelParams> levels_;
  GapTable gaps_;
  std::vector<std::vector<std::vector<Rational>>> offsets_;
};

struct Interval {
  Address address;
  Rational lo;
  Rational hi;

  bool operator==(const Interval&) const = default;
};

struct LevelSet {
  int level = 0;
  std::vector<Interval> intervals;
  // Per interval, eta_{sigma,0..n_{k+1}} toward the next level (only when requested).
  std::vector<std::vector<Rational>> gaps;

  bool operator==(const LevelSet& o) const { return level == o.level && intervals == o.intervals; }
};

struct LevelStats {
  int k = 0;
  Integer count;
  Rational delta;
  Rational total_length;
  Rational alpha_bar;
  Rational alpha_under;
  Rational slack;
};

// In-order walk of the level-k intervals. f(lo, hi, key, address).
template <class F>
void for_each_interval(const Construction& c, int k, F&& f) {
  Address addr;
  addr.reserve(static_cast<std::size_t>(k));
  auto rec = [&](auto& self, int j, const Rational& lo, std::uint64_t key) -> void {
    if (j == k) {
      f(lo, lo + c.level(j).delta, key, addr);
      return;
    }
    const unsigned long n = c.level(j + 1).n;
    for (unsigned long l = 1; l <= n; ++l) {
      addr.push_back(static_cast<std::uint32_t>(l));
      self(self, j + 1, lo + c.child_offset(j + 1, key, l), c.child_key(j + 1, key, l));
      addr.pop_back();
    }
  };
  rec(rec, 0, c.spec().lo, 0);
}

// Throws resource when N_k exceeds the budget.
LevelSet build_level(const Construction& c, int k, std::size_t budget = kDefaultNodeBudget,
                     bool with_gaps = false);
LevelSet build_level(const MoranSpec& spec, int k, std::size_t budget = kDefaultNodeBudget);

LevelStats level_stats(const Construction& c, int k);
LevelStats level_stats(const MoranSpec& spec, int k);

// One JSON object per line: {"level", "address", "lo", "hi"}.
void export_level(const LevelSet& set, std::ostream& out);
LevelSet import_level(std::istream& in);

// Columns k, N_k, delta_k, alpha_bar, alpha_under, e_k, l_Ek.
void write_stats_csv(const std::vector<LevelStats>& stats, std::ostream& out);

}  // namespace moran
