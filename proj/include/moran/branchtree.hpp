#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "moran/measure.hpp"

namespace moran {

struct Schedule {
  Condition condition = Condition::A;
  Rational omega;       // omega_1 under A, omega_2 under B
  unsigned long M = 3;  // least integer > 2 omega_1, or > 2 (omega_2 + 1)
  int depth = 0;
  std::vector<unsigned> i;  // i[k], k = 1..depth; i[0] = 0
  std::vector<int> m;       // m[k] = i_1 + ... + i_k; m[0] = 0

  // 2 omega_1, or 2 (omega_2 + 1)
  Rational factor() const;
  // k with m_{k-1} < m <= m_k (0 for m = 0).
  int phase_of(int m) const;
  bool landing(int m) const { return m == this->m.at(static_cast<std::size_t>(phase_of(m))); }
};

Schedule choose_M(const ConditionCert& cert, const Construction& c, Condition cond);
Schedule choose_M(const MoranSpec& spec, Condition cond, int K);

struct ChildRef {
  std::uint32_t cls;
  Rational offset;  // child lo - parent lo
};

// All branches of one level that share a geometry. A landed class is a
// single star interval of level k with pattern key `key`; an intermediate
// class is the hull of star intervals first+1 .. first+count of a level-(k-1)
// parent whose key is `key`.
struct BranchClass {
  bool landed = false;
  int k = 0;
  std::uint64_t key = 0;
  unsigned long first = 0;
  unsigned long count = 1;
  Rational length;
  Integer multiplicity;
  unsigned long psi = 0;  // star intervals of the next landing level inside the branch
  std::vector<ChildRef> children;
};

struct BranchLevel {
  int m = 0;
  int k = 0;  // phase
  bool landing = false;
  std::vector<BranchClass> classes;
};

class BranchTree {
 public:
  BranchTree(Schedule schedule, Rational root_lo, std::vector<BranchLevel> levels)
      : schedule_(std::move(schedule)), root_lo_(std::move(root_lo)), levels_(std::move(levels)) {}

  const Schedule& schedule() const { return schedule_; }
  int max_m() const { return static_cast<int>(levels_.size()) - 1; }
  const BranchLevel& level(int m) const { return levels_.at(static_cast<std::size_t>(m)); }
  const Rational& root_lo() const { return root_lo_; }
  Integer count(int m) const;

  // In-order walk of the branches of T_m. f(lo, hi, class index).
  template <class F>
  void for_each_branch(int m, F&& f) const {
    auto rec = [&](auto& self, int j, std::uint32_t cls, const Rational& lo) -> void {
      const BranchClass& c = levels_[static_cast<std::size_t>(j)].classes[cls];
      if (j == m) {
        f(lo, lo + c.length, cls);
        return;
      }
      for (const auto& ch : c.children) self(self, j + 1, ch.cls, lo + ch.offset);
    };
    rec(rec, 0, 0, root_lo_);
  }

 private:
  Schedule schedule_;
  Rational root_lo_;
  std::vector<BranchLevel> levels_;
};

// Needs the star state through the phase of m_max.
BranchTree build_T(const StarState& state, const Schedule& schedule, int m_max);

struct BranchStats {
  int m = 0;
  Integer count;
  Rational max_len;
  Rational min_len;
  Rational total_length;
  unsigned long psi_max = 0;
  unsigned long psi_min = 0;
};

BranchStats branch_stats(const BranchTree& tree, int m);

struct BranchCheck {
  int m = 0;
  int k = 0;
  bool landing = false;
  unsigned long max_children = 0;  // most branches of T_m inside one branch of T_{m-1}
  bool children_ok = false;        // <= M, or <= M^2 on a landing step
  bool spread_ok = false;          // psi_max <= psi_min + 1
  bool ratio_ok = false;           // max |I| <= factor * min |I|
  bool length_ok = false;          // landing: l = N*_k delta*_k; else the lower/upper sandwich
  bool monotone = false;           // l(T_m) <= l(T_{m-1})
  bool star_match = false;         // landing: every branch is a star interval of level k

  bool ok() const { return children_ok && spread_ok && ratio_ok && length_ok && monotone && star_match; }
};

// Checks for m = 1..max_m.
std::vector<BranchCheck> check_branches(const BranchTree& tree, const StarState& state);

// {m, index, lo, hi, psi} per line for m = 0..max_m. Throws resource over budget.
void export_branches(const BranchTree& tree, std::ostream& out, std::size_t budget = kDefaultNodeBudget);
// Columns k, i_k, m_k, M.
void write_schedule_csv(const Schedule& s, std::ostream& out);
// Columns m, count, max_len, min_len, l_Tm, psi_max, psi_min.
void write_branch_stats_csv(const BranchTree& tree, std::ostream& out);

}  // namespace moran
