#include "moran/branchtree.hpp"

#include <algorithm>
#include <map>
#include <ostream>
#include <tuple>

#include <json.hpp>

#include "moran/error.hpp"

namespace moran {

Rational Schedule::factor() const {
  if (condition == Condition::A) return Rational(2 * omega);
  return Rational(2 * (omega + 1));
}

int Schedule::phase_of(int mm) const {
  if (mm <= 0) return 0;
  for (int k = 1; k <= depth; ++k) {
    if (mm <= m[static_cast<std::size_t>(k)]) return k;
  }
  throw Error(ErrorKind::precondition, "m = " + std::to_string(mm) + " is beyond the schedule");
}

Schedule choose_M(const ConditionCert& cert, const Construction& c, Condition cond) {
  Schedule s;
  s.condition = cond;
  s.depth = cert.depth;
  if (cond == Condition::A) {
    if (!cert.a_applicable) throw Error(ErrorKind::inapplicable, "condition A is not certified (a zero interior gap)");
    s.omega = cert.omega1;
    s.M = floor_of(2 * s.omega).get_ui() + 1;
  } else if (cond == Condition::B) {
    s.omega = cert.omega2;
    s.M = floor_of(2 * (s.omega + 1)).get_ui() + 1;
  } else {
    throw Error(ErrorKind::inapplicable, "the branch construction needs condition A or B");
  }
  s.i.assign(static_cast<std::size_t>(s.depth) + 1, 0);
  s.m.assign(static_cast<std::size_t>(s.depth) + 1, 0);
  for (int k = 1; k <= s.depth; ++k) {
    const unsigned long n = c.level(k).n;
    unsigned i = 1;
    if (n >= s.M) {
      unsigned long long p = s.M;
      i = 0;
      while (p <= n) {
        ++i;
        if (p > n / s.M) break;
        p *= s.M;
      }
    }
    s.i[static_cast<std::size_t>(k)] = i;
    s.m[static_cast<std::size_t>(k)] = s.m[static_cast<std::size_t>(k) - 1] + static_cast<int>(i);
  }
  return s;
}

Schedule choose_M(const MoranSpec& spec, Condition cond, int K) {
  Construction c(spec, K);
  return choose_M(check_conditions(c, K), c, cond);
}

Integer BranchTree::count(int m) const {
  Integer n = 0;
  for (const auto& c : level(m).classes) n += c.multiplicity;
  return n;
}

namespace {

using ClassKey = std::tuple<bool, int, std::uint64_t, unsigned long, unsigned long>;

struct LevelBuilder {
  BranchLevel level;
  std::map<ClassKey, std::uint32_t> index;

  std::uint32_t add(const BranchClass& proto, const Integer& mult) {
    ClassKey key{proto.landed, proto.k, proto.key, proto.landed ? 0 : proto.first, proto.landed ? 0 : proto.count};
    auto it = index.find(key);
    if (it != index.end()) {
      level.classes[it->second].multiplicity += mult;
      return it->second;
    }
    const auto id = static_cast<std::uint32_t>(level.classes.size());
    level.classes.push_back(proto);
    level.classes.back().multiplicity = mult;
    index.emplace(key, id);
    return id;
  }
};

// Star child offset of l inside a level-(k-1) star parent with key g.
Rational star_off(const StarState& st, int k, std::uint64_t g, unsigned long l) {
  return st.star_child_offset(k, g, l);
}

BranchClass landed_class(const StarState& st, int k, std::uint64_t key) {
  BranchClass c;
  c.landed = true;
  c.k = k;
  c.key = key;
  c.length = st.level(k).delta;
  c.psi = k + 1 <= st.depth() ? st.base().level(k + 1).n : 0;
  return c;
}

BranchClass run_class(const StarState& st, int k, std::uint64_t g, unsigned long first, unsigned long count) {
  BranchClass c;
  c.k = k;
  c.key = g;
  c.first = first;
  c.count = count;
  c.length = star_off(st, k, g, first + count) + st.level(k).delta - star_off(st, k, g, first + 1);
  c.psi = count;
  return c;
}

}  // namespace

BranchTree build_T(const StarState& state, const Schedule& schedule, int m_max) {
  if (m_max < 0) throw Error(ErrorKind::precondition, "m_max must be >= 0");
  if (m_max > schedule.m.back()) throw Error(ErrorKind::precondition, "m_max is beyond the schedule depth");
  const int phase_max = schedule.phase_of(m_max);
  if (phase_max > state.depth()) throw Error(ErrorKind::precondition, "star state is shallower than the schedule");
  const Construction& c = state.base();
  const unsigned long M = schedule.M;

  std::vector<BranchLevel> levels;
  {
    LevelBuilder b;
    b.level.m = 0;
    b.level.k = 0;
    b.level.landing = true;
    b.add(landed_class(state, 0, 0), Integer(1));
    levels.push_back(std::move(b.level));
  }
  for (int m = 0; m < m_max; ++m) {
    LevelBuilder b;
    b.level.m = m + 1;
    b.level.k = schedule.phase_of(m + 1);
    b.level.landing = schedule.landing(m + 1);
    const int k = b.level.k;
    BranchLevel& parent = levels.back();
    for (auto& pc : parent.classes) {
      const Integer& mult = pc.multiplicity;
      if (pc.landed) {
        // Entering phase k = pc.k + 1 from a star interval with key pc.key.
        const unsigned long n = c.level(k).n;
        if (b.level.landing) {
          for (unsigned long l = 1; l <= n; ++l) {
            const auto id = b.add(landed_class(state, k, c.child_key(k, pc.key, l)), mult);
            pc.children.push_back({id, star_off(state, k, pc.key, l)});
          }
        } else {
          const unsigned long base = n / M, extra = n % M;
          unsigned long first = 0;
          for (unsigned long g = 0; g < M; ++g) {
            const unsigned long size = base + (g < extra ? 1 : 0);
            if (size == 0) continue;
            const auto id = b.add(run_class(state, k, pc.key, first, size), mult);
            pc.children.push_back({id, star_off(state, k, pc.key, first + 1)});
            first += size;
          }
        }
      } else {
        const Rational origin = star_off(state, k, pc.key, pc.first + 1);
        if (b.level.landing) {
          for (unsigned long l = pc.first + 1; l <= pc.first + pc.count; ++l) {
            const auto id = b.add(landed_class(state, k, c.child_key(k, pc.key, l)), mult);
            pc.children.push_back({id, star_off(state, k, pc.key, l) - origin});
          }
        } else {
          const unsigned long base = pc.count / M, extra = pc.count % M;
          unsigned long first = pc.first;
          for (unsigned long g = 0; g < M; ++g) {
            const unsigned long size = base + (g < extra ? 1 : 0);
            if (size == 0) continue;
            const auto id = b.add(run_class(state, k, pc.key, first, size), mult);
            pc.children.push_back({id, star_off(state, k, pc.key, first + 1) - origin});
            first += size;
          }
        }
      }
    }
    levels.push_back(std::move(b.level));
  }
  return BranchTree(schedule, state.star_lo(0, c.spec().lo), std::move(levels));
}

BranchStats branch_stats(const BranchTree& tree, int m) {
  if (m < 0 || m > tree.max_m()) throw Error(ErrorKind::precondition, "m outside the built tree");
  BranchStats s;
  s.m = m;
  s.count = 0;
  bool first = true;
  for (const auto& c : tree.level(m).classes) {
    s.count += c.multiplicity;
    s.total_length += Rational(c.multiplicity) * c.length;
    if (first || c.length > s.max_len) s.max_len = c.length;
    if (first || c.length < s.min_len) s.min_len = c.length;
    if (first || c.psi > s.psi_max) s.psi_max = c.psi;
    if (first || c.psi < s.psi_min) s.psi_min = c.psi;
    first = false;
  }
  return s;
}

std::vector<BranchCheck> check_branches(const BranchTree& tree, const StarState& state) {
  const Schedule& sch = tree.schedule();
  const Rational factor = sch.factor();
  const unsigned long M = sch.M;
  std::vector<BranchCheck> out;
  BranchStats prev = branch_stats(tree, 0);
  for (int m = 1; m <= tree.max_m(); ++m) {
    const BranchLevel& lv = tree.level(m);
    const BranchStats st = branch_stats(tree, m);
    BranchCheck chk;
    chk.m = m;
    chk.k = lv.k;
    chk.landing = lv.landing;
    for (const auto& pc : tree.level(m - 1).classes) {
      chk.max_children = std::max<unsigned long>(chk.max_children, pc.children.size());
    }
    chk.children_ok = chk.max_children <= (lv.landing ? M * M : M);
    chk.spread_ok = st.psi_max <= st.psi_min + 1;
    chk.ratio_ok = st.max_len <= factor * st.min_len;
    const StarLevel& prev_star = state.level(lv.k - 1);
    if (lv.landing) {
      const StarLevel& s = state.level(lv.k);
      chk.length_ok = st.total_length == Rational(s.count) * s.delta;
      chk.star_match = st.count == s.count && st.max_len == s.delta && st.min_len == s.delta;
      for (const auto& c : lv.classes) chk.star_match = chk.star_match && c.landed;
    } else {
      const Rational upper = Rational(prev_star.count) * prev_star.delta;
      chk.length_ok = (1 - factor / Rational(M)) * upper <= st.total_length && st.total_length <= upper;
      chk.star_match = true;
    }
    chk.monotone = st.total_length <= prev.total_length;
    out.push_back(chk);
    prev = st;
  }
  return out;
}

void export_branches(const BranchTree& tree, std::ostream& out, std::size_t budget) {
  for (int m = 0; m <= tree.max_m(); ++m) {
    if (tree.count(m) > Integer(static_cast<unsigned long>(budget))) {
      throw Error(ErrorKind::resource, "T_" + std::to_string(m) + " has more branches than the export budget")
          .at_level(m);
    }
  }
  for (int m = 0; m <= tree.max_m(); ++m) {
    std::size_t index = 0;
    const BranchLevel& lv = tree.level(m);
    tree.for_each_branch(m, [&](const Rational& lo, const Rational& hi, std::uint32_t cls) {
      nlohmann::ordered_json j;
      j["m"] = m;
      j["index"] = index++;
      j["lo"] = to_string(lo);
      j["hi"] = to_string(hi);
      j["psi"] = lv.classes[cls].psi;
      out << j.dump() << '\n';
    });
  }
}

void write_schedule_csv(const Schedule& s, std::ostream& out) {
  out << "k,i_k,m_k,M\n";
  for (int k = 1; k <= s.depth; ++k) {
    out << k << ',' << s.i[static_cast<std::size_t>(k)] << ',' << s.m[static_cast<std::size_t>(k)] << ',' << s.M
        << '\n';
  }
}

void write_branch_stats_csv(const BranchTree& tree, std::ostream& out) {
  out << "m,count,max_len,min_len,l_Tm,psi_max,psi_min\n";
  for (int m = 0; m <= tree.max_m(); ++m) {
    const BranchStats s = branch_stats(tree, m);
    out << m << ',' << s.count.get_str() << ',' << to_string(s.max_len) << ',' << to_string(s.min_len) << ','
        << to_string(s.total_length) << ',' << s.psi_max << ',' << s.psi_min << '\n';
  }
}

}  // namespace moran
