#include "moran/tree.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <string>

#include <json.hpp>

#include "moran/error.hpp"

namespace moran {

Construction::Construction(MoranSpec spec, int depth)
    : spec_(std::move(spec)), depth_(depth), levels_(level_table(spec_, depth)), gaps_(spec_, levels_) {
  offsets_.resize(levels_.size());
  for (int k = 1; k <= depth_; ++k) {
    const LevelParams& p = levels_[static_cast<std::size_t>(k)];
    auto& row = offsets_[static_cast<std::size_t>(k)];
    row.resize(gaps_.keys_at(k));
    for (std::uint64_t key = 0; key < row.size(); ++key) {
      const auto& eta = gaps_.gaps(k, key);
      auto& off = row[key];
      off.reserve(p.n);
      Rational x = p.L;
      for (unsigned long l = 1; l <= p.n; ++l) {
        off.push_back(x);
        x += p.delta;
        if (l < p.n) x += eta[l - 1];
      }
    }
  }
}

const Rational& Construction::child_offset(int k, std::uint64_t key, unsigned long l) const {
  const auto& row = offsets_.at(static_cast<std::size_t>(k));
  return row[key % row.size()][l - 1];
}

std::vector<Rational> Construction::node_gaps(int k, std::uint64_t key) const {
  const LevelParams& p = level(k);
  std::vector<Rational> out;
  out.reserve(p.n + 1);
  out.push_back(p.L);
  for (const auto& g : interior_gaps(k, key)) out.push_back(g);
  out.push_back(p.R);
  return out;
}

LevelSet build_level(const Construction& c, int k, std::size_t budget, bool with_gaps) {
  if (k < 0 || k > c.depth()) throw Error(ErrorKind::precondition, "level outside construction depth");
  if (with_gaps && k + 1 > c.depth()) {
    throw Error(ErrorKind::precondition, "gap records need the construction one level deeper");
  }
  const Integer& count = c.level(k).count;
  if (count > Integer(static_cast<unsigned long>(budget))) {
    throw Error(ErrorKind::resource, "level " + std::to_string(k) + " has " + count.get_str() +
                                         " intervals, over the node budget of " +
                                         std::to_string(budget) + "; use streaming traversal")
        .at_level(k);
  }
  LevelSet out;
  out.level = k;
  out.intervals.reserve(count.get_ui());
  for_each_interval(c, k, [&](const Rational& lo, const Rational& hi, std::uint64_t key, const Address& a) {
    out.intervals.push_back({a, lo, hi});
    if (with_gaps) out.gaps.push_back(c.node_gaps(k + 1, key));
  });
  return out;
}

LevelSet build_level(const MoranSpec& spec, int k, std::size_t budget) {
  return build_level(Construction(spec, k), k, budget);
}

LevelStats level_stats(const Construction& c, int k) {
  if (k < 1 || k > c.depth()) throw Error(ErrorKind::precondition, "level stats need 1 <= k <= depth");
  const LevelParams& p = c.level(k);
  LevelStats s;
  s.k = k;
  s.count = p.count;
  s.delta = p.delta;
  s.total_length = Rational(p.count) * p.delta;
  s.slack = p.slack;
  bool first = true;
  for (std::uint64_t key = 0; key < c.keys_at(k); ++key) {
    for (const auto& g : c.interior_gaps(k, key)) {
      if (first || g > s.alpha_bar) s.alpha_bar = g;
      if (first || g < s.alpha_under) s.alpha_under = g;
      first = false;
    }
  }
  return s;
}

LevelStats level_stats(const MoranSpec& spec, int k) { return level_stats(Construction(spec, k), k); }

void export_level(const LevelSet& set, std::ostream& out) {
  for (const auto& iv : set.intervals) {
    nlohmann::ordered_json j;
    j["level"] = set.level;
    j["address"] = iv.address;
    j["lo"] = to_string(iv.lo);
    j["hi"] = to_string(iv.hi);
    out << j.dump() << '\n';
  }
}

LevelSet import_level(std::istream& in) {
  LevelSet out;
  std::string line;
  std::size_t lineno = 0;
  bool have_level = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto fail = [&](const std::string& why) {
      throw Error(ErrorKind::parse, "line " + std::to_string(lineno) + ": " + why);
    };
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      fail(e.what());
    }
    if (!j.is_object() || !j.contains("level") || !j.contains("address") || !j.contains("lo") ||
        !j.contains("hi")) {
      fail("record needs level, address, lo, hi");
    }
    Interval iv;
    int level = 0;
    try {
      level = j.at("level").get<int>();
      iv.address = j.at("address").get<Address>();
      iv.lo = parse_rational(j.at("lo").get<std::string>());
      iv.hi = parse_rational(j.at("hi").get<std::string>());
    } catch (const nlohmann::json::exception& e) {
      fail(e.what());
    } catch (const Error& e) {
      fail(e.what());
    }
    if (iv.lo > iv.hi) fail("lo > hi");
    if (iv.address.size() != static_cast<std::size_t>(level)) fail("address length differs from level");
    if (have_level && level != out.level) fail("mixed levels");
    out.level = level;
    have_level = true;
    out.intervals.push_back(std::move(iv));
  }
  return out;
}

void write_stats_csv(const std::vector<LevelStats>& stats, std::ostream& out) {
  out << "k,N_k,delta_k,alpha_bar,alpha_under,e_k,l_Ek\n";
  for (const auto& s : stats) {
    out << s.k << ',' << s.count.get_str() << ',' << to_string(s.delta) << ',' << to_string(s.alpha_bar)
        << ',' << to_string(s.alpha_under) << ',' << to_string(s.slack) << ','
        << to_string(s.total_length) << '\n';
  }
}

}  // namespace moran
