#include "moran/spec.hpp"

#include <algorithm>
#include <utility>

#include "moran/error.hpp"

namespace moran {

// --- SequenceRule ----------------------------------------------------------

SequenceRule SequenceRule::constant(Rational v) {
  return SequenceRule{Kind::constant, {std::move(v)}, {}};
}

SequenceRule SequenceRule::periodic(std::vector<Rational> v) {
  return SequenceRule{Kind::periodic, std::move(v), {}};
}

SequenceRule SequenceRule::prefix(std::vector<Rational> v) {
  return SequenceRule{Kind::explicit_prefix, std::move(v), {}};
}

SequenceRule SequenceRule::table(std::string name, std::vector<Rational> params) {
  return SequenceRule{Kind::table_function, std::move(params), std::move(name)};
}

bool SequenceRule::evaluable(int k) const {
  if (k < 1) return false;
  switch (kind) {
    case Kind::constant: return values.size() == 1;
    case Kind::periodic: return !values.empty();
    case Kind::explicit_prefix: return static_cast<std::size_t>(k) <= values.size();
    case Kind::table_function:
      if (function == "affine_power") return values.size() == 3;
      if (function == "harmonic") return values.size() == 2 && Rational(k) + values[1] != 0;
      return false;
  }
  return false;
}

Rational SequenceRule::at(int k) const {
  if (!evaluable(k)) {
    throw Error(ErrorKind::not_evaluable, "sequence rule not evaluable at k = " + std::to_string(k))
        .at_level(k);
  }
  switch (kind) {
    case Kind::constant: return values[0];
    case Kind::periodic: return values[static_cast<std::size_t>(k - 1) % values.size()];
    case Kind::explicit_prefix: return values[static_cast<std::size_t>(k - 1)];
    case Kind::table_function:
      if (function == "affine_power") return values[0] + values[1] * pow_rational(values[2], k);
      return values[0] / (Rational(k) + values[1]);
  }
  return {};
}

// --- GapPolicy -------------------------------------------------------------

GapPolicy GapPolicy::uniform() { return GapPolicy{}; }

GapPolicy GapPolicy::weighted(std::vector<Rational> w) {
  GapPolicy p;
  p.kind = Kind::weighted;
  p.weights = std::move(w);
  return p;
}

GapPolicy GapPolicy::seeded(std::uint64_t seed, std::uint32_t pool) {
  GapPolicy p;
  p.kind = Kind::seeded_random;
  p.seed = seed;
  p.pool = pool;
  return p;
}

std::uint64_t GapPolicy::key_space() const {
  return kind == Kind::seeded_random ? std::max<std::uint32_t>(pool, 1) : 1;
}

std::uint64_t GapPolicy::child_key(std::uint64_t parent_key, unsigned long n,
                                   unsigned long l) const {
  const std::uint64_t space = key_space();
  if (space == 1) return 0;
  // rank(sigma*l) = rank(sigma) * n + (l - 1)
  unsigned __int128 r = static_cast<unsigned __int128>(parent_key) * n + (l - 1);
  return static_cast<std::uint64_t>(r % space);
}

std::vector<Rational> GapPolicy::interior_gaps(int k, unsigned long n, const Rational& slack,
                                               std::uint64_t key) const {
  if (n < 2) return {};
  const std::size_t count = n - 1;
  std::vector<Rational> out(count);
  if (sgn(slack) == 0) return out;

  std::vector<Rational> w(count);
  switch (kind) {
    case Kind::uniform:
      for (auto& g : out) g = slack / Rational(count);
      return out;
    case Kind::weighted:
      if (weights.empty()) throw Error(ErrorKind::invalid_spec, "weighted gap policy without weights");
      for (std::size_t l = 0; l < count; ++l) {
        w[l] = weights[l % weights.size()];
        if (sgn(w[l]) < 0) throw Error(ErrorKind::invalid_spec, "negative gap weight");
      }
      break;
    case Kind::seeded_random: {
      SplitMix64 rng(stream_key(seed, static_cast<std::uint64_t>(k), key));
      for (auto& x : w) x = Rational(static_cast<unsigned long>(rng.between(1, 1u << 16)));
      break;
    }
  }
  Rational total = 0;
  for (const auto& x : w) total += x;
  if (sgn(total) == 0) {
    throw Error(ErrorKind::inconsistent,
                "all gap weights are zero but slack is positive at k = " + std::to_string(k))
        .at_level(k);
  }
  Rational assigned = 0;
  for (std::size_t l = 0; l + 1 < count; ++l) {
    out[l] = slack * w[l] / total;
    assigned += out[l];
  }
  // residual to the last gap
  out[count - 1] = slack - assigned;
  return out;
}

// --- MoranSpec -------------------------------------------------------------

unsigned long MoranSpec::n_at(int k) const {
  Rational v = n.at(k);
  if (v.get_den() != 1 || sgn(v) <= 0 || !v.get_num().fits_ulong_p()) {
    throw Error(ErrorKind::invalid_spec, "n_k is not a positive integer at k = " + std::to_string(k))
        .at_level(k);
  }
  return v.get_num().get_ui();
}

std::vector<LevelParams> level_table(const MoranSpec& spec, int K) {
  if (sgn(spec.length()) <= 0) throw Error(ErrorKind::invalid_spec, "initial interval has no length");
  std::vector<LevelParams> out;
  out.reserve(static_cast<std::size_t>(K) + 1);
  LevelParams root;
  root.delta = spec.length();
  out.push_back(root);
  for (int k = 1; k <= K; ++k) {
    LevelParams p;
    p.k = k;
    p.n = spec.n_at(k);
    p.c = spec.c_at(k);
    p.L = spec.L_at(k);
    p.R = spec.R_at(k);
    const auto fail = [k](ErrorKind kind, const std::string& what) {
      throw Error(kind, what + " at k = " + std::to_string(k)).at_level(k);
    };
    if (p.n < 2) fail(ErrorKind::invalid_spec, "n_k < 2");
    if (sgn(p.c) <= 0) fail(ErrorKind::invalid_spec, "c_k <= 0");
    if (Rational(p.n) * p.c >= 1) fail(ErrorKind::invalid_spec, "n_k c_k >= 1");
    if (sgn(p.L) < 0 || sgn(p.R) < 0) fail(ErrorKind::invalid_spec, "negative boundary gap");
    const LevelParams& prev = out.back();
    p.delta = prev.delta * p.c;
    p.count = prev.count * p.n;
    p.slack = prev.delta - Rational(p.n) * p.delta - p.L - p.R;
    if (sgn(p.slack) < 0) fail(ErrorKind::inconsistent, "negative slack e_k = " + to_string(p.slack));
    out.push_back(std::move(p));
  }
  return out;
}

Rational slack(const MoranSpec& spec, int k) {
  if (k < 1) throw Error(ErrorKind::precondition, "slack is defined for k >= 1");
  return level_table(spec, k).back().slack;
}

// --- GapTable --------------------------------------------------------------

GapTable::GapTable(const MoranSpec& spec, const std::vector<LevelParams>& levels) {
  table_.resize(levels.size());
  const std::uint64_t space = spec.gaps.key_space();
  for (std::size_t k = 1; k < levels.size(); ++k) {
    const Integer& parents = levels[k - 1].count;
    std::uint64_t used = space;
    if (parents < Integer(static_cast<unsigned long>(space))) used = parents.get_ui();
    auto& row = table_[k];
    row.reserve(used);
    for (std::uint64_t key = 0; key < used; ++key) {
      row.push_back(spec.gaps.interior_gaps(static_cast<int>(k), levels[k].n, levels[k].slack, key));
    }
  }
}

const std::vector<Rational>& GapTable::gaps(int k, std::uint64_t key) const {
  const auto& row = table_.at(static_cast<std::size_t>(k));
  return row.at(key % row.size());
}

// --- validation ------------------------------------------------------------

ValidationReport validate_spec(const MoranSpec& spec, int K) {
  if (K < 1) throw Error(ErrorKind::precondition, "validation depth must be >= 1");
  ValidationReport report;
  report.depth = K;
  report.pass = true;
  Rational prev_delta = spec.length();
  Integer parents = 1;
  if (sgn(prev_delta) <= 0) {
    report.pass = false;
    report.message = "initial interval has no length";
    return report;
  }
  for (int k = 1; k <= K; ++k) {
    LevelCheck lc;
    lc.k = k;
    try {
      Rational nv = spec.n.at(k);
      lc.c = spec.c.at(k);
      lc.L = spec.L.at(k);
      lc.R = spec.R.at(k);
      lc.n_ok = nv.get_den() == 1 && nv >= 2 && nv.get_num().fits_ulong_p();
      lc.n = lc.n_ok ? nv.get_num().get_ui() : 0;
    } catch (const Error& e) {
      report.pass = false;
      report.failed_level = k;
      report.message = e.what();
      return report;
    }
    const Rational delta = prev_delta * lc.c;
    lc.nc_ok = lc.n_ok && sgn(lc.c) > 0 && Rational(lc.n) * lc.c < 1;
    lc.lr_ok = sgn(lc.L) >= 0 && sgn(lc.R) >= 0;
    lc.slack = prev_delta - Rational(lc.n) * delta - lc.L - lc.R;
    lc.slack_ok = sgn(lc.slack) >= 0;
    lc.gaps_ok = false;
    if (lc.n_ok && lc.slack_ok) {
      try {
        const std::uint64_t space = spec.gaps.key_space();
        const std::uint64_t used =
            parents < Integer(static_cast<unsigned long>(space)) ? parents.get_ui() : space;
        lc.gaps_ok = true;
        for (std::uint64_t key = 0; key < used && lc.gaps_ok; ++key) {
          auto g = spec.gaps.interior_gaps(k, lc.n, lc.slack, key);
          Rational sum = 0;
          for (const auto& x : g) {
            if (sgn(x) < 0) lc.gaps_ok = false;
            sum += x;
          }
          if (sum != lc.slack) lc.gaps_ok = false;
        }
      } catch (const Error&) {
        lc.gaps_ok = false;
      }
    }
    if (!lc.ok() && report.pass) {
      report.pass = false;
      report.failed_level = k;
      if (!lc.n_ok) report.message = "n_k must be an integer >= 2";
      else if (!lc.nc_ok) report.message = "n_k c_k must be < 1 with c_k > 0";
      else if (!lc.lr_ok) report.message = "boundary gaps must be nonnegative";
      else if (!lc.slack_ok) report.message = "negative slack e_k";
      else report.message = "interior gaps invalid";
    }
    prev_delta = delta;
    if (lc.n_ok) parents *= lc.n;
    report.levels.push_back(std::move(lc));
  }
  return report;
}

// --- presets ---------------------------------------------------------------

std::vector<std::string> preset_names() {
  return {"cantor3", "dim1_binary", "wide10", "skew10", "lr_quarter"};
}

MoranSpec preset(std::string_view name) {
  MoranSpec s;
  s.name = std::string(name);
  s.L = SequenceRule::constant(0);
  s.R = SequenceRule::constant(0);
  if (name == "cantor3") {
    s.n = SequenceRule::constant(2);
    s.c = SequenceRule::constant(Rational(1, 3));
  } else if (name == "dim1_binary") {
    // c_k = (1 - 4^-k) / 2
    s.n = SequenceRule::constant(2);
    s.c = SequenceRule::table("affine_power", {Rational(1, 2), Rational(-1, 2), Rational(1, 4)});
  } else if (name == "wide10") {
    s.n = SequenceRule::constant(10);
    s.c = SequenceRule::constant(Rational(1, 20));
  } else if (name == "skew10") {
    s.n = SequenceRule::constant(10);
    s.c = SequenceRule::constant(Rational(1, 20));
    s.gaps = GapPolicy::seeded(42);
  } else if (name == "lr_quarter") {
    // L_k = R_k = 4^-k / 8
    s.n = SequenceRule::constant(2);
    s.c = SequenceRule::constant(Rational(1, 4));
    s.L = SequenceRule::table("affine_power", {Rational(0), Rational(1, 8), Rational(1, 4)});
    s.R = s.L;
  } else {
    throw Error(ErrorKind::not_found, "unknown preset '" + std::string(name) + "'");
  }
  return s;
}

std::vector<MoranSpec> presets() {
  std::vector<MoranSpec> out;
  for (const auto& n : preset_names()) out.push_back(preset(n));
  return out;
}

}  // namespace moran
