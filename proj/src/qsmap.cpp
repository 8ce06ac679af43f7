#include "moran/qsmap.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "moran/error.hpp"

namespace moran {

namespace {

[[noreturn]] void bad_map(const std::string& what) { throw Error(ErrorKind::invalid_spec, "map: " + what); }

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = s.find(sep, start);
    out.push_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

MapPart parse_part(std::string_view text) {
  const std::size_t colon = text.find(':');
  const std::string_view name = text.substr(0, colon);
  const std::string_view args = colon == std::string_view::npos ? std::string_view{} : text.substr(colon + 1);
  MapPart p;
  if (name == "identity") {
    if (!args.empty()) throw Error(ErrorKind::parse, "identity takes no parameters");
    p.kind = MapKind::identity;
  } else if (name == "affine") {
    const auto v = split(args, ',');
    if (v.size() != 2) throw Error(ErrorKind::parse, "affine needs a,b");
    p.kind = MapKind::affine;
    p.a = parse_rational(v[0]);
    p.b = parse_rational(v[1]);
  } else if (name == "power") {
    if (args.empty()) throw Error(ErrorKind::parse, "power needs an exponent");
    p.kind = MapKind::power;
    p.a = parse_rational(args);
  } else if (name == "pl") {
    p.kind = MapKind::pl;
    for (auto kv : split(args, ',')) {
      const auto xy = split(kv, ':');
      if (xy.size() != 2) throw Error(ErrorKind::parse, "pl breakpoints are x:y");
      p.knots.emplace_back(parse_rational(xy[0]), parse_rational(xy[1]));
    }
  } else {
    throw Error(ErrorKind::parse, "unknown map family '" + std::string(name) + "'");
  }
  return p;
}

Rational pl_eval(const MapPart& p, const Rational& x) {
  const auto& k = p.knots;
  std::size_t i = 0;
  if (x >= k.back().first) {
    i = k.size() - 2;
  } else {
    while (i + 2 < k.size() && x >= k[i + 1].first) ++i;
  }
  const Rational slope = (k[i + 1].second - k[i].second) / (k[i + 1].first - k[i].first);
  return k[i].second + slope * (x - k[i].first);
}

bool integer_power(const MapPart& p) { return p.kind == MapKind::power && p.a.get_den() == 1; }

Rational signed_pow(const Rational& x, long n) {
  const Rational v = pow_rational(abs(x), n);
  return sgn(x) < 0 ? Rational(-v) : v;
}

// Bound of sign(x)|x|^a rounded toward `dir` (MPFR_RNDD or MPFR_RNDU).
Rational power_bound(const Rational& x, const Rational& a, mpfr_prec_t prec, mpfr_rnd_t dir) {
  if (sgn(x) == 0) return 0;
  const bool neg = sgn(x) < 0;
  // For negative x the bound on -|x|^a comes from the opposite bound on |x|^a.
  const mpfr_rnd_t mdir = neg ? (dir == MPFR_RNDD ? MPFR_RNDU : MPFR_RNDD) : dir;
  BigFloat v(abs(x), prec, mdir);
  BigFloat a_lo(a, prec, MPFR_RNDD), a_hi(a, prec, MPFR_RNDU);
  BigFloat r1(prec), r2(prec);
  mpfr_pow(r1.get(), v.get(), a_lo.get(), mdir);
  mpfr_pow(r2.get(), v.get(), a_hi.get(), mdir);
  const bool take_max = mdir == MPFR_RNDU;
  const BigFloat& pick = (r1.compare(r2) < 0) == take_max ? r2 : r1;
  Rational q = pick.to_rational();
  return neg ? Rational(-q) : q;
}

Enclosure apply(const MapPart& p, const Enclosure& e, mpfr_prec_t prec) {
  switch (p.kind) {
    case MapKind::identity: return e;
    case MapKind::affine: return {p.a * e.lo + p.b, p.a * e.hi + p.b};
    case MapKind::pl: return {pl_eval(p, e.lo), pl_eval(p, e.hi)};
    case MapKind::power:
      if (integer_power(p)) {
        const long n = p.a.get_num().get_si();
        return {signed_pow(e.lo, n), signed_pow(e.hi, n)};
      }
      return {power_bound(e.lo, p.a, prec, MPFR_RNDD), power_bound(e.hi, p.a, prec, MPFR_RNDU)};
  }
  return e;
}

Rational mid(const Enclosure& e) { return (e.lo + e.hi) / 2; }

// Exact image when possible, enclosure midpoint otherwise.
Rational point_image(const QsMapSpec& f, const Rational& x, bool exact, mpfr_prec_t prec) {
  return exact ? exact_image(f, x) : mid(eval(f, x, prec));
}

double ratio_of(const Rational& num, const Rational& den) {
  BigFloat n(num, kDefaultPrecision), d(den, kDefaultPrecision);
  mpfr_div(n.get(), n.get(), d.get(), MPFR_RNDN);
  return n.to_double();
}

Rational sample_in(SplitMix64& rng, const Rational& lo, const Rational& hi) {
  return lo + (hi - lo) * rational_from_double(rng.uniform());
}

}  // namespace

QsMapSpec parse_map(std::string_view text) {
  if (text.empty()) throw Error(ErrorKind::parse, "empty map");
  QsMapSpec f;
  for (auto part : split(text, '+')) f.parts.push_back(parse_part(part));
  validate_map(f);
  return f;
}

std::string describe(const QsMapSpec& f) {
  std::string out;
  for (const auto& p : f.parts) {
    if (!out.empty()) out += '+';
    switch (p.kind) {
      case MapKind::identity: out += "identity"; break;
      case MapKind::affine: out += "affine:" + p.a.get_str() + "," + p.b.get_str(); break;
      case MapKind::power: out += "power:" + p.a.get_str(); break;
      case MapKind::pl: {
        out += "pl:";
        for (std::size_t i = 0; i < p.knots.size(); ++i) {
          if (i) out += ',';
          out += p.knots[i].first.get_str() + ":" + p.knots[i].second.get_str();
        }
        break;
      }
    }
  }
  return out;
}

nlohmann::json to_json(const QsMapSpec& f) {
  auto one = [](const MapPart& p) {
    nlohmann::ordered_json j;
    switch (p.kind) {
      case MapKind::identity: j["family"] = "identity"; break;
      case MapKind::affine:
        j["family"] = "affine";
        j["params"] = {{"a", to_string(p.a)}, {"b", to_string(p.b)}};
        break;
      case MapKind::power:
        j["family"] = "power";
        j["params"] = {{"a", to_string(p.a)}};
        break;
      case MapKind::pl: {
        j["family"] = "piecewise-linear";
        nlohmann::json pts = nlohmann::json::array();
        for (const auto& [x, y] : p.knots) pts.push_back({to_string(x), to_string(y)});
        j["params"] = {{"breakpoints", pts}};
        break;
      }
    }
    return j;
  };
  if (f.parts.size() == 1) return one(f.parts[0]);
  nlohmann::ordered_json j;
  j["family"] = "composition";
  j["parts"] = nlohmann::json::array();
  for (const auto& p : f.parts) j["parts"].push_back(one(p));
  return j;
}

QsMapSpec map_from_json(const nlohmann::json& j) {
  auto num = [](const nlohmann::json& v) {
    if (v.is_string()) return parse_rational(v.get<std::string>());
    if (v.is_number_integer()) return Rational(v.get<long>());
    if (v.is_number()) return rational_from_double(v.get<double>());
    throw Error(ErrorKind::parse, "map parameter must be a number or string");
  };
  auto one = [&](const nlohmann::json& o) {
    if (!o.is_object() || !o.contains("family")) throw Error(ErrorKind::parse, "map needs a family");
    const std::string fam = o.at("family").get<std::string>();
    const nlohmann::json params = o.value("params", nlohmann::json::object());
    MapPart p;
    if (fam == "identity") {
      p.kind = MapKind::identity;
    } else if (fam == "affine") {
      p.kind = MapKind::affine;
      p.a = num(params.at("a"));
      p.b = num(params.at("b"));
    } else if (fam == "power") {
      p.kind = MapKind::power;
      p.a = num(params.at("a"));
    } else if (fam == "piecewise-linear" || fam == "pl") {
      p.kind = MapKind::pl;
      for (const auto& xy : params.at("breakpoints")) p.knots.emplace_back(num(xy.at(0)), num(xy.at(1)));
    } else {
      throw Error(ErrorKind::parse, "unknown map family '" + fam + "'");
    }
    return p;
  };
  QsMapSpec f;
  try {
    if (j.is_string()) return parse_map(j.get<std::string>());
    if (j.value("family", "") == "composition") {
      for (const auto& o : j.at("parts")) f.parts.push_back(one(o));
    } else {
      f.parts.push_back(one(j));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::parse, std::string("map: ") + e.what());
  }
  validate_map(f);
  return f;
}

void validate_map(const QsMapSpec& f) {
  if (f.parts.empty()) bad_map("no parts");
  for (const auto& p : f.parts) {
    switch (p.kind) {
      case MapKind::identity: break;
      case MapKind::affine:
        if (sgn(p.a) <= 0) bad_map("affine slope must be positive");
        break;
      case MapKind::power:
        if (sgn(p.a) <= 0) bad_map("power exponent must be positive");
        if (integer_power(p) && p.a > 64) bad_map("integer exponent above 64");
        break;
      case MapKind::pl:
        if (p.knots.size() < 2) bad_map("piecewise-linear needs two breakpoints");
        for (std::size_t i = 1; i < p.knots.size(); ++i) {
          if (p.knots[i].first <= p.knots[i - 1].first || p.knots[i].second <= p.knots[i - 1].second) {
            bad_map("piecewise-linear breakpoints must be strictly increasing");
          }
        }
        break;
    }
  }
}

bool is_affine(const QsMapSpec& f) {
  return std::all_of(f.parts.begin(), f.parts.end(),
                     [](const MapPart& p) { return p.kind == MapKind::identity || p.kind == MapKind::affine; });
}

bool is_exact(const QsMapSpec& f) {
  return std::all_of(f.parts.begin(), f.parts.end(),
                     [](const MapPart& p) { return p.kind != MapKind::power || integer_power(p); });
}

std::pair<Rational, Rational> affine_coeffs(const QsMapSpec& f) {
  if (!is_affine(f)) throw Error(ErrorKind::precondition, "map is not affine");
  Rational a = 1, b = 0;
  for (const auto& p : f.parts) {
    if (p.kind != MapKind::affine) continue;
    a = p.a * a;
    b = p.a * b + p.b;
  }
  return {a, b};
}

Enclosure eval(const QsMapSpec& f, const Rational& x, mpfr_prec_t precision) {
  Enclosure e{x, x};
  for (const auto& p : f.parts) e = apply(p, e, precision);
  return e;
}

Rational exact_image(const QsMapSpec& f, const Rational& x) {
  if (!is_exact(f)) throw Error(ErrorKind::precondition, "map has no exact rational images");
  return eval(f, x).lo;
}

double Eta::operator()(double t) const {
  if (linear) return C * t;
  return C * std::max(std::pow(t, a), std::pow(t, 1 / a));
}

std::string Eta::describe() const {
  if (linear) return format_double(C) + "*t";
  return format_double(C) + "*max(t^" + format_double(a) + ",t^" + format_double(1 / a) + ")";
}

Eta default_eta(const QsMapSpec& f) {
  Eta eta;
  double spread = 1, expo = 1;
  for (const auto& p : f.parts) {
    if (p.kind == MapKind::pl) {
      double smin = std::numeric_limits<double>::infinity(), smax = 0;
      for (std::size_t i = 1; i < p.knots.size(); ++i) {
        const Rational s = (p.knots[i].second - p.knots[i - 1].second) / (p.knots[i].first - p.knots[i - 1].first);
        smin = std::min(smin, s.get_d());
        smax = std::max(smax, s.get_d());
      }
      spread *= smax / smin;
    } else if (p.kind == MapKind::power) {
      const double a = p.a.get_d();
      expo *= std::max(a, 1 / a);
    }
  }
  eta.C = spread;
  if (expo != 1) {
    eta.linear = false;
    eta.a = expo;
  }
  return eta;
}

TripleAudit qs_triple_audit(const QsMapSpec& f, const Rational& lo, const Rational& hi, std::size_t samples,
                            std::uint64_t seed, const Eta& eta, mpfr_prec_t precision) {
  validate_map(f);
  if (!(lo < hi)) throw Error(ErrorKind::precondition, "triple audit needs lo < hi");
  const bool exact = is_exact(f);
  TripleAudit out;
  bool any = false;
  for (std::size_t i = 0; i < samples; ++i) {
    SplitMix64 rng(stream_key(seed, 0x7219, i));
    const Rational a = sample_in(rng, lo, hi), b = sample_in(rng, lo, hi), x = sample_in(rng, lo, hi);
    if (a == x || b == x) {
      ++out.skipped;
      continue;
    }
    ++out.samples;
    const Rational fx = point_image(f, x, exact, precision);
    const Rational h_num = abs(point_image(f, a, exact, precision) - fx);
    const Rational h_den = abs(point_image(f, b, exact, precision) - fx);
    const double t = ratio_of(abs(x - a), abs(x - b));
    const double h = ratio_of(h_num, h_den);
    const double r = h / eta(t);
    if (!any || r > out.worst) {
      out.worst = r;
      out.a = a;
      out.b = b;
      out.x = x;
      any = true;
    }
  }
  return out;
}

Eta fit_eta(const QsMapSpec& f, const Rational& lo, const Rational& hi, unsigned grid, double margin,
            mpfr_prec_t precision) {
  validate_map(f);
  if (grid < 3) throw Error(ErrorKind::precondition, "eta fit needs a grid of at least 3 points");
  Eta eta = default_eta(f);
  const double c0 = eta.C;
  eta.C = 1;
  const bool exact = is_exact(f);
  std::vector<Rational> xs, fs;
  for (unsigned i = 0; i <= grid; ++i) {
    xs.push_back(lo + (hi - lo) * fraction(i, grid));
    fs.push_back(point_image(f, xs.back(), exact, precision));
  }
  double worst = 0;
  for (unsigned x = 0; x <= grid; ++x) {
    for (unsigned a = 0; a <= grid; ++a) {
      if (a == x) continue;
      for (unsigned b = 0; b <= grid; ++b) {
        if (b == x) continue;
        const double t = ratio_of(abs(xs[x] - xs[a]), abs(xs[x] - xs[b]));
        const double h = ratio_of(abs(fs[a] - fs[x]), abs(fs[b] - fs[x]));
        worst = std::max(worst, h / eta(t));
      }
    }
  }
  eta.C = std::max(worst, eta.linear ? c0 : 0.0) * margin;
  return eta;
}

Integer ImageTree::count(int m) const {
  Integer n = 0;
  for (const auto& node : levels.at(static_cast<std::size_t>(m))) n += node.multiplicity;
  return n;
}

ImageTree image_tree(const QsMapSpec& f, const BranchTree& tree, int depth, mpfr_prec_t precision,
                     std::size_t budget) {
  validate_map(f);
  if (depth < 0 || depth > tree.max_m()) throw Error(ErrorKind::precondition, "image depth outside the branch tree");
  ImageTree out;
  out.precision = precision;
  out.requested = depth;
  if (is_affine(f)) {
    const auto [a, b] = affine_coeffs(f);
    out.compressed = true;
    out.exact = true;
    out.root_lo = a * tree.root_lo() + b;
    for (int m = 0; m <= depth; ++m) {
      std::vector<ImageNode> nodes;
      for (const auto& c : tree.level(m).classes) {
        ImageNode n;
        n.length = a * c.length;
        n.multiplicity = c.multiplicity;
        if (m < depth) {
          for (const auto& ch : c.children) n.children.push_back({ch.cls, a * ch.offset});
        }
        nodes.push_back(std::move(n));
      }
      out.levels.push_back(std::move(nodes));
    }
    return out;
  }

  out.exact = is_exact(f);
  int D = 0;
  Integer used = 0;
  for (int m = 0; m <= depth; ++m) {
    used += tree.count(m);
    if (used > Integer(static_cast<unsigned long>(budget))) break;
    D = m;
  }
  out.levels.assign(static_cast<std::size_t>(D) + 1, {});
  auto image = [&](const Rational& lo, const Rational& hi, int m) {
    const Enclosure a = eval(f, lo, precision), b = eval(f, hi, precision);
    if (!(a.hi < b.lo) && !(out.exact && a.lo < b.lo)) {
      throw Error(ErrorKind::precision, "image of branch " + std::to_string(out.levels[static_cast<std::size_t>(m)].size()) +
                                            " of T_" + std::to_string(m) + " is not certified nonempty")
          .at_level(m);
    }
    return Enclosure{a.lo, b.hi};
  };
  auto rec = [&](auto& self, int m, std::uint32_t cls, const Rational& lo) -> std::pair<std::uint32_t, Rational> {
    const BranchClass& c = tree.level(m).classes[cls];
    const Enclosure J = image(lo, lo + c.length, m);
    auto& lv = out.levels[static_cast<std::size_t>(m)];
    const auto id = static_cast<std::uint32_t>(lv.size());
    lv.push_back(ImageNode{J.hi - J.lo, Integer(1), {}});
    if (m < D) {
      std::vector<ChildRef> kids;
      for (const auto& ch : c.children) {
        auto [cid, clo] = self(self, m + 1, ch.cls, lo + ch.offset);
        kids.push_back({cid, clo - J.lo});
      }
      out.levels[static_cast<std::size_t>(m)][id].children = std::move(kids);
    }
    return {id, J.lo};
  };
  out.root_lo = rec(rec, 0, 0, tree.root_lo()).second;
  return out;
}

Rational ImageMeasure::level_total(int m) const {
  Rational s = 0;
  for (const auto& t : total.at(static_cast<std::size_t>(m))) s += t;
  return s;
}

ImageMeasure build_mu_d(const ImageTree& image, double d, mpfr_prec_t precision) {
  if (!(d > 0 && d < 1)) throw Error(ErrorKind::precondition, "d must lie in (0, 1)");
  ImageMeasure mu;
  mu.d = d;
  const int D = image.depth();
  const BigFloat dd(d, precision);
  // weight of every node: |J|^d, rounded to nearest then taken exactly
  std::vector<std::vector<Rational>> weight(static_cast<std::size_t>(D) + 1);
  for (int m = 1; m <= D; ++m) {
    for (const auto& n : image.levels[static_cast<std::size_t>(m)]) {
      if (sgn(n.length) <= 0) throw Error(ErrorKind::degenerate, "zero-length image branch").at_level(m);
      BigFloat w(n.length, precision);
      mpfr_pow(w.get(), w.get(), dd.get(), MPFR_RNDN);
      weight[static_cast<std::size_t>(m)].push_back(w.to_rational());
    }
  }
  mu.share.resize(static_cast<std::size_t>(D) + 1);
  mu.max_mass.resize(static_cast<std::size_t>(D) + 1);
  mu.min_mass.resize(static_cast<std::size_t>(D) + 1);
  mu.total.resize(static_cast<std::size_t>(D) + 1);
  mu.max_mass[0] = {Rational(1)};
  mu.min_mass[0] = {Rational(1)};
  mu.total[0] = {Rational(1)};
  for (int m = 0; m < D; ++m) {
    const auto mi = static_cast<std::size_t>(m);
    const auto& nodes = image.levels[mi];
    const auto& w = weight[mi + 1];
    const std::size_t next = image.levels[mi + 1].size();
    std::vector<bool> seen(next, false);
    mu.max_mass[mi + 1].assign(next, Rational(0));
    mu.min_mass[mi + 1].assign(next, Rational(0));
    mu.total[mi + 1].assign(next, Rational(0));
    mu.share[mi].resize(nodes.size());
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      Rational sum = 0;
      for (const auto& ch : nodes[i].children) sum += w[ch.cls];
      auto& sh = mu.share[mi][i];
      for (const auto& ch : nodes[i].children) {
        sh.push_back(w[ch.cls] / sum);
        const Rational& s = sh.back();
        const Rational hi = mu.max_mass[mi][i] * s, lo = mu.min_mass[mi][i] * s;
        auto& mx = mu.max_mass[mi + 1][ch.cls];
        auto& mn = mu.min_mass[mi + 1][ch.cls];
        if (!seen[ch.cls] || hi > mx) mx = hi;
        if (!seen[ch.cls] || lo < mn) mn = lo;
        seen[ch.cls] = true;
        mu.total[mi + 1][ch.cls] += mu.total[mi][i] * s;
      }
    }
  }
  return mu;
}

RatioSeries mass_ratio_series(const ImageTree& image, const ImageMeasure& mu, int K) {
  if (K < 0 || K > image.depth() || K >= static_cast<int>(mu.max_mass.size())) {
    throw Error(ErrorKind::precondition, "ratio series deeper than the measure");
  }
  RatioSeries out;
  for (int m = 0; m <= K; ++m) {
    double best = 0;
    const auto& nodes = image.levels[static_cast<std::size_t>(m)];
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      best = std::max(best, mass_ratio(mu.max_mass[static_cast<std::size_t>(m)][i], nodes[i].length, mu.d));
    }
    out.max_ratio.push_back(best);
  }
  if (K >= 2) {
    std::vector<double> x, y;
    for (int m = 1; m <= K; ++m) {
      x.push_back(m);
      y.push_back(std::log(out.max_ratio[static_cast<std::size_t>(m)]));
    }
    out.growth_rate = fit_line(x, y).slope;
  }
  for (int m = 0; m < K; ++m) {
    const double step = out.max_ratio[static_cast<std::size_t>(m) + 1] / out.max_ratio[static_cast<std::size_t>(m)];
    if (m == 0 || step < out.min_step) out.min_step = step;
    if (m == 0 || step > out.max_step) out.max_step = step;
  }
  return out;
}

Rational mu_d_ball(const ImageTree& image, const ImageMeasure& mu, const Rational& x, const Rational& r) {
  if (sgn(r) < 0) throw Error(ErrorKind::domain, "negative radius");
  const Rational a = x - r, b = x + r;
  const int D = std::min(image.depth(), static_cast<int>(mu.share.size()) - 1);
  Rational total = 0;
  auto rec = [&](auto& self, int m, std::uint32_t node, const Rational& lo, const Rational& mass) -> void {
    const ImageNode& n = image.levels[static_cast<std::size_t>(m)][node];
    const Rational hi = lo + n.length;
    if (hi < a || lo > b) return;
    if (m == D || (a <= lo && hi <= b)) {
      total += mass;
      return;
    }
    const auto& sh = mu.share[static_cast<std::size_t>(m)][node];
    for (std::size_t i = 0; i < n.children.size(); ++i) {
      self(self, m + 1, n.children[i].cls, lo + n.children[i].offset, mass * sh[i]);
    }
  };
  rec(rec, 0, 0, image.root_lo, Rational(1));
  return total;
}

BallAudit ball_audit(const ImageTree& image, const ImageMeasure& mu, const Rational& x,
                     const std::vector<Rational>& r_grid) {
  const Rational hull = image.levels[0][0].length;
  if (x < image.root_lo || x > image.root_lo + hull) throw Error(ErrorKind::precondition, "ball centre outside the hull");
  BallAudit out;
  out.x = x;
  for (const auto& r0 : r_grid) {
    if (sgn(r0) <= 0) throw Error(ErrorKind::precondition, "ball radii must be positive");
    Rational r = r0;
    if (r > hull) {
      r = hull;
      out.clamped = true;
    }
    const Rational m = mu_d_ball(image, mu, x, r);
    out.r.push_back(r);
    out.mass.push_back(m);
    out.ratio.push_back(mass_ratio(m, r, mu.d));
    out.sup_ratio = std::max(out.sup_ratio, out.ratio.back());
  }
  return out;
}

Rational pick_point(const ImageTree& image, std::uint64_t seed) {
  Rational lo = image.root_lo;
  std::uint32_t node = 0;
  for (int m = 0; m < image.depth(); ++m) {
    const auto& n = image.levels[static_cast<std::size_t>(m)][node];
    SplitMix64 rng(stream_key(seed, 0xba11, static_cast<std::uint64_t>(m)));
    const auto i = static_cast<std::size_t>(rng.between(0, n.children.size() - 1));
    lo += n.children[i].offset;
    node = n.children[i].cls;
  }
  return lo;
}

namespace {

template <class T>
void keep_min(std::optional<T>& slot, const T& v) {
  if (!slot || v < *slot) slot = v;
}
template <class T>
void keep_max(std::optional<T>& slot, const T& v) {
  if (!slot || v > *slot) slot = v;
}

}  // namespace

QsStats stats_series(const BranchTree& tree, const StarState& state) {
  const Schedule& sch = tree.schedule();
  QsStats out;
  out.M = sch.M;
  const int top = tree.max_m();
  std::vector<BranchStats> bs;
  for (int m = 0; m <= top; ++m) bs.push_back(branch_stats(tree, m));
  for (int m = 0; m <= top; ++m) {
    QsStatsRow row;
    row.m = m;
    row.l_Tm = bs[static_cast<std::size_t>(m)].total_length;
    const auto& classes = tree.level(m).classes;
    if (m < top) {
      const auto& next = tree.level(m + 1).classes;
      const int target = sch.phase_of(m + 1);
      const Rational dstar = state.level(target).delta;
      for (const auto& c : classes) {
        Rational covered = 0, cursor = 0;
        for (const auto& ch : c.children) {
          keep_max(row.beta, Rational((ch.offset - cursor) / c.length));
          cursor = ch.offset + next[ch.cls].length;
          covered += next[ch.cls].length;
        }
        keep_max(row.beta, Rational((c.length - cursor) / c.length));
        keep_min(row.theta, Rational(covered / c.length));
        // interior star gaps of the target level inside the branch
        const std::uint64_t key = c.key;
        unsigned long from = c.first + 1, to = c.first + c.count;
        if (c.landed) {
          from = 1;
          to = state.base().level(target).n;
        }
        for (unsigned long l = from; l < to; ++l) {
          const Rational gap = state.star_child_offset(target, key, l + 1) - state.star_child_offset(target, key, l) - dstar;
          keep_min(row.kappa, Rational(gap / c.length));
        }
      }
    }
    if (m >= 1) {
      const auto& prev = tree.level(m - 1).classes;
      for (const auto& p : prev) {
        for (const auto& ch : p.children) keep_max(row.chi, Rational(classes[ch.cls].length / p.length));
      }
      const BranchStats& cur = bs[static_cast<std::size_t>(m)];
      const BranchStats& before = bs[static_cast<std::size_t>(m) - 1];
      row.lambda_star = cur.max_len / before.min_len;
      row.lambda_under = cur.min_len / before.max_len;
      const StarLevel& sl = state.level(sch.phase_of(m));
      row.gamma_star = sl.alpha_bar / before.min_len;
      row.gamma_under = sl.alpha_under / before.max_len;
    }
    out.rows.push_back(std::move(row));
  }
  return out;
}

std::vector<int> theta_bound_violations(const QsStats& stats) {
  std::vector<int> out;
  const Rational factor = Rational(stats.M * stats.M + 1);
  for (const auto& r : stats.rows) {
    if (!r.beta || !r.theta) continue;
    const Rational rhs = 1 - factor * *r.beta;
    if (sgn(rhs) > 0 && *r.theta < rhs) out.push_back(r.m);
  }
  return out;
}

SparseCounts sparse_counts(const std::vector<double>& w, double eps) {
  SparseCounts out;
  out.V.push_back(0);
  out.cesaro.push_back(0);
  double sum = 0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (w[i] < 0) throw Error(ErrorKind::precondition, "series must be non-negative");
    sum += w[i];
    out.V.push_back(out.V.back() + (w[i] < eps ? 1 : 0));
    out.cesaro.push_back(sum / static_cast<double>(i + 1));
  }
  return out;
}

std::vector<CountRow> stats_counts(const QsStats& stats, double eps, double alpha) {
  std::vector<CountRow> out;
  const auto& rows = stats.rows;
  CountRow acc;
  for (std::size_t m = 1; m < rows.size(); ++m) {
    acc.m = static_cast<int>(m);
    const bool beta_small = rows[m - 1].beta && rows[m - 1].beta->get_d() < eps;
    const bool chi_small = rows[m].chi && rows[m].chi->get_d() < alpha;
    acc.H += beta_small ? 1 : 0;
    acc.R += chi_small ? 1 : 0;
    acc.PR += beta_small && chi_small ? 1 : 0;
    out.push_back(acc);
  }
  return out;
}

Trend trend_at(const QsStats& stats, int m, double alpha) {
  if (m < 1 || m >= static_cast<int>(stats.rows.size())) throw Error(ErrorKind::precondition, "trend index outside the stats");
  Trend t;
  t.m = m;
  double beta = 0, theta = 0;
  std::size_t s = 0;
  for (int j = 0; j < m; ++j) {
    const auto& r = stats.rows[static_cast<std::size_t>(j)];
    beta += r.beta->get_d();
    theta += log_of(*r.theta);
    const auto& rr = stats.rows[static_cast<std::size_t>(j) + 1];
    if (rr.chi && rr.chi->get_d() < alpha) ++s;
  }
  const double mm = m;
  t.beta_avg = beta / mm;
  t.log_theta = -theta / mm;
  t.log_length = -log_of(stats.rows[static_cast<std::size_t>(m)].l_Tm) / std::log(static_cast<double>(stats.M)) / mm;
  t.chi_miss = 1 - static_cast<double>(s) / mm;
  return t;
}

SandwichFit sandwich_audit(const QsMapSpec& f, const Rational& lo, const Rational& hi, std::size_t pairs,
                           std::uint64_t seed, double rho, mpfr_prec_t precision) {
  validate_map(f);
  if (!(lo < hi)) throw Error(ErrorKind::precondition, "sandwich audit needs lo < hi");
  if (!(rho > 1)) throw Error(ErrorKind::precondition, "dilation factor must exceed 1");
  const bool exact = is_exact(f);
  const Rational rq = rational_from_double(rho);
  SandwichFit out;
  out.rho = rho;
  out.p = 1;
  out.q = 1;
  out.lambda = std::numeric_limits<double>::infinity();
  std::vector<std::pair<double, double>> seen;  // (log rho', log R)
  for (std::size_t i = 0; i < pairs; ++i) {
    SplitMix64 rng(stream_key(seed, 0x5a4d, i));
    Rational u = sample_in(rng, lo, hi), v = sample_in(rng, lo, hi);
    if (u == v) continue;
    if (v < u) std::swap(u, v);
    Rational s1 = sample_in(rng, u, v), s2 = sample_in(rng, u, v);
    if (s1 == s2) continue;
    if (s2 < s1) std::swap(s1, s2);
    const Rational fu = point_image(f, u, exact, precision), fv = point_image(f, v, exact, precision);
    const Rational f1 = point_image(f, s1, exact, precision), f2 = point_image(f, s2, exact, precision);
    const double r = ratio_of(s2 - s1, v - u);
    const double R = ratio_of(f2 - f1, fv - fu);
    if (!(r < 1) || !(R > 0)) continue;
    ++out.pairs;
    seen.emplace_back(std::log(r), std::log(R));
    out.p = std::min(out.p, std::log(R / 4) / std::log(r));
    out.q = std::max(out.q, std::log(R) / std::log(r));
    // K_rho on the outer interval
    const Rational c = (u + v) / 2, half = (v - u) * rq / 2;
    const Rational g1 = point_image(f, c - half, exact, precision), g2 = point_image(f, c + half, exact, precision);
    out.k_rho = std::max(out.k_rho, ratio_of(g2 - g1, fv - fu));
  }
  for (const auto& [lr, lR] : seen) out.lambda = std::min(out.lambda, std::exp(lR - out.q * lr));
  if (seen.empty()) out.lambda = 0;
  return out;
}

void write_qs_stats_csv(const QsStats& stats, std::ostream& out) {
  auto cell = [](const std::optional<Rational>& v) { return v ? to_string(*v) : std::string(); };
  out << "m,beta,theta,chi,kappa,lambda_star,lambda_under,gamma_star,gamma_under,l_Tm\n";
  for (const auto& r : stats.rows) {
    out << r.m << ',' << cell(r.beta) << ',' << cell(r.theta) << ',' << cell(r.chi) << ',' << cell(r.kappa) << ','
        << cell(r.lambda_star) << ',' << cell(r.lambda_under) << ',' << cell(r.gamma_star) << ','
        << cell(r.gamma_under) << ',' << to_string(r.l_Tm) << '\n';
  }
}

void write_ratio_csv(const RatioSeries& s, std::ostream& out) {
  out << "k,max_ratio\n";
  for (std::size_t k = 0; k < s.max_ratio.size(); ++k) out << k << ',' << format_double(s.max_ratio[k]) << '\n';
}

}  // namespace moran
