#include "moran/cli.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "moran/error.hpp"
#include "moran/oracle.hpp"
#include "moran/qsmap.hpp"

namespace moran::cli {

namespace {

using json = nlohmann::ordered_json;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct AuditFailure {};

struct Options {
  std::string preset, spec_file, spec_inline;
  int depth = 8;
  std::string out = "run";
  unsigned threads = 1;
  int precision = 128;
  std::uint64_t seed = 1;
  bool oracle = false;

  int level = -1;
  std::string condition = "A";
  double t = 0.5;
  int k_min = 1;
  int k_max = 4;
  std::string mode = "exhaustive";
  std::size_t samples = 20000;
  std::size_t pair_cap = 1'000'000;
  std::string box_base = "3";
  int box_from = 1;
  int box_to = 0;

  std::string map = "identity";
  double d = 0.9;
  double eps = 0.1;
  double alpha = 0.9;
  std::string r_base = "2";
  int r_from = 1;
  int r_to = 12;
  std::size_t triples = 20000;
  std::size_t pairs = 20000;
  unsigned eta_grid = 48;
  double eta_margin = 1.25;
  std::size_t image_budget = kDefaultImageBudget;
  std::size_t export_budget = kDefaultNodeBudget;
};

std::string rat(const Rational& q) { return to_string(q); }

std::string fmt(double x) { return format_double(x); }

MoranSpec load_spec(const Options& o) {
  const int given = !o.preset.empty() + !o.spec_file.empty() + !o.spec_inline.empty();
  if (given != 1) throw UsageError("exactly one of --preset, --spec, --spec-inline is required");
  if (!o.preset.empty()) return preset(o.preset);
  if (!o.spec_file.empty()) return load_spec_file(o.spec_file);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(o.spec_inline);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::parse, std::string("inline spec: ") + e.what());
  }
  return spec_from_json(j);
}

class Run {
 public:
  Run(std::string command, Options o, std::ostream& out) : command_(std::move(command)), o_(std::move(o)), out_(out) {
    spec_ = load_spec(o_);
    if (o_.depth < 1) throw UsageError("--depth must be >= 1");
    if (o_.precision < 32 || o_.precision > 4096) throw UsageError("--precision must lie in [32, 4096]");
    config_["command"] = command_;
    config_["spec"] = to_json(spec_);
    config_["depth"] = o_.depth;
    config_["precision"] = o_.precision;
    config_["seed"] = o_.seed;
  }

  const MoranSpec& spec() const { return spec_; }
  const Options& opt() const { return o_; }
  json& params() { return config_["params"]; }
  std::ostream& log() { return out_; }

  // Call once every parameter is recorded.
  void seal() {
    hash_ = fnv1a_hex(config_.dump());
    std::filesystem::create_directories(o_.out);
  }
  const std::string& hash() const { return hash_; }

  void write(const std::string& name, const std::string& body) {
    const auto path = std::filesystem::path(o_.out) / name;
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error(ErrorKind::io, "cannot write " + path.string());
    f << body;
    if (!f) throw Error(ErrorKind::io, "write failed for " + path.string());
    artifacts_.push_back(name);
  }
  void write_json(const std::string& name, json j) {
    json full;
    full["config_hash"] = hash_;
    for (auto& [k, v] : j.items()) full[k] = v;
    write(name, full.dump(2) + "\n");
  }
  template <class F>
  void write_with(const std::string& name, F&& f) {
    std::ostringstream s;
    f(s);
    write(name, s.str());
  }

  void finish() {
    json m;
    m["tool"] = "moran";
    m["version"] = "1.0.0";
    m["config_hash"] = hash_;
    m["config"] = config_;
    m["seeds"] = json{{"seed", o_.seed}};
    m["precision_bits"] = o_.precision;
    m["artifacts"] = artifacts_;
    const auto path = std::filesystem::path(o_.out) / "manifest.json";
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error(ErrorKind::io, "cannot write " + path.string());
    f << m.dump(2) << "\n";
  }

 private:
  std::string command_;
  Options o_;
  std::ostream& out_;
  MoranSpec spec_;
  json config_;
  std::string hash_;
  std::vector<std::string> artifacts_;
};

json cert_json(const ConditionCert& c) {
  json j;
  j["depth"] = c.depth;
  j["A"] = c.a_applicable ? json{{"applicable", true}, {"omega1", rat(c.omega1)}, {"omega1_approx", c.omega1.get_d()},
                                 {"witness_k", c.omega1_witness}}
                          : json{{"applicable", false}};
  j["B"] = json{{"applicable", true}, {"omega2", rat(c.omega2)}, {"omega2_approx", c.omega2.get_d()},
                {"witness_k", c.omega2_witness}};
  j["C"] = c.c_applicable ? json{{"applicable", true}, {"omega3", rat(c.omega3)}, {"omega3_approx", c.omega3.get_d()},
                                 {"witness_k", c.omega3_witness}}
                          : json{{"applicable", false}};
  json lv = json::array();
  for (const auto& l : c.levels) {
    lv.push_back({{"k", l.k},
                  {"gap_ratio", rat(l.gap_ratio)},
                  {"length_ratio", rat(l.length_ratio)},
                  {"spread_ratio", rat(l.spread_ratio)}});
  }
  j["levels"] = lv;
  j["omega1"] = c.a_applicable ? json(rat(c.omega1)) : json(nullptr);
  return j;
}

json dims_json(const DimSeries& d) {
  json s = json::array();
  for (double v : d.s) s.push_back(v);
  return {{"depth", d.depth}, {"s", s}, {"window", {d.window_lo, d.window_hi}}, {"tail_min", d.tail_min}};
}

json branch_checks_json(const std::vector<BranchCheck>& checks) {
  json arr = json::array();
  for (const auto& c : checks) {
    arr.push_back({{"m", c.m},
                   {"k", c.k},
                   {"landing", c.landing},
                   {"max_children", c.max_children},
                   {"children_ok", c.children_ok},
                   {"spread_ok", c.spread_ok},
                   {"ratio_ok", c.ratio_ok},
                   {"length_ok", c.length_ok},
                   {"monotone", c.monotone},
                   {"star_match", c.star_match}});
  }
  return arr;
}

bool all_ok(const std::vector<BranchCheck>& v) {
  return std::all_of(v.begin(), v.end(), [](const BranchCheck& c) { return c.ok(); });
}

Condition condition_of(const Options& o) { return parse_condition(o.condition); }

StarState star_state(const Run& r, int depth) { return first_reconstruct(r.spec(), depth); }

// ---------------------------------------------------------------- commands

int cmd_validate(Run& r) {
  r.seal();
  const ValidationReport rep = validate_spec(r.spec(), r.opt().depth);
  json lv = json::array();
  for (const auto& l : rep.levels) {
    lv.push_back({{"k", l.k}, {"n", l.n}, {"c", rat(l.c)}, {"L", rat(l.L)}, {"R", rat(l.R)}, {"slack", rat(l.slack)},
                  {"ok", l.ok()}});
  }
  json j{{"depth", rep.depth}, {"pass", rep.pass}, {"levels", lv}, {"message", rep.message}};
  if (rep.failed_level) j["failed_level"] = *rep.failed_level;
  r.write_json("validate.json", j);
  r.log() << (rep.pass ? "valid" : "invalid") << " through depth " << rep.depth;
  if (!rep.pass) r.log() << ": " << rep.message;
  r.log() << "\n";
  r.finish();
  return rep.pass ? 0 : kErrorBase + static_cast<int>(ErrorKind::invalid_spec);
}

int cmd_build(Run& r) {
  const int K = r.opt().depth;
  const int lv = r.opt().level < 0 ? K : r.opt().level;
  r.params()["level"] = lv;
  r.seal();
  Construction c(r.spec(), std::max(K, lv));
  std::vector<LevelStats> stats;
  for (int k = 1; k <= K; ++k) stats.push_back(level_stats(c, k));
  r.write_with("stats.csv", [&](std::ostream& s) { write_stats_csv(stats, s); });
  const LevelSet set = build_level(c, lv, r.opt().export_budget);
  r.write_with("level.jsonl", [&](std::ostream& s) { export_level(set, s); });
  r.log() << "level " << lv << ": " << set.intervals.size() << " intervals\n";
  r.finish();
  return 0;
}

int cmd_dim(Run& r) {
  const Options& o = r.opt();
  const int K = o.depth;
  const bool box = o.box_to > 0;
  const int lv = o.level < 0 ? K : o.level;
  if (box) {
    r.params()["box"] = {{"base", o.box_base}, {"from", o.box_from}, {"to", o.box_to}, {"level", lv}};
  }
  r.seal();
  const StarState st = star_state(r, K);
  const DimSeries d = dim_series(st, K);
  r.write_with("dim.csv", [&](std::ostream& s) {
    s << "k,s_k\n";
    for (int k = 1; k <= K; ++k) s << k << ',' << fmt(d.at(k)) << '\n';
  });
  json j{{"series", dims_json(d)}};
  r.log() << "s_" << K << " = " << fmt(d.at(K)) << ", trailing min " << fmt(d.tail_min) << "\n";
  if (box) {
    const auto eps = geometric_eps(parse_rational(o.box_base), o.box_from, o.box_to);
    const BoxCount bc = box_count(Construction(r.spec(), lv), lv, eps, o.threads);
    r.write_with("boxcount.csv", [&](std::ostream& s) {
      s << "eps,count\n";
      for (std::size_t i = 0; i < eps.size(); ++i) s << rat(eps[i]) << ',' << bc.counts[i].get_str() << '\n';
    });
    j["box"] = {{"level", lv}, {"slope", bc.fit.slope}, {"intercept", bc.fit.intercept}};
    r.log() << "box-counting slope " << fmt(bc.fit.slope) << "\n";
    if (o.oracle) {
      const auto spans = oracle::naive_level(r.spec(), lv);
      bool match = true;
      for (std::size_t i = 0; i < eps.size(); ++i) match = match && oracle::naive_box_count(spans, eps[i]) == bc.counts[i];
      j["oracle_match"] = match;
      r.log() << "oracle " << (match ? "agrees" : "DISAGREES") << "\n";
    }
  }
  r.write_json("dim.json", j);
  r.finish();
  return 0;
}

int cmd_conditions(Run& r) {
  r.seal();
  const ConditionCert cert = check_conditions(r.spec(), r.opt().depth);
  r.write_json("conditions.json", cert_json(cert));
  if (cert.a_applicable) r.log() << "omega1 = " << rat(cert.omega1) << "\n";
  r.log() << "omega2 = " << rat(cert.omega2) << "\n";
  if (cert.c_applicable) r.log() << "omega3 = " << rat(cert.omega3) << "\n";
  r.finish();
  return 0;
}

int cmd_reconstruct(Run& r) {
  const int K = r.opt().depth;
  r.seal();
  const StarState st = star_state(r, K);
  const auto checks = check_star_identities(st);
  r.write_with("star.csv", [&](std::ostream& s) { write_star_csv(st, s); });
  json arr = json::array();
  bool ok = true;
  for (const auto& c : checks) {
    ok = ok && c.ok();
    arr.push_back({{"k", c.k},
                   {"delta_identity", c.delta_identity},
                   {"gap_shift", c.gap_shift},
                   {"boundary", c.boundary},
                   {"slack_identity", c.slack_identity},
                   {"alpha_identity", c.alpha_identity},
                   {"alpha_dominates", c.alpha_dominates},
                   {"boundary_dominated", c.boundary_dominated},
                   {"consistency", c.consistency},
                   {"nesting", c.nesting}});
  }
  r.write_json("reconstruct.json", {{"pass", ok}, {"checks", arr}});
  r.log() << "star identities " << (ok ? "hold" : "FAIL") << " for k <= " << K << "\n";
  r.finish();
  if (!ok) throw AuditFailure{};
  return 0;
}

struct BranchBundle {
  StarState state;
  ConditionCert cert;
  Schedule schedule;
  BranchTree tree;
};

BranchBundle branch_bundle(const Run& r, int K) {
  StarState st = star_state(r, K);
  ConditionCert cert = check_conditions(st.base(), K);
  Schedule sch = choose_M(cert, st.base(), condition_of(r.opt()));
  BranchTree t = build_T(st, sch, sch.m[static_cast<std::size_t>(K)]);
  return {std::move(st), std::move(cert), std::move(sch), std::move(t)};
}

int cmd_branches(Run& r) {
  const int K = r.opt().depth;
  r.params()["condition"] = r.opt().condition;
  r.seal();
  const BranchBundle b = branch_bundle(r, K);
  const auto checks = check_branches(b.tree, b.state);
  r.write_with("schedule.csv", [&](std::ostream& s) { write_schedule_csv(b.schedule, s); });
  r.write_with("branch_stats.csv", [&](std::ostream& s) { write_branch_stats_csv(b.tree, s); });
  Integer total = 0;
  for (int m = 0; m <= b.tree.max_m(); ++m) total += b.tree.count(m);
  const bool exported = total <= Integer(static_cast<unsigned long>(r.opt().export_budget));
  if (exported) r.write_with("branches.jsonl", [&](std::ostream& s) { export_branches(b.tree, s); });
  const bool ok = all_ok(checks);
  r.write_json("branches.json", {{"M", b.schedule.M},
                                 {"omega", rat(b.schedule.omega)},
                                 {"m_max", b.tree.max_m()},
                                 {"branches_exported", exported},
                                 {"pass", ok},
                                 {"checks", branch_checks_json(checks)}});
  r.log() << "M = " << b.schedule.M << ", m_" << K << " = " << b.tree.max_m() << ", checks "
          << (ok ? "hold" : "FAIL") << (exported ? "" : " (branch export skipped, over budget)") << "\n";
  r.finish();
  if (!ok) throw AuditFailure{};
  return 0;
}

json window_json(const std::optional<Window>& w) {
  if (!w) return nullptr;
  return {{"a", rat(w->a)}, {"b", rat(w->b)}, {"k", w->k}, {"mu", rat(w->mu)}};
}

int cmd_measure_audit(Run& r) {
  const Options& o = r.opt();
  AuditOptions ao;
  ao.condition = condition_of(o);
  ao.t = o.t;
  ao.k_min = o.k_min;
  ao.k_max = o.k_max;
  if (o.mode == "exhaustive") {
    ao.mode = AuditMode::exhaustive;
  } else if (o.mode == "sampled") {
    ao.mode = AuditMode::sampled;
  } else {
    throw UsageError("--mode must be exhaustive or sampled");
  }
  ao.seed = o.seed;
  ao.samples = o.samples;
  ao.pair_cap = o.pair_cap;
  ao.threads = o.threads;
  r.params() = {{"condition", o.condition}, {"t", o.t},           {"k_min", o.k_min},       {"k_max", o.k_max},
                {"mode", o.mode},           {"samples", o.samples}, {"pair_cap", o.pair_cap}};
  r.seal();
  const int D = std::max(o.depth, o.k_max + 1);
  const StarState st = star_state(r, D);
  const ConditionCert cert = check_conditions(st.base(), D);
  const WindowAudit a = frostman_audit(st, cert, ao);
  json lv = json::array();
  for (const auto& l : a.levels) {
    lv.push_back({{"k", l.k}, {"windows", l.windows}, {"worst_ratio", l.worst_ratio}, {"witness", window_json(l.witness)}});
  }
  json j{{"condition", std::string(to_string(a.condition))},
         {"t", a.t},
         {"mode", o.mode},
         {"k0", a.k0},
         {"k_first", a.k_first},
         {"k_last", a.k_last},
         {"constant", rat(a.constant)},
         {"worst_ratio", a.worst_ratio},
         {"witness", window_json(a.witness)},
         {"levels", lv},
         {"pass", a.pass}};
  if (o.oracle && ao.mode == AuditMode::exhaustive) {
    json oj = json::array();
    bool match = true;
    for (const auto& l : a.levels) {
      const auto res = oracle::exhaustive_mu_sweep(r.spec(), l.k, o.t);
      match = match && res.value == l.worst_ratio;
      oj.push_back({{"k", l.k}, {"worst_ratio", res.value}, {"windows", res.size}});
    }
    j["oracle"] = oj;
    j["oracle_match"] = match;
  }
  r.write_json("audit.json", j);
  r.log() << "worst ratio " << fmt(a.worst_ratio) << " vs constant " << rat(a.constant) << " over k = " << a.k_first
          << ".." << a.k_last << ": " << (a.pass ? "pass" : "FAIL") << "\n";
  r.finish();
  if (!a.pass) throw AuditFailure{};
  return 0;
}

std::vector<Rational> radius_grid(const Options& o, const Rational& hull) {
  const Rational base = parse_rational(o.r_base);
  if (base <= 1) throw UsageError("--r-base must exceed 1");
  std::vector<Rational> out;
  for (int j = o.r_from; j <= o.r_to; ++j) out.push_back(hull * pow_rational(base, -j));
  return out;
}

// Everything the qs and report commands share. Writes stats.csv and ratio.csv.
json qs_section(Run& r, const BranchBundle& b, const QsMapSpec& f, bool& ok) {
  const Options& o = r.opt();
  const auto prec = static_cast<mpfr_prec_t>(o.precision);
  json j;
  j["map"] = describe(f);

  const QsStats stats = stats_series(b.tree, b.state);
  r.write_with("stats.csv", [&](std::ostream& s) { write_qs_stats_csv(stats, s); });
  const auto viol = theta_bound_violations(stats);
  j["theta_bound"] = {{"M", stats.M}, {"violations", viol}, {"pass", viol.empty()}};
  ok = ok && viol.empty();

  json counts = json::array();
  for (const auto& c : stats_counts(stats, o.eps, o.alpha)) {
    counts.push_back({{"m", c.m}, {"H", c.H}, {"R", c.R}, {"PR", c.PR}});
  }
  j["counts"] = {{"eps", o.eps}, {"alpha", o.alpha}, {"rows", counts}};
  json trends = json::array();
  for (int m0 = 1; 2 * m0 <= b.tree.max_m(); m0 *= 2) {
    const Trend a = trend_at(stats, m0, o.alpha), c = trend_at(stats, 2 * m0, o.alpha);
    trends.push_back({{"m0", m0},
                      {"beta_avg", {a.beta_avg, c.beta_avg}},
                      {"log_length", {a.log_length, c.log_length}},
                      {"log_theta", {a.log_theta, c.log_theta}},
                      {"chi_miss", {a.chi_miss, c.chi_miss}},
                      {"decreasing", c.beta_avg < a.beta_avg && c.log_length < a.log_length &&
                                         c.log_theta < a.log_theta && c.chi_miss <= a.chi_miss}});
  }
  j["trends"] = trends;

  const ImageTree image = image_tree(f, b.tree, b.tree.max_m(), prec, o.image_budget);
  const ImageMeasure mu = build_mu_d(image, o.d, prec);
  const RatioSeries ratio = mass_ratio_series(image, mu, image.depth());
  r.write_with("ratio.csv", [&](std::ostream& s) { write_ratio_csv(ratio, s); });
  bool conserved = true;
  for (int m = 0; m <= image.depth(); ++m) conserved = conserved && mu.level_total(m) == 1;
  ok = ok && conserved;
  j["image"] = {{"compressed", image.compressed},
                {"exact", image.exact},
                {"depth", image.depth()},
                {"requested_depth", image.requested}};
  j["measure"] = {{"d", o.d}, {"mass_conserved", conserved}};
  json series = json::array();
  for (double v : ratio.max_ratio) series.push_back(v);
  j["ratio_series"] = {{"max_ratio", series},
                {"growth_rate", ratio.growth_rate},
                {"min_step", ratio.min_step},
                {"max_step", ratio.max_step}};

  const Rational hull = image.levels[0][0].length;
  const Rational x = pick_point(image, o.seed);
  const BallAudit ball = ball_audit(image, mu, x, radius_grid(o, hull));
  json balls = json::array();
  for (std::size_t i = 0; i < ball.r.size(); ++i) {
    balls.push_back({{"r", rat(ball.r[i])}, {"mass", rat(ball.mass[i])}, {"ratio", ball.ratio[i]}});
  }
  j["ball"] = {{"x", rat(x)}, {"sup_ratio", ball.sup_ratio}, {"clamped", ball.clamped}, {"radii", balls}};

  const Rational lo = b.tree.root_lo(), hi = lo + b.tree.level(0).classes[0].length;
  Eta eta = default_eta(f);
  if (!eta.linear) eta = fit_eta(f, lo, hi, o.eta_grid, o.eta_margin, prec);
  const TripleAudit tri = qs_triple_audit(f, lo, hi, o.triples, o.seed, eta, prec);
  j["triples"] = {{"eta", eta.describe()},
                  {"samples", tri.samples},
                  {"skipped", tri.skipped},
                  {"worst", tri.worst},
                  {"pass", tri.worst <= 1}};
  ok = ok && tri.worst <= 1;
  const SandwichFit sw = sandwich_audit(f, lo, hi, o.pairs, o.seed, 2, prec);
  j["sandwich"] = {{"p", sw.p}, {"q", sw.q}, {"lambda", sw.lambda}, {"rho", sw.rho}, {"K_rho", sw.k_rho},
                   {"pairs", sw.pairs}};
  return j;
}

void record_qs(Run& r) {
  const Options& o = r.opt();
  r.params() = {{"condition", o.condition}, {"map", describe(parse_map(o.map))},
                {"d", o.d},                 {"eps", o.eps},
                {"alpha", o.alpha},         {"r_grid", {o.r_base, o.r_from, o.r_to}},
                {"triples", o.triples},     {"pairs", o.pairs},
                {"eta_grid", o.eta_grid},   {"eta_margin", o.eta_margin},
                {"image_budget", o.image_budget}};
}

int cmd_qs(Run& r) {
  record_qs(r);
  r.seal();
  const BranchBundle b = branch_bundle(r, r.opt().depth);
  bool ok = true;
  json j = qs_section(r, b, parse_map(r.opt().map), ok);
  j["pass"] = ok;
  r.write_json("qs.json", j);
  r.log() << "qs " << describe(parse_map(r.opt().map)) << ": " << (ok ? "pass" : "FAIL") << "\n";
  r.finish();
  if (!ok) throw AuditFailure{};
  return 0;
}

int cmd_report(Run& r) {
  record_qs(r);
  r.seal();
  const int K = r.opt().depth;
  const BranchBundle b = branch_bundle(r, K);
  const DimSeries d = dim_series(b.state, K);
  const auto checks = check_branches(b.tree, b.state);
  bool ok = all_ok(checks);
  json j;
  j["dim"] = dims_json(d);
  j["conditions"] = cert_json(b.cert);
  j["schedule"] = {{"M", b.schedule.M}, {"omega", rat(b.schedule.omega)}, {"m_max", b.tree.max_m()}};
  j["branch_checks"] = branch_checks_json(checks);
  j["qs"] = qs_section(r, b, parse_map(r.opt().map), ok);
  j["pass"] = ok;
  r.write_json("report.json", j);
  r.log() << "report for " << r.spec().name << " at depth " << K << ": " << (ok ? "pass" : "FAIL") << "\n";
  r.finish();
  if (!ok) throw AuditFailure{};
  return 0;
}

void common(CLI::App* c, Options& o) {
  c->add_option("--preset", o.preset, "named preset");
  c->add_option("--spec", o.spec_file, "spec JSON file");
  c->add_option("--spec-inline", o.spec_inline, "spec as a JSON string");
  c->add_option("--depth", o.depth, "depth K")->check(CLI::Range(1, 4096));
  c->add_option("--out", o.out, "output directory");
  c->add_option("--threads", o.threads, "worker threads")->check(CLI::Range(1u, 256u));
  c->add_option("--precision", o.precision, "MPFR precision in bits");
  c->add_option("--seed", o.seed, "seed for sampled modes");
  c->add_flag("--oracle", o.oracle)->group("");
}

void qs_options(CLI::App* c, Options& o) {
  c->add_option("--condition", o.condition, "A or B");
  c->add_option("--map,--qs", o.map, "map, e.g. power:2 or affine:3,-1+power:1/2");
  c->add_option("--d", o.d, "exponent of mu_d")->check(CLI::Range(0.0, 1.0));
  c->add_option("--eps", o.eps, "small-beta threshold");
  c->add_option("--alpha", o.alpha, "chi threshold");
  c->add_option("--r-base", o.r_base, "ball radii hull * base^-j");
  c->add_option("--r-from", o.r_from);
  c->add_option("--r-to", o.r_to);
  c->add_option("--triples", o.triples, "sampled triples");
  c->add_option("--pairs", o.pairs, "sampled nested pairs");
  c->add_option("--eta-grid", o.eta_grid, "grid for fitting eta");
  c->add_option("--eta-margin", o.eta_margin);
  c->add_option("--image-budget", o.image_budget, "node budget for non-affine images");
}

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"homogeneous Moran sets: construction and audits", "moran"};
  app.require_subcommand(1);
  Options o;
  std::vector<std::pair<CLI::App*, int (*)(Run&)>> cmds;
  auto add = [&](const char* name, const char* help, int (*fn)(Run&)) {
    CLI::App* c = app.add_subcommand(name, help);
    common(c, o);
    cmds.emplace_back(c, fn);
    return c;
  };
  add("validate", "check the spec level by level", cmd_validate);
  auto* build = add("build", "level statistics and one exported level", cmd_build);
  build->add_option("--level", o.level, "level to export (default: depth)");
  build->add_option("--budget", o.export_budget, "interval budget");
  auto* dim = add("dim", "dimension formula series and box counting", cmd_dim);
  dim->add_option("--level", o.level, "level used for box counting");
  dim->add_option("--box-base", o.box_base);
  dim->add_option("--box-from", o.box_from);
  dim->add_option("--box-to", o.box_to, "enable box counting with eps = base^-j, j = from..to");
  add("conditions", "certificate for conditions A, B, C", cmd_conditions);
  add("reconstruct", "trimmed intervals and their identities", cmd_reconstruct);
  auto* br = add("branches", "branch tree and its checks", cmd_branches);
  br->add_option("--condition", o.condition, "A or B");
  br->add_option("--budget", o.export_budget, "branch export budget");
  auto* ma = add("measure-audit", "mass bound audit over windows", cmd_measure_audit);
  ma->add_option("--condition", o.condition, "A, B or C");
  ma->add_option("--t", o.t, "exponent");
  ma->add_option("--k-min", o.k_min);
  ma->add_option("--k-max", o.k_max);
  ma->add_option("--mode", o.mode, "exhaustive or sampled");
  ma->add_option("--samples", o.samples);
  ma->add_option("--pair-cap", o.pair_cap);
  qs_options(add("qs", "image tree, mu_d and the branch statistics", cmd_qs), o);
  qs_options(add("report", "bundle of the main results", cmd_report), o);

  std::vector<std::string> argv_store{"moran"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& s : argv_store) argv.push_back(s.data());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "moran: " << e.what() << "\n";
    return kUsage;
  }
  for (auto& [c, fn] : cmds) {
    if (!c->parsed()) continue;
    if (c->get_option("--help")->count() > 0) {
      out << c->help();
      return 0;
    }
    try {
      Run run(c->get_name(), o, out);
      return fn(run);
    } catch (const UsageError& e) {
      err << "moran: " << e.what() << "\n";
      return kUsage;
    } catch (const AuditFailure&) {
      return kAuditFailed;
    } catch (const Error& e) {
      err << "moran: " << to_string(e.kind()) << ": " << e.what();
      if (e.level() >= 0) err << " (level " << e.level() << ")";
      err << "\n";
      return kErrorBase + static_cast<int>(e.kind());
    } catch (const std::exception& e) {
      err << "moran: " << e.what() << "\n";
      return kInternal;
    }
  }
  return kUsage;
}

}  // namespace

std::string fnv1a_hex(const std::string& text) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  return dispatch(args, out, err);
}

int run(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace moran::cli
