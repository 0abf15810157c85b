// Config-driven experiments: parsing and validation, execution, and the
// per-run directory (CSV tables, summary.json, plot.svg, run.json).
#pragma once

#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "epilab/comparison.hpp"
#include "epilab/core.hpp"
#include "epilab/estimates.hpp"
#include "epilab/geometry.hpp"
#include "epilab/io.hpp"
#include "epilab/moving_plane.hpp"
#include "epilab/nonlinearity.hpp"
#include "epilab/profiles.hpp"
#include "epilab/solver.hpp"

namespace epilab::experiment {

namespace fs = std::filesystem;
using io::json;
using nonlinearity::Nonlinearity;

inline constexpr const char* kVersion = "epilab 1.0.0";

inline const std::vector<std::string>& experiment_tags() {
  static const std::vector<std::string> tags{"solve",    "moving_plane", "threshold_scan", "uniqueness",
                                             "symmetry", "section",      "estimates",      "verify_examples"};
  return tags;
}

// ---------------------------------------------------------------------------
// Config reading
// ---------------------------------------------------------------------------

/// A JSON object whose keys are consumed one by one; finish() rejects the
/// rest.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) bad("", "must be an object");
  }

  const std::string& path() const { return path_; }
  bool has(const std::string& key) const { return j_.contains(key); }

  [[noreturn]] void bad(const std::string& key, const std::string& what) const {
    fail(ErrorKind::validation, "config: " + full(key) + " " + what);
  }

  double number(const std::string& key) {
    const json& v = get(key);
    if (!v.is_number()) bad(key, "must be a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) bad(key, "must be finite");
    return d;
  }
  double number(const std::string& key, double def) { return has(key) ? number(key) : (mark(key), def); }
  double positive(const std::string& key, std::optional<double> def = std::nullopt) {
    if (!has(key) && def) return mark(key), *def;
    const double d = number(key);
    if (!(d > 0.0)) bad(key, "must be positive");
    return d;
  }
  double nonnegative(const std::string& key, std::optional<double> def = std::nullopt) {
    if (!has(key) && def) return mark(key), *def;
    const double d = number(key);
    if (d < 0.0) bad(key, "must be >= 0");
    return d;
  }
  long long integer(const std::string& key, std::optional<long long> def = std::nullopt, long long min = 0) {
    if (!has(key) && def) return mark(key), *def;
    const json& v = get(key);
    if (!v.is_number_integer()) bad(key, "must be an integer");
    const long long i = v.get<long long>();
    if (i < min) bad(key, "must be >= " + std::to_string(min));
    return i;
  }
  std::string string(const std::string& key, std::optional<std::string> def = std::nullopt) {
    if (!has(key) && def) return mark(key), *def;
    const json& v = get(key);
    if (!v.is_string()) bad(key, "must be a string");
    return v.get<std::string>();
  }
  std::string choice(const std::string& key, const std::vector<std::string>& options,
                     std::optional<std::string> def = std::nullopt) {
    const std::string s = string(key, def);
    if (std::find(options.begin(), options.end(), s) == options.end()) {
      std::string list;
      for (const auto& o : options) list += (list.empty() ? "" : ", ") + o;
      bad(key, "must be one of: " + list + " (got '" + s + "')");
    }
    return s;
  }
  bool boolean(const std::string& key, std::optional<bool> def = std::nullopt) {
    if (!has(key) && def) return mark(key), *def;
    const json& v = get(key);
    if (!v.is_boolean()) bad(key, "must be true or false");
    return v.get<bool>();
  }
  std::optional<bool> maybe_boolean(const std::string& key) {
    if (!has(key)) return std::nullopt;
    return boolean(key);
  }
  std::optional<double> maybe_number(const std::string& key) {
    if (!has(key)) return std::nullopt;
    return number(key);
  }
  std::vector<double> numbers(const std::string& key, std::optional<std::size_t> size = std::nullopt) {
    const json& v = get(key);
    if (!v.is_array()) bad(key, "must be an array of numbers");
    std::vector<double> out;
    for (const auto& e : v) {
      if (!e.is_number() || !std::isfinite(e.get<double>())) bad(key, "must hold finite numbers only");
      out.push_back(e.get<double>());
    }
    if (size && out.size() != *size) bad(key, "must have " + std::to_string(*size) + " entries");
    return out;
  }
  bool is_object(const std::string& key) const { return has(key) && j_.at(key).is_object(); }
  std::vector<std::string> strings(const std::string& key, const std::vector<std::string>& allowed) {
    const json& v = get(key);
    if (!v.is_array() || v.empty()) bad(key, "must be a nonempty array of strings");
    std::vector<std::string> out;
    for (const auto& e : v) {
      if (!e.is_string()) bad(key, "must hold strings");
      const auto t = e.get<std::string>();
      if (std::find(allowed.begin(), allowed.end(), t) == allowed.end()) bad(key, "has unknown entry '" + t + "'");
      out.push_back(t);
    }
    return out;
  }
  Section object(const std::string& key) { return Section(get(key), full(key)); }
  std::optional<Section> maybe_object(const std::string& key) {
    if (!has(key)) return std::nullopt;
    return object(key);
  }
  std::vector<Section> objects(const std::string& key) {
    const json& v = get(key);
    if (!v.is_array()) bad(key, "must be an array of objects");
    std::vector<Section> out;
    for (std::size_t i = 0; i < v.size(); ++i) out.emplace_back(v[i], full(key) + "[" + std::to_string(i) + "]");
    return out;
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!used_.count(it.key())) fail(ErrorKind::validation, "config: unknown key " + full(it.key()));
  }

 private:
  std::string full(const std::string& key) const {
    if (key.empty()) return path_.empty() ? "<root>" : path_;
    return path_.empty() ? key : path_ + "." + key;
  }
  void mark(const std::string& key) { used_.insert(key); }
  const json& get(const std::string& key) {
    if (!j_.contains(key)) bad(key, "is required");
    mark(key);
    return j_.at(key);
  }

  const json& j_;
  std::string path_;
  std::set<std::string> used_;
};

// ---------------------------------------------------------------------------
// Catalog parsing
// ---------------------------------------------------------------------------

using SetPtr = std::shared_ptr<const geometry::OpenSet>;

inline std::vector<double> linspace_csv_column(const std::vector<std::vector<double>>& rows, std::size_t col) {
  std::vector<double> out;
  for (const auto& r : rows) out.push_back(r[col]);
  return out;
}

/// custom_sampled g from CSV columns x_1..x_{N-1}, g on a tensor lattice.
inline geometry::EpigraphSpec sampled_from_csv(const fs::path& path, int dim) {
  const auto rows = io::read_numeric_csv(path, static_cast<std::size_t>(dim));
  require(!rows.empty(), "custom_sampled: " + path.string() + " has no rows");
  geometry::SampledG g;
  for (int a = 0; a + 1 < dim; ++a) {
    std::set<double> s;
    for (const auto& r : rows) s.insert(r[a]);
    g.axes.emplace_back(s.begin(), s.end());
  }
  std::size_t count = 1;
  for (const auto& ax : g.axes) count *= ax.size();
  require(rows.size() == count, "custom_sampled: " + path.string() + " is not a full tensor lattice");
  g.values.assign(count, std::numeric_limits<double>::quiet_NaN());
  for (const auto& r : rows) {
    std::size_t idx = 0;
    for (int a = 0; a + 1 < dim; ++a) {
      const auto& ax = g.axes[a];
      idx = idx * ax.size() + static_cast<std::size_t>(std::lower_bound(ax.begin(), ax.end(), r[a]) - ax.begin());
    }
    g.values[idx] = r[dim - 1];
  }
  auto spec = geometry::make_sampled(dim, std::move(g));
  std::vector<std::vector<double>> lattice;
  // Normalize on the sample points themselves.
  for (const auto& r : rows) lattice.emplace_back(r.begin(), r.end() - 1);
  return geometry::normalized(spec, lattice);
}

inline geometry::EpigraphSpec parse_epigraph(Section& s, int dim, const fs::path& base) {
  const auto kind = s.choice("epigraph", geometry::epigraph_catalog());
  if (kind == "half_space") return geometry::make_half_space(dim);
  if (kind == "lipschitz_g1") return geometry::make_g1(dim);
  if (kind == "lipschitz_g2") return geometry::make_g2(dim);
  if (kind == "coercive_quadratic") return geometry::make_coercive_quadratic(dim);
  if (kind == "exp_x1") return geometry::make_exp_x1(dim);
  if (kind == "weierstrass") {
    const long long b = s.integer("b", 2, 2);
    const double alpha = s.positive("alpha", 0.5);
    if (!(alpha < 1.0)) s.bad("alpha", "must lie in (0, 1)");
    const double tol = s.positive("tol", 1e-12);
    return geometry::make_weierstrass(static_cast<int>(b), alpha, tol, dim);
  }
  fs::path p = s.string("csv");
  if (p.is_relative()) p = base / p;
  return sampled_from_csv(p, dim);
}

inline SetPtr parse_domain(Section s, const fs::path& base) {
  const auto kind = s.choice("kind", {"strip", "epigraph", "omega1", "omega3", "orthant", "ball", "revolution"});
  const int dim = static_cast<int>(s.integer("dimension", 2, 1));
  if (dim > kMaxDim) s.bad("dimension", "must be at most " + std::to_string(kMaxDim));
  SetPtr out;
  if (kind == "strip") {
    const double lo = s.number("lo"), hi = s.number("hi");
    if (!(lo < hi)) s.bad("hi", "must exceed lo");
    out = std::make_shared<const geometry::OpenSet>(geometry::OpenSet::strip(lo, hi, dim));
  } else if (kind == "epigraph") {
    if (dim < 2) s.bad("dimension", "must be >= 2 for epigraphs");
    out = std::make_shared<const geometry::OpenSet>(geometry::OpenSet::epigraph(parse_epigraph(s, dim, base)));
  } else if (kind == "omega1" || kind == "omega3") {
    if (dim != 2) s.bad("dimension", "must be 2 for " + kind);
    out = std::make_shared<const geometry::OpenSet>(kind == "omega1" ? geometry::OpenSet::omega1()
                                                                      : geometry::OpenSet::omega3());
  } else if (kind == "orthant") {
    out = std::make_shared<const geometry::OpenSet>(geometry::OpenSet::orthant(dim));
  } else if (kind == "ball") {
    const auto c = s.numbers("center", static_cast<std::size_t>(dim));
    Coord center{};
    for (int a = 0; a < dim; ++a) center[a] = c[a];
    out = std::make_shared<const geometry::OpenSet>(geometry::OpenSet::ball(center, s.positive("radius"), dim));
  } else {
    if (dim < 2) s.bad("dimension", "must be >= 2 for revolution domains");
    if (s.has("samples")) {
      auto smp = s.object("samples");
      auto xs = smp.numbers("x");
      auto ph = smp.numbers("phi", xs.size());
      smp.finish();
      if (xs.size() < 2) s.bad("samples.x", "needs at least two points");
      for (std::size_t i = 1; i < xs.size(); ++i)
        if (!(xs[i] > xs[i - 1])) s.bad("samples.x", "must be strictly increasing");
      for (double v : ph)
        if (!(v > 0.0)) s.bad("samples.phi", "must be positive");
      auto phi = [xs, ph](double x) {
        if (x <= xs.front()) return ph.front();
        if (x >= xs.back()) return ph.back();
        const auto k = static_cast<std::size_t>(std::upper_bound(xs.begin(), xs.end(), x) - xs.begin());
        const double t = (x - xs[k - 1]) / (xs[k] - xs[k - 1]);
        return (1 - t) * ph[k - 1] + t * ph[k];
      };
      out = std::make_shared<const geometry::OpenSet>(geometry::OpenSet::revolution(phi, "samples", dim));
    } else {
      const double mean = s.positive("mean");
      const double amp = s.number("amplitude");
      if (!(mean > std::abs(amp))) s.bad("amplitude", "must be smaller than mean in absolute value");
      out = std::make_shared<const geometry::OpenSet>(geometry::OpenSet::revolution_cosine(mean, amp, dim));
    }
  }
  s.finish();
  return out;
}

inline std::vector<std::string> nonlinearity_tags() {
  return {"constant", "linear", "allen_cahn", "power", "plateau", "sign_change", "custom_table"};
}

inline Nonlinearity parse_nonlinearity(Section s, const fs::path& base) {
  const auto kind = s.choice("kind", nonlinearity_tags());
  Nonlinearity f;
  if (kind == "constant") f = nonlinearity::constant(s.number("K"));
  else if (kind == "linear") f = nonlinearity::linear(s.number("c"));
  else if (kind == "allen_cahn") f = nonlinearity::allen_cahn();
  else if (kind == "power") f = nonlinearity::power(s.positive("q"));
  else if (kind == "plateau") f = nonlinearity::plateau();
  else if (kind == "sign_change") f = nonlinearity::sign_change();
  else {
    std::vector<double> t, v;
    if (s.has("csv")) {
      fs::path p = s.string("csv");
      if (p.is_relative()) p = base / p;
      const auto rows = io::read_numeric_csv(p, 2);
      t = linspace_csv_column(rows, 0);
      v = linspace_csv_column(rows, 1);
    } else {
      t = s.numbers("t");
      v = s.numbers("f", t.size());
    }
    f = nonlinearity::table(t, v);
  }
  s.finish();
  return f;
}

struct GridSpec {
  discretization::Box box;
  double h = 0.0;
};

inline GridSpec parse_grid(Section s, int dim) {
  GridSpec g;
  g.box.dim = dim;
  const auto lo = s.numbers("box_lo", static_cast<std::size_t>(dim));
  const auto hi = s.numbers("box_hi", static_cast<std::size_t>(dim));
  g.h = s.positive("h");
  for (int a = 0; a < dim; ++a) {
    g.box.lo[a] = lo[a];
    g.box.hi[a] = hi[a];
    if (!(hi[a] > lo[a])) s.bad("box_hi", "must exceed box_lo on every axis");
    const double steps = std::round((hi[a] - lo[a]) / g.h);
    if (std::abs(steps * g.h - (hi[a] - lo[a])) > 1e-9 * std::max(1.0, hi[a] - lo[a]))
      s.bad("h", "must divide the box extent along axis " + std::to_string(a));
    if (steps < 2) s.bad("h", "leaves fewer than two cells along axis " + std::to_string(a));
  }
  s.finish();
  return g;
}

inline solver::SemilinearPolicy parse_policy(std::optional<Section> s) {
  solver::SemilinearPolicy p;
  if (!s) return p;
  const auto m = s->choice("method", {"newton", "picard"}, "newton");
  p.method = m == "newton" ? solver::Method::newton : solver::Method::picard;
  p.tol = s->positive("tol", p.tol);
  p.max_iterations = static_cast<int>(s->integer("max_iterations", p.max_iterations, 1));
  p.damping = s->positive("damping", p.damping);
  if (p.damping > 1.0) s->bad("damping", "must lie in (0, 1]");
  s->finish();
  return p;
}

inline std::vector<std::string> profile_tags() {
  return {"plateau", "double_bump", "tanh_front", "sine", "strip_torsion"};
}

/// Closed-form profile by tag; strip_torsion needs the strip's bounds.
inline profiles::Profile profile_by_tag(const std::string& tag, const geometry::OpenSet* set = nullptr) {
  if (tag == "plateau") return profiles::plateau();
  if (tag == "double_bump") return profiles::double_bump();
  if (tag == "tanh_front") return profiles::tanh_front();
  if (tag == "sine") return profiles::sine();
  if (tag == "strip_torsion") {
    const auto* st = set ? std::get_if<geometry::Strip>(&set->shape()) : nullptr;
    require(st != nullptr, "strip_torsion profile needs a strip domain");
    return profiles::strip_torsion(st->lo, st->hi);
  }
  fail(ErrorKind::validation, "unknown profile " + tag);
}

// ---------------------------------------------------------------------------
// Typed experiment configs
// ---------------------------------------------------------------------------

struct SolveConfig {
  SetPtr domain;
  Nonlinearity f;
  GridSpec grid;
  solver::SemilinearPolicy policy;
  std::optional<std::string> trace_profile;
  double residual_tol = 1e-8;
  std::optional<double> profile_tol;
};

struct MovingPlaneConfig {
  SetPtr domain;
  GridSpec grid;
  std::string field;  // profile tag or "solve"
  std::optional<Nonlinearity> f;
  std::optional<std::string> trace_profile;  // trace for field = solve
  solver::SemilinearPolicy policy;
  double lambda_max = 1.0, lambda_step = 0.1;
  std::vector<double> hopf_planes;
  double cap_tol = 1e-8;
  double hopf_constant = 1.0;
  std::optional<bool> expect_caps_ordered, expect_strict, expect_sign_change;
  std::optional<double> expect_zero_slope_above;
};

struct ScanConfig {
  double L = 1.0;
  std::vector<double> widths;
  int cells = 128;
  int pairs = 20;
  double comparison_tol = 1e-10;
  double width_rel = 0.02;
};

struct UniquenessConfig {
  SetPtr domain;
  GridSpec grid;
  Nonlinearity f;
  solver::SemilinearPolicy policy;
  int restarts = 20;
  double amplitude = 1.0;
  double zero_tol = 1e-8;
  std::optional<double> section;
};

struct IsometryCheck {
  comparison::Isometry rho;
  double tol = 0.0;
};

struct SymmetryConfig {
  SetPtr domain;
  GridSpec grid;
  Nonlinearity f;
  solver::SemilinearPolicy policy;
  std::vector<IsometryCheck> isometries;
  std::optional<std::string> exact;
  bool exact_trace = false;
  double exact_tol = 1e-12;
};

struct LineExpectation {
  std::vector<double> x;
  double measure = 0.0;
  double tol = 1e-6;
};

struct SectionConfig {
  SetPtr set;
  std::vector<double> direction;
  double probe_lo = -10, probe_hi = 10;
  int probe_count = 201;
  geometry::SectionOptions opt;
  std::optional<double> expect_max;
  std::optional<double> expect_value;
  std::optional<bool> expect_bounded;
  std::vector<LineExpectation> expect_lines;
};

struct EstimatesConfig {
  std::vector<std::string> brandt_cases;
  int brandt_probes = 100;
  std::vector<std::string> oscillation_probes;
  std::vector<double> hs;
  double alpha_min = 0.05;
  double refinement_tol = 0.15;
};

struct VerifyConfig {
  std::vector<double> hs{1.0 / 32, 1.0 / 64, 1.0 / 128};
  double height = 6.0;
  double order_min = 1.8;
  double cap_tol = 1e-10;
  double tanh_cap_tol = 1e-8;
  double hopf_constant = 1.0;
};

using Spec = std::variant<SolveConfig, MovingPlaneConfig, ScanConfig, UniquenessConfig, SymmetryConfig,
                          SectionConfig, EstimatesConfig, VerifyConfig>;

struct ExperimentConfig {
  std::string experiment;
  std::uint64_t seed = 1;
  fs::path output_dir;
  std::string hash;
  json raw;
  Spec spec;
};

inline std::vector<std::string> brandt_case_tags() { return {"tanh_front", "sine", "disk_torsion"}; }

inline std::vector<std::string> boundary_probe_tags() {
  std::vector<std::string> out;
  for (const auto& p : estimates::boundary_probes()) out.push_back(p.name);
  return out;
}

/// Parses and validates everything before any compute. base resolves
/// relative CSV paths.
inline ExperimentConfig parse_config(const json& doc, const fs::path& base = ".") {
  Section root(doc, "");
  ExperimentConfig cfg;
  cfg.raw = doc;
  cfg.experiment = root.choice("experiment", experiment_tags());
  cfg.seed = static_cast<std::uint64_t>(root.integer("seed", 1, 0));
  cfg.output_dir = root.string("output_dir", "");
  {
    const nlohmann::json canonical = nlohmann::json::parse(doc.dump());
    cfg.hash = io::hex64(io::fnv1a(canonical.dump()));
  }
  auto tolerances = root.maybe_object("tolerances");
  auto opt_number = [&](const std::string& key, double def) {
    return tolerances ? tolerances->positive(key, def) : def;
  };
  const std::string& tag = cfg.experiment;

  auto domain_and_grid = [&](SetPtr& domain, GridSpec& grid) {
    domain = parse_domain(root.object("domain"), base);
    grid = parse_grid(root.object("grid"), domain->dim());
  };

  if (tag == "solve") {
    SolveConfig c;
    domain_and_grid(c.domain, c.grid);
    c.f = parse_nonlinearity(root.object("nonlinearity"), base);
    auto s = root.maybe_object("solve");
    if (s) {
      if (s->has("trace")) c.trace_profile = s->choice("trace", profile_tags());
      c.policy = parse_policy(s->maybe_object("policy"));
      s->finish();
    }
    c.residual_tol = opt_number("residual", 1e-8);
    if (c.trace_profile) c.profile_tol = opt_number("profile", 1e-2);
    if (c.trace_profile) profile_by_tag(*c.trace_profile, c.domain.get());
    cfg.spec = std::move(c);
  } else if (tag == "moving_plane") {
    MovingPlaneConfig c;
    domain_and_grid(c.domain, c.grid);
    if (!c.domain->epigraph_spec()) root.bad("domain.kind", "must be epigraph for moving_plane");
    auto s = root.object("moving_plane");
    std::vector<std::string> fields = profile_tags();
    fields.push_back("solve");
    c.field = s.choice("field", fields);
    if (c.field == "solve") {
      c.f = parse_nonlinearity(root.object("nonlinearity"), base);
      c.policy = parse_policy(s.maybe_object("policy"));
      if (s.has("trace")) c.trace_profile = s.choice("trace", profile_tags());
    }
    c.lambda_max = s.positive("lambda_max");
    c.lambda_step = s.positive("lambda_step");
    if (s.has("hopf_planes")) c.hopf_planes = s.numbers("hopf_planes");
    if (auto e = s.maybe_object("expect")) {
      c.expect_caps_ordered = e->maybe_boolean("caps_ordered");
      c.expect_strict = e->maybe_boolean("strict");
      c.expect_sign_change = e->maybe_boolean("sign_change");
      c.expect_zero_slope_above = e->maybe_number("zero_slope_above");
      e->finish();
    }
    s.finish();
    c.cap_tol = opt_number("cap", 1e-8);
    c.hopf_constant = opt_number("hopf_constant", 1.0);
    cfg.spec = std::move(c);
  } else if (tag == "threshold_scan") {
    ScanConfig c;
    auto s = root.object("threshold_scan");
    c.L = s.positive("L");
    if (s.is_object("widths")) {
      auto w = s.object("widths");
      const double from = w.positive("from"), to = w.positive("to"), step = w.positive("step");
      w.finish();
      if (to < from) s.bad("widths.to", "must be >= widths.from");
      const auto n = static_cast<long>(std::floor((to - from) / step + 1e-9));
      for (long k = 0; k <= n; ++k) c.widths.push_back(from + k * step);
    } else {
      c.widths = s.numbers("widths");
      if (c.widths.empty()) s.bad("widths", "must be nonempty");
      for (std::size_t i = 0; i < c.widths.size(); ++i) {
        if (!(c.widths[i] > 0)) s.bad("widths", "must be positive");
        if (i && !(c.widths[i] > c.widths[i - 1])) s.bad("widths", "must increase");
      }
    }
    c.cells = static_cast<int>(s.integer("cells_per_width", 128, 4));
    c.pairs = static_cast<int>(s.integer("pairs", 20, 0));
    s.finish();
    c.comparison_tol = opt_number("comparison", 1e-10);
    c.width_rel = opt_number("width_rel", 0.02);
    cfg.spec = std::move(c);
  } else if (tag == "uniqueness") {
    UniquenessConfig c;
    domain_and_grid(c.domain, c.grid);
    c.f = parse_nonlinearity(root.object("nonlinearity"), base);
    if (c.f.f0() != 0.0) root.bad("nonlinearity", "must satisfy f(0) = 0 for uniqueness");
    auto s = root.object("uniqueness");
    c.restarts = static_cast<int>(s.integer("restarts", 20, 1));
    c.amplitude = s.positive("amplitude", 1.0);
    c.section = s.maybe_number("section");
    if (c.section && !(*c.section > 0)) s.bad("section", "must be positive");
    c.policy = parse_policy(s.maybe_object("policy"));
    s.finish();
    c.zero_tol = opt_number("zero", 1e-8);
    cfg.spec = std::move(c);
  } else if (tag == "symmetry") {
    SymmetryConfig c;
    domain_and_grid(c.domain, c.grid);
    c.f = parse_nonlinearity(root.object("nonlinearity"), base);
    auto s = root.object("symmetry");
    const double default_tol = opt_number("symmetry", 1e-10);
    for (auto& e : s.objects("isometries")) {
      IsometryCheck ic;
      const auto kind = e.choice("kind", {"identity", "reflection", "translation"});
      const int axis = static_cast<int>(e.integer("axis", 0, 0));
      if (axis >= c.domain->dim()) e.bad("axis", "exceeds the domain dimension");
      const double at = kind == "identity" ? 0.0 : e.number("at");
      const double buffer = e.nonnegative("buffer", 0.0);
      ic.rho = kind == "identity"     ? comparison::Isometry::identity()
               : kind == "reflection" ? comparison::Isometry::reflection(axis, at, buffer)
                                      : comparison::Isometry::translation(axis, at, buffer);
      ic.tol = e.nonnegative("tol", default_tol);
      e.finish();
      c.isometries.push_back(ic);
    }
    if (s.has("exact")) {
      c.exact = s.choice("exact", {"strip_torsion"});
      profile_by_tag(*c.exact, c.domain.get());
      c.exact_trace = s.boolean("exact_trace", false);
    }
    c.policy = parse_policy(s.maybe_object("policy"));
    s.finish();
    c.exact_tol = opt_number("exact", 1e-12);
    cfg.spec = std::move(c);
  } else if (tag == "section") {
    SectionConfig c;
    c.set = parse_domain(root.object("domain"), base);
    auto s = root.object("section");
    const int dim = c.set->dim();
    if (s.has("direction")) {
      c.direction = s.numbers("direction", static_cast<std::size_t>(dim));
    } else {
      c.direction.assign(dim, 0.0);
      c.direction[dim - 1] = 1.0;
    }
    double n2 = 0;
    for (double v : c.direction) n2 += v * v;
    if (std::abs(n2 - 1.0) > 1e-12) s.bad("direction", "must be a unit vector");
    if (dim > 2) s.bad("direction", "probe grids are one-dimensional; use a planar set");
    if (auto p = s.maybe_object("probe")) {
      c.probe_lo = p->number("lo");
      c.probe_hi = p->number("hi");
      c.probe_count = static_cast<int>(p->integer("count", 201, 1));
      if (!(c.probe_hi >= c.probe_lo)) p->bad("hi", "must be >= lo");
      p->finish();
    }
    c.opt.line_resolution = s.positive("line_resolution", 0.01);
    c.opt.window = s.positive("window", 100.0);
    if (auto e = s.maybe_object("expect")) {
      c.expect_max = e->maybe_number("max_value");
      c.expect_value = e->maybe_number("value");
      c.expect_bounded = e->maybe_boolean("bounded");
      if (e->has("lines"))
        for (auto& l : e->objects("lines")) {
          LineExpectation le;
          le.x = l.numbers("x", static_cast<std::size_t>(dim - 1));
          le.measure = l.nonnegative("measure");
          le.tol = l.positive("tol", 1e-6);
          l.finish();
          c.expect_lines.push_back(le);
        }
      e->finish();
    }
    s.finish();
    cfg.spec = std::move(c);
  } else if (tag == "estimates") {
    EstimatesConfig c;
    auto s = root.object("estimates");
    c.brandt_cases = s.has("brandt_cases") ? s.strings("brandt_cases", brandt_case_tags()) : brandt_case_tags();
    c.brandt_probes = static_cast<int>(s.integer("brandt_probes", 100, 1));
    c.oscillation_probes = s.has("oscillation_probes")
                               ? s.strings("oscillation_probes", boundary_probe_tags())
                               : boundary_probe_tags();
    c.hs = s.has("h") ? s.numbers("h") : std::vector<double>{1.0 / 16, 1.0 / 32};
    if (c.hs.size() < 2) s.bad("h", "needs at least two spacings for the refinement check");
    for (double h : c.hs)
      if (!(h > 0)) s.bad("h", "must be positive");
    s.finish();
    c.alpha_min = opt_number("alpha_min", 0.05);
    c.refinement_tol = opt_number("refinement", 0.15);
    cfg.spec = std::move(c);
  } else {
    VerifyConfig c;
    if (auto s = root.maybe_object("verify_examples")) {
      if (s->has("h")) c.hs = s->numbers("h");
      if (c.hs.size() < 2) s->bad("h", "needs at least two spacings");
      for (double h : c.hs)
        if (!(h > 0)) s->bad("h", "must be positive");
      c.height = s->positive("height", 6.0);
      s->finish();
    }
    c.order_min = opt_number("order", 1.8);
    c.cap_tol = opt_number("cap", 1e-10);
    c.tanh_cap_tol = opt_number("tanh_cap", 1e-8);
    c.hopf_constant = opt_number("hopf_constant", 1.0);
    cfg.spec = std::move(c);
  }
  if (tolerances) tolerances->finish();
  root.finish();
  return cfg;
}


// ---------------------------------------------------------------------------
// Execution
// ---------------------------------------------------------------------------

using discretization::DomainGrid;
using solver::Problem;
using solver::SolutionField;
using GridPtr = std::shared_ptr<const DomainGrid>;

struct Check {
  std::string name;
  bool pass = false;
  json observed;
  std::string relation;  // how observed is compared with threshold
  json threshold;
};

/// Everything an experiment produces; summary survives a failure so the
/// error record can embed it.
struct Outcome {
  fs::path dir;
  std::vector<Check> checks;
  json summary = json::object();
  std::vector<std::string> files;

  void check(std::string name, bool pass, json observed, std::string relation, json threshold) {
    checks.push_back({std::move(name), pass, std::move(observed), std::move(relation), std::move(threshold)});
  }
  void le(std::string name, double observed, double bound) {
    check(std::move(name), observed <= bound, io::number(observed), "<=", io::number(bound));
  }
  void ge(std::string name, double observed, double bound) {
    check(std::move(name), observed >= bound, io::number(observed), ">=", io::number(bound));
  }
  void csv(const std::string& name, const io::CsvTable& t) {
    t.write(dir / name);
    files.push_back(name);
  }
  void svg(const std::string& name, const io::SvgPlot& p) {
    p.write(dir / name);
    files.push_back(name);
  }
  bool passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
  }
};

inline GridPtr make_grid(const geometry::OpenSet& set, const GridSpec& g) {
  return std::make_shared<const DomainGrid>(discretization::build_grid(set, g.box, g.h));
}

inline std::vector<std::string> coord_header(int dim, const std::string& prefix = "x") {
  std::vector<std::string> h;
  for (int a = 0; a < dim; ++a) h.push_back(prefix + std::to_string(a + 1));
  return h;
}

inline void append_coord(std::vector<io::Cell>& row, const Coord& x, int dim) {
  for (int a = 0; a < dim; ++a) row.emplace_back(x[a]);
}

inline SolutionField solve_field(const Problem& pb, const Nonlinearity& f, const solver::SemilinearPolicy& policy) {
  if (std::holds_alternative<nonlinearity::Constant>(f.kind()))
    return solver::solve_poisson(pb, std::vector<double>(pb.grid->size(), f.f0()));
  return solver::solve_semilinear(pb, f, std::nullopt, policy);
}

inline io::CsvTable solution_table(const SolutionField& u) {
  const int dim = u.grid->dim();
  auto header = coord_header(dim);
  header.push_back("u");
  io::CsvTable t(header);
  for (std::size_t eq = 0; eq < u.values.size(); ++eq) {
    std::vector<io::Cell> row;
    append_coord(row, u.grid->coord(u.grid->lattice_of(eq)), dim);
    row.emplace_back(u.values[eq]);
    t.add(std::move(row));
  }
  return t;
}

inline json solve_summary(const SolutionField& u) {
  return {{"unknowns", u.values.size()},
          {"h", u.grid->h()},
          {"method", solver::to_string(u.method)},
          {"iterations", u.iterations},
          {"residual_norm", io::number(u.residual_norm)},
          {"trace", u.trace_label},
          {"sup_norm", io::number(max_abs(u.values))}};
}

inline void run_solve(const SolveConfig& c, Outcome& out) {
  auto g = make_grid(*c.domain, c.grid);
  const int dim = g->dim();
  std::optional<profiles::Profile> p;
  if (c.trace_profile) p = profile_by_tag(*c.trace_profile, c.domain.get());
  auto pb = p ? Problem::make(g, p->field(dim), p->name) : Problem::make(g);
  out.summary["domain"] = c.domain->describe();
  out.summary["nonlinearity"] = c.f.tag();
  const auto u = solve_field(pb, c.f, c.policy);
  out.summary["solve"] = solve_summary(u);
  const double res = solver::independent_residual(pb, c.f, u.values);
  out.summary["independent_residual"] = io::number(res);
  out.csv("solution.csv", solution_table(u));
  out.le("residual", res, c.residual_tol);
  if (p) {
    const auto ex = discretization::sample(*g, p->field(dim));
    double err = 0.0;
    for (std::size_t i = 0; i < ex.size(); ++i) err = std::max(err, std::abs(ex[i] - u.values[i]));
    out.summary["profile_error"] = io::number(err);
    out.le("profile_error", err, *c.profile_tol);
  }
}

/// Cap table, Hopf table and plot for one sweep; returns the number of
/// sign-change cells.
inline void emit_moving_plane(const moving_plane::MovingPlaneReport& rep,
                              const std::vector<moving_plane::HopfReport>& hopf, int dim, Outcome& out,
                              const std::string& prefix = "") {
  auto header = std::vector<std::string>{"lambda", "cap_min_diff", "nodes", "interpolation_bound"};
  for (const auto& h : coord_header(dim, "witness_x")) header.push_back(h);
  io::CsvTable caps(header);
  for (const auto& cap : rep.caps) {
    std::vector<io::Cell> row{cap.lambda, cap.min_diff, static_cast<long long>(cap.nodes), cap.interpolation_bound};
    append_coord(row, cap.witness, dim);
    caps.add(std::move(row));
  }
  out.csv(prefix + "caps.csv", caps);

  io::CsvTable cells(coord_header(dim));
  for (const auto& x : rep.sign_change_cells) {
    std::vector<io::Cell> row;
    append_coord(row, x, dim);
    cells.add(std::move(row));
  }
  out.csv(prefix + "sign_changes.csv", cells);

  if (!hopf.empty()) {
    header = {"lambda"};
    for (const auto& h : coord_header(dim)) header.push_back(h);
    for (const char* k : {"lhs", "rhs", "defect", "dn_u"}) header.emplace_back(k);
    io::CsvTable t(header);
    for (const auto& hr : hopf)
      for (const auto& s : hr.samples) {
        std::vector<io::Cell> row{hr.lambda};
        append_coord(row, s.x, dim);
        row.emplace_back(s.lhs);
        row.emplace_back(s.rhs);
        row.emplace_back(std::abs(s.lhs - s.rhs));
        row.emplace_back(s.dn_u);
        t.add(std::move(row));
      }
    out.csv(prefix + "hopf.csv", t);
  }

  io::SvgPlot plot("cap minimum of u_lambda - u", "lambda", "cap_min_diff");
  io::Series s{"cap_min_diff", {}, {}};
  for (const auto& cap : rep.caps) {
    s.x.push_back(cap.lambda);
    s.y.push_back(cap.min_diff);
  }
  plot.add(s);
  plot.mark({io::Marker::Axis::y, 0.0, "0", "#7f7f7f"});
  out.svg(prefix + "caps.svg", plot);
}

inline json moving_plane_summary(const moving_plane::MovingPlaneReport& rep) {
  return {{"window", rep.window},
          {"tol", rep.tol},
          {"lambdas", rep.caps.size()},
          {"min_cap_diff", io::number(rep.min_cap_diff())},
          {"monotone_up_to", io::optional_number(rep.monotone_up_to)},
          {"dn_u_min", io::number(rep.dn_u_min)},
          {"sign_change_count", rep.sign_change_cells.size()},
          {"zero_slope_from", io::optional_number(rep.zero_slope_from)}};
}

/// min over caps of min_diff + tol + interpolation bound; >= 0 when every
/// cap is ordered.
inline double cap_margin(const moving_plane::MovingPlaneReport& rep) {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& cap : rep.caps)
    if (cap.nodes > 0) m = std::min(m, cap.min_diff + rep.tol + cap.interpolation_bound);
  return m;
}

inline void run_moving_plane(const MovingPlaneConfig& c, Outcome& out) {
  auto g = make_grid(*c.domain, c.grid);
  const int dim = g->dim();
  const auto& spec = *c.domain->epigraph_spec();
  out.summary["domain"] = c.domain->describe();
  SolutionField u;
  if (c.field != "solve") {
    const auto p = profile_by_tag(c.field, c.domain.get());
    u = solver::sample_field(g, p.field(dim), p.name);
    out.summary["field"] = p.name;
  } else {
    std::optional<profiles::Profile> p;
    if (c.trace_profile) p = profile_by_tag(*c.trace_profile, c.domain.get());
    auto pb = p ? Problem::make(g, p->field(dim), p->name) : Problem::make(g);
    u = solve_field(pb, *c.f, c.policy);
    out.summary["field"] = "solve";
    out.summary["solve"] = solve_summary(u);
  }
  const auto lambdas = moving_plane::default_lambda_grid(*g, c.lambda_max, c.lambda_step);
  const auto rep = moving_plane::cap_sweep(u, spec, lambdas, c.cap_tol);
  std::vector<moving_plane::HopfReport> hopf;
  for (double l : c.hopf_planes) hopf.push_back(moving_plane::hopf_slope_check(u, l, c.cap_tol));
  out.summary["moving_plane"] = moving_plane_summary(rep);
  emit_moving_plane(rep, hopf, dim, out);

  if (c.expect_caps_ordered) {
    const double m = cap_margin(rep);
    out.check("caps_ordered", (m >= 0.0) == *c.expect_caps_ordered, io::number(rep.min_cap_diff()),
              *c.expect_caps_ordered ? ">=" : "<", io::number(-rep.tol));
  }
  if (c.expect_strict)
    out.check("strict_slope", (rep.dn_u_min > rep.tol) == *c.expect_strict, io::number(rep.dn_u_min),
              *c.expect_strict ? ">" : "<=", io::number(rep.tol));
  if (c.expect_sign_change)
    out.check("sign_change", rep.sign_change_cells.empty() != *c.expect_sign_change,
              static_cast<long long>(rep.sign_change_cells.size()), *c.expect_sign_change ? ">" : "==", 0);
  if (c.expect_zero_slope_above)
    out.le("zero_slope_above", rep.max_abs_slope_above(*c.expect_zero_slope_above, dim), rep.tol);
  const double h2 = g->h() * g->h();
  for (const auto& hr : hopf) {
    out.le("hopf_defect_at_" + io::format_number(hr.lambda), hr.max_defect, c.hopf_constant * h2);
  }
}

inline void run_threshold_scan(const ScanConfig& c, std::uint64_t seed, Outcome& out) {
  comparison::ScanOptions opt;
  opt.cells_per_width = c.cells;
  opt.pairs = c.pairs;
  opt.seed = seed;
  opt.tol = c.comparison_tol;
  const auto rep = comparison::threshold_scan(c.L, c.widths, opt);
  io::CsvTable t({"width", "h", "lambda1", "unstable", "below_epsilon", "pairs_tested", "pairs_held"});
  io::Series lam{"lambda1", {}, {}};
  for (const auto& r : rep.scan) {
    t.add({r.width, r.h, r.lambda1, r.unstable, r.below_epsilon, static_cast<long long>(r.pairs_tested),
           static_cast<long long>(r.pairs_held)});
    lam.x.push_back(r.width);
    lam.y.push_back(r.lambda1);
  }
  out.csv("scan.csv", t);
  const double continuum = kPi / std::sqrt(c.L);
  io::SvgPlot plot("discrete lambda1 against strip width", "S", "lambda1");
  plot.add(lam);
  plot.mark({io::Marker::Axis::y, c.L, "L", "#7f7f7f"});
  plot.mark({io::Marker::Axis::x, rep.epsilon_paper.value(), "epsilon", "#2ca02c"});
  plot.mark({io::Marker::Axis::x, continuum, "pi/sqrt(L)", "#d62728"});
  out.svg("scan.svg", plot);

  out.summary["L"] = c.L;
  out.summary["cells_per_width"] = c.cells;
  out.summary["epsilon_paper"] = io::number(rep.epsilon_paper);
  out.summary["continuum_width"] = continuum;
  out.summary["failure_width"] = io::optional_number(rep.failure_width);
  out.summary["crossing_width"] = io::optional_number(rep.crossing_width);
  if (rep.failure_width && rep.crossing_width)
    out.summary["failure_uncertainty"] = std::abs(*rep.failure_width - *rep.crossing_width);
  out.summary["notes"] = rep.notes;

  if (rep.failure_width) {
    out.le("failure_width_rel_error", std::abs(*rep.failure_width - continuum) / continuum, c.width_rel);
    out.check("epsilon_below_failure", rep.epsilon_paper < ExtReal(*rep.failure_width),
              io::number(rep.epsilon_paper), "<", *rep.failure_width);
  } else {
    out.check("failure_width_found", false, nullptr, "exists", true);
  }
  long long tested = 0, held = 0;
  for (const auto& r : rep.scan) tested += r.pairs_tested, held += r.pairs_held;
  out.check("comparison_pairs_hold", held == tested, held, "==", tested);
}

/// Section along e_N over probe lines spanning the box.
inline geometry::SectionMeasure box_section(const geometry::OpenSet& set, const discretization::Box& box,
                                            std::size_t per_axis = 101) {
  const int dim = set.dim();
  std::vector<double> nu(dim, 0.0);
  nu[dim - 1] = 1.0;
  std::vector<std::vector<double>> probe{{}};
  for (int a = 0; a + 1 < dim; ++a) {
    std::vector<std::vector<double>> next;
    for (const auto& p : probe)
      for (const auto& v : geometry::probe_line_grid(box.lo[a], box.hi[a], per_axis)) {
        auto q = p;
        q.push_back(v[0]);
        next.push_back(q);
      }
    probe = std::move(next);
  }
  return geometry::section_measure(set, nu, probe);
}

inline void run_uniqueness(const UniquenessConfig& c, std::uint64_t seed, Outcome& out) {
  auto g = make_grid(*c.domain, c.grid);
  out.summary["domain"] = c.domain->describe();
  double S = 0.0;
  if (c.section) {
    S = *c.section;
    out.summary["section_source"] = "config";
  } else {
    const auto sm = box_section(*c.domain, c.grid.box);
    if (sm.unbounded_suspected) fail(ErrorKind::domain, "hypothesis violated: section appears unbounded");
    S = sm.value;
    out.summary["section_source"] = "measured over the grid box";
  }
  out.summary["S"] = S;
  comparison::UniquenessOptions opt;
  opt.restarts = c.restarts;
  opt.seed = seed;
  opt.amplitude = c.amplitude;
  opt.tol = c.zero_tol;
  opt.policy = c.policy;
  const auto rep = comparison::uniqueness_test(Problem::make(g), S, c.f, opt);
  out.summary["L"] = io::number(rep.L);
  out.summary["epsilon_paper"] = io::number(rep.epsilon_paper);
  out.summary["notes"] = rep.notes;
  io::CsvTable t({"restart", "init_amplitude", "sup_norm", "residual", "iterations", "method", "error"});
  long long errors = 0;
  double worst = 0.0;
  for (const auto& r : rep.restarts) {
    t.add({static_cast<long long>(r.index), r.init_amplitude, r.sup_norm, r.residual,
           static_cast<long long>(r.iterations), r.method, r.error});
    if (!r.error.empty()) ++errors;
    else worst = std::max(worst, r.sup_norm);
  }
  out.csv("restarts.csv", t);
  out.check("restarts_converged", errors == 0, errors, "==", 0);
  out.le("max_sup_norm", worst, c.zero_tol);
}

inline void run_symmetry(const SymmetryConfig& c, Outcome& out) {
  auto g = make_grid(*c.domain, c.grid);
  const int dim = g->dim();
  for (const auto& ic : c.isometries) comparison::grid_map(*g, ic.rho);
  out.summary["domain"] = c.domain->describe();
  std::optional<profiles::Profile> ex;
  if (c.exact) ex = profile_by_tag(*c.exact, c.domain.get());
  auto pb = ex && c.exact_trace ? Problem::make(g, ex->field(dim), ex->name) : Problem::make(g);
  const auto u = solve_field(pb, c.f, c.policy);
  out.summary["solve"] = solve_summary(u);
  out.csv("solution.csv", solution_table(u));
  io::CsvTable t({"isometry", "defect", "tol", "pass"});
  for (const auto& ic : c.isometries) {
    const double d = comparison::symmetry_defect(u, ic.rho);
    t.add({ic.rho.describe(), d, ic.tol, d <= ic.tol});
    out.le("defect " + ic.rho.describe(), d, ic.tol);
  }
  out.csv("symmetry.csv", t);
  if (ex) {
    const auto e = discretization::sample(*g, ex->field(dim));
    double err = 0.0;
    for (std::size_t i = 0; i < e.size(); ++i) err = std::max(err, std::abs(e[i] - u.values[i]));
    out.summary["exact_defect"] = io::number(err);
    out.le("exact_defect", err, c.exact_tol);
  }
}

inline void run_section(const SectionConfig& c, Outcome& out) {
  const int dim = c.set->dim();
  std::vector<std::vector<double>> probe{{}};
  if (dim == 2) probe = geometry::probe_line_grid(c.probe_lo, c.probe_hi, static_cast<std::size_t>(c.probe_count));
  const auto sm = geometry::section_measure(*c.set, c.direction, probe, c.opt);
  auto header = coord_header(dim - 1, "s");
  for (const char* k : {"measure", "touches_window", "intervals"}) header.emplace_back(k);
  io::CsvTable t(header);
  for (const auto& l : sm.per_line) {
    std::vector<io::Cell> row;
    for (double v : l.x_prime) row.emplace_back(v);
    row.emplace_back(l.measure);
    row.emplace_back(l.touches_window);
    row.emplace_back(static_cast<long long>(l.intervals.size()));
    t.add(std::move(row));
  }
  out.csv("lines.csv", t);
  out.summary["set"] = c.set->describe();
  out.summary["value"] = io::number(sm.value);
  out.summary["unbounded_suspected"] = sm.unbounded_suspected;
  out.summary["line_resolution"] = c.opt.line_resolution;
  out.summary["window"] = c.opt.window;
  if (c.expect_value) out.le("value_error", std::abs(sm.value - *c.expect_value), c.opt.line_resolution);
  if (c.expect_max) out.le("value", sm.value, *c.expect_max);
  if (c.expect_bounded)
    out.check("bounded", sm.unbounded_suspected != *c.expect_bounded, !sm.unbounded_suspected, "==",
              *c.expect_bounded);
  for (const auto& le : c.expect_lines) {
    const auto one = geometry::section_measure(*c.set, c.direction, {le.x}, c.opt);
    out.le("line " + io::format_number(le.x.empty() ? 0.0 : le.x[0]),
           std::abs(one.per_line.front().measure - le.measure), le.tol);
  }
}

struct BrandtCase {
  std::string name;
  SolutionField u;
  std::vector<double> f;
  std::function<double(const Coord&)> clearance;  // distance to the boundary or box
};

/// The three catalog solutions: tanh front and sine sampled, disk torsion
/// solved.
inline BrandtCase brandt_case(const std::string& name) {
  const double h = 1.0 / 16;
  using geometry::OpenSet;
  if (name == "tanh_front") {
    const auto p = profiles::tanh_front();
    auto g = make_grid(OpenSet::epigraph(geometry::make_half_space()), {{2, {0, 0, 0}, {4, 8, 0}}, h});
    auto u = solver::sample_field(g, p.field(2), p.name);
    auto f = estimates::f_of_u(u, p.f);
    return {name, u, f, [](const Coord& x) { return std::min({x[0], 4 - x[0], x[1], 8 - x[1]}); }};
  }
  if (name == "sine") {
    const auto p = profiles::sine();
    auto g = make_grid(OpenSet::strip(0, kPi), {{2, {0, 0, 0}, {kPi, kPi, 0}}, kPi / 32});
    auto u = solver::sample_field(g, p.field(2), p.name);
    auto f = estimates::f_of_u(u, p.f);
    return {name, u, f, [](const Coord& x) { return std::min({x[0], kPi - x[0], x[1], kPi - x[1]}); }};
  }
  auto g = make_grid(OpenSet::ball({0, 0, 0}, 1.0), {{2, {-1.25, -1.25, 0}, {1.25, 1.25, 0}}, h / 2});
  auto u = solver::solve_poisson(Problem::make(g), std::vector<double>(g->size(), 1.0));
  return {name, u, std::vector<double>(g->size(), 1.0), [](const Coord& x) { return 1.0 - std::hypot(x[0], x[1]); }};
}

inline void run_estimates(const EstimatesConfig& c, std::uint64_t seed, Outcome& out) {
  io::CsvTable bt({"case", "y1", "y2", "delta", "lhs", "rhs", "slack", "allowance", "holds"});
  long long violations = 0, probes = 0;
  for (std::size_t k = 0; k < c.brandt_cases.size(); ++k) {
    const auto bc = brandt_case(c.brandt_cases[k]);
    const auto& g = *bc.u.grid;
    std::mt19937_64 rng(seed + 31 * k);
    std::uniform_int_distribution<std::size_t> pick(0, g.size() - 1);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int done = 0; done < c.brandt_probes;) {
      const Coord y = g.coord(g.lattice_of(pick(rng)));
      const double room = bc.clearance(y) - 2 * g.h();
      if (room < 2 * g.h()) continue;
      const double delta = 2 * g.h() + unit(rng) * (room - 2 * g.h());
      const auto rep = estimates::brandt_check(bc.u, bc.f, y, delta);
      bt.add({bc.name, y[0], y[1], delta, rep.lhs, rep.rhs, rep.slack, rep.allowance, rep.holds});
      violations += rep.holds ? 0 : 1;
      ++probes;
      ++done;
    }
  }
  out.csv("brandt.csv", bt);
  out.summary["brandt_probes"] = probes;
  out.summary["brandt_scheme_constant"] = estimates::kBrandtSchemeConstant;
  out.check("brandt_violations", violations == 0, violations, "==", 0);

  io::CsvTable ot({"probe", "h", "radius", "osc", "nodes"});
  io::CsvTable ft({"probe", "h", "alpha_fit", "C_fit", "discarded_largest"});
  json fits = json::object();
  for (const auto& p : estimates::boundary_probes()) {
    if (std::find(c.oscillation_probes.begin(), c.oscillation_probes.end(), p.name) == c.oscillation_probes.end())
      continue;
    std::vector<estimates::OscillationFit> per_h;
    for (double h : c.hs) {
      auto fit = estimates::probe_fit(p, h);
      for (std::size_t i = 0; i < fit.radii.size(); ++i)
        ot.add({p.name, h, fit.radii[i], fit.osc_values[i], static_cast<long long>(fit.counts[i])});
      ft.add({p.name, h, fit.alpha_fit, fit.C_fit, fit.discarded_largest});
      fits[p.name].push_back({{"h", h}, {"alpha_fit", fit.alpha_fit}, {"C_fit", fit.C_fit}});
      per_h.push_back(std::move(fit));
    }
    out.ge("alpha " + p.name, per_h.back().alpha_fit, c.alpha_min);
    for (std::size_t i = 1; i < per_h.size(); ++i)
      out.le("alpha refinement " + p.name + " h=" + io::format_number(c.hs[i]),
             estimates::refinement_change(per_h[i - 1], per_h[i]), c.refinement_tol);
  }
  out.csv("oscillation.csv", ot);
  out.csv("oscillation_fits.csv", ft);
  out.summary["oscillation"] = fits;
}

/// sup |u''''| / 12 bounds the three-point truncation error per h^2 for a
/// piecewise C^4, globally C^3 profile. u'''' comes from third differences
/// of du on a 1/1024 lattice.
inline double truncation_constant(const profiles::Profile& p, double lo, double hi) {
  const double e = 1.0 / 1024;
  double m = 0.0;
  for (double y = lo + 2 * e; y <= hi - 2 * e; y += e) {
    const double d3 = p.du(y + 1.5 * e) - 3 * p.du(y + 0.5 * e) + 3 * p.du(y - 0.5 * e) - p.du(y - 1.5 * e);
    m = std::max(m, std::abs(d3) / (e * e * e));
  }
  return m / 12.0;
}

/// Relative allowance for rounding in the residual/(C h^2) comparison; the
/// plateau profile attains the truncation bound exactly.
inline constexpr double kRoundingSlack = 1e-6;

inline void run_verify(const VerifyConfig& c, Outcome& out) {
  using geometry::OpenSet;
  // Closed-form residuals on 1-D grids in x_N.
  io::CsvTable rt({"profile", "h", "residual", "bound", "order"});
  json orders = json::object();
  for (const auto& p : {profiles::plateau(), profiles::double_bump()}) {
    const double C = truncation_constant(p, 0.0, c.height);
    double prev = 0.0, worst_order = std::numeric_limits<double>::infinity(), worst_ratio = 0.0;
    for (std::size_t i = 0; i < c.hs.size(); ++i) {
      const double h = c.hs[i];
      auto g = make_grid(OpenSet::strip(0.0, c.height, 1), {{1, {0, 0, 0}, {c.height, 0, 0}}, h});
      auto pb = Problem::make(g, p.field(1), p.name);
      const auto vals = discretization::sample(*g, p.field(1));
      const double r = solver::independent_residual(pb, p.f, vals);
      double order = std::numeric_limits<double>::quiet_NaN();
      if (i > 0) {
        order = std::log(prev / r) / std::log(c.hs[i - 1] / h);
        worst_order = std::min(worst_order, order);
      }
      worst_ratio = std::max(worst_ratio, r / (C * h * h));
      rt.add({p.name, h, r, C * h * h, order});
      prev = r;
    }
    orders[p.name] = {{"min_order", worst_order}, {"C", C}, {"max_residual_over_Ch2", worst_ratio}};
    out.le("residual/(C h^2) " + p.name, worst_ratio, 1.0 + kRoundingSlack);
    out.ge("order " + p.name, worst_order, c.order_min);
  }
  out.csv("residuals.csv", rt);
  out.summary["residuals"] = orders;

  // Cap sweeps on the half-plane window [0,1] x [0,height].
  const double h = 1.0 / 32;
  auto half = OpenSet::epigraph(geometry::make_half_space());
  const auto& spec = *half.epigraph_spec();
  auto g = make_grid(half, {{2, {0, 0, 0}, {1, c.height, 0}}, h});
  const auto lambdas = moving_plane::default_lambda_grid(*g, 0.5 * c.height - h, 0.25);
  {
    const auto p = profiles::plateau();
    const auto rep = moving_plane::cap_sweep(solver::sample_field(g, p.field(2), p.name), spec, lambdas, c.cap_tol);
    emit_moving_plane(rep, {}, 2, out, "plateau_");
    out.summary["plateau"] = moving_plane_summary(rep);
    out.ge("plateau cap_min_diff", rep.min_cap_diff(), -c.cap_tol);
    out.le("plateau slope above 1", rep.max_abs_slope_above(1.0, 2), c.cap_tol);
  }
  {
    const auto p = profiles::double_bump();
    const auto rep = moving_plane::cap_sweep(solver::sample_field(g, p.field(2), p.name), spec, lambdas, c.cap_tol);
    emit_moving_plane(rep, {}, 2, out, "double_bump_");
    out.summary["double_bump"] = moving_plane_summary(rep);
    out.check("double_bump sign_change", !rep.sign_change_cells.empty(),
              static_cast<long long>(rep.sign_change_cells.size()), ">", 0);
  }
  {
    const auto p = profiles::tanh_front();
    auto gt = make_grid(half, {{2, {0, 0, 0}, {1, 12, 0}}, h});
    const auto u = solver::sample_field(gt, p.field(2), p.name);
    const auto rep = moving_plane::cap_sweep(u, spec, moving_plane::default_lambda_grid(*gt, 5.0, 0.25),
                                             c.tanh_cap_tol);
    std::vector<moving_plane::HopfReport> hopf;
    for (double l : {0.5, 1.0, 2.0}) hopf.push_back(moving_plane::hopf_slope_check(u, l, c.tanh_cap_tol));
    emit_moving_plane(rep, hopf, 2, out, "tanh_");
    out.summary["tanh_front"] = moving_plane_summary(rep);
    out.check("tanh strict slope", rep.dn_u_min > 0.0, io::number(rep.dn_u_min), ">", 0.0);
    out.ge("tanh cap_min_diff", rep.min_cap_diff(), -c.tanh_cap_tol);
    for (const auto& hr : hopf)
      out.le("tanh hopf_defect_at_" + io::format_number(hr.lambda), hr.max_defect, c.hopf_constant * h * h);
  }
}

// ---------------------------------------------------------------------------
// Run record
// ---------------------------------------------------------------------------

inline std::string utc_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

inline std::string error_kind_name(ErrorKind k) {
  switch (k) {
    case ErrorKind::validation: return "validation";
    case ErrorKind::numerical: return "numerical";
    case ErrorKind::domain: return "domain";
    case ErrorKind::geometry: return "geometry";
    case ErrorKind::singular: return "singular";
  }
  return "unknown";
}

inline std::string module_of(const std::string& experiment) {
  if (experiment == "solve") return "solver";
  if (experiment == "moving_plane") return "moving_plane";
  if (experiment == "section") return "geometry";
  if (experiment == "estimates") return "estimates";
  if (experiment == "verify_examples") return "solver, moving_plane";
  return "comparison";
}

inline json check_json(const Check& c) {
  return {{"name", c.name}, {"pass", c.pass}, {"observed", c.observed}, {"relation", c.relation},
          {"threshold", c.threshold}};
}

struct RunResult {
  int exit_code = 0;
  fs::path dir;
  json record;
};

inline constexpr int kExitOk = 0, kExitChecksFailed = 1, kExitValidation = 2, kExitNumerical = 3;

inline int exit_code_for(ErrorKind k) { return k == ErrorKind::validation ? kExitValidation : kExitNumerical; }

inline void execute(const ExperimentConfig& cfg, Outcome& out) {
  std::visit(
      [&](const auto& c) {
        using T = std::decay_t<decltype(c)>;
        if constexpr (std::is_same_v<T, SolveConfig>) run_solve(c, out);
        else if constexpr (std::is_same_v<T, MovingPlaneConfig>) run_moving_plane(c, out);
        else if constexpr (std::is_same_v<T, ScanConfig>) run_threshold_scan(c, cfg.seed, out);
        else if constexpr (std::is_same_v<T, UniquenessConfig>) run_uniqueness(c, cfg.seed, out);
        else if constexpr (std::is_same_v<T, SymmetryConfig>) run_symmetry(c, out);
        else if constexpr (std::is_same_v<T, SectionConfig>) run_section(c, out);
        else if constexpr (std::is_same_v<T, EstimatesConfig>) run_estimates(c, cfg.seed, out);
        else run_verify(c, out);
      },
      cfg.spec);
}

/// Runs a parsed config into dir. Errors raised during compute are recorded
/// in run.json together with the partial summary.
inline RunResult run(const ExperimentConfig& cfg, const fs::path& dir) {
  RunResult res;
  res.dir = dir;
  Outcome out;
  out.dir = dir;
  fs::create_directories(dir);
  json rec = json::object();
  rec["schema"] = io::kSchemaVersion;
  rec["version"] = kVersion;
  rec["experiment"] = cfg.experiment;
  rec["config_hash"] = cfg.hash;
  rec["seed"] = cfg.seed;
  rec["started"] = utc_now();
  std::optional<LabError> error;
  try {
    execute(cfg, out);
  } catch (const LabError& e) {
    error = e;
  }
  json summary = json::object();
  summary["schema"] = io::kSchemaVersion;
  summary["experiment"] = cfg.experiment;
  summary["config_hash"] = cfg.hash;
  summary["results"] = out.summary;
  summary["checks"] = json::array();
  for (const auto& c : out.checks) summary["checks"].push_back(check_json(c));
  if (!error) {
    io::write_json(dir / "summary.json", summary);
    out.files.push_back("summary.json");
  }
  rec["finished"] = utc_now();
  rec["checks"] = summary["checks"];
  rec["outcome"] = out.summary;
  if (error) {
    res.exit_code = exit_code_for(error->kind());
    rec["status"] = "error";
    rec["error"] = {{"kind", error_kind_name(error->kind())},
                    {"message", error->what()},
                    {"module", module_of(cfg.experiment)},
                    {"report", out.summary}};
  } else {
    res.exit_code = out.passed() ? kExitOk : kExitChecksFailed;
    rec["status"] = out.passed() ? "pass" : "checks_failed";
  }
  rec["exit_code"] = res.exit_code;
  json manifest = json::array();
  for (const auto& f : out.files) {
    const auto bytes = io::read_file(dir / f);
    manifest.push_back({{"file", f}, {"bytes", bytes.size()}, {"fnv1a", io::hex64(io::fnv1a(bytes))}});
  }
  rec["manifest"] = manifest;
  rec["config"] = cfg.raw;
  io::write_json(dir / "run.json", rec);
  res.record = std::move(rec);
  return res;
}

inline json load_config(const fs::path& path) {
  std::string text;
  try {
    text = io::read_file(path);
  } catch (const LabError& e) {
    fail(ErrorKind::validation, e.what());
  }
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    fail(ErrorKind::validation, "config: " + path.string() + " is not valid JSON: " + e.what());
  }
}

/// Resolves the run directory: explicit override, then output_dir relative
/// to the working directory, then runs/<experiment>.
inline fs::path run_dir(const ExperimentConfig& cfg, const std::optional<fs::path>& override_dir) {
  if (override_dir) return *override_dir;
  if (!cfg.output_dir.empty()) return cfg.output_dir;
  return fs::path("runs") / cfg.experiment;
}

// ---------------------------------------------------------------------------
// Report
// ---------------------------------------------------------------------------

inline std::string json_text(const json& v) {
  if (v.is_number_float()) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v.get<double>());
    return buf;
  }
  if (v.is_string()) return v.get<std::string>();
  return v.dump();
}

/// Prints run.json as a table of checks plus a few experiment headlines.
/// Returns the exit code: 2 when the run record is missing or unreadable.
inline int report(const fs::path& dir, std::ostream& os, std::ostream& err) {
  const fs::path path = dir / "run.json";
  if (!fs::is_regular_file(path)) {
    err << "error: no run record (run.json) in " << dir.string() << "\n";
    return kExitValidation;
  }
  json rec;
  try {
    rec = json::parse(io::read_file(path));
  } catch (const std::exception& e) {
    err << "error: unreadable run record " << path.string() << ": " << e.what() << "\n";
    return kExitValidation;
  }
  const std::string exp = rec.value("experiment", "?");
  os << "experiment: " << exp << "\n";
  os << "status:     " << rec.value("status", "?") << " (exit " << rec.value("exit_code", -1) << ")\n";
  os << "config:     " << rec.value("config_hash", "?") << "  " << rec.value("version", "") << "\n";
  os << "started:    " << rec.value("started", "") << "  finished: " << rec.value("finished", "") << "\n";
  if (rec.contains("error")) {
    const auto& e = rec["error"];
    os << "error:      [" << e.value("kind", "") << " in " << e.value("module", "") << "] " << e.value("message", "")
       << "\n";
  }
  const auto& out = rec.contains("outcome") ? rec["outcome"] : json::object();
  if (exp == "threshold_scan" && out.contains("failure_width") && !out["failure_width"].is_null()) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "epsilon_paper = %.4f, failure width = %.2f +- %.2f\n",
                  out["epsilon_paper"].get<double>(), out["failure_width"].get<double>(),
                  out.value("failure_uncertainty", 0.0));
    os << buf;
  }
  if (exp == "moving_plane" && out.contains("moving_plane"))
    os << "sign-change nodes: " << out["moving_plane"].value("sign_change_count", 0) << "\n";
  if (exp == "verify_examples" && out.contains("double_bump"))
    os << "sign-change nodes (double_bump): " << out["double_bump"].value("sign_change_count", 0) << "\n";
  const auto checks = rec.value("checks", json::array());
  std::size_t w = 5;
  for (const auto& c : checks) w = std::max(w, c.value("name", "").size());
  os << "checks:\n";
  for (const auto& c : checks) {
    const std::string name = c.value("name", "");
    os << "  " << (c.value("pass", false) ? "PASS" : "FAIL") << "  " << name << std::string(w - name.size() + 2, ' ')
       << json_text(c["observed"]) << " " << c.value("relation", "") << " " << json_text(c["threshold"]) << "\n";
  }
  const auto manifest = rec.value("manifest", json::array());
  os << "files:\n";
  for (const auto& m : manifest) os << "  " << m.value("file", "") << " (" << m.value("bytes", 0) << " bytes)\n";
  return kExitOk;
}

}  // namespace epilab::experiment
