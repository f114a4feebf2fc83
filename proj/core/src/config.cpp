#include "tgrowth/config.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include "tgrowth/error.hpp"
#include "tgrowth/toml_lite.hpp"

namespace tgrowth {

namespace {

constexpr double kTruncation = 6.0;  // gaussian cut-off in widths
constexpr int kEdgeCells = 4;

double gaussian(double d0, double d1, double width) {
  const double r2 = d0 * d0 + d1 * d1;
  if (r2 > kTruncation * kTruncation * width * width) return 0.0;
  return std::exp(-0.5 * r2 / (width * width));
}

// Typed access to one section, remembering which keys were consumed.
class Section {
 public:
  Section(const toml::Document& doc, const std::string& name) : name_(name) {
    if (auto it = doc.find(name); it != doc.end()) table_ = &it->second;
  }

  double real(const std::string& key, double fallback) {
    const auto* e = find(key);
    if (!e) return fallback;
    if (const auto* d = std::get_if<double>(&e->value)) return *d;
    if (const auto* i = std::get_if<std::int64_t>(&e->value)) return static_cast<double>(*i);
    throw ParseError(qualified(key) + " must be a number", e->line);
  }
  int integer(const std::string& key, int fallback) {
    const auto* e = find(key);
    if (!e) return fallback;
    const auto* i = std::get_if<std::int64_t>(&e->value);
    if (!i) throw ParseError(qualified(key) + " must be an integer", e->line);
    if (*i < -1'000'000'000 || *i > 1'000'000'000) throw ParseError(qualified(key) + " is out of range", e->line);
    return static_cast<int>(*i);
  }
  std::string text(const std::string& key, std::string fallback) {
    const auto* e = find(key);
    if (!e) return fallback;
    const auto* s = std::get_if<std::string>(&e->value);
    if (!s) throw ParseError(qualified(key) + " must be a string", e->line);
    return *s;
  }
  std::vector<double> list(const std::string& key, std::vector<double> fallback) {
    const auto* e = find(key);
    if (!e) return fallback;
    const auto* v = std::get_if<std::vector<double>>(&e->value);
    if (!v) throw ParseError(qualified(key) + " must be an array of numbers", e->line);
    return *v;
  }
  int line(const std::string& key) const {
    if (!table_) return 0;
    auto it = table_->find(key);
    return it == table_->end() ? 0 : it->second.line;
  }

  /// Rejects any key that was never looked up.
  void finish() const {
    if (!table_) return;
    for (const auto& [key, entry] : *table_)
      if (!used_.count(key)) throw ParseError("unknown key " + qualified(key), entry.line);
  }

 private:
  const toml::Entry* find(const std::string& key) {
    used_.insert(key);
    if (!table_) return nullptr;
    auto it = table_->find(key);
    return it == table_->end() ? nullptr : &it->second;
  }
  std::string qualified(const std::string& key) const { return name_.empty() ? key : name_ + "." + key; }

  std::string name_;
  const std::map<std::string, toml::Entry>* table_ = nullptr;
  std::set<std::string> used_;
};

Profile parse_profile(const std::string& s, int line) {
  if (s == "gaussian") return Profile::gaussian;
  if (s == "double-bump") return Profile::double_bump;
  if (s == "uniform") return Profile::uniform;
  if (s == "wave") return Profile::wave;
  throw ParseError("unknown profile '" + s + "' (gaussian, double-bump, uniform, wave)", line);
}

GrowthKind parse_kind(const std::string& s, int line) {
  if (s == "linear") return GrowthKind::linear;
  if (s == "exp_decay") return GrowthKind::exp_decay;
  if (s == "none") return GrowthKind::none;
  throw ParseError("unknown growth law '" + s + "' (linear, exp_decay, none)", line);
}

std::string list_text(const std::vector<double>& v) {
  std::string out = "[";
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ", ";
    out += toml::format_double(v[i]);
  }
  return out + "]";
}

}  // namespace

std::string to_string(Profile p) {
  switch (p) {
    case Profile::gaussian: return "gaussian";
    case Profile::double_bump: return "double-bump";
    case Profile::uniform: return "uniform";
    case Profile::wave: return "wave";
  }
  return "?";
}

std::string to_string(GrowthKind k) {
  switch (k) {
    case GrowthKind::linear: return "linear";
    case GrowthKind::exp_decay: return "exp_decay";
    case GrowthKind::none: return "none";
  }
  return "?";
}

double InitialData::shape(const std::array<double, 2>& x, double box_length) const noexcept {
  const double d0 = periodic_offset(x[0], centre[0], box_length);
  const double d1 = periodic_offset(x[1], centre[1], box_length);
  switch (profile) {
    case Profile::gaussian:
      return gaussian(d0, d1, width);
    case Profile::double_bump:
      return gaussian(periodic_offset(d0, 0.5 * separation, box_length), d1, width) +
             gaussian(periodic_offset(d0, -0.5 * separation, box_length), d1, width);
    case Profile::uniform:
      return 1.0;
    case Profile::wave: {
      const double k = 2.0 * std::numbers::pi / box_length;
      return 1.0 + 0.5 * std::cos(k * x[0]) * std::cos(k * x[1]);
    }
  }
  return 0.0;
}

MultiState InitialData::build(const SpatialGrid& grid, int phenotypes) const {
  const PhenotypeSet set(phenotypes);
  Field base(grid);
  for (std::size_t c = 0; c < base.size(); ++c) base[c] = shape(grid.centre(c), grid.box_length());
  std::vector<Field> densities;
  densities.reserve(static_cast<std::size_t>(phenotypes));
  for (int i = 0; i < phenotypes; ++i) {
    const double factor = amplitude * (1.0 + trait_modulation * (set.trait(i) - 0.5));
    Field f(grid);
    for (std::size_t c = 0; c < f.size(); ++c) f[c] = factor * base[c];
    densities.push_back(std::move(f));
  }
  return MultiState(set, std::move(densities), 0.0);
}

void RunConfig::validate() const {
  const SpatialGrid g = grid();
  if (phenotypes < 1 || phenotypes > 4096) throw ValidationError("phenotype count N must lie in [1, 4096]");
  params.validate();
  law.validate();
  if (params.cfl > 0.5 / dim)
    throw ValidationError("cfl must not exceed 1/(2 d) for the upwind step to stay positive");
  const double nu_cap = (box_length / 8.0) * (box_length / 8.0);
  if (params.viscosity > nu_cap) throw ValidationError("viscosity must not exceed (L/8)^2");

  if (!(initial.width > 0.0) || !std::isfinite(initial.width)) throw ValidationError("initial width must be positive");
  if (!(initial.amplitude >= 0.0) || !std::isfinite(initial.amplitude))
    throw ValidationError("initial amplitude must be nonnegative");
  if (!(std::abs(initial.trait_modulation) <= 2.0))
    throw ValidationError("trait_modulation must lie in [-2, 2] so every slice stays nonnegative");
  if (!(initial.separation >= 0.0)) throw ValidationError("separation must be nonnegative");
  if (dim == 1 && initial.centre[1] != 0.0) throw ValidationError("center has a second coordinate in 1D");
  if (initial.compact()) {
    const double reach = kTruncation * initial.width;
    const double limit = 0.5 * box_length - kEdgeCells * g.spacing();
    const double half = initial.profile == Profile::double_bump ? 0.5 * initial.separation : 0.0;
    bool inside = std::abs(initial.centre[0]) + half + reach <= limit;
    if (dim == 2) inside = inside && std::abs(initial.centre[1]) + reach <= limit;
    if (!inside) throw ValidationError("initial support must stay at least 4 cells from the box edge");
  }

  if (snapshot_times.empty()) {
    if (snapshot_count < 2) throw ValidationError("snapshot count must be at least 2");
  } else {
    for (std::size_t i = 0; i < snapshot_times.size(); ++i) {
      if (!(snapshot_times[i] >= 0.0 && snapshot_times[i] <= params.horizon))
        throw ValidationError("snapshot times must lie in [0, T]");
      if (i && !(snapshot_times[i] > snapshot_times[i - 1]))
        throw ValidationError("snapshot times must be strictly increasing");
    }
  }
  if (output_dir.empty()) throw ValidationError("output directory must not be empty");
}

std::vector<double> RunConfig::snapshots() const {
  return snapshot_times.empty() ? uniform_times(params.horizon, snapshot_count) : snapshot_times;
}

RunOptions RunConfig::run_options() const {
  RunOptions opts;
  opts.potential = darcy_bypass ? Potential::darcy_bypass : Potential::brinkman;
  opts.enforce_support = initial.compact();
  return opts;
}

RunConfig parse_config(const std::string& text) { return config_from_document(toml::parse(text)); }

RunConfig config_from_document(const toml::Document& doc, const std::set<std::string>& extra) {
  static const std::set<std::string> known{"", "grid", "params", "law", "initial", "snapshots", "output"};
  for (const auto& [name, table] : doc) {
    if (known.count(name) || extra.count(name)) continue;
    const int line = table.empty() ? 0 : table.begin()->second.line;
    throw ParseError("unknown section [" + name + "]", line);
  }
  if (!doc.at("").empty()) {
    const auto& [key, entry] = *doc.at("").begin();
    throw ParseError("key '" + key + "' outside any section", entry.line);
  }

  RunConfig c;
  Section grid(doc, "grid");
  c.dim = grid.integer("dim", c.dim);
  c.points = grid.integer("points", c.points);
  c.box_length = grid.real("box_length", c.box_length);
  grid.finish();

  Section params(doc, "params");
  c.phenotypes = params.integer("N", c.phenotypes);
  c.params.stiffness = params.real("k", c.params.stiffness);
  c.params.viscosity = params.real("nu", c.params.viscosity);
  c.params.horizon = params.real("T", c.params.horizon);
  c.params.cfl = params.real("cfl", c.params.cfl);
  c.params.max_dt = params.real("max_dt", c.params.max_dt);
  const std::string potential = params.text("potential", "brinkman");
  if (potential != "brinkman" && potential != "darcy")
    throw ParseError("params.potential must be \"brinkman\" or \"darcy\"", params.line("potential"));
  c.darcy_bypass = potential == "darcy";
  params.finish();

  Section law(doc, "law");
  c.law.kind = parse_kind(law.text("kind", to_string(c.law.kind)), law.line("kind"));
  c.law.gamma0 = law.real("gamma0", c.law.gamma0);
  c.law.gamma1 = law.real("gamma1", c.law.gamma1);
  c.law.decay = law.real("c", c.law.decay);
  law.finish();

  Section init(doc, "initial");
  c.initial.profile = parse_profile(init.text("profile", to_string(c.initial.profile)), init.line("profile"));
  const auto centre = init.list("center", {c.initial.centre[0], c.initial.centre[1]});
  if (centre.empty() || centre.size() > 2) throw ParseError("initial.center needs 1 or 2 entries", init.line("center"));
  c.initial.centre = {centre[0], centre.size() > 1 ? centre[1] : 0.0};
  c.initial.width = init.real("width", c.initial.width);
  c.initial.amplitude = init.real("amplitude", c.initial.amplitude);
  c.initial.trait_modulation = init.real("trait_modulation", c.initial.trait_modulation);
  c.initial.separation = init.real("separation", c.initial.separation);
  init.finish();

  Section snaps(doc, "snapshots");
  c.snapshot_count = snaps.integer("count", c.snapshot_count);
  c.snapshot_times = snaps.list("times", {});
  snaps.finish();

  Section out(doc, "output");
  c.output_dir = out.text("dir", c.output_dir);
  out.finish();

  c.validate();
  return c;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("failed reading " + path);
  return ss.str();
}

RunConfig load_config(const std::string& path) { return parse_config(read_text_file(path)); }

std::string serialize(const RunConfig& c) {
  using toml::format_double;
  std::string s;
  auto quoted = [](const std::string& v) {
    std::string out = "\"";
    for (char ch : v) {
      if (ch == '"' || ch == '\\') out.push_back('\\');
      if (ch == '\n') {
        out += "\\n";
        continue;
      }
      if (ch == '\t') {
        out += "\\t";
        continue;
      }
      out.push_back(ch);
    }
    return out + "\"";
  };
  s += "[grid]\n";
  s += "dim = " + std::to_string(c.dim) + "\n";
  s += "points = " + std::to_string(c.points) + "\n";
  s += "box_length = " + format_double(c.box_length) + "\n";
  s += "\n[params]\n";
  s += "N = " + std::to_string(c.phenotypes) + "\n";
  s += "k = " + format_double(c.params.stiffness) + "\n";
  s += "nu = " + format_double(c.params.viscosity) + "\n";
  s += "T = " + format_double(c.params.horizon) + "\n";
  s += "cfl = " + format_double(c.params.cfl) + "\n";
  s += "max_dt = " + format_double(c.params.max_dt) + "\n";
  s += std::string("potential = ") + (c.darcy_bypass ? "\"darcy\"" : "\"brinkman\"") + "\n";
  s += "\n[law]\n";
  s += "kind = " + quoted(to_string(c.law.kind)) + "\n";
  s += "gamma0 = " + format_double(c.law.gamma0) + "\n";
  s += "gamma1 = " + format_double(c.law.gamma1) + "\n";
  s += "c = " + format_double(c.law.decay) + "\n";
  s += "\n[initial]\n";
  s += "profile = " + quoted(to_string(c.initial.profile)) + "\n";
  s += "center = " + list_text({c.initial.centre[0], c.initial.centre[1]}) + "\n";
  s += "width = " + format_double(c.initial.width) + "\n";
  s += "amplitude = " + format_double(c.initial.amplitude) + "\n";
  s += "trait_modulation = " + format_double(c.initial.trait_modulation) + "\n";
  s += "separation = " + format_double(c.initial.separation) + "\n";
  s += "\n[snapshots]\n";
  s += "count = " + std::to_string(c.snapshot_count) + "\n";
  if (!c.snapshot_times.empty()) s += "times = " + list_text(c.snapshot_times) + "\n";
  s += "\n[output]\n";
  s += "dir = " + quoted(c.output_dir) + "\n";
  return s;
}

Trajectory simulate(const RunConfig& config) {
  config.validate();
  return run(config.initial_state(), config.params, config.law, config.snapshots(), config.run_options());
}

}  // namespace tgrowth
