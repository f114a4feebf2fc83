#include "tgrowth/harness.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <filesystem>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

#include "tgrowth/error.hpp"
#include "tgrowth/io.hpp"
#include "tgrowth/toml_lite.hpp"

namespace fs = std::filesystem;

namespace tgrowth {

// ---------------------------------------------------------------------------
// Rates and trends

bool RateFit::converged() const noexcept { return std::isinf(slope) && slope > 0.0; }

RateFit fit_rate(const std::vector<std::pair<double, double>>& points) {
  if (points.size() < 3) throw ValidationError("a rate fit needs at least 3 points");
  std::size_t zeros = 0;
  for (const auto& [x, y] : points) {
    if (!(x > 0.0) || !std::isfinite(x)) throw ValidationError("rate fit parameters must be positive");
    if (!(y >= 0.0) || !std::isfinite(y)) throw ValidationError("rate fit values must be nonnegative");
    if (y == 0.0) ++zeros;
  }
  RateFit fit;
  fit.points = points.size();
  if (zeros == points.size()) {
    fit.slope = std::numeric_limits<double>::infinity();
    fit.r_squared = 1.0;
    return fit;
  }
  if (zeros) throw ValidationError("rate fit values mix zeros and nonzeros");

  const double n = static_cast<double>(points.size());
  double sx = 0.0, sy = 0.0;
  for (const auto& [x, y] : points) {
    sx += std::log(x);
    sy += std::log(y);
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (const auto& [x, y] : points) {
    const double dx = std::log(x) - mx, dy = std::log(y) - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (sxx == 0.0) throw ValidationError("rate fit parameters must not all be equal");
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  const double residual = std::max(syy - fit.slope * sxy, 0.0);
  fit.r_squared = syy > 0.0 ? std::clamp(1.0 - residual / syy, 0.0, 1.0) : 1.0;
  return fit;
}

bool strictly_decreasing(const std::vector<double>& values) {
  for (std::size_t i = 1; i < values.size(); ++i)
    if (!(values[i] < values[i - 1])) return false;
  return true;
}

bool monotone_trend(const std::vector<double>& values, bool decreasing) {
  if (values.size() < 4) throw ValidationError("a monotone trend needs at least 4 points");
  auto near_one = [](double r) { return std::isfinite(r) && std::abs(r - 1.0) <= 0.1; };
  int inversions = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    const bool ok = decreasing ? values[i] < values[i - 1] : values[i] > values[i - 1];
    if (ok) continue;
    if (++inversions > 1) return false;
    const double here = values[i] / values[i - 1];
    const double prev = i >= 2 ? values[i - 1] / values[i - 2] : 1.0;
    const double next = i + 1 < values.size() ? values[i + 1] / values[i] : 1.0;
    if (!near_one(here) || !near_one(prev) || !near_one(next)) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Sweep grid

namespace {

template <typename T>
bool strictly_monotone(const std::vector<T>& v) {
  bool up = true, down = true;
  for (std::size_t i = 1; i < v.size(); ++i) {
    up = up && v[i] > v[i - 1];
    down = down && v[i] < v[i - 1];
  }
  return up || down;
}

RunConfig with_tuple(const RunConfig& base, int n, double k, double nu) {
  RunConfig c = base;
  c.phenotypes = n;
  c.params.stiffness = k;
  c.params.viscosity = nu;
  c.validate();
  return c;
}

}  // namespace

void SweepGrid::validate() const {
  if (phenotypes.empty() || stiffness.empty() || viscosity.empty()) throw ValidationError("every sweep axis must be nonempty");
  if (!strictly_monotone(phenotypes) || !strictly_monotone(stiffness) || !strictly_monotone(viscosity))
    throw ValidationError("sweep axes must be sorted without repeats");
  if (zip && !(phenotypes.size() == stiffness.size() && stiffness.size() == viscosity.size()))
    throw ValidationError("zipped sweep axes must have equal lengths");
  if (workers < 1 || workers > 256) throw ValidationError("workers must lie in [1, 256]");
  if (output_dir.empty()) throw ValidationError("sweep output directory must not be empty");
}

std::vector<RunConfig> SweepGrid::entries() const {
  validate();
  std::vector<RunConfig> out;
  if (zip) {
    for (std::size_t j = 0; j < phenotypes.size(); ++j)
      out.push_back(with_tuple(base, phenotypes[j], stiffness[j], viscosity[j]));
    return out;
  }
  for (int n : phenotypes)
    for (double k : stiffness)
      for (double nu : viscosity) out.push_back(with_tuple(base, n, k, nu));
  return out;
}

SweepGrid parse_sweep_config(const std::string& text) {
  const toml::Document doc = toml::parse(text);
  SweepGrid grid;
  grid.base = config_from_document(doc, {"sweep"});
  grid.phenotypes = {grid.base.phenotypes};
  grid.stiffness = {grid.base.params.stiffness};
  grid.viscosity = {grid.base.params.viscosity};
  if (auto it = doc.find("sweep"); it != doc.end()) {
    for (const auto& [key, entry] : it->second) {
      auto numbers = [&, &key = key, &entry = entry] {
        if (const auto* v = std::get_if<std::vector<double>>(&entry.value)) return *v;
        throw ParseError("sweep." + key + " must be an array of numbers", entry.line);
      };
      if (key == "N") {
        grid.phenotypes.clear();
        for (double v : numbers()) {
          if (v != std::floor(v) || v < 1 || v > 4096) throw ParseError("sweep.N entries must be integers", entry.line);
          grid.phenotypes.push_back(static_cast<int>(v));
        }
      } else if (key == "k") {
        grid.stiffness = numbers();
      } else if (key == "nu") {
        grid.viscosity = numbers();
      } else if (key == "zip") {
        const auto* b = std::get_if<bool>(&entry.value);
        if (!b) throw ParseError("sweep.zip must be a boolean", entry.line);
        grid.zip = *b;
      } else if (key == "workers") {
        const auto* i = std::get_if<std::int64_t>(&entry.value);
        if (!i) throw ParseError("sweep.workers must be an integer", entry.line);
        grid.workers = static_cast<int>(std::clamp<std::int64_t>(*i, -1, 1000));
      } else if (key == "output") {
        const auto* s = std::get_if<std::string>(&entry.value);
        if (!s) throw ParseError("sweep.output must be a string", entry.line);
        grid.output_dir = *s;
      } else {
        throw ParseError("unknown key sweep." + key, entry.line);
      }
    }
  }
  grid.entries();
  return grid;
}

SweepGrid load_sweep_config(const std::string& path) { return parse_sweep_config(read_text_file(path)); }

// ---------------------------------------------------------------------------
// Persistence

std::string config_hash(const RunConfig& config) {
  RunConfig c = config;
  c.output_dir = ".";
  const std::string text = serialize(c);
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(text.data(), text.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw Error("SHA-256 digest failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[digest[i] >> 4]);
    out.push_back(hex[digest[i] & 0xf]);
  }
  return out;
}

double SweepEntry::scalar(const std::string& name) const {
  for (const auto& [key, v] : scalars)
    if (key == name) return v;
  throw ValidationError("entry " + hash + " has no scalar '" + name + "'");
}

const SweepEntry* SweepTable::find(const Tuple& key) const noexcept {
  for (const auto& e : entries)
    if (e.key() == key) return &e;
  return nullptr;
}

namespace {

std::string entry_dirname(const std::string& hash) { return "entry-" + hash.substr(0, 16); }

std::string status_text(const SweepEntry& e) {
  std::string s = std::string("status = ") + (e.ok ? "\"ok\"" : "\"failed\"") + "\n";
  s += "N = " + std::to_string(e.phenotypes) + "\n";
  s += "k = " + toml::format_double(e.stiffness) + "\n";
  s += "nu = " + toml::format_double(e.viscosity) + "\n";
  if (!e.ok) {
    std::string msg;
    for (char c : e.error) {
      if (c == '"' || c == '\\') msg.push_back('\\');
      msg.push_back(c == '\n' ? ' ' : c);
    }
    s += "error = \"" + msg + "\"\n";
  }
  for (const auto& [key, v] : e.scalars) s += key + " = " + toml::format_double(v) + "\n";
  return s;
}

SweepEntry parse_status(const std::string& dir, const std::string& hash) {
  const std::string path = (fs::path(dir) / "status").string();
  const toml::Document doc = [&] {
    try {
      return toml::parse(read_text_file(path));
    } catch (const ParseError& e) {
      throw ParseError(path + ": " + e.what(), 0);
    }
  }();
  SweepEntry e;
  e.hash = hash;
  e.dir = dir;
  for (const auto& [key, entry] : doc.at("")) {
    const auto& v = entry.value;
    auto number = [&, &key = key, &entry = entry] {
      if (const auto* d = std::get_if<double>(&v)) return *d;
      if (const auto* i = std::get_if<std::int64_t>(&v)) return static_cast<double>(*i);
      throw ParseError(path + ": " + key + " must be a number", entry.line);
    };
    if (key == "status") {
      const auto* s = std::get_if<std::string>(&v);
      if (!s || (*s != "ok" && *s != "failed")) throw ParseError(path + ": bad status", entry.line);
      e.ok = *s == "ok";
    } else if (key == "error") {
      if (const auto* s = std::get_if<std::string>(&v)) e.error = *s;
    } else if (key == "N") {
      e.phenotypes = static_cast<int>(number());
    } else if (key == "k") {
      e.stiffness = number();
    } else if (key == "nu") {
      e.viscosity = number();
    } else {
      e.scalars.emplace_back(key, number());
    }
  }
  // toml::Document orders keys; keep the scalars in a stable order too.
  return e;
}

std::string manifest_text(const std::vector<SweepEntry>& entries) {
  std::string s = "hash\tN\tk\tnu\tstatus\n";
  for (const auto& e : entries)
    s += e.hash + "\t" + std::to_string(e.phenotypes) + "\t" + toml::format_double(e.stiffness) + "\t" +
         toml::format_double(e.viscosity) + "\t" + (e.ok ? "ok" : "failed") + "\n";
  return s;
}

// Runs one entry into a scratch directory and renames it into place.
SweepEntry execute_entry(const RunConfig& config, const std::string& hash, const fs::path& root) {
  const fs::path final_dir = root / entry_dirname(hash);
  if (fs::exists(final_dir / "status")) return parse_status(final_dir.string(), hash);

  SweepEntry e;
  e.hash = hash;
  e.phenotypes = config.phenotypes;
  e.stiffness = config.params.stiffness;
  e.viscosity = config.params.viscosity;
  e.dir = final_dir.string();

  const fs::path tmp = root / (".tmp-" + entry_dirname(hash));
  std::error_code ec;
  fs::remove_all(tmp, ec);
  fs::create_directories(tmp, ec);
  if (ec) throw IoError("cannot create " + tmp.string() + ": " + ec.message());

  RunConfig stored = config;
  stored.output_dir = ".";
  write_text_file((tmp / "config").string(), serialize(stored));
  try {
    const Trajectory traj = simulate(config);
    write_diagnostics(build_record(traj, hash), (tmp / "diagnostics.csv").string());
    write_snapshot(traj.final().p, (tmp / "p_final.pfld").string());
    e.ok = true;
    e.scalars = summary_scalars(traj);
  } catch (const IoError&) {
    throw;
  } catch (const Error& err) {
    e.ok = false;
    e.error = err.what();
  }
  write_text_file((tmp / "status").string(), status_text(e));
  // Round-trip through the status text so fresh and reused entries agree.
  const SweepEntry committed = parse_status(tmp.string(), hash);

  fs::rename(tmp, final_dir, ec);
  if (ec) {
    if (fs::exists(final_dir / "status")) {
      fs::remove_all(tmp, ec);
    } else {
      throw IoError("cannot commit " + final_dir.string() + ": " + ec.message());
    }
  }
  SweepEntry out = committed;
  out.dir = final_dir.string();
  return out;
}

}  // namespace

SweepTable sweep(const SweepGrid& grid) {
  const auto configs = grid.entries();
  const fs::path root(grid.output_dir);
  std::error_code ec;
  fs::create_directories(root, ec);
  if (ec) throw IoError("cannot create sweep directory " + root.string() + ": " + ec.message());

  std::vector<std::string> hashes;
  for (const auto& c : configs) hashes.push_back(config_hash(c));

  SweepTable table;
  table.dir = root.string();
  table.entries.resize(configs.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= configs.size()) return;
      try {
        table.entries[i] = execute_entry(configs[i], hashes[i], root);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = configs.size();
      }
    }
  };
  const std::size_t count = std::min<std::size_t>(static_cast<std::size_t>(grid.workers), configs.size());
  std::vector<std::thread> pool;
  for (std::size_t w = 1; w < count; ++w) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);

  write_text_file((root / "manifest").string(), manifest_text(table.entries));
  return table;
}

SweepTable load_sweep(const std::string& dir) {
  const std::string path = (fs::path(dir) / "manifest").string();
  std::istringstream in(read_text_file(path));
  std::string line;
  if (!std::getline(in, line) || line != "hash\tN\tk\tnu\tstatus") throw ParseError(path + ": bad manifest header", 1);
  SweepTable table;
  table.dir = dir;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos || tab == 0) throw ParseError(path + ": malformed manifest row", lineno);
    const std::string hash = line.substr(0, tab);
    table.entries.push_back(parse_status((fs::path(dir) / entry_dirname(hash)).string(), hash));
  }
  return table;
}

// ---------------------------------------------------------------------------
// Limits

Field restrict_to(const Field& fine, const SpatialGrid& coarse) {
  const auto& g = fine.grid();
  if (g.dim() != coarse.dim() || g.box_length() != coarse.box_length())
    throw ValidationError("restriction needs matching dimension and box");
  const int nf = g.points_per_axis();
  const int nc = coarse.points_per_axis();
  if (nf < nc || nf % nc != 0) throw ValidationError("restriction target must be coarser by an integer factor");
  const int r = nf / nc;
  Field out(coarse);
  const double inv = 1.0 / std::pow(static_cast<double>(r), g.dim());
  for (std::size_t c = 0; c < fine.size(); ++c) {
    const auto idx = g.indices(c);
    const std::size_t target = g.dim() == 1 ? static_cast<std::size_t>(idx[0] / r)
                                            : static_cast<std::size_t>(idx[0] / r) * nc + static_cast<std::size_t>(idx[1] / r);
    out[target] += fine[c];
  }
  for (double& v : out.values()) v *= inv;
  return out;
}

std::vector<double> self_convergence(const SweepTable& table, const std::vector<Tuple>& path) {
  if (path.size() < 2) throw ValidationError("a convergence path needs at least 2 tuples");
  std::vector<const SweepEntry*> hits;
  std::string missing;
  for (const auto& key : path) {
    const auto* e = table.find(key);
    if (!e || !e->ok) {
      const auto& [n, k, nu] = key;
      missing += " (" + std::to_string(n) + ", " + toml::format_double(k) + ", " + toml::format_double(nu) + ")";
      continue;
    }
    hits.push_back(e);
  }
  if (!missing.empty()) throw ValidationError("sweep has no completed entry for" + missing);

  std::vector<Field> finals;
  for (const auto* e : hits) finals.push_back(read_snapshot((fs::path(e->dir) / "p_final.pfld").string()));
  const auto coarsest = std::min_element(finals.begin(), finals.end(), [](const Field& a, const Field& b) {
                          return a.grid().points_per_axis() < b.grid().points_per_axis();
                        })->grid();

  // The L^2_loc window: support of the default test bump.
  const RunConfig first = load_config((fs::path(hits.front()->dir) / "config").string());
  const MultiState init = first.initial.build(coarsest, first.phenotypes);
  TestFunction bump;
  bump.centre = mass_centroid(mean_density(init));
  bump.radius = 0.25 * coarsest.box_length();

  std::vector<Field> restricted;
  for (const auto& f : finals) restricted.push_back(restrict_to(f, coarsest));
  std::vector<double> out;
  for (std::size_t j = 0; j + 1 < restricted.size(); ++j) {
    double acc = 0.0;
    for (std::size_t c = 0; c < coarsest.cell_count(); ++c) {
      if (bump.spatial(coarsest.centre(c), coarsest.box_length()) <= 0.0) continue;
      const double d = restricted[j + 1][c] - restricted[j][c];
      acc += d * d;
    }
    out.push_back(std::sqrt(acc * coarsest.cell_volume()));
  }
  return out;
}

Trajectory darcy_reference(const RunConfig& config) {
  RunConfig c = config;
  c.params.viscosity = 0.0;
  c.darcy_bypass = true;
  return simulate(c);
}

// ---------------------------------------------------------------------------
// Rate targets

const TargetSpec& target_spec(const std::string& name) {
  static const std::vector<TargetSpec> specs{
      {"wminusp", "w_minus_p_l2", Axis::viscosity, 0.45, true, 0.95},
      {"lemma7", "lemma7", Axis::viscosity, 0.15, true, 0.0},
      {"pweak", "pweak", Axis::stiffness, -0.8, false, 0.0},
      {"complementarity", "complementarity", Axis::stiffness, 0.0, false, 0.0},
      {"riemann", "riemann", Axis::phenotypes, -0.9, false, 0.0},
  };
  for (const auto& s : specs)
    if (s.name == name) return s;
  throw ValidationError("unknown rate target '" + name + "' (wminusp, pweak, lemma7, riemann, complementarity)");
}

RateReport evaluate_rates(const SweepTable& table, const std::string& target) {
  RateReport rep;
  rep.spec = target_spec(target);
  std::vector<std::pair<double, double>> points;
  for (const auto& e : table.entries) {
    if (!e.ok) continue;
    double x = 0.0;
    switch (rep.spec.axis) {
      case Axis::phenotypes: x = e.phenotypes; break;
      case Axis::stiffness: x = e.stiffness; break;
      case Axis::viscosity: x = e.viscosity; break;
    }
    for (const auto& [px, py] : points)
      if (px == x) throw ValidationError("sweep repeats the fitted parameter; restrict it to one varying axis");
    points.emplace_back(x, std::abs(e.scalar(rep.spec.scalar)));
  }
  rep.fit = fit_rate(points);
  const double s = rep.fit.slope;
  bool ok;
  if (rep.spec.at_least)
    ok = s >= rep.spec.threshold;
  else
    ok = rep.spec.threshold == 0.0 ? s < 0.0 : s <= rep.spec.threshold;
  rep.passed = ok && rep.fit.r_squared >= rep.spec.min_r_squared;
  return rep;
}

}  // namespace tgrowth
