#include "tgrowth/io.hpp"

#include <bit>
#include <charconv>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "tgrowth/config.hpp"
#include "tgrowth/error.hpp"
#include "tgrowth/toml_lite.hpp"

namespace fs = std::filesystem;

namespace tgrowth {

namespace {

constexpr std::size_t kMaxHeader = 256;

std::uint64_t to_little(std::uint64_t v) {
  if constexpr (std::endian::native == std::endian::little) return v;
  std::uint64_t out = 0;
  for (int i = 0; i < 8; ++i) out |= ((v >> (8 * i)) & 0xffu) << (8 * (7 - i));
  return out;
}

std::string shortest(double v) {
  // Header lengths are written in shortest round-trip form ("10", "12.5").
  std::string s = toml::format_double(v);
  if (s.size() > 2 && s.compare(s.size() - 2, 2, ".0") == 0) s.resize(s.size() - 2);
  return s;
}

double parse_double(const std::string& token, int line) {
  const char* first = token.data();
  const char* last = first + token.size();
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) throw ParseError("invalid number '" + token + "'", line);
  return v;
}

int parse_int(const std::string& token, const std::string& path) {
  int v = 0;
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
  if (ec != std::errc() || ptr != token.data() + token.size()) throw ParseError(path + ": bad integer in header", 1);
  return v;
}

void ensure_parent(const std::string& path) {
  const fs::path parent = fs::path(path).parent_path();
  if (parent.empty()) return;
  std::error_code ec;
  fs::create_directories(parent, ec);
  if (ec) throw IoError("cannot create directory " + parent.string() + ": " + ec.message());
}

}  // namespace

std::string format_exact(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_text_file(const std::string& path, const std::string& text) {
  ensure_parent(path);
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + tmp + " for writing");
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) throw IoError("failed writing " + tmp);
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw IoError("cannot rename " + tmp + " to " + path + ": " + ec.message());
}

void write_snapshot(const Field& field, const std::string& path) {
  const auto& g = field.grid();
  std::string data = "PFLD 1 " + std::to_string(g.dim()) + " " + std::to_string(g.points_per_axis());
  if (g.dim() == 2) data += " " + std::to_string(g.points_per_axis());
  data += " " + shortest(g.box_length()) + "\n";
  const std::size_t header = data.size();
  data.resize(header + 8 * field.size());
  for (std::size_t i = 0; i < field.size(); ++i) {
    const std::uint64_t bits = to_little(std::bit_cast<std::uint64_t>(field[i]));
    std::memcpy(data.data() + header + 8 * i, &bits, 8);
  }
  write_text_file(path, data);
}

Field read_snapshot(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  const std::string bytes = ss.str();

  const auto eol = bytes.find('\n');
  if (eol == std::string::npos || eol > kMaxHeader) throw ParseError(path + ": missing PFLD header", 1);
  std::istringstream header(bytes.substr(0, eol));
  std::string magic, version;
  header >> magic >> version;
  if (magic != "PFLD" || version != "1") throw ParseError(path + ": not a PFLD 1 snapshot", 1);
  std::vector<std::string> rest;
  for (std::string tok; header >> tok;) rest.push_back(tok);
  if (rest.size() < 3) throw ParseError(path + ": incomplete PFLD header", 1);
  const int dim = parse_int(rest[0], path);
  if (dim != 1 && dim != 2) throw ParseError(path + ": dimension must be 1 or 2", 1);
  if (rest.size() != static_cast<std::size_t>(dim) + 2) throw ParseError(path + ": dimension mismatch in header", 1);
  const int n1 = parse_int(rest[1], path);
  if (dim == 2 && parse_int(rest[2], path) != n1) throw ParseError(path + ": only square grids are supported", 1);
  const double length = parse_double(rest.back(), 1);

  const SpatialGrid grid = [&] {
    try {
      return SpatialGrid(dim, n1, length);
    } catch (const ValidationError& e) {
      throw ParseError(path + ": " + e.what(), 1);
    }
  }();
  const std::size_t expected = 8 * grid.cell_count();
  const std::size_t payload = bytes.size() - eol - 1;
  if (payload < expected) throw ParseError(path + ": truncated payload", 0);
  if (payload > expected) throw ParseError(path + ": trailing bytes after payload", 0);
  std::vector<double> values(grid.cell_count());
  for (std::size_t i = 0; i < values.size(); ++i) {
    std::uint64_t bits = 0;
    std::memcpy(&bits, bytes.data() + eol + 1 + 8 * i, 8);
    values[i] = std::bit_cast<double>(to_little(bits));
  }
  return Field(grid, std::move(values));
}

Field read_snapshot(const std::string& path, const SpatialGrid& expected) {
  Field f = read_snapshot(path);
  if (!(f.grid() == expected)) throw ParseError(path + ": grid does not match the expected dimensions", 0);
  return f;
}

std::string diagnostics_csv(const DiagnosticsRecord& record) {
  std::string s = "time";
  for (const auto& [name, values] : record.series) s += "," + name;
  s += "\n";
  for (std::size_t r = 0; r < record.times.size(); ++r) {
    s += format_exact(record.times[r]);
    for (const auto& [name, values] : record.series) s += "," + format_exact(values[r]);
    s += "\n";
  }
  return s;
}

void write_diagnostics(const DiagnosticsRecord& record, const std::string& path) {
  write_text_file(path, diagnostics_csv(record));
}

DiagnosticsRecord read_diagnostics(const std::string& path) {
  std::istringstream in(read_text_file(path));
  auto split = [](const std::string& line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
      const auto comma = line.find(',', start);
      out.push_back(line.substr(start, comma - start));
      if (comma == std::string::npos) return out;
      start = comma + 1;
    }
  };
  std::string line;
  if (!std::getline(in, line)) throw ParseError(path + ": empty diagnostics file", 1);
  const auto header = split(line);
  if (header.front() != "time") throw ParseError(path + ": first column must be 'time'", 1);

  DiagnosticsRecord rec;
  rec.run_id = fs::path(path).parent_path().filename().string();
  std::vector<std::vector<double>> columns(header.size() - 1);
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto cells = split(line);
    if (cells.size() != header.size()) throw ParseError("expected " + std::to_string(header.size()) + " columns", lineno);
    rec.times.push_back(parse_double(cells[0], lineno));
    for (std::size_t j = 1; j < cells.size(); ++j) columns[j - 1].push_back(parse_double(cells[j], lineno));
  }
  for (std::size_t j = 1; j < header.size(); ++j) rec.add(header[j], std::move(columns[j - 1]));
  return rec;
}

}  // namespace tgrowth
