#pragma once

#include <string>

#include "tgrowth/diagnostics.hpp"
#include "tgrowth/grid.hpp"

namespace tgrowth {

/// Binary snapshot: ASCII header "PFLD 1 <dim> <n1> [n2] <box_length>\n"
/// followed by the row-major values as little-endian IEEE-754 doubles.
void write_snapshot(const Field& field, const std::string& path);
/// Exact inverse of write_snapshot. Throws ParseError on a bad header or
/// truncated payload, IoError when the file cannot be read.
Field read_snapshot(const std::string& path);
/// Same, requiring the stored grid to equal `expected`.
Field read_snapshot(const std::string& path, const SpatialGrid& expected);

/// CSV with header "time,<series...>" and %.17g values.
void write_diagnostics(const DiagnosticsRecord& record, const std::string& path);
DiagnosticsRecord read_diagnostics(const std::string& path);
std::string diagnostics_csv(const DiagnosticsRecord& record);

/// Writes via a temporary sibling and rename, so readers never see a
/// partial file.
void write_text_file(const std::string& path, const std::string& text);

/// %.17g formatting.
std::string format_exact(double v);

}  // namespace tgrowth
