#pragma once

#include "carnot/grid.hpp"

#include <filesystem>
#include <string>

namespace carnot {

// Group spec file: JSON with keys name, step, layer_dims, brackets
// (list of [i, j, k, c], 0-based). Validation errors name the entry.
CarnotGroupSpec parse_group_spec(const std::string& text);
CarnotGroupSpec load_group_spec(const std::filesystem::path& path);
std::string group_spec_to_json(const CarnotGroupSpec& spec);

// Preset name, or a path to a spec file.
GroupPtr resolve_group(const std::string& name_or_path);

/// Field dump: `<stem>.csv` with one row per node (index tuple, n coordinates,
/// value) in row-major order, plus a `<stem>.json` sidecar carrying the group
/// spec, domain, resolution, layout and metadata. Numbers use the shortest
/// round-trip representation, so reload is bit-exact.
void write_field_dump(const GridField& field, const std::filesystem::path& directory,
                      const std::string& stem);
// Accepts either the .csv or the .json path.
GridField read_field_dump(const std::filesystem::path& path);

void write_text_file(const std::filesystem::path& path, const std::string& text);
std::string read_text_file(const std::filesystem::path& path);

}  // namespace carnot
