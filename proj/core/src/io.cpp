#include "carnot/io.hpp"

#include "carnot/error.hpp"
#include "carnot/format.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>

namespace carnot {

namespace {

using json = nlohmann::ordered_json;

json spec_json(const CarnotGroupSpec& spec) {
  json j;
  j["name"] = spec.name;
  j["step"] = spec.step;
  j["layer_dims"] = spec.layer_dims;
  json br = json::array();
  for (const BracketEntry& e : spec.brackets) br.push_back(json::array({e.i, e.j, e.k, e.c}));
  j["brackets"] = br;
  return j;
}

CarnotGroupSpec spec_from_json(const json& j) {
  if (!j.is_object()) throw SpecError("group spec must be an object");
  for (const char* key : {"name", "step", "layer_dims", "brackets"}) {
    if (!j.contains(key)) throw SpecError(std::string("group spec is missing key '") + key + "'");
  }
  CarnotGroupSpec spec;
  try {
    spec.name = j.at("name").get<std::string>();
    spec.step = j.at("step").get<int>();
    spec.layer_dims = j.at("layer_dims").get<std::vector<int>>();
  } catch (const nlohmann::json::exception& e) {
    throw SpecError(std::string("group spec: ") + e.what());
  }
  const json& br = j.at("brackets");
  if (!br.is_array()) throw SpecError("group spec: 'brackets' must be a list");
  for (std::size_t idx = 0; idx < br.size(); ++idx) {
    const json& e = br[idx];
    const std::string where = "brackets[" + std::to_string(idx) + "]";
    if (!e.is_array() || e.size() != 4 || !e[0].is_number_integer() || !e[1].is_number_integer() ||
        !e[2].is_number_integer() || !e[3].is_number()) {
      throw SpecError(where + ": expected [i, j, k, c] with integer indices, got " + e.dump());
    }
    spec.brackets.push_back({e[0].get<int>(), e[1].get<int>(), e[2].get<int>(), e[3].get<double>()});
  }
  return spec;
}

json coords_json(const Coords& c) {
  json a = json::array();
  for (int i = 0; i < c.size(); ++i) a.push_back(c[i]);
  return a;
}

Coords coords_from_json(const json& a, const std::string& what) {
  if (!a.is_array()) throw InvalidArgumentError(what + " must be a list of numbers");
  Coords c(static_cast<Eigen::Index>(a.size()));
  for (std::size_t i = 0; i < a.size(); ++i) c[static_cast<Eigen::Index>(i)] = a[i].get<double>();
  return c;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(line);
  while (std::getline(in, cur, sep)) out.push_back(cur);
  return out;
}

}  // namespace

CarnotGroupSpec parse_group_spec(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw SpecError(std::string("group spec is not valid JSON: ") + e.what());
  }
  return spec_from_json(j);
}

CarnotGroupSpec load_group_spec(const std::filesystem::path& path) {
  return parse_group_spec(read_text_file(path));
}

std::string group_spec_to_json(const CarnotGroupSpec& spec) { return spec_json(spec).dump(2); }

GroupPtr resolve_group(const std::string& name_or_path) {
  if (std::filesystem::exists(name_or_path) && std::filesystem::is_regular_file(name_or_path)) {
    return std::make_shared<const CarnotGroup>(load_group_spec(name_or_path));
  }
  return group_by_name(name_or_path);
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open '" + path.string() + "' for writing");
  out << text;
  if (!out) throw Error("failed writing '" + path.string() + "'");
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_field_dump(const GridField& field, const std::filesystem::path& directory,
                      const std::string& stem) {
  const Grid& grid = field.grid();
  const int n = grid.dim();
  std::string csv;
  for (int a = 0; a < n; ++a) csv += "i" + std::to_string(a) + ",";
  for (int a = 0; a < n; ++a) csv += "x" + std::to_string(a) + ",";
  csv += "value\n";
  std::vector<int> index(static_cast<std::size_t>(n));
  for (std::size_t flat = 0; flat < grid.size(); ++flat) {
    grid.unravel_into(flat, index);
    for (int i : index) csv += std::to_string(i) + ",";
    for (int a = 0; a < n; ++a) csv += format_double(grid.coordinate(a, index[static_cast<std::size_t>(a)])) + ",";
    csv += format_double(field.value(flat)) + "\n";
  }
  json side;
  side["format"] = "carnot-field-v1";
  side["layout"] = "row-major, last axis fastest";
  side["csv"] = stem + ".csv";
  side["group"] = spec_json(grid.group().spec());
  side["domain"] = {{"lower", coords_json(grid.domain().lower())},
                    {"upper", coords_json(grid.domain().upper())}};
  side["resolution"] = grid.resolution();
  side["sup_norm"] = field.sup_norm();
  json meta = json::object();
  for (const auto& [k, v] : field.metadata()) meta[k] = v;
  side["metadata"] = meta;
  write_text_file(directory / (stem + ".csv"), csv);
  write_text_file(directory / (stem + ".json"), side.dump(2) + "\n");
}

GridField read_field_dump(const std::filesystem::path& path) {
  std::filesystem::path sidecar = path;
  sidecar.replace_extension(".json");
  json side;
  try {
    side = json::parse(read_text_file(sidecar));
  } catch (const nlohmann::json::parse_error& e) {
    throw InvalidArgumentError("field sidecar '" + sidecar.string() + "' is not valid JSON: " + e.what());
  }
  if (side.value("format", "") != "carnot-field-v1") {
    throw InvalidArgumentError("'" + sidecar.string() + "' is not a carnot field sidecar");
  }
  auto group = std::make_shared<const CarnotGroup>(spec_from_json(side.at("group")));
  BoxDomain domain(group, coords_from_json(side.at("domain").at("lower"), "domain.lower"),
                   coords_from_json(side.at("domain").at("upper"), "domain.upper"));
  Grid grid(domain, side.at("resolution").get<std::vector<int>>());
  FieldMetadata meta;
  for (const auto& [k, v] : side.at("metadata").items()) meta[k] = v.get<std::string>();

  std::filesystem::path csv_path = sidecar.parent_path() / side.at("csv").get<std::string>();
  std::istringstream in(read_text_file(csv_path));
  std::string line;
  std::getline(in, line);  // header
  const int n = grid.dim();
  std::vector<double> values;
  values.reserve(grid.size());
  std::vector<int> expected(static_cast<std::size_t>(n));
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = split(line, ',');
    if (static_cast<int>(cells.size()) != 2 * n + 1) {
      throw InvalidArgumentError("field dump row " + std::to_string(values.size() + 1) + " has " +
                                 std::to_string(cells.size()) + " columns, expected " +
                                 std::to_string(2 * n + 1));
    }
    if (values.size() >= grid.size()) throw InvalidArgumentError("field dump has too many rows");
    grid.unravel_into(values.size(), expected);
    for (int a = 0; a < n; ++a) {
      if (std::stoi(cells[static_cast<std::size_t>(a)]) != expected[static_cast<std::size_t>(a)]) {
        throw InvalidArgumentError("field dump row " + std::to_string(values.size() + 1) +
                                   " is out of row-major order");
      }
    }
    values.push_back(parse_double(cells.back()));
  }
  if (values.size() != grid.size()) {
    throw InvalidArgumentError("field dump has " + std::to_string(values.size()) + " rows, expected " +
                               std::to_string(grid.size()));
  }
  return GridField(grid, std::move(values), std::move(meta));
}

}  // namespace carnot
