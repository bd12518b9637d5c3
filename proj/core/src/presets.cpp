#include "carnot/error.hpp"
#include "carnot/group.hpp"

#include <charconv>

namespace carnot {

GroupPtr heisenberg(int n) {
  if (n < 1) throw InvalidArgumentError("Heisenberg group H^n needs n >= 1");
  CarnotGroupSpec spec;
  spec.name = n == 1 ? "heisenberg" : "heisenberg" + std::to_string(n);
  spec.step = 2;
  spec.layer_dims = {2 * n, 1};
  for (int i = 0; i < n; ++i) spec.brackets.push_back({i, n + i, 2 * n, 1.0});
  return std::make_shared<const CarnotGroup>(std::move(spec));
}

GroupPtr free_step2(int generators) {
  if (generators < 2) throw InvalidArgumentError("free step-2 group needs >= 2 generators");
  CarnotGroupSpec spec;
  spec.name = generators == 3 ? "free2" : "free2_" + std::to_string(generators);
  spec.step = 2;
  const int pairs = generators * (generators - 1) / 2;
  spec.layer_dims = {generators, pairs};
  int k = generators;
  for (int a = 0; a < generators; ++a) {
    for (int b = a + 1; b < generators; ++b) spec.brackets.push_back({a, b, k++, 1.0});
  }
  return std::make_shared<const CarnotGroup>(std::move(spec));
}

GroupPtr engel() {
  CarnotGroupSpec spec;
  spec.name = "engel";
  spec.step = 3;
  spec.layer_dims = {2, 1, 1};
  spec.brackets = {{0, 1, 2, 1.0}, {0, 2, 3, 1.0}};
  return std::make_shared<const CarnotGroup>(std::move(spec));
}

GroupPtr abelian(int n) {
  if (n < 1) throw InvalidArgumentError("abelian group needs n >= 1");
  CarnotGroupSpec spec;
  spec.name = "abelian" + std::to_string(n);
  spec.step = 1;
  spec.layer_dims = {n};
  return std::make_shared<const CarnotGroup>(std::move(spec));
}

namespace {

bool parse_suffix(std::string_view name, std::string_view prefix, int& value) {
  if (name.substr(0, prefix.size()) != prefix) return false;
  const std::string_view rest = name.substr(prefix.size());
  if (rest.empty()) return false;
  auto [ptr, ec] = std::from_chars(rest.data(), rest.data() + rest.size(), value);
  return ec == std::errc{} && ptr == rest.data() + rest.size();
}

}  // namespace

GroupPtr group_by_name(std::string_view name) {
  int n = 0;
  if (name == "heisenberg" || name == "H1") return heisenberg(1);
  if (name == "engel") return engel();
  if (name == "free2") return free_step2(3);
  if (parse_suffix(name, "free2_", n)) return free_step2(n);
  if (parse_suffix(name, "heisenberg", n)) return heisenberg(n);
  if (parse_suffix(name, "abelian", n)) return abelian(n);
  throw InvalidArgumentError("unknown group preset '" + std::string(name) + "'");
}

std::vector<std::string> preset_names() {
  return {"heisenberg", "heisenbergN", "free2", "free2_K", "engel", "abelianN"};
}

}  // namespace carnot
