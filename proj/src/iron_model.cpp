#include "steadyscan/iron_model.hpp"

#include <filesystem>
#include <map>

#include "steadyscan/model_parser.hpp"

namespace steadyscan {

namespace detail {
const std::map<std::string, std::string>& embedded_models();
}

namespace {

Model embedded(const std::string& stem) {
  const auto& all = detail::embedded_models();
  auto it = all.find(stem);
  if (it == all.end()) throw Error("no built-in model named '" + stem + "'");
  return parse_model(it->second);
}

}  // namespace

Model builtin_iron_model() { return embedded("iron_v2"); }

RevisionFixture revision_fixture() { return {embedded("pre_revision"), embedded("iron_v2")}; }

std::vector<std::string> builtin_model_names() {
  std::vector<std::string> out;
  for (const auto& [k, v] : detail::embedded_models()) out.push_back(k);
  out.push_back("iron");
  return out;
}

Model load_model(const std::string& name_or_path) {
  std::error_code ec;
  if (std::filesystem::is_regular_file(name_or_path, ec)) return load_model_file(name_or_path);
  std::string stem = std::filesystem::path(name_or_path).stem().string();
  if (stem == "iron") stem = "iron_v2";
  if (detail::embedded_models().count(stem)) return embedded(stem);
  throw Error("cannot read model '" + name_or_path + "': no such file or built-in model");
}

double simulation_horizon(const Model& m) { return m.option("horizon", 4e5); }

}  // namespace steadyscan
