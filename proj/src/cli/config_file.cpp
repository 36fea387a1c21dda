#include <string>
#include <vector>

#include "bwe/errors.hpp"
#include "internal.hpp"

namespace bwe::cli::detail {

namespace {

CLI::Option* find_long(CLI::App& app, const std::string& key) {
  for (auto* opt : app.get_options()) {
    for (const auto& name : opt->get_lnames()) {
      if (name == key) return opt;
    }
  }
  return nullptr;
}

bool known_elsewhere(CLI::App& root, const CLI::App& sub, const std::string& key) {
  for (auto* other : root.get_subcommands([](CLI::App*) { return true; })) {
    if (other != &sub && find_long(*other, key) != nullptr) return true;
  }
  return false;
}

}  // namespace

void apply_config_file(CLI::App& root, CLI::App& sub, const std::filesystem::path& file) {
  std::vector<CLI::ConfigItem> items;
  try {
    items = CLI::ConfigTOML().from_file(file.string());
  } catch (const CLI::Error& e) {
    throw Error("config " + file.string() + ": " + e.what());
  }

  for (const auto& item : items) {
    if (item.name == "++" || item.name == "--") continue;  // section markers
    if (!item.parents.empty() && !(item.parents.size() == 1 && item.parents[0] == sub.get_name())) {
      continue;
    }
    if (item.name == "config") throw Error("config " + file.string() + ": nested config key");

    CLI::Option* opt = find_long(sub, item.name);
    if (opt == nullptr) {
      if (item.parents.empty() && known_elsewhere(root, sub, item.name)) continue;
      throw Error("config " + file.string() + ": unknown key '" + item.fullname() + "'");
    }
    if (opt->count() > 0) continue;  // command line wins

    try {
      for (const auto& value : item.inputs) opt->add_result(value);
      opt->run_callback();
    } catch (const CLI::Error& e) {
      throw Error("config " + file.string() + ": " + item.name + ": " + e.what());
    }
  }
}

}  // namespace bwe::cli::detail
