// Scenario runner: reads a JSON scenario from a file or stdin,
// executes its tasks, and emits a deterministic report.
//
// Exit codes: 0 all verifications passed, 1 a verification failed,
// 2 malformed input or a declaration that fails validation.

#include <chrono>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "xmod/xmod.hpp"

namespace {

std::string read_input(const std::string& path) {
  if (path == "-") {
    std::ostringstream ss;
    ss << std::cin.rdbuf();
    return ss.str();
  }
  std::ifstream in(path);
  if (!in) throw xmod::Error("ParseError", "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void print_text_report(const xmod::Report& rep) {
  using nlohmann::json;
  for (const auto& task : rep.document["tasks"]) {
    std::cout << (task["pass"].get<bool>() ? "[PASS] " : "[FAIL] ") << task["task"].get<std::string>();
    if (task.contains("inputs"))
      for (auto& [k, v] : task["inputs"].items()) std::cout << " " << k << "=" << v.dump();
    if (task.contains("data"))
      for (auto& [k, v] : task["data"].items()) std::cout << " " << k << "=" << v.dump();
    if (task.contains("error")) std::cout << " error=" << task["error"]["code"].get<std::string>();
    std::cout << "\n";
  }
  std::cout << (rep.all_passed ? "all tasks passed" : "some tasks FAILED") << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"crossed-module C*-algebra scenario runner"};
  std::string scenario_path = "-";
  xmod::Settings settings;
  std::string output = "json";
  app.add_option("scenario", scenario_path, "scenario file (JSON); '-' reads stdin");
  app.add_option("--tol", settings.tol, "tolerance for structural identities");
  app.add_option("--seed", settings.seed, "seed for the randomized block decomposition");
  app.add_option("--output", output, "report format: json or text")
      ->check(CLI::IsMember({"json", "text"}));
  app.add_option("--max-dim", settings.max_dim, "largest allowed algebra dimension");
  CLI11_PARSE(app, argc, argv);

  xmod::max_algebra_dim() = settings.max_dim;
  try {
    const std::string text = read_input(scenario_path);
    xmod::Scenario sc = xmod::parse_scenario(text, settings);
    xmod::Report rep = xmod::run(sc, settings);
    if (output == "json")
      std::cout << rep.document.dump(2) << "\n";
    else
      print_text_report(rep);
    return rep.all_passed ? 0 : 1;
  } catch (const xmod::Error& e) {
    nlohmann::json err = {{"error", {{"code", e.code()}, {"detail", e.what()}}}};
    if (output == "json")
      std::cout << err.dump(2) << "\n";
    else
      std::cout << "[ERROR] " << e.what() << "\n";
    return 2;
  }
}
