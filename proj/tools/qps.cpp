#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "qps/pipeline.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Quasi-periodic operators and Aubry duality at desk scale"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config;
  std::string out;
  for (const auto& name : qps::subcommands()) {
    auto* sub = app.add_subcommand(name, "run the " + name + " pipeline");
    sub->add_option("--config", config, "run configuration (JSON)")->required();
    sub->add_option("--out", out, "output directory");
  }

  std::string record;
  std::string kind;
  auto* plot = app.add_subcommand("plot", "re-emit plot data from a stored record");
  plot->add_option("--record", record, "directory holding record.json")->required();
  plot->add_option("--kind", kind, "trajectory | histogram | field | spectrum | suitability")->required();
  plot->add_option("--out", out, "output directory (defaults to the record directory)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    // unknown subcommands and missing options are configuration errors
    app.exit(e);
    std::cerr << nlohmann::json{{"error", "ConfigInvalid"}, {"message", e.what()}}.dump() << "\n";
    return 2;
  }

  if (plot->parsed()) {
    try {
      const auto rec = qps::read_record(record);
      std::cout << qps::emit_plotdata(rec, kind, out.empty() ? record : out).string() << "\n";
      return 0;
    } catch (const qps::Error& e) {
      std::cerr << nlohmann::json{{"error", std::string(qps::to_string(e.kind()))}, {"message", e.what()}}.dump() << "\n";
      return e.kind() == qps::ErrorKind::UnknownKind ? 2 : 1;
    }
  }
  return qps::run_command(app.get_subcommands().front()->get_name(), config, out);
}
