#include <doctest.h>

#include <filesystem>

#include "qps/pipeline.hpp"
#include "support/generators.hpp"

using namespace qps;

TEST_CASE("identical configs give identical records") {
  for (const char* name : {"lambda0.json", "golden.json"}) {
    auto c = RunConfig::load(std::string(QPS_CONFIG_DIR "/") + name);
    for (const char* sub : {"spectrum", "suitability", "multiscale"}) {
      CAPTURE(name);
      CAPTURE(sub);
      auto a = run(c, sub);
      auto b = run(RunConfig::load(std::string(QPS_CONFIG_DIR "/") + name), sub);
      CHECK(a.to_json().dump() == b.to_json().dump());
    }
  }
}

TEST_CASE("records survive a write and read") {
  std::mt19937_64 rng(601);
  const auto dir = std::filesystem::temp_directory_path() / "qps_prop_records";
  for (int t = 0; t < 20; ++t) {
    ResultRecord r;
    r.run_id = std::to_string(rng());
    r.config_hash = sha256_hex(r.run_id);
    r.subcommand = "spectrum";
    std::vector<double> values;
    for (int i = 0; i < 50; ++i) {
      // awkward doubles: subnormals, huge magnitudes, long mantissas
      const double m = gen::uniform(rng, -1, 1);
      values.push_back(std::ldexp(m, gen::integer(rng, -1070, 1000)));
    }
    r.outputs["spectrum"] = {{"eigenvalues", values}, {"flag", t % 2 == 0}, {"count", t}};
    r.timings["spectrum"] = gen::uniform(rng);
    std::filesystem::remove_all(dir);
    write_record(r, dir);
    auto back = read_record(dir);
    CHECK(back == r);
    CHECK(back.outputs.at("spectrum").at("eigenvalues").get<std::vector<double>>() == values);
  }
  std::filesystem::remove_all(dir);
}
