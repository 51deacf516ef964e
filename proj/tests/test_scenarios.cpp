#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "doctest.h"
#include "mstate/errors.hpp"
#include "mstate/scenarios.hpp"

using namespace mstate;
using json = nlohmann::json;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error thrown");
  return ErrorCode::IoFailure;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("registry contents") {
  const json cat = list_scenarios();
  CHECK(cat.size() >= 6);
  std::set<std::string> names;
  for (const auto& s : cat) {
    names.insert(s["name"].get<std::string>());
    CHECK_FALSE(s["anchor"].get<std::string>().empty());
    CHECK_FALSE(s["experiments"].empty());
  }
  CHECK(names.size() == cat.size());
  for (const char* n : {"free-two-channel-mourre", "homogeneous-2d-mourre", "decaying-mourre",
                        "manybody-two-line-thresholds", "manybody-minimal-velocity", "remark1-channel-decay",
                        "low-high-velocity", "essential-spectrum-appendix", "graf-field-check"}) {
    CHECK(names.count(n) == 1);
  }
  CHECK(list_scenarios() == cat);
}

TEST_CASE("unknown scenario and bad override paths") {
  CHECK(code_of([] { run_scenario("no-such-scenario"); }) == ErrorCode::UnknownScenario);
  CHECK(code_of([] { run_scenario("graf-field-check", {{"nope.deeper", "1"}}); }) == ErrorCode::OverridePathInvalid);
  CHECK(code_of([] { parse_overrides({"novalue"}); }) == ErrorCode::OverridePathInvalid);
}

TEST_CASE("overrides parse JSON values and walk arrays") {
  json c = {{"grid", {{"L", 40}, {"N", 1024}}}, {"ladder", json::array({{{"L", 1}}, {{"L", 2}}})}, {"name", "x"}};
  apply_override(c, "grid.N", "2048");
  apply_override(c, "ladder.1.L", "7.5");
  apply_override(c, "name", "plain text");
  CHECK(c["grid"]["N"] == 2048);
  CHECK(c["ladder"][1]["L"] == 7.5);
  CHECK(c["name"] == "plain text");
  CHECK(code_of([&] { apply_override(c, "ladder.5.L", "1"); }) == ErrorCode::OverridePathInvalid);
  CHECK(code_of([&] { apply_override(c, "grid.N.x", "1"); }) == ErrorCode::OverridePathInvalid);
  const Overrides o = parse_overrides({"a.b=3", "c=x=y"});
  CHECK(o[1].second == "x=y");
}

TEST_CASE("empty report gives an empty manifest") {
  const auto dir = std::filesystem::temp_directory_path() / "mstate_empty_manifest";
  RunReport r;
  r.scenario = "empty";
  const json m = emit_plotdata(r, dir.string());
  CHECK(m["entries"].empty());
  CHECK(std::filesystem::exists(dir / "manifest.json"));
  std::filesystem::remove_all(dir);
}

TEST_CASE("graf scenario is deterministic and writes plot data") {
  const auto dir = std::filesystem::temp_directory_path() / "mstate_graf_run";
  std::filesystem::remove_all(dir);
  const RunReport a = run_scenario("graf-field-check", {{"samples", "2000"}}, (dir / "a").string());
  const RunReport b = run_scenario("graf-field-check", {{"samples", "2000"}}, (dir / "b").string());
  CHECK(a.all_passed());
  CHECK(a.to_json()["experiments"][0]["data"] == b.to_json()["experiments"][0]["data"]);
  const auto fa = dir / "a" / "graf-field-check" / "graf__flatness.csv";
  const auto fb = dir / "b" / "graf-field-check" / "graf__flatness.csv";
  REQUIRE(std::filesystem::exists(fa));
  CHECK(slurp(fa) == slurp(fb));
  const json manifest = json::parse(slurp(dir / "a" / "graf-field-check" / "manifest.json"));
  CHECK(manifest["entries"].size() == 1);
  std::filesystem::remove_all(dir);
}

TEST_CASE("decay experiments emit log columns") {
  const auto dir = std::filesystem::temp_directory_path() / "mstate_decay_run";
  std::filesystem::remove_all(dir);
  const RunReport r = run_scenario("remark1-channel-decay",
                                   {{"grid.L", "100"}, {"grid.N", "1000"}, {"times.stop", "12"}, {"fit.t1", "2"},
                                    {"fit.t2", "12"}, {"reversal_time", "5"}},
                                   dir.string());
  const std::string csv = slurp(dir / "remark1-channel-decay" / "channel_decay__series.csv");
  CHECK(csv.rfind("t,value,log_t,log_value\n", 0) == 0);
  CHECK(std::filesystem::exists(dir / "remark1-channel-decay" / "trace.csv"));
  CHECK(r.find("propagator_hygiene") != nullptr);
  std::filesystem::remove_all(dir);
}

TEST_CASE("validate_config accepts specs and scenario files") {
  const json spec = json::parse(R"({"ambient_dim":1,"mode":"decaying","channels":[{"constant":0}]})");
  CHECK(validate_config(spec)["kind"] == "problem_spec");
  const json sc = {{"scenario", "graf-field-check"}, {"overrides", {{"smoothing", 0.2}}}};
  CHECK(validate_config(sc)["overrides"] == 1);
  CHECK(code_of([] { validate_config({{"scenario", "graf-field-check"}, {"overrides", {{"bad", 1}}}}); }) ==
        ErrorCode::OverridePathInvalid);
}

TEST_CASE("worker pool runs several scenarios") {
  const auto reports = run_scenarios({"graf-field-check", "graf-field-check"}, {{"samples", "500"}}, "", 2);
  REQUIRE(reports.size() == 2);
  CHECK(reports[0].to_json()["experiments"] == reports[1].to_json()["experiments"]);
}
