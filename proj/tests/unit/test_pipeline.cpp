#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "hotspot/ingest.hpp"
#include "hotspot/pipeline.hpp"

using namespace hotspot;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("hotspot_pipeline_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

nlohmann::json manifest_of(const fs::path& out) { return nlohmann::json::parse(slurp(out / "manifest.json")); }

std::map<std::string, std::string> tree(const fs::path& root) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (e.is_regular_file()) files[fs::relative(e.path(), root).string()] = slurp(e.path());
  }
  return files;
}

PipelineConfig quick(const fs::path& out) {
  PipelineConfig c;
  c.synthetic = "blobs";
  c.synthetic_n = 3000;
  c.sample_size = 2000;
  c.epsilon = 60;
  c.kappa = 8;
  c.runs = 5;
  c.correlation_sample = 400;
  c.max_radius = 300;
  c.ripley_sims = 5;
  c.ripley_lattice = 400;
  c.ripley_max_radius = 100;
  c.out = out;
  return c;
}

bool all_cached(const PipelineResult& r) {
  for (const auto& s : r.stages) {
    if (!s.cached) return false;
  }
  return !r.stages.empty();
}

}  // namespace

TEST_CASE("fixture run: manifest rows match ingest statistics and list every output") {
  const auto out = scratch("fixture");
  PipelineConfig c;
  c.input = HOTSPOT_FIXTURES "/six_rows.csv";
  c.out = out;
  c.ripley_sims = 20;
  c.ripley_lattice = 400;
  c.runs = 10;
  const auto r = run_pipeline(c);
  REQUIRE_MESSAGE(r.status == kExitSuccess, r.message);
  REQUIRE(r.stages.size() == 5);
  for (const auto& s : r.stages) CHECK_FALSE(s.cached);

  const auto m = manifest_of(out);
  const auto rows = m["stages"]["ingest"]["rows"];
  CHECK(rows["rows_read"] == 6);
  CHECK(rows["rows_kept"] == 4);
  CHECK(rows["rows_dropped_missing"] == 1);
  CHECK(rows["rows_dropped_unmapped_type"] == 1);
  CHECK(m["tool"] == "hotspot");
  CHECK(m["version"] == std::string(version()));
  CHECK(m["seeds"]["master"] == c.seed);
  CHECK(m["config"]["epsilon"] == "100");

  std::size_t listed = 0;
  for (const auto& [file, hash] : m["files"].items()) {
    CHECK(sha256_file(out / file) == hash.get<std::string>());
    ++listed;
  }
  std::size_t on_disk = 0;
  for (const auto& e : fs::recursive_directory_iterator(out)) {
    on_disk += e.is_regular_file() && e.path().filename() != "manifest.json";
  }
  CHECK(listed == on_disk);
  fs::remove_all(out);
}

TEST_CASE("rerunning with identical configuration is a cache hit with identical outputs") {
  const auto out = scratch("cache");
  const auto c = quick(out);
  REQUIRE(run_pipeline(c).status == kExitSuccess);
  auto before = tree(out);
  const auto again = run_pipeline(c);
  REQUIRE(again.status == kExitSuccess);
  CHECK(all_cached(again));
  auto after = tree(out);
  before.erase("manifest.json");
  after.erase("manifest.json");
  CHECK(before == after);

  auto changed = c;
  changed.epsilon = 80;
  const auto partial = run_pipeline(changed);
  REQUIRE(partial.status == kExitSuccess);
  CHECK(partial.stages[0].cached);   // ingest
  CHECK_FALSE(partial.stages[1].cached);  // cluster
  CHECK(partial.stages[2].cached);   // ripley

  // A damaged output forces its stage to run again.
  std::ofstream(out / "ripley_f.csv") << "tampered\n";
  const auto repaired = run_stages(std::vector<Stage>{Stage::Ripley}, changed);
  REQUIRE(repaired.status == kExitSuccess);
  CHECK_FALSE(repaired.stages[0].cached);
  fs::remove_all(out);
}

TEST_CASE("identical configurations produce byte-identical trees") {
  const auto a = scratch("det_a"), b = scratch("det_b");
  auto ca = quick(a), cb = quick(b);
  ca.threads = 1;
  cb.threads = 3;
  REQUIRE(run_pipeline(ca).status == kExitSuccess);
  REQUIRE(run_pipeline(cb).status == kExitSuccess);
  auto ta = tree(a), tb = tree(b);
  auto ma = manifest_of(a), mb = manifest_of(b);
  ta.erase("manifest.json");
  tb.erase("manifest.json");
  CHECK(ta == tb);
  CHECK(ma["files"] == mb["files"]);
  CHECK(ma["stages"] == mb["stages"]);
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST_CASE("missing input fails the ingest stage with a data error") {
  const auto out = scratch("missing");
  PipelineConfig c;
  c.input = "/definitely/not/here.csv";
  c.out = out;
  const auto r = run_pipeline(c);
  CHECK(r.status == kExitData);
  CHECK(r.message.rfind("stage ingest:", 0) == 0);

  PipelineConfig none;
  none.out = out;
  CHECK(run_pipeline(none).status == kExitUsage);
  fs::remove_all(out);
}

TEST_CASE("stages name the producer of a missing or stale dependency") {
  const auto out = scratch("deps");
  auto c = quick(out);
  const auto early = run_stages(std::vector<Stage>{Stage::Cluster}, c);
  CHECK(early.status == kExitStage);
  CHECK(early.message.find("hotspot ingest") != std::string::npos);

  REQUIRE(run_stages(std::vector<Stage>{Stage::Ingest}, c).status == kExitSuccess);
  const auto r = run_stages(std::vector<Stage>{Stage::Correlate}, c);
  CHECK(r.status == kExitStage);
  CHECK(r.message.rfind("stage correlate:", 0) == 0);
  CHECK(r.message.find("hotspot cluster") != std::string::npos);

  REQUIRE(run_stages(std::vector<Stage>{Stage::Cluster}, c).status == kExitSuccess);
  std::ofstream(out / "labels.csv", std::ios::app) << "\n";
  const auto stale = run_stages(std::vector<Stage>{Stage::Report}, c);
  CHECK(stale.status == kExitStage);
  CHECK(stale.message.find("stale") != std::string::npos);
  fs::remove_all(out);
}

TEST_CASE("report on a provided labeling") {
  const auto out = scratch("labels");
  PipelineConfig c;
  c.input = HOTSPOT_FIXTURES "/report_records.csv";
  c.years = {2001, 2003};
  c.labels = fs::path(HOTSPOT_FIXTURES "/report_labels.csv");
  c.out = out;
  const auto r = run_stages(std::vector<Stage>{Stage::Ingest, Stage::Report}, c);
  REQUIRE_MESSAGE(r.status == kExitSuccess, r.message);
  const auto t3 = slurp(out / "report" / "table3_type_totals.csv");
  CHECK(t3 == "Subset,RO,TH,BU,MO,AS,CR,AR,HO\nOutliers,0,0,0,0,0,0,1,1\nC1,1,3,0,0,0,0,0,0\nC2,0,1,2,0,1,0,0,0\n");

  auto wrong = c;
  wrong.labels = fs::path(HOTSPOT_FIXTURES "/six_rows.csv");
  CHECK(run_stages(std::vector<Stage>{Stage::Report}, wrong).status == kExitData);
  fs::remove_all(out);
}

TEST_CASE("settings: parsing, precedence and validation") {
  PipelineConfig c;
  apply_setting(c, "epsilon", " 42.5 ");
  apply_setting(c, "steepness", "3");
  apply_setting(c, "seed", "18446744073709551615");
  apply_setting(c, "alias.AGG ASSAULT", "ASSAULT");
  CHECK(c.epsilon == 42.5);
  CHECK(c.steepness == 3.0);
  CHECK(c.seed == 18446744073709551615ull);
  apply_setting(c, "steepness", "adaptive");
  CHECK_FALSE(c.steepness);
  REQUIRE(c.aliases.size() == 1);

  auto config_error = [](auto&& fn) {
    try {
      fn();
    } catch (const Error& e) {
      return e.kind() == ErrorKind::Config;
    }
    return false;
  };
  CHECK(config_error([&] { apply_setting(c, "epsilonn", "1"); }));
  CHECK(config_error([&] { apply_setting(c, "kappa", "ten"); }));
  CHECK(config_error([&] { apply_setting(c, "kappa", "-3"); }));
  CHECK(config_error([&] { apply_setting(c, "synthetic", "spiral"); }));
  CHECK(config_error([&] { apply_setting(c, "alias.X", "BATTERY"); }));

  PipelineConfig bad;
  bad.epsilon = 0;
  CHECK(config_error([&] { validate(bad); }));
  PipelineConfig inverted;
  inverted.years = {2010, 2005};
  CHECK(config_error([&] { validate(inverted); }));
  CHECK_NOTHROW(validate(PipelineConfig{}));

  // describe() feeds back through apply_setting to the same configuration.
  PipelineConfig src;
  src.kappa = 7;
  src.steepness = 0.25;
  src.aliases = {{"AGG ASSAULT", "ASSAULT"}};
  PipelineConfig dst;
  for (const auto& [k, v] : describe(src)) {
    if (!v.empty()) apply_setting(dst, k, v);
  }
  CHECK(describe(dst) == describe(src));
  for (auto name : setting_names()) CHECK(describe(PipelineConfig{}).count(std::string(name)) == 1);
}

TEST_CASE("configuration files and environment overrides") {
  const auto dir = scratch("conf");
  fs::create_directories(dir);
  std::ofstream(dir / "run.conf") << "# comment\n\nepsilon = 55   # trailing\nkappa=12\n";
  const auto kv = read_config_file(dir / "run.conf");
  REQUIRE(kv.size() == 2);
  CHECK(kv[0] == std::pair<std::string, std::string>{"epsilon", "55"});
  std::ofstream(dir / "bad.conf") << "epsilon 55\n";
  CHECK_THROWS_AS(read_config_file(dir / "bad.conf"), Error);
  CHECK_THROWS_AS(read_config_file(dir / "absent.conf"), Error);

  ::setenv("HOTSPOT_SAMPLE_SIZE", "1234", 1);
  ::setenv("HOTSPOT_RIPLEY_MAX_POINTS", "999", 1);
  const auto env = settings_from_environment();
  ::unsetenv("HOTSPOT_SAMPLE_SIZE");
  ::unsetenv("HOTSPOT_RIPLEY_MAX_POINTS");
  PipelineConfig c;
  for (const auto& [k, v] : env) apply_setting(c, k, v);
  CHECK(c.sample_size == 1234);
  CHECK(c.ripley_max_points == 999);
  fs::remove_all(dir);
}

TEST_CASE("stage names and exit codes") {
  for (Stage s : kAllStages) CHECK(parse_stage(stage_name(s)) == s);
  CHECK_FALSE(parse_stage("plot"));
  CHECK(exit_code_for(ErrorKind::Config) == 1);
  CHECK(exit_code_for(ErrorKind::Data) == 2);
  CHECK(exit_code_for(ErrorKind::Precondition) == 3);
  CHECK(exit_code_for(ErrorKind::Dependency) == 3);
}

TEST_CASE("sha256 of known content") {
  const auto dir = scratch("sha");
  fs::create_directories(dir);
  std::ofstream(dir / "abc") << "abc";
  CHECK(sha256_file(dir / "abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  fs::remove_all(dir);
}
