#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "hotspot/error.hpp"
#include "hotspot/ingest.hpp"

namespace hotspot {

/// Library version string recorded in manifests.
std::string_view version();

struct PipelineConfig {
  std::filesystem::path input;
  std::optional<std::string> synthetic;  // csr | blobs | two-blob
  std::size_t synthetic_n = 20'000;
  ColumnNames columns;
  std::vector<std::pair<std::string, std::string>> aliases;  // raw -> canonical type name
  YearRange years;

  std::size_t sample_size = 50'000;
  double epsilon = 100.0;
  std::size_t kappa = 100;
  std::optional<double> steepness;  // nullopt: adaptive, k * sd(g) = 2
  double normalizer_exponent = 0.5;
  double envelope_radius = 10.0;

  double bin_width = 10.0;
  double max_radius = 1'000.0;
  std::size_t runs = 100;
  std::size_t correlation_sample = 10'000;

  std::size_t ripley_sims = 100;
  std::size_t ripley_lattice = 10'000;
  std::size_t ripley_max_points = 100'000;
  double ripley_max_radius = 500.0;

  int std_ddof = 1;
  std::optional<std::filesystem::path> labels;  // report: external labeling CSV
  std::uint64_t seed = 20'230'101;
  std::filesystem::path out = "hotspot-out";
  std::size_t threads = 0;  // 0: all hardware threads
};

/// Applies one `key = value` setting (keys match the long CLI flags without
/// dashes, plus `alias.<RAW>` entries). Throws Error(Config) for unknown
/// keys or malformed values.
void apply_setting(PipelineConfig& config, std::string_view key, std::string_view value);

/// Reads a plain-text configuration: one `key = value` per line, `#`
/// comments, blank lines ignored.
std::vector<std::pair<std::string, std::string>> read_config_file(const std::filesystem::path& path);

inline constexpr std::string_view kEnvPrefix = "HOTSPOT_";

/// Settings from environment variables named HOTSPOT_<KEY>, where KEY is the
/// upper-cased setting name with '-' replaced by '_' (HOTSPOT_SAMPLE_SIZE).
std::vector<std::pair<std::string, std::string>> settings_from_environment();

/// Every setting name accepted by apply_setting, except alias entries.
std::span<const std::string_view> setting_names();

/// Canonical key-value view of the configuration.
std::map<std::string, std::string> describe(const PipelineConfig& config);

/// Throws Error(Config) unless every numeric parameter is positive.
void validate(const PipelineConfig& config);

enum class Stage { Ingest, Cluster, Ripley, Correlate, Report };

inline constexpr Stage kAllStages[] = {Stage::Ingest, Stage::Cluster, Stage::Ripley,
                                       Stage::Correlate, Stage::Report};

std::string_view stage_name(Stage stage);
std::optional<Stage> parse_stage(std::string_view name);

inline constexpr int kExitSuccess = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;
inline constexpr int kExitStage = 3;

int exit_code_for(ErrorKind kind);

struct StageOutcome {
  Stage stage = Stage::Ingest;
  bool cached = false;
};

struct PipelineResult {
  int status = kExitSuccess;
  std::string message;  // "stage <name>: <reason>" on failure
  std::vector<StageOutcome> stages;
};

/// Runs the given stages in order against `config.out`. Each stage reads its
/// inputs from files recorded in <out>/manifest.json, and is skipped when
/// its content-hash key matches the manifest and its outputs are intact.
/// Stops at the first failing stage. Log lines go to `log` when non-null.
PipelineResult run_stages(std::span<const Stage> stages, const PipelineConfig& config,
                          std::ostream* log = nullptr);

/// ingest -> cluster -> ripley -> correlate -> report.
PipelineResult run_pipeline(const PipelineConfig& config, std::ostream* log = nullptr);

/// Hex SHA-256 of a file's bytes.
std::string sha256_file(const std::filesystem::path& path);

}  // namespace hotspot
