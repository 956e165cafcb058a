#include "hotspot/pipeline.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <chrono>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <functional>
#include <memory>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "hotspot/cluster.hpp"
#include "hotspot/csv.hpp"
#include "hotspot/density.hpp"
#include "hotspot/geometry.hpp"
#include "hotspot/parallel.hpp"
#include "hotspot/random.hpp"
#include "hotspot/report.hpp"
#include "hotspot/spatstat.hpp"
#include "hotspot/synthetic.hpp"

namespace hotspot {
namespace {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

constexpr std::string_view kManifest = "manifest.json";
constexpr std::string_view kIncidents = "incidents.csv";
constexpr std::string_view kLabels = "labels.csv";

constexpr std::string_view kSettingNames[] = {
    "input",          "synthetic",          "synthetic-n",       "col-year",
    "col-type",       "col-lat",            "col-lon",           "year-min",
    "year-max",       "sample-size",        "epsilon",           "kappa",
    "steepness",      "normalizer-exponent", "envelope-radius",  "bin-width",
    "max-radius",     "runs",               "correlation-sample", "ripley-sims",
    "ripley-lattice", "ripley-max-points",  "ripley-max-radius", "std-ddof",
    "labels",         "seed",               "out",               "threads",
};

[[noreturn]] void bad_value(std::string_view key, std::string_view value) {
  fail(ErrorKind::Config,
       "invalid value '" + std::string(value) + "' for setting '" + std::string(key) + "'");
}

std::size_t to_size(std::string_view key, std::string_view value) {
  const auto v = csv::parse_int(value);
  if (!v || *v < 0) bad_value(key, value);
  return static_cast<std::size_t>(*v);
}

double to_double(std::string_view key, std::string_view value) {
  const auto v = csv::parse_double(value);
  if (!v || !std::isfinite(*v)) bad_value(key, value);
  return *v;
}

int to_int(std::string_view key, std::string_view value) {
  const auto v = csv::parse_int(value);
  if (!v || *v < -1'000'000 || *v > 1'000'000) bad_value(key, value);
  return static_cast<int>(*v);
}

std::uint64_t to_u64(std::string_view key, std::string_view value) {
  const std::string_view t = csv::trim(value);
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || ec != std::errc{} || ptr != t.data() + t.size()) bad_value(key, value);
  return v;
}

std::string hex(const unsigned char* data, std::size_t n) {
  static constexpr char digits[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * n);
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back(digits[data[i] >> 4]);
    out.push_back(digits[data[i] & 0xf]);
  }
  return out;
}

class Sha256 {
 public:
  Sha256() : ctx_(EVP_MD_CTX_new(), EVP_MD_CTX_free) {
    if (!ctx_ || EVP_DigestInit_ex(ctx_.get(), EVP_sha256(), nullptr) != 1) {
      throw std::runtime_error("SHA-256 unavailable");
    }
  }
  void update(const void* data, std::size_t n) { EVP_DigestUpdate(ctx_.get(), data, n); }
  void update(std::string_view s) { update(s.data(), s.size()); }
  std::string hex_digest() {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx_.get(), md, &len);
    return hex(md, len);
  }

 private:
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx_;
};

std::string sha256_string(std::string_view s) {
  Sha256 h;
  h.update(s);
  return h.hex_digest();
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// Per-invocation state shared by the stages.
struct Context {
  const PipelineConfig& config;
  fs::path out;
  json manifest;
  std::ostream* log;

  void note(Stage stage, const std::string& line) const {
    if (log) *log << "[hotspot] " << stage_name(stage) << ": " << line << '\n';
  }

  json& stage_entry(Stage stage) { return manifest["stages"][std::string(stage_name(stage))]; }

  bool has_stage(Stage stage) const {
    return manifest.contains("stages") &&
           manifest["stages"].contains(std::string(stage_name(stage)));
  }

  // Path of an output recorded by `producer`, verified against its hash.
  fs::path dependency(Stage producer, std::string_view file, Stage consumer) const {
    const std::string name(stage_name(producer));
    const std::string rerun = "; run `hotspot " + name + "` first";
    if (!has_stage(producer)) {
      fail(ErrorKind::Dependency, std::string(stage_name(consumer)) + " needs the output of `" +
                                      name + "`, which has not run" + rerun);
    }
    const json& outputs = manifest["stages"][name]["outputs"];
    const fs::path path = out / file;
    if (!outputs.contains(std::string(file)) || !fs::exists(path) ||
        sha256_file(path) != outputs[std::string(file)].get<std::string>()) {
      fail(ErrorKind::Dependency,
           "output " + std::string(file) + " of `" + name + "` is missing or stale" + rerun);
    }
    return path;
  }
};

using Outputs = std::vector<std::string>;

void write_file(const fs::path& path, const std::function<void(std::ostream&)>& body) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::Data, "cannot write " + path.string());
  body(out);
  if (!out) fail(ErrorKind::Data, "write failed for " + path.string());
}

std::vector<IncidentRecord> load_incidents(const fs::path& path, YearRange years) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::Data, "cannot open " + path.string());
  IngestConfig cfg;
  cfg.years = years;
  return parse_incidents(in, cfg).records;
}

ClusterLabeling load_labels(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::Data, "cannot open " + path.string());
  return read_labeling_csv(in);
}

std::string key_of(const std::map<std::string, std::string>& cfg,
                   std::initializer_list<std::string_view> keys) {
  std::string s;
  for (auto k : keys) {
    const auto it = cfg.find(std::string(k));
    s += std::string(k) + "=" + (it == cfg.end() ? "" : it->second) + "\n";
  }
  return s;
}

std::string alias_key(const std::map<std::string, std::string>& cfg) {
  std::string s;
  for (const auto& [k, v] : cfg) {
    if (k.rfind("alias.", 0) == 0) s += k + "=" + v + "\n";
  }
  return s;
}

// ---------------------------------------------------------------- stages

json run_ingest(Context& ctx, Outputs& outputs) {
  const PipelineConfig& cfg = ctx.config;
  IngestConfig ingest;
  ingest.columns = cfg.columns;
  ingest.years = cfg.years;
  for (const auto& [raw, canonical] : cfg.aliases) {
    const auto type = crime_type_from_name(canonical);
    if (!type) fail(ErrorKind::Config, "alias target '" + canonical + "' is not a Part I type");
    ingest.aliases.add(raw, *type);
  }

  fs::path source = cfg.input;
  if (cfg.synthetic) {
    const auto kind = synthetic::parse_kind(*cfg.synthetic);
    const auto points =
        synthetic::generate(kind, cfg.synthetic_n, derive_seed(cfg.seed, SeedStage::Synthetic, 0));
    const auto records = synthetic::to_incidents(points, synthetic::kDefaultOrigin, cfg.years,
                                                 derive_seed(cfg.seed, SeedStage::Synthetic, 1));
    outputs.emplace_back("synthetic_input.csv");
    source = ctx.out / outputs.back();
    write_file(source, [&](std::ostream& o) { write_incidents(o, records, cfg.columns); });
    ctx.note(Stage::Ingest, "generated " + std::to_string(records.size()) + " synthetic " +
                                *cfg.synthetic + " incidents");
  }
  if (source.empty()) fail(ErrorKind::Config, "no input given (use --input or --synthetic)");
  std::ifstream in(source, std::ios::binary);
  if (!in) fail(ErrorKind::Data, "cannot open input " + source.string());
  IngestResult result = parse_incidents(in, ingest);
  if (result.records.empty()) fail(ErrorKind::Data, "no usable records in " + source.string());

  outputs.emplace_back(kIncidents);
  write_file(ctx.out / kIncidents, [&](std::ostream& o) { write_incidents(o, result.records); });
  outputs.emplace_back("ingest_stats.json");
  write_file(ctx.out / outputs.back(), [&](std::ostream& o) { o << stats_to_json(result.stats) << '\n'; });
  ctx.note(Stage::Ingest, std::to_string(result.stats.rows_read) + " rows read, " +
                              std::to_string(result.stats.rows_kept) + " kept");
  return json::parse(stats_to_json(result.stats));
}

json run_cluster(Context& ctx, Outputs& outputs) {
  const PipelineConfig& cfg = ctx.config;
  const auto records = load_incidents(ctx.out / kIncidents, cfg.years);
  const PlanarPointSet full = project(records);

  std::size_t n_sample = std::min(cfg.sample_size, full.size());
  if (n_sample < cfg.sample_size) {
    ctx.note(Stage::Cluster, "sample size clipped to the " + std::to_string(n_sample) + " available points");
  }
  const PointSample sample =
      sample_points(full, n_sample, derive_seed(cfg.seed, SeedStage::ClusterSample));

  const double beta = scott_bandwidth(sample.points);
  KdeOptions kde;
  kde.normalizer_exponent = cfg.normalizer_exponent;
  const DensityProfile profile = density_profile(sample.points, beta, kde);
  const RescaleParams rescale{cfg.steepness ? *cfg.steepness : adaptive_steepness(profile)};
  const auto factors = density_factors(profile, rescale);

  const auto graph = NeighborGraph::from_rescaled_points(sample.points, factors, cfg.epsilon);
  const ClusterLabeling sample_labels = dbscan(graph, cfg.kappa);
  const ClusterLabeling labels =
      assign_by_envelope(full, sample_labels, sample.source_index, cfg.envelope_radius);

  const auto base_graph = NeighborGraph::from_points(sample.points, cfg.epsilon);
  const ClusterLabeling base_sample = dbscan(base_graph, cfg.kappa);
  const ClusterLabeling baseline =
      assign_by_envelope(full, base_sample, sample.source_index, cfg.envelope_radius);
  const LabelingComparison cmp = compare_labelings(labels, baseline);

  outputs.emplace_back(kLabels);
  write_file(ctx.out / kLabels, [&](std::ostream& o) { write_labeling_csv(o, labels); });
  outputs.emplace_back("baseline_labels.csv");
  write_file(ctx.out / outputs.back(), [&](std::ostream& o) { write_labeling_csv(o, baseline); });
  outputs.emplace_back("density.csv");
  write_file(ctx.out / outputs.back(),
             [&](std::ostream& o) { write_density_csv(o, profile, sample.source_index); });

  json overlap = json::array();
  for (const auto& c : cmp.clusters) {
    overlap.push_back({{"cluster", c.cluster},
                       {"matched", c.matched},
                       {"size", c.size},
                       {"fraction", c.fraction}});
  }
  json summary{{"bandwidth", beta},
               {"mean_density", profile.g_bar},
               {"steepness", rescale.k},
               {"adaptive_steepness", !cfg.steepness.has_value()},
               {"epsilon", cfg.epsilon},
               {"kappa", cfg.kappa},
               {"sample_size", n_sample},
               {"n_clusters", labels.n_clusters},
               {"sample_outlier_share", sample_labels.outlier_share()},
               {"outlier_share", labels.outlier_share()},
               {"baseline_n_clusters", baseline.n_clusters},
               {"baseline_outlier_share", baseline.outlier_share()},
               {"agreement", cmp.agreement},
               {"overlap", std::move(overlap)}};
  outputs.emplace_back("cluster.json");
  write_file(ctx.out / outputs.back(), [&](std::ostream& o) { o << summary.dump(2) << '\n'; });

  ctx.note(Stage::Cluster, std::to_string(labels.n_clusters) + " clusters, outlier share " +
                               csv::format_double(labels.outlier_share()) + " (sample " +
                               csv::format_double(sample_labels.outlier_share()) + ")");
  return {{"points", full.size()},
          {"sample", n_sample},
          {"clusters", labels.n_clusters},
          {"outliers", labels.outlier_count()}};
}

json run_ripley(Context& ctx, Outputs& outputs) {
  const PipelineConfig& cfg = ctx.config;
  const auto records = load_incidents(ctx.out / kIncidents, cfg.years);
  PlanarPointSet points = project(records);
  if (points.size() > cfg.ripley_max_points) {
    points = sample_points(points, cfg.ripley_max_points,
                           derive_seed(cfg.seed, SeedStage::RipleyThin))
                 .points;
    ctx.note(Stage::Ripley, "thinned to " + std::to_string(points.size()) + " points");
  }
  const RadiiGrid grid = RadiiGrid::uniform(cfg.bin_width, cfg.ripley_max_radius);
  const RipleyCurve f = ripley_curve(points, grid, RipleyStatistic::F, cfg.ripley_sims,
                                     derive_seed(cfg.seed, SeedStage::RipleyEnvelopeF),
                                     cfg.ripley_lattice);
  const RipleyCurve g = ripley_curve(points, grid, RipleyStatistic::G, cfg.ripley_sims,
                                     derive_seed(cfg.seed, SeedStage::RipleyEnvelopeG),
                                     cfg.ripley_lattice);
  outputs.emplace_back("ripley_f.csv");
  write_file(ctx.out / outputs.back(), [&](std::ostream& o) { write_ripley_csv(o, f); });
  outputs.emplace_back("ripley_g.csv");
  write_file(ctx.out / outputs.back(), [&](std::ostream& o) { write_ripley_csv(o, g); });
  return {{"points_used", points.size()}};
}

json run_correlate(Context& ctx, Outputs& outputs, const fs::path& labels_path) {
  const PipelineConfig& cfg = ctx.config;
  const auto records = load_incidents(ctx.out / kIncidents, cfg.years);
  const PlanarPointSet full = project(records);
  const ClusterLabeling labels = load_labels(labels_path);
  require(labels.size() == full.size(), "labeling and incidents are not aligned");

  const RadiiGrid grid = RadiiGrid::uniform(cfg.bin_width, cfg.max_radius);
  std::vector<std::vector<std::size_t>> members(static_cast<std::size_t>(labels.n_clusters) + 1);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    members[static_cast<std::size_t>(labels.labels[i])].push_back(i);
  }
  json summary = json::array();
  for (std::size_t c = 0; c < members.size(); ++c) {
    json entry{{"cluster", c}, {"points", members[c].size()}};
    if (members[c].size() < 2) {
      entry["skipped"] = true;
      summary.push_back(std::move(entry));
      continue;
    }
    const CorrelationCurve curve = correlation_with_ci(
        full.subset(members[c]), grid,
        {cfg.runs, cfg.correlation_sample, derive_seed(cfg.seed, SeedStage::Correlation, c)});
    if (curve.sampled_all) {
      ctx.note(Stage::Correlate, "cluster " + std::to_string(c) + " has only " +
                                     std::to_string(members[c].size()) +
                                     " points; every run uses all of them");
    }
    outputs.push_back("correlation/cluster_" + std::to_string(c) + ".csv");
    write_file(ctx.out / outputs.back(), [&](std::ostream& o) { write_correlation_csv(o, curve); });
    entry["sample_size"] = curve.sample_size;
    entry["sampled_all"] = curve.sampled_all;
    summary.push_back(std::move(entry));
  }
  outputs.emplace_back("correlation/summary.json");
  write_file(ctx.out / outputs.back(), [&](std::ostream& o) { o << summary.dump(2) << '\n'; });
  return {{"clusters", members.size()}};
}

json run_report(Context& ctx, Outputs& outputs, const fs::path& labels_path) {
  const PipelineConfig& cfg = ctx.config;
  const auto records = load_incidents(ctx.out / kIncidents, cfg.years);
  const ClusterLabeling labels = load_labels(labels_path);
  if (labels.size() != records.size()) {
    fail(ErrorKind::Data, "labeling has " + std::to_string(labels.size()) + " rows but there are " +
                              std::to_string(records.size()) + " incidents");
  }
  const ReportBundle report = build_report(labels, records, cfg.years, cfg.std_ddof);
  for (const auto& f : write_report(ctx.out / "report", report)) outputs.push_back("report/" + f);
  return {{"records", records.size()}, {"clusters", labels.n_clusters}};
}

}  // namespace

std::string_view version() { return HOTSPOT_VERSION; }

std::span<const std::string_view> setting_names() { return kSettingNames; }

void apply_setting(PipelineConfig& c, std::string_view key_in, std::string_view value_in) {
  const std::string key(csv::trim(key_in));
  const std::string value(csv::trim(value_in));
  if (key.rfind("alias.", 0) == 0) {
    const std::string raw = key.substr(6);
    if (raw.empty() || !crime_type_from_name(value)) bad_value(key, value);
    c.aliases.emplace_back(raw, value);
    return;
  }
  if (key == "input") c.input = value;
  else if (key == "synthetic") {
    synthetic::parse_kind(value);
    c.synthetic = value;
  } else if (key == "synthetic-n") c.synthetic_n = to_size(key, value);
  else if (key == "col-year") c.columns.year = value;
  else if (key == "col-type") c.columns.primary_type = value;
  else if (key == "col-lat") c.columns.latitude = value;
  else if (key == "col-lon") c.columns.longitude = value;
  else if (key == "year-min") c.years.first = to_int(key, value);
  else if (key == "year-max") c.years.last = to_int(key, value);
  else if (key == "sample-size") c.sample_size = to_size(key, value);
  else if (key == "epsilon") c.epsilon = to_double(key, value);
  else if (key == "kappa") c.kappa = to_size(key, value);
  else if (key == "steepness") {
    if (value == "adaptive") c.steepness.reset();
    else c.steepness = to_double(key, value);
  } else if (key == "normalizer-exponent") c.normalizer_exponent = to_double(key, value);
  else if (key == "envelope-radius") c.envelope_radius = to_double(key, value);
  else if (key == "bin-width") c.bin_width = to_double(key, value);
  else if (key == "max-radius") c.max_radius = to_double(key, value);
  else if (key == "runs") c.runs = to_size(key, value);
  else if (key == "correlation-sample") c.correlation_sample = to_size(key, value);
  else if (key == "ripley-sims") c.ripley_sims = to_size(key, value);
  else if (key == "ripley-lattice") c.ripley_lattice = to_size(key, value);
  else if (key == "ripley-max-points") c.ripley_max_points = to_size(key, value);
  else if (key == "ripley-max-radius") c.ripley_max_radius = to_double(key, value);
  else if (key == "std-ddof") c.std_ddof = to_int(key, value);
  else if (key == "labels") c.labels = fs::path(value);
  else if (key == "seed") c.seed = to_u64(key, value);
  else if (key == "out") c.out = value;
  else if (key == "threads") c.threads = to_size(key, value);
  else fail(ErrorKind::Config, "unknown setting '" + key + "'");
}

std::vector<std::pair<std::string, std::string>> read_config_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::Config, "cannot open configuration file " + path.string());
  std::vector<std::pair<std::string, std::string>> out;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto hash = line.find('#');
    const std::string_view body = csv::trim(std::string_view(line).substr(0, hash));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string_view::npos) {
      fail(ErrorKind::Config, path.string() + ":" + std::to_string(number) + ": expected key = value");
    }
    out.emplace_back(std::string(csv::trim(body.substr(0, eq))),
                     std::string(csv::trim(body.substr(eq + 1))));
  }
  return out;
}

std::vector<std::pair<std::string, std::string>> settings_from_environment() {
  std::vector<std::pair<std::string, std::string>> out;
  for (std::string_view name : kSettingNames) {
    std::string var(kEnvPrefix);
    for (char ch : name) var.push_back(ch == '-' ? '_' : static_cast<char>(std::toupper(ch)));
    if (const char* v = std::getenv(var.c_str())) out.emplace_back(std::string(name), v);
  }
  return out;
}

std::map<std::string, std::string> describe(const PipelineConfig& c) {
  auto d = [](double v) { return csv::format_double(v); };
  std::map<std::string, std::string> m{
      {"input", c.input.string()},
      {"synthetic", c.synthetic.value_or("")},
      {"synthetic-n", std::to_string(c.synthetic_n)},
      {"col-year", c.columns.year},
      {"col-type", c.columns.primary_type},
      {"col-lat", c.columns.latitude},
      {"col-lon", c.columns.longitude},
      {"year-min", std::to_string(c.years.first)},
      {"year-max", std::to_string(c.years.last)},
      {"sample-size", std::to_string(c.sample_size)},
      {"epsilon", d(c.epsilon)},
      {"kappa", std::to_string(c.kappa)},
      {"steepness", c.steepness ? d(*c.steepness) : "adaptive"},
      {"normalizer-exponent", d(c.normalizer_exponent)},
      {"envelope-radius", d(c.envelope_radius)},
      {"bin-width", d(c.bin_width)},
      {"max-radius", d(c.max_radius)},
      {"runs", std::to_string(c.runs)},
      {"correlation-sample", std::to_string(c.correlation_sample)},
      {"ripley-sims", std::to_string(c.ripley_sims)},
      {"ripley-lattice", std::to_string(c.ripley_lattice)},
      {"ripley-max-points", std::to_string(c.ripley_max_points)},
      {"ripley-max-radius", d(c.ripley_max_radius)},
      {"std-ddof", std::to_string(c.std_ddof)},
      {"labels", c.labels ? c.labels->string() : ""},
      {"seed", std::to_string(c.seed)},
      {"out", c.out.string()},
      {"threads", std::to_string(c.threads)},
  };
  for (const auto& [raw, canonical] : c.aliases) m["alias." + normalize_key(raw)] = canonical;
  return m;
}

void validate(const PipelineConfig& c) {
  auto positive = [](bool ok, std::string_view what) {
    if (!ok) fail(ErrorKind::Config, std::string(what) + " must be positive");
  };
  positive(c.sample_size > 0, "sample-size");
  positive(c.epsilon > 0.0, "epsilon");
  positive(c.kappa > 0, "kappa");
  if (c.steepness && *c.steepness < 0.0) fail(ErrorKind::Config, "steepness must be nonnegative");
  positive(c.normalizer_exponent > 0.0, "normalizer-exponent");
  positive(c.envelope_radius > 0.0, "envelope-radius");
  positive(c.bin_width > 0.0, "bin-width");
  positive(c.max_radius > 0.0, "max-radius");
  positive(c.runs > 0, "runs");
  positive(c.correlation_sample > 0, "correlation-sample");
  positive(c.ripley_sims > 0, "ripley-sims");
  if (c.ripley_lattice < 100) fail(ErrorKind::Config, "ripley-lattice must be at least 100");
  positive(c.ripley_max_points > 1, "ripley-max-points");
  positive(c.ripley_max_radius > 0.0, "ripley-max-radius");
  positive(c.synthetic_n > 1, "synthetic-n");
  if (c.years.last < c.years.first) fail(ErrorKind::Config, "year-max precedes year-min");
  if (c.std_ddof < 0) fail(ErrorKind::Config, "std-ddof must be nonnegative");
}

std::string_view stage_name(Stage stage) {
  switch (stage) {
    case Stage::Ingest: return "ingest";
    case Stage::Cluster: return "cluster";
    case Stage::Ripley: return "ripley";
    case Stage::Correlate: return "correlate";
    case Stage::Report: return "report";
  }
  return "unknown";
}

std::optional<Stage> parse_stage(std::string_view name) {
  for (Stage s : kAllStages) {
    if (stage_name(s) == name) return s;
  }
  return std::nullopt;
}

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Config: return kExitUsage;
    case ErrorKind::Data: return kExitData;
    case ErrorKind::Precondition:
    case ErrorKind::Dependency: return kExitStage;
  }
  return kExitStage;
}

std::string sha256_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::Data, "cannot open " + path.string());
  Sha256 h;
  std::vector<char> buf(1 << 16);
  while (in) {
    in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    h.update(buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  return h.hex_digest();
}

PipelineResult run_stages(std::span<const Stage> stages, const PipelineConfig& config,
                          std::ostream* log) {
  PipelineResult result;
  try {
    validate(config);
  } catch (const Error& e) {
    result.status = exit_code_for(e.kind());
    result.message = std::string("configuration: ") + e.what();
    return result;
  }
  worker_count() = config.threads;

  Context ctx{config, config.out, json::object(), log};
  const fs::path manifest_path = ctx.out / kManifest;
  try {
    fs::create_directories(ctx.out);
    if (fs::exists(manifest_path)) {
      std::ifstream in(manifest_path);
      ctx.manifest = json::parse(in);
    }
  } catch (const std::exception& e) {
    result.status = kExitData;
    result.message = std::string("manifest: ") + e.what();
    return result;
  }

  const auto cfg = describe(config);
  const std::uint64_t s = config.seed;
  auto save_manifest = [&] {
    ctx.manifest["tool"] = "hotspot";
    ctx.manifest["version"] = version();
    ctx.manifest["created_at"] = utc_timestamp();
    ctx.manifest["config"] = cfg;
    ctx.manifest["seeds"] = {
        {"master", s},
        {"cluster_sample", derive_seed(s, SeedStage::ClusterSample)},
        {"ripley_thin", derive_seed(s, SeedStage::RipleyThin)},
        {"ripley_envelope_f", derive_seed(s, SeedStage::RipleyEnvelopeF)},
        {"ripley_envelope_g", derive_seed(s, SeedStage::RipleyEnvelopeG)},
        {"correlation_base", derive_seed(s, SeedStage::Correlation, 0)},
        {"synthetic", derive_seed(s, SeedStage::Synthetic, 0)},
    };
    json files = json::object();
    if (ctx.manifest.contains("stages")) {
      for (const auto& [name, entry] : ctx.manifest["stages"].items()) {
        for (const auto& [file, hash] : entry["outputs"].items()) files[file] = hash;
      }
    }
    ctx.manifest["files"] = std::move(files);
    write_file(manifest_path, [&](std::ostream& o) { o << ctx.manifest.dump(2) << '\n'; });
  };

  for (Stage stage : stages) {
    const std::string name(stage_name(stage));
    try {
      // Stage key: relevant settings plus hashes of every input file.
      std::string key_text = name + "\n";
      fs::path labels_path;
      switch (stage) {
        case Stage::Ingest:
          key_text += key_of(cfg, {"synthetic", "col-year", "col-type", "col-lat", "col-lon",
                                   "year-min", "year-max"}) +
                      alias_key(cfg);
          if (config.synthetic) {
            key_text += key_of(cfg, {"synthetic-n", "seed"});
          } else {
            if (config.input.empty()) fail(ErrorKind::Config, "no input given (use --input or --synthetic)");
            if (!fs::exists(config.input)) {
              fail(ErrorKind::Data, "input file " + config.input.string() + " does not exist");
            }
            key_text += "input=" + sha256_file(config.input) + "\n";
          }
          break;
        case Stage::Cluster:
          key_text += sha256_file(ctx.dependency(Stage::Ingest, kIncidents, stage)) + "\n";
          key_text += key_of(cfg, {"year-min", "year-max", "sample-size", "epsilon", "kappa",
                                   "steepness", "normalizer-exponent", "envelope-radius", "seed"});
          break;
        case Stage::Ripley:
          key_text += sha256_file(ctx.dependency(Stage::Ingest, kIncidents, stage)) + "\n";
          key_text += key_of(cfg, {"year-min", "year-max", "bin-width", "ripley-sims",
                                   "ripley-lattice", "ripley-max-points", "ripley-max-radius",
                                   "seed"});
          break;
        case Stage::Correlate:
        case Stage::Report:
          key_text += sha256_file(ctx.dependency(Stage::Ingest, kIncidents, stage)) + "\n";
          if (stage == Stage::Report && config.labels) {
            labels_path = *config.labels;
            if (!fs::exists(labels_path)) {
              fail(ErrorKind::Data, "labeling file " + labels_path.string() + " does not exist");
            }
          } else {
            labels_path = ctx.dependency(Stage::Cluster, kLabels, stage);
          }
          key_text += sha256_file(labels_path) + "\n";
          key_text += stage == Stage::Correlate
                          ? key_of(cfg, {"year-min", "year-max", "bin-width", "max-radius", "runs",
                                         "correlation-sample", "seed"})
                          : key_of(cfg, {"year-min", "year-max", "std-ddof"});
          break;
      }
      const std::string key = sha256_string(key_text);

      if (ctx.has_stage(stage) && ctx.stage_entry(stage).value("key", "") == key) {
        bool intact = true;
        for (const auto& [file, hash] : ctx.stage_entry(stage)["outputs"].items()) {
          const fs::path p = ctx.out / file;
          if (!fs::exists(p) || sha256_file(p) != hash.get<std::string>()) intact = false;
        }
        if (intact) {
          ctx.note(stage, "cached");
          result.stages.push_back({stage, true});
          continue;
        }
      }

      Outputs outputs;
      json rows;
      switch (stage) {
        case Stage::Ingest: rows = run_ingest(ctx, outputs); break;
        case Stage::Cluster: rows = run_cluster(ctx, outputs); break;
        case Stage::Ripley: rows = run_ripley(ctx, outputs); break;
        case Stage::Correlate: rows = run_correlate(ctx, outputs, labels_path); break;
        case Stage::Report: rows = run_report(ctx, outputs, labels_path); break;
      }
      json entry{{"key", key}, {"rows", std::move(rows)}, {"outputs", json::object()}};
      for (const auto& file : outputs) entry["outputs"][file] = sha256_file(ctx.out / file);
      ctx.stage_entry(stage) = std::move(entry);
      save_manifest();
      result.stages.push_back({stage, false});
    } catch (const Error& e) {
      result.status = exit_code_for(e.kind());
      result.message = "stage " + name + ": " + e.what();
      return result;
    } catch (const std::exception& e) {
      result.status = kExitStage;
      result.message = "stage " + name + ": " + e.what();
      return result;
    }
  }
  try {
    save_manifest();
  } catch (const std::exception& e) {
    result.status = kExitData;
    result.message = std::string("manifest: ") + e.what();
  }
  return result;
}

PipelineResult run_pipeline(const PipelineConfig& config, std::ostream* log) {
  return run_stages(kAllStages, config, log);
}

}  // namespace hotspot
