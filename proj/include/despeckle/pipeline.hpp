#pragma once

#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "despeckle/metrics.hpp"
#include "despeckle/nonlocal.hpp"
#include "despeckle/raster.hpp"
#include "despeckle/sparse.hpp"

namespace despeckle {

/// Every tunable of a despeckling run. Defaults reproduce the reference setup:
/// 16x16 patches, 10 per group, c = 1.5, lambda searched over [-2, 4] in steps of 0.01.
struct PipelineConfig {
  std::size_t patch_size = 16;
  std::size_t stack_count = 10;
  std::size_t stride = 4;
  std::size_t search_window = 40;
  double c = 1.5;
  double lambda_min = -2.0;
  double lambda_max = 4.0;
  double lambda_step = 0.01;
  AdmmControls admm;
  bool use_transform = true;  // Yeo-Johnson stage after the log
  bool use_weights = true;    // w1 / w2 weighting; off means unit weights
  std::uint64_t seed = 0;
  double s_floor = kDefaultSingularFloor;
  double log_epsilon_factor = 1e-3;

  /// Throws ParameterError on an inconsistent configuration.
  void validate() const;
};

/// Parses flat `key = value` text (`#` comments). Keys not present keep their defaults.
PipelineConfig parse_config(std::istream& in, PipelineConfig base = {});

/// Loads a config file. A JSON run manifest is also accepted; its
/// `config` object is used, which makes manifests replayable.
PipelineConfig load_config(const std::string& path, PipelineConfig base = {});

std::string config_to_text(const PipelineConfig& cfg);

struct RunOptions {
  unsigned threads = 0;  // 0: DESPECKLE_THREADS if set, else hardware concurrency
};

/// Worker count for `options`, honoring the DESPECKLE_THREADS cap.
unsigned resolve_threads(const RunOptions& options);

struct SolverSummary {
  std::size_t groups = 0;
  std::size_t not_converged = 0;
  std::size_t objective_increases = 0;  // groups whose ADMM objective rose by more than 1e-10 (relative)
  long long total_iterations = 0;
  int max_iterations = 0;
};

/// Everything needed to reproduce and audit a run. Timings are kept out of
/// the serialized form so that identical runs produce identical manifests.
struct RunManifest {
  PipelineConfig config;
  std::optional<double> lambda;
  std::optional<double> lambda_objective;
  // Affine map applied after Yeo-Johnson: v = scale * yj + offset. It gives
  // the composite map unit slope at the median log value `anchor`.
  std::optional<double> transform_anchor;
  double transform_scale = 1.0;
  double transform_offset = 0.0;
  double log_epsilon = 0.0;
  std::size_t width = 0;
  std::size_t height = 0;
  SolverSummary solver;
  CoverageReport coverage;
  std::size_t clamped_to_transform_range = 0;
  std::size_t clamped_to_zero = 0;
  std::vector<std::string> warnings;
  std::map<std::string, double> timings_seconds;
  std::optional<MetricReport> metrics;
};

std::string manifest_to_json(const RunManifest& manifest, bool include_timings = false);

struct DespeckleResult {
  Raster image;
  RunManifest manifest;
};

/// log (+ Yeo-Johnson) -> block matching -> SVD dictionary -> weighted
/// Lasso by ADMM -> aggregation -> inverse transform. Output has the input's
/// dimensions and is clamped to non-negative intensities. The result does not
/// depend on the thread count.
DespeckleResult despeckle_image(const Raster& noisy, const PipelineConfig& cfg, const RunOptions& options = {});

// ---- ablation ---------------------------------------------------------------

struct AblationRow {
  std::string label;  // "(a)" .. "(d)"
  bool use_weights = false;
  bool use_transform = false;
  std::vector<double> psnr;  // one per seed
  std::vector<double> ssim;
  double mean_psnr() const;
  double mean_ssim() const;
};

struct AblationReport {
  double looks = 0.0;
  std::vector<std::uint64_t> seeds;
  std::vector<double> noisy_psnr;
  std::vector<double> noisy_ssim;
  std::vector<AblationRow> rows;  // (a) no weights/no transform, (b) transform, (c) weights, (d) both
};

/// Speckles `clean` once per seed and despeckles it under the four
/// combinations of the weighting and transform switches.
AblationReport run_ablation(const Raster& clean, double looks, const std::vector<std::uint64_t>& seeds,
                            const PipelineConfig& base, double peak = 255.0, const RunOptions& options = {});

std::string ablation_to_json(const AblationReport& report);
std::string ablation_table(const AblationReport& report);

std::string metrics_to_json(const MetricReport& report);

}  // namespace despeckle
