#include "despeckle/cli.hpp"

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "despeckle/metrics.hpp"
#include "despeckle/pipeline.hpp"
#include "despeckle/raster_io.hpp"
#include "despeckle/speckle.hpp"

namespace despeckle {

namespace {

void write_text(const std::string& path, const std::string& text) {
  write_file_bytes(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

struct AddNoiseArgs {
  std::string in, out;
  double looks = 1.0;
  std::uint64_t seed = 0;
  double pgm_peak = 255.0;
};

struct DespeckleArgs {
  std::string in, out, config, manifest;
  bool no_transform = false;
  bool no_weights = false;
  std::optional<std::uint64_t> seed;
  unsigned threads = 0;
  double pgm_peak = 255.0;
};

struct EvaluateArgs {
  std::string test, ref, noisy, regions, report;
  double peak = 255.0;
};

struct AblateArgs {
  std::string in, report, config;
  double looks = 4.0;
  std::uint64_t seed = 0;
  std::size_t seeds = 1;
  double peak = 255.0;
  unsigned threads = 0;
};

int cmd_add_noise(const AddNoiseArgs& a) {
  const Raster clean = read_raster(a.in);
  const Raster noisy = apply_speckle(clean, Looks(a.looks), a.seed);
  write_raster(noisy, a.out, a.pgm_peak);
  return kExitOk;
}

int cmd_despeckle(const DespeckleArgs& a) {
  PipelineConfig cfg = a.config.empty() ? PipelineConfig{} : load_config(a.config);
  if (a.no_transform) cfg.use_transform = false;
  if (a.no_weights) cfg.use_weights = false;
  if (a.seed) cfg.seed = *a.seed;

  const Raster noisy = read_raster(a.in);
  const auto result = despeckle_image(noisy, cfg, RunOptions{a.threads});
  write_raster(result.image, a.out, a.pgm_peak);
  if (!a.manifest.empty()) write_text(a.manifest, manifest_to_json(result.manifest));

  for (const auto& w : result.manifest.warnings) std::cerr << "warning: " << w << "\n";
  for (const auto& [stage, secs] : result.manifest.timings_seconds) {
    std::cerr << "timing: " << stage << " " << secs << " s\n";
  }
  return kExitOk;
}

int cmd_evaluate(const EvaluateArgs& a) {
  const Raster test = read_raster(a.test);
  std::optional<Raster> ref, noisy;
  std::optional<RegionSpec> regions;
  if (!a.ref.empty()) ref = read_raster(a.ref);
  if (!a.noisy.empty()) noisy = read_raster(a.noisy);
  if (!a.regions.empty()) regions = read_region_spec(a.regions);

  EvaluationInputs in;
  in.test = &test;
  in.reference = ref ? &*ref : nullptr;
  in.noisy = noisy ? &*noisy : nullptr;
  in.regions = regions ? &*regions : nullptr;
  in.peak = a.peak;
  write_text(a.report, metrics_to_json(evaluate(in)));
  return kExitOk;
}

int cmd_ablate(const AblateArgs& a) {
  const PipelineConfig base = a.config.empty() ? PipelineConfig{} : load_config(a.config);
  if (a.seeds == 0) throw ParameterError("--seeds must be >= 1");
  std::vector<std::uint64_t> seeds;
  for (std::size_t i = 0; i < a.seeds; ++i) seeds.push_back(a.seed + i);
  const Raster clean = read_raster(a.in);
  const auto report = run_ablation(clean, a.looks, seeds, base, a.peak, RunOptions{a.threads});
  write_text(a.report, ablation_to_json(report));
  std::cout << ablation_table(report);
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"Speckle simulation, despeckling and quality evaluation", "despeckle"};
  app.require_subcommand(1);

  AddNoiseArgs noise_args;
  auto* add_noise = app.add_subcommand("add-noise", "Multiply an image by unit-mean gamma speckle");
  add_noise->add_option("--in", noise_args.in, "Clean input raster (PGM or FR32)")->required();
  add_noise->add_option("--out", noise_args.out, "Output raster (.pgm for PGM, otherwise FR32)")->required();
  add_noise->add_option("--looks", noise_args.looks, "Equivalent number of looks L")->required();
  add_noise->add_option("--seed", noise_args.seed, "Random seed")->required();
  add_noise->add_option("--pgm-peak", noise_args.pgm_peak, "Intensity mapped to 255 on PGM export");

  DespeckleArgs desp_args;
  auto* desp = app.add_subcommand("despeckle", "Remove speckle from an intensity image");
  desp->add_option("--in", desp_args.in, "Noisy input raster")->required();
  desp->add_option("--out", desp_args.out, "Despeckled output raster")->required();
  desp->add_option("--config", desp_args.config, "key = value config file or a run manifest");
  desp->add_flag("--no-transform", desp_args.no_transform, "Skip the Yeo-Johnson stage");
  desp->add_flag("--no-weights", desp_args.no_weights, "Use unit weights instead of w1/w2");
  desp->add_option("--seed", desp_args.seed, "Seed recorded in the manifest");
  desp->add_option("--manifest", desp_args.manifest, "Write the run manifest (JSON) here");
  desp->add_option("--threads", desp_args.threads, "Worker threads (0 = automatic)");
  desp->add_option("--pgm-peak", desp_args.pgm_peak, "Intensity mapped to 255 on PGM export");

  EvaluateArgs eval_args;
  auto* eval = app.add_subcommand("evaluate", "Compute quality metrics");
  eval->add_option("--test", eval_args.test, "Image under evaluation")->required();
  eval->add_option("--ref", eval_args.ref, "Noise-free reference (enables PSNR/SSIM)");
  eval->add_option("--noisy", eval_args.noisy, "Noisy input (enables EPI/EPD-ROA/SQI)");
  eval->add_option("--regions", eval_args.regions, "Homogeneous regions file (enables ENL)");
  eval->add_option("--report", eval_args.report, "Output JSON report")->required();
  eval->add_option("--peak", eval_args.peak, "Dynamic range for PSNR/SSIM/SQI");

  AblateArgs ablate_args;
  auto* ablate = app.add_subcommand("ablate", "Compare the four weighting/transform configurations");
  ablate->add_option("--in", ablate_args.in, "Clean input raster")->required();
  ablate->add_option("--looks", ablate_args.looks, "Equivalent number of looks L")->required();
  ablate->add_option("--seed", ablate_args.seed, "First speckle seed")->required();
  ablate->add_option("--seeds", ablate_args.seeds, "Number of consecutive seeds to average");
  ablate->add_option("--report", ablate_args.report, "Output JSON report")->required();
  ablate->add_option("--config", ablate_args.config, "Base configuration");
  ablate->add_option("--peak", ablate_args.peak, "Dynamic range for PSNR/SSIM");
  ablate->add_option("--threads", ablate_args.threads, "Worker threads (0 = automatic)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*add_noise) return cmd_add_noise(noise_args);
    if (*desp) return cmd_despeckle(desp_args);
    if (*eval) return cmd_evaluate(eval_args);
    if (*ablate) return cmd_ablate(ablate_args);
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const ParameterError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const SizeError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  }
  return kExitUsage;
}

}  // namespace despeckle
