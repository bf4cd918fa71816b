#include "despeckle/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <iomanip>
#include <limits>
#include <mutex>
#include <numeric>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "despeckle/speckle.hpp"
#include "despeckle/transform.hpp"

namespace despeckle {

namespace {

using Json = nlohmann::ordered_json;
using Clock = std::chrono::steady_clock;

constexpr double kObjectiveSlack = 1e-10;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

Json number_or_string(double v) {
  if (std::isfinite(v)) return v;
  return v > 0 ? "inf" : (v < 0 ? "-inf" : "nan");
}

Json config_json(const PipelineConfig& cfg) {
  Json j;
  j["patch_size"] = cfg.patch_size;
  j["stack_count"] = cfg.stack_count;
  j["stride"] = cfg.stride;
  j["search_window"] = cfg.search_window;
  j["c"] = cfg.c;
  j["lambda_min"] = cfg.lambda_min;
  j["lambda_max"] = cfg.lambda_max;
  j["lambda_step"] = cfg.lambda_step;
  j["admm_rho"] = cfg.admm.rho;
  j["admm_max_iters"] = cfg.admm.max_iters;
  j["admm_tol_primal"] = cfg.admm.tol_primal;
  j["admm_tol_dual"] = cfg.admm.tol_dual;
  j["use_transform"] = cfg.use_transform;
  j["use_weights"] = cfg.use_weights;
  j["seed"] = cfg.seed;
  j["s_floor"] = cfg.s_floor;
  j["log_epsilon_factor"] = cfg.log_epsilon_factor;
  return j;
}

Json metrics_json(const MetricReport& m) {
  Json j = Json::object();
  if (m.psnr) j["psnr"] = number_or_string(*m.psnr);
  if (m.ssim) {
    j["ssim"] = *m.ssim;
    j["ssim_percent"] = 100.0 * *m.ssim;
  }
  if (m.enl) j["enl"] = number_or_string(*m.enl);
  if (m.epi) j["epi"] = number_or_string(*m.epi);
  if (m.epd_h) j["epd_h"] = number_or_string(*m.epd_h);
  if (m.epd_v) j["epd_v"] = number_or_string(*m.epd_v);
  if (m.sqi) j["sqi"] = number_or_string(*m.sqi);
  if (m.mean_intensity) j["mean_intensity"] = number_or_string(*m.mean_intensity);
  return j;
}

// Per-reference work item result.
struct GroupOutcome {
  GroupEstimate estimate;
  AdmmReport report;
  bool objective_rose = false;
};

bool objective_rose(const std::vector<double>& history) {
  for (std::size_t i = 1; i < history.size(); ++i) {
    if (history[i] > history[i - 1] + kObjectiveSlack * std::max(1.0, std::abs(history[i - 1]))) return true;
  }
  return false;
}

GroupOutcome process_reference(const Raster& domain, Coord ref, const PipelineConfig& cfg) {
  PatchGroup group = block_match(domain, ref, cfg.patch_size, cfg.stack_count, cfg.search_window);
  const Dictionary dict = svd_dictionary(group);
  Weights weights;
  if (cfg.use_weights) {
    if (group.stack_count() >= 2) {
      group.sigmas = estimate_patch_sigma(group);
    } else {
      group.sigmas.assign(group.stack_count(), 1.0);
    }
    weights = build_weights(group.sigmas, dict, cfg.s_floor);
  } else {
    weights = unit_weights(group.stack_count(), static_cast<std::size_t>(dict.atoms()));
  }
  LassoSolution solution = solve_weighted_lasso_admm(group.patches, dict, weights, cfg.c, cfg.admm);

  GroupOutcome out;
  out.estimate.patch_size = group.patch_size;
  out.estimate.coords = std::move(group.coords);
  out.estimate.patches = reconstruct(dict, solution.code);
  out.objective_rose = objective_rose(solution.report.objective_history);
  out.report = std::move(solution.report);
  out.report.objective_history.clear();
  out.report.objective_history.shrink_to_fit();
  return out;
}

std::vector<GroupOutcome> process_all(const Raster& domain, const std::vector<Coord>& refs, const PipelineConfig& cfg,
                                      unsigned threads) {
  std::vector<GroupOutcome> outcomes(refs.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  const auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= refs.size()) return;
      try {
        outcomes[i] = process_reference(domain, refs[i], cfg);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next.store(refs.size());
        return;
      }
    }
  };

  const unsigned n = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(refs.size())));
  if (n == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(n);
    for (unsigned t = 0; t < n; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);
  return outcomes;
}

double median_of(std::span<const double> values) {
  std::vector<double> tmp(values.begin(), values.end());
  const auto mid = tmp.begin() + static_cast<std::ptrdiff_t>(tmp.size() / 2);
  std::nth_element(tmp.begin(), mid, tmp.end());
  return *mid;
}

}  // namespace

unsigned resolve_threads(const RunOptions& options) {
  unsigned n = options.threads;
  if (n == 0) n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("DESPECKLE_THREADS")) {
    char* end = nullptr;
    const long cap = std::strtol(env, &end, 10);
    if (end != env && cap >= 1) n = std::min<unsigned>(n, static_cast<unsigned>(cap));
  }
  return std::max(1u, n);
}

std::string manifest_to_json(const RunManifest& m, bool include_timings) {
  Json j;
  j["config"] = config_json(m.config);
  j["width"] = m.width;
  j["height"] = m.height;
  j["log_epsilon"] = m.log_epsilon;
  j["lambda"] = m.lambda ? Json(*m.lambda) : Json(nullptr);
  j["lambda_objective"] = m.lambda_objective ? Json(*m.lambda_objective) : Json(nullptr);
  j["transform_anchor"] = m.transform_anchor ? Json(*m.transform_anchor) : Json(nullptr);
  j["transform_scale"] = m.transform_scale;
  j["transform_offset"] = m.transform_offset;
  j["solver"] = {{"groups", m.solver.groups},
                 {"not_converged", m.solver.not_converged},
                 {"objective_increases", m.solver.objective_increases},
                 {"total_iterations", m.solver.total_iterations},
                 {"max_iterations", m.solver.max_iterations}};
  j["coverage"] = {{"uncovered_pixels", m.coverage.uncovered_pixels}, {"contributions", m.coverage.contributions}};
  j["clamped_to_transform_range"] = m.clamped_to_transform_range;
  j["clamped_to_zero"] = m.clamped_to_zero;
  j["warnings"] = m.warnings;
  if (include_timings) {
    Json t = Json::object();
    for (const auto& [stage, secs] : m.timings_seconds) t[stage] = secs;
    j["timings_seconds"] = t;
  }
  if (m.metrics) j["metrics"] = metrics_json(*m.metrics);
  return j.dump(2) + "\n";
}

std::string metrics_to_json(const MetricReport& report) { return metrics_json(report).dump(2) + "\n"; }

DespeckleResult despeckle_image(const Raster& noisy, const PipelineConfig& cfg, const RunOptions& options) {
  cfg.validate();
  if (noisy.kind() != RasterKind::kIntensity) throw DomainError("despeckle expects an intensity raster");
  noisy.check_intensity();

  DespeckleResult result;
  RunManifest& manifest = result.manifest;
  manifest.config = cfg;
  manifest.width = noisy.width();
  manifest.height = noisy.height();

  if (noisy.max_value() == 0.0) {
    manifest.warnings.push_back("input is all zero; returned unchanged");
    result.image = noisy;
    return result;
  }

  // Forward transform.
  auto t0 = Clock::now();
  manifest.log_epsilon = log_epsilon_for(noisy, cfg.log_epsilon_factor);
  Raster domain = log_forward(noisy, manifest.log_epsilon);
  double lambda = 1.0;
  if (cfg.use_transform) {
    const auto grid = lambda_grid(cfg.lambda_min, cfg.lambda_max, cfg.lambda_step);
    try {
      const auto pick = select_lambda(domain.pixels(), grid);
      lambda = pick.lambda;
      manifest.lambda_objective = pick.objective;
    } catch (const DegenerateInputError&) {
      manifest.warnings.push_back("log image is constant; Yeo-Johnson lambda fixed at 1");
    } catch (const ParameterError&) {
      manifest.warnings.push_back("too few pixels to fit lambda; Yeo-Johnson lambda fixed at 1");
    }
    manifest.lambda = lambda;
    // Rescale so the threshold keeps its log-domain meaning around the median level.
    const double anchor = median_of(domain.pixels());
    const double scale = 1.0 / yeo_johnson_derivative(anchor, lambda);
    const double offset = anchor - scale * yeo_johnson(anchor, lambda);
    domain = yeo_johnson(domain, lambda);
    for (double& v : domain.pixels()) v = scale * v + offset;
    manifest.transform_anchor = anchor;
    manifest.transform_scale = scale;
    manifest.transform_offset = offset;
  }
  manifest.timings_seconds["forward_transform"] = seconds_since(t0);

  // Group, solve, reconstruct.
  t0 = Clock::now();
  const auto refs = extract_references(domain, cfg.patch_size, cfg.stride);
  auto outcomes = process_all(domain, refs, cfg, resolve_threads(options));
  manifest.timings_seconds["group_solve"] = seconds_since(t0);

  std::vector<GroupEstimate> estimates;
  estimates.reserve(outcomes.size());
  auto& solver = manifest.solver;
  solver.groups = outcomes.size();
  for (auto& o : outcomes) {
    if (!o.report.converged) ++solver.not_converged;
    if (o.objective_rose) ++solver.objective_increases;
    solver.total_iterations += o.report.iterations;
    solver.max_iterations = std::max(solver.max_iterations, o.report.iterations);
    estimates.push_back(std::move(o.estimate));
  }
  if (solver.not_converged > 0) {
    manifest.warnings.push_back(std::to_string(solver.not_converged) + " group solve(s) hit admm_max_iters");
  }

  t0 = Clock::now();
  auto fused = aggregate(estimates, domain);
  manifest.coverage = fused.coverage;
  if (fused.coverage.uncovered_pixels > 0) {
    manifest.warnings.push_back(std::to_string(fused.coverage.uncovered_pixels) + " pixel(s) not covered by any patch");
  }
  manifest.timings_seconds["aggregate"] = seconds_since(t0);

  // Inverse transform.
  t0 = Clock::now();
  Raster estimate = std::move(fused.image);
  if (cfg.use_transform) {
    for (double& v : estimate.pixels()) v = (v - manifest.transform_offset) / manifest.transform_scale;
    const auto range = yeo_johnson_range(lambda);
    const double lo = std::nextafter(range.lo, 0.0);
    const double hi = std::nextafter(range.hi, 0.0);
    for (double& v : estimate.pixels()) {
      if (!range.contains(v)) {
        v = std::clamp(v, lo, hi);
        ++manifest.clamped_to_transform_range;
      }
    }
    estimate = yeo_johnson_inverse(estimate, lambda);
  }
  Raster out = log_inverse(estimate, manifest.log_epsilon);
  for (double& v : out.pixels()) {
    if (!(v >= 0.0)) {
      v = 0.0;
      ++manifest.clamped_to_zero;
    } else if (!std::isfinite(v)) {
      v = std::numeric_limits<double>::max();
      ++manifest.clamped_to_transform_range;
    }
  }
  manifest.timings_seconds["inverse_transform"] = seconds_since(t0);

  result.image = std::move(out);
  return result;
}

// ---- ablation ---------------------------------------------------------------

double AblationRow::mean_psnr() const {
  return psnr.empty() ? 0.0 : std::accumulate(psnr.begin(), psnr.end(), 0.0) / static_cast<double>(psnr.size());
}

double AblationRow::mean_ssim() const {
  return ssim.empty() ? 0.0 : std::accumulate(ssim.begin(), ssim.end(), 0.0) / static_cast<double>(ssim.size());
}

AblationReport run_ablation(const Raster& clean, double looks, const std::vector<std::uint64_t>& seeds,
                            const PipelineConfig& base, double peak, const RunOptions& options) {
  if (seeds.empty()) throw ParameterError("ablation needs at least one seed");
  AblationReport report;
  report.looks = looks;
  report.seeds = seeds;
  report.rows = {{"(a)", false, false, {}, {}},
                 {"(b)", false, true, {}, {}},
                 {"(c)", true, false, {}, {}},
                 {"(d)", true, true, {}, {}}};
  for (const auto seed : seeds) {
    const Raster noisy = apply_speckle(clean, Looks(looks), seed);
    report.noisy_psnr.push_back(psnr_capped(clean, noisy, peak));
    report.noisy_ssim.push_back(ssim(clean, noisy, peak));
    for (auto& row : report.rows) {
      PipelineConfig cfg = base;
      cfg.use_weights = row.use_weights;
      cfg.use_transform = row.use_transform;
      cfg.seed = seed;
      const auto out = despeckle_image(noisy, cfg, options);
      row.psnr.push_back(psnr_capped(clean, out.image, peak));
      row.ssim.push_back(ssim(clean, out.image, peak));
    }
  }
  return report;
}

std::string ablation_to_json(const AblationReport& report) {
  const auto mean = [](const std::vector<double>& v) {
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  };
  Json j;
  j["looks"] = report.looks;
  j["seeds"] = report.seeds;
  j["noisy"] = {{"psnr", report.noisy_psnr},
                {"ssim", report.noisy_ssim},
                {"mean_psnr", mean(report.noisy_psnr)},
                {"mean_ssim_percent", 100.0 * mean(report.noisy_ssim)}};
  Json rows = Json::array();
  for (const auto& row : report.rows) {
    rows.push_back({{"label", row.label},
                    {"use_weights", row.use_weights},
                    {"use_transform", row.use_transform},
                    {"psnr", row.psnr},
                    {"ssim", row.ssim},
                    {"mean_psnr", row.mean_psnr()},
                    {"mean_ssim_percent", 100.0 * row.mean_ssim()}});
  }
  j["rows"] = rows;
  return j.dump(2) + "\n";
}

std::string ablation_table(const AblationReport& report) {
  std::ostringstream out;
  out << std::fixed;
  out << "row  w1&w2  transform   PSNR(dB)  SSIM(x100)\n";
  const auto mark = [](bool on) { return on ? "yes" : "no "; };
  for (const auto& row : report.rows) {
    out << std::left << std::setw(5) << row.label << mark(row.use_weights) << "    " << mark(row.use_transform)
        << "       " << std::right << std::setw(8) << std::setprecision(2) << row.mean_psnr() << "  "
        << std::setw(10) << std::setprecision(2) << 100.0 * row.mean_ssim() << "\n";
  }
  double np = 0.0, ns = 0.0;
  for (std::size_t i = 0; i < report.noisy_psnr.size(); ++i) {
    np += report.noisy_psnr[i];
    ns += report.noisy_ssim[i];
  }
  const auto n = static_cast<double>(report.noisy_psnr.size());
  out << std::left << std::setw(22) << "noisy input" << std::right << std::setw(8) << std::setprecision(2) << np / n
      << "  " << std::setw(10)
      << 100.0 * ns / n << "\n";
  return out.str();
}

}  // namespace despeckle
