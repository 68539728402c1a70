// Command-line front end: noise synthesis, denoising, SURE-driven lambda selection,
// evaluation and benchmark tables.

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "nltv/baselines.hpp"
#include "nltv/image_io.hpp"
#include "nltv/local.hpp"
#include "nltv/png_io.hpp"
#include "nltv/presets.hpp"
#include "nltv/selection.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace nltv;

namespace {

enum Exit { kOk = 0, kUsage = 2, kIo = 3, kNumerical = 4 };

/// Bad flag combination discovered after parsing.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

bool is_float_dump(const fs::path& p) { return p.extension() == ".nltvf"; }

Raster load(const fs::path& p) { return is_float_dump(p) ? read_float_dump(p) : read_image(p); }

fs::path sidecar_for(const fs::path& out) {
  fs::path s = out;
  s.replace_extension(".nltvf");
  return s;
}

/// FNV-1a over the file bytes; lets reports tell apart differing copies of a test image.
std::string checksum(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw IoError(p.string() + ": cannot open for reading");
  std::uint64_t h = 1469598103934665603ull;
  char buf[1 << 14];
  while (in) {
    in.read(buf, sizeof buf);
    for (std::streamsize k = 0; k < in.gcount(); ++k) {
      h ^= static_cast<unsigned char>(buf[k]);
      h *= 1099511628211ull;
    }
  }
  std::ostringstream os;
  os << "fnv1a64:" << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

/// Writes the 8-bit image plus its lossless sidecar.
void save_result(const fs::path& out, const Raster& img) {
  if (is_float_dump(out)) {
    write_float_dump(out, img);
    return;
  }
  write_image(out, img);
  write_float_dump(sidecar_for(out), img);
}

void append_manifest(const fs::path& manifest, const json& record) {
  if (manifest.empty()) return;
  if (manifest.has_parent_path()) fs::create_directories(manifest.parent_path());
  std::ofstream out(manifest, std::ios::app);
  if (!out) throw IoError(manifest.string() + ": cannot open manifest for appending");
  out << record.dump() << '\n';
}

json geometry_json(const PatchGeometry& g) {
  return {{"patch", g.patch}, {"window", g.window}, {"sigma_r", g.sigma_r}, {"sigma_s", g.kernel_sigma()}};
}

json solver_json(const SolverConfig& s) {
  return {{"lambda", s.lambda}, {"lambda_f", s.lambda_f}, {"beta", s.beta},          {"t_init", s.t_init},
          {"max_halvings", s.max_halvings}, {"n_iter", s.n_iter}, {"eps", s.eps}};
}

json variational_json(const VariationalParams& p) {
  json j = solver_json(p.solver);
  if (p.terms != Regularizers::Frequency) j["spatial"] = geometry_json(p.spatial);
  if (p.terms != Regularizers::Spatial) j["frequency"] = geometry_json(p.frequency);
  return j;
}

std::string format_psnr(double db) {
  if (std::isinf(db)) return "inf";
  std::ostringstream os;
  os << std::fixed << std::setprecision(4) << db;
  return os.str();
}

// ---------------------------------------------------------------------------
// Method dispatch shared by `denoise` and `bench`.

const std::vector<std::string> kMethods{"rof", "nlmeans", "nltv", "fnltv", "sfnltv", "l-sfnltv", "l-fnltv"};

/// Flag overrides; unset values keep the preset.
struct Overrides {
  std::optional<double> lambda, lambda_f, sigma_r, sigma_rf, beta, t_init, eps;
  std::optional<int> patch, window, patch_f, window_f, iters, region_size, step, max_halvings;
};

void apply(const Overrides& o, SolverConfig& s) {
  if (o.lambda) s.lambda = *o.lambda;
  if (o.lambda_f) s.lambda_f = *o.lambda_f;
  if (o.beta) s.beta = *o.beta;
  if (o.t_init) s.t_init = *o.t_init;
  if (o.eps) s.eps = *o.eps;
  if (o.iters) s.n_iter = *o.iters;
  if (o.max_halvings) s.max_halvings = *o.max_halvings;
}

void apply(const Overrides& o, VariationalParams& p) {
  apply(o, p.solver);
  if (o.patch) p.spatial.patch = *o.patch;
  if (o.window) p.spatial.window = *o.window;
  if (o.sigma_r) p.spatial.sigma_r = *o.sigma_r;
  if (o.patch_f) p.frequency.patch = *o.patch_f;
  if (o.window_f) p.frequency.window = *o.window_f;
  if (o.sigma_rf) p.frequency.sigma_r = *o.sigma_rf;
}

struct MethodRun {
  Raster result;
  json params;
  std::optional<DescentTrace> trace;
};

/// Resolves presets for `method` (per image and noise level), applies overrides and runs it.
MethodRun run_method(const std::string& method, const Raster& v, const std::string& image, std::optional<double> sigma,
                     bool textured, const Overrides& o, bool want_trace) {
  auto need_sigma = [&]() {
    if (!sigma) throw UsageError("method '" + method + "' needs --sigma for its noise-level presets");
    return *sigma;
  };
  const DescentOptions opts = want_trace ? DescentOptions::keeping_iterates() : DescentOptions{};
  MethodRun run;
  if (method == "rof") {
    SolverConfig s = presets::rof(image);
    apply(o, s);
    s.lambda_f = 0.0;
    const WeightField w = tv_weights(v.rows(), v.cols());
    DescentTrace t = descend(v, &w, nullptr, s, opts);
    run.result = t.result;
    run.params = solver_json(s);
    if (want_trace) run.trace = std::move(t);
  } else if (method == "nlmeans") {
    PatchGeometry g = presets::nl_means(image);
    if (o.patch) g.patch = *o.patch;
    if (o.window) g.window = *o.window;
    if (o.sigma_r) g.sigma_r = *o.sigma_r;
    run.result = nl_means(v, g);
    run.params = geometry_json(g);
  } else if (method == "nltv" || method == "fnltv" || method == "sfnltv") {
    VariationalParams p;
    if (method == "nltv") {
      p = presets::nltv(image);
    } else if (method == "fnltv") {
      p = presets::fnltv();
    } else {
      // With --sigma the noise-level scaled parameters apply; without it the uniform sigma=20 set.
      p = sigma ? presets::sfnltv(*sigma) : presets::sfnltv_uniform();
    }
    apply(o, p);
    DescentTrace t = denoise_variational(v, p, opts);
    run.result = t.result;
    run.params = variational_json(p);
    if (want_trace) run.trace = std::move(t);
  } else if (method == "l-sfnltv" || method == "l-fnltv") {
    if (want_trace) throw UsageError("--trace is only available for whole-image variational methods");
    const double s = need_sigma();
    LocalParams p = method == "l-sfnltv" ? presets::l_sfnltv(s, textured) : presets::l_fnltv(s);
    apply(o, p.region);
    if (o.region_size) p.region_size = *o.region_size;
    if (o.step) p.step = *o.step;
    run.result = method == "l-sfnltv" ? l_sfnltv(v, p)
                                      : l_variant(v, LocalMethod::Fnltv, p.region_size, p.step, p);
    run.params = variational_json(p.region);
    run.params["region_size"] = p.region_size;
    run.params["step"] = p.step;
    run.params["textured"] = method == "l-sfnltv" && textured;
  } else {
    throw UsageError("unknown method '" + method + "'");
  }
  return run;
}

void write_trace_csv(const fs::path& path, const DescentTrace& t, const Raster* ref) {
  std::ofstream out(path);
  if (!out) throw IoError(path.string() + ": cannot open for writing");
  out << "iteration,energy,step" << (ref ? ",psnr_db" : "") << '\n';
  out << std::setprecision(17);
  for (std::size_t k = 0; k < t.energies.size(); ++k) {
    out << k << ',' << t.energies[k] << ',';
    if (k > 0) out << t.steps[k - 1];
    if (ref) out << ',' << format_psnr(psnr(*ref, t.iterates[k]));
    out << '\n';
  }
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw UsageError("cannot parse number '" + item + "' in list '" + text + "'");
    }
  }
  if (out.empty()) throw UsageError("empty list");
  return out;
}

json base_manifest(const std::string& command, const std::vector<std::string>& argv) {
  return {{"command", command}, {"argv", argv}, {"prng_id", std::string(kPrngId)}};
}

// ---------------------------------------------------------------------------
// Benchmark suites

struct BenchRow {
  std::string image, method;
  double sigma;
  std::optional<std::uint64_t> seed;
  std::optional<double> psnr_db, mse_value, runtime;
  std::optional<double> expected;
};

std::string csv_number(std::optional<double> x, int precision = 4) {
  if (!x) return "";
  if (std::isinf(*x)) return "inf";
  std::ostringstream os;
  os << std::fixed << std::setprecision(precision) << *x;
  return os.str();
}

void write_bench_csv(std::ostream& out, const std::vector<BenchRow>& rows) {
  out << "image,method,sigma,seed,psnr_db,mse,runtime_s,paper_psnr_db,delta_db\n";
  for (const auto& r : rows) {
    const bool external = !r.seed;
    std::optional<double> delta;
    if (r.psnr_db && r.expected) delta = *r.psnr_db - *r.expected;
    out << r.image << ',' << r.method << ',' << r.sigma << ',' << (external ? "" : std::to_string(*r.seed)) << ','
        << (external ? "external" : csv_number(r.psnr_db)) << ',' << csv_number(r.mse_value) << ','
        << csv_number(r.runtime, 2) << ',' << csv_number(r.expected, 2) << ',' << csv_number(delta) << '\n';
  }
}

std::optional<fs::path> find_image(const fs::path& dir, std::string_view name) {
  for (const char* ext : {".pgm", ".png", ".PGM", ".PNG"}) {
    const fs::path p = dir / (std::string(name) + ext);
    if (fs::exists(p)) return p;
  }
  return std::nullopt;
}

std::vector<BenchRow> run_bench(const std::string& suite, const fs::path& dir, int seeds,
                                const std::vector<std::string>& only, json& manifest) {
  std::vector<std::string> missing;
  std::vector<std::pair<std::string, fs::path>> present;
  for (auto name : benchmark::kImages) {
    if (!only.empty() && std::find(only.begin(), only.end(), name) == only.end()) continue;
    if (auto p = find_image(dir, name)) {
      present.emplace_back(std::string(name), *p);
    } else {
      missing.emplace_back(name);
    }
  }
  if (!missing.empty()) {
    std::cerr << "missing images in " << dir << " (expected <name>.pgm or <name>.png):";
    for (const auto& m : missing) std::cerr << ' ' << m;
    std::cerr << '\n';
  }
  manifest["missing_images"] = missing;
  json inputs = json::object();
  for (const auto& [name, path] : present) inputs[name] = {{"path", path.string()}, {"checksum", checksum(path)}};
  manifest["inputs"] = inputs;
  if (present.empty()) throw IoError("no benchmark images found in " + dir.string());

  std::vector<BenchRow> rows;
  for (const auto& [name, path] : present) {
    const Raster clean = read_image(path);
    const std::size_t slot = *benchmark::image_slot(name);
    std::cerr << "[" << suite << "] " << name << '\n';

    if (suite == "table2") {
      for (const auto& row : benchmark::kGlobal)
        for (int k = 0; k < seeds; ++k) {
          const std::uint64_t seed = benchmark::noise_seed(slot, 20.0, k);
          const Raster v = add_gaussian_noise(clean, {20.0, seed});
          const auto t0 = Clock::now();
          const MethodRun run = run_method(std::string(row.method), v, name, std::nullopt, false, {}, false);
          const double m = mse(clean, run.result);
          rows.push_back({name, std::string(row.method), 20.0, seed, psnr_from_mse(m), m, seconds_since(t0),
                          row.psnr[slot]});
        }
    } else if (suite == "table4") {
      for (double sigma : {10.0, 20.0, 30.0, 50.0}) {
        for (const auto& row : benchmark::kNoiseLevels) {
          if (row.sigma != sigma) continue;
          if (row.external) {
            rows.push_back({name, std::string(row.method), sigma, std::nullopt, std::nullopt, std::nullopt,
                            std::nullopt, row.psnr[slot]});
            continue;
          }
          for (int k = 0; k < seeds; ++k) {
            const std::uint64_t seed = benchmark::noise_seed(slot, sigma, k);
            const Raster v = add_gaussian_noise(clean, {sigma, seed});
            const auto t0 = Clock::now();
            const MethodRun run =
                run_method(std::string(row.method), v, name, sigma, presets::is_textured(name), {}, false);
            const double m = mse(clean, run.result);
            rows.push_back({name, std::string(row.method), sigma, seed, psnr_from_mse(m), m, seconds_since(t0),
                            row.psnr[slot]});
          }
        }
      }
    } else if (suite == "table1") {
      for (const auto& sel_row : benchmark::kSelection) {
        for (int k = 0; k < seeds; ++k) {
          const std::uint64_t seed = benchmark::noise_seed(slot, 20.0, k);
          const Raster v = add_gaussian_noise(clean, {20.0, seed});
          const auto t0 = Clock::now();
          const VariationalParams p = presets::nltv(name);
          SolverConfig cfg = p.solver;
          cfg.n_iter = 20;
          const RegionSelection sel =
              select_regionwise(v, 20.0, sel_row.region, presets::sure_candidates(), p.spatial, cfg);
          const double elapsed = seconds_since(t0);
          const std::string tag = "nltv-r" + std::to_string(sel_row.region);
          const double m_sel = mse(clean, sel.selected());
          rows.push_back({name, tag + "-sure", 20.0, seed, psnr_from_mse(m_sel), m_sel, elapsed, sel_row.selected[slot]});
          const double rnd = random_assignment_psnr(sel, clean, 20, seed);
          rows.push_back({name, tag + "-random", 20.0, seed, rnd, 255.0 * 255.0 / std::pow(10.0, rnd / 10.0), elapsed,
                          sel_row.random[slot]});
        }
      }
    } else {
      throw UsageError("unknown suite '" + suite + "'");
    }
  }
  return rows;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Nonlocal total variation denoising toolkit"};
  app.require_subcommand(1);
  app.fallthrough();
  const std::vector<std::string> args(argv, argv + argc);
  fs::path manifest_path;
  app.add_option("--manifest", manifest_path, "Append a JSON-lines run record to this file");

  // noise
  auto* noise = app.add_subcommand("noise", "Add seeded Gaussian noise to a clean image");
  fs::path noise_in, noise_out;
  double noise_sigma = 0.0;
  std::uint64_t noise_seed = 0;
  noise->add_option("input", noise_in, "Clean image (PGM/PNG/.nltvf)")->required();
  noise->add_option("output", noise_out, "Noisy image; a .nltvf sidecar is written next to it")->required();
  noise->add_option("--sigma", noise_sigma, "Noise standard deviation")->required()->check(CLI::NonNegativeNumber);
  noise->add_option("--seed", noise_seed, "Generator seed")->required();

  // denoise
  auto* den = app.add_subcommand("denoise", "Denoise an image");
  fs::path den_in, den_out, den_trace, den_ref;
  std::string den_method, den_preset = "natural", den_image;
  std::optional<double> den_sigma;
  Overrides ov;
  den->add_option("input", den_in, "Noisy image (PGM/PNG/.nltvf)")->required();
  den->add_option("output", den_out, "Denoised image; a .nltvf sidecar is written next to it")->required();
  den->add_option("--method", den_method, "Denoising method")->required()->check(CLI::IsMember(kMethods));
  den->add_option("--sigma", den_sigma, "Noise level, selects noise-dependent presets");
  den->add_option("--preset", den_preset, "Local preset family")->check(CLI::IsMember({"natural", "textured"}));
  den->add_option("--image-name", den_image, "Image name for per-image presets (default: input file stem)");
  den->add_option("--lambda", ov.lambda, "Spatial regularization weight");
  den->add_option("--lambda-f", ov.lambda_f, "Frequency regularization weight");
  den->add_option("--patch", ov.patch, "Spatial patch side d");
  den->add_option("--window", ov.window, "Spatial search window side D");
  den->add_option("--sigma-r", ov.sigma_r, "Spatial similarity bandwidth");
  den->add_option("--patch-f", ov.patch_f, "Frequency patch side");
  den->add_option("--window-f", ov.window_f, "Frequency search window side");
  den->add_option("--sigma-rf", ov.sigma_rf, "Frequency similarity bandwidth");
  den->add_option("--iters", ov.iters, "Gradient descent iterations");
  den->add_option("--beta", ov.beta, "Smoothing constant");
  den->add_option("--t-init", ov.t_init, "Initial step size");
  den->add_option("--eps", ov.eps, "Iterate-change stopping threshold");
  den->add_option("--max-halvings", ov.max_halvings, "Step halvings before giving up");
  den->add_option("--region-size", ov.region_size, "Region side for local methods");
  den->add_option("--step", ov.step, "Region step for local methods");
  den->add_option("--trace", den_trace, "Write per-iteration energy/step CSV");
  den->add_option("--ref", den_ref, "Clean reference: adds PSNR to the trace and the report");

  // sure-select
  auto* sel = app.add_subcommand("sure-select", "Per-region lambda selection by SURE for NLTV");
  fs::path sel_in, sel_out, sel_map, sel_ref, sel_curves;
  double sel_sigma = 0.0;
  std::string sel_lambdas = "9,12,15,18,21,24", sel_image;
  int sel_region = 16, sel_iters = 20, sel_draws = 20;
  std::uint64_t sel_seed = 1;
  sel->add_option("input", sel_in, "Noisy image")->required();
  sel->add_option("--sigma", sel_sigma, "Noise level")->required()->check(CLI::PositiveNumber);
  sel->add_option("--lambdas", sel_lambdas, "Comma separated lambda candidates");
  sel->add_option("--region", sel_region, "Region side (at most 32)");
  sel->add_option("--iters", sel_iters, "Descent iterations per region");
  sel->add_option("--out", sel_out, "Mosaic of the selected per-region estimates");
  sel->add_option("--map", sel_map, "CSV with the chosen lambda per region");
  sel->add_option("--sure-csv", sel_curves, "CSV with per-iterate SURE for every region and candidate");
  sel->add_option("--ref", sel_ref, "Clean reference for PSNR of the mosaic and of random assignments");
  sel->add_option("--random-draws", sel_draws, "Random assignments averaged for the baseline");
  sel->add_option("--random-seed", sel_seed, "Seed for the random assignments");
  sel->add_option("--image-name", sel_image, "Image name for per-image presets");

  // eval
  auto* ev = app.add_subcommand("eval", "MSE and PSNR of a test image against a reference");
  fs::path ev_ref, ev_test;
  ev->add_option("--ref", ev_ref, "Reference image")->required();
  ev->add_option("--test", ev_test, "Test image")->required();

  // bench
  auto* bench = app.add_subcommand("bench", "Run a benchmark suite on a directory of test images");
  std::string bench_suite;
  fs::path bench_dir, bench_out;
  int bench_seeds = 1;
  std::vector<std::string> bench_only;
  bench->add_option("--suite", bench_suite, "table1, table2 or table4")
      ->required()
      ->check(CLI::IsMember({"table1", "table2", "table4"}));
  bench->add_option("--images", bench_dir, "Directory holding lena, barbara, peppers, boats, bridge, house, cameraman")
      ->required();
  bench->add_option("--seeds", bench_seeds, "Noise realizations per cell")->check(CLI::PositiveNumber);
  bench->add_option("--only", bench_only, "Restrict to these image names");
  bench->add_option("--out", bench_out, "CSV output (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  const auto t0 = Clock::now();
  try {
    json rec;
    if (*noise) {
      rec = base_manifest("noise", args);
      const Raster clean = load(noise_in);
      const NoiseSpec spec{noise_sigma, noise_seed};
      const Raster noisy = add_gaussian_noise(clean, spec);
      save_result(noise_out, noisy);
      rec["params"] = {{"sigma", noise_sigma}, {"seed", noise_seed}};
      rec["seed"] = noise_seed;
      rec["inputs"] = {{"input", noise_in.string()}, {"checksum", checksum(noise_in)}};
      rec["outputs"] = {noise_out.string(), sidecar_for(noise_out).string()};
      std::cout << "wrote " << noise_out.string() << " (sidecar " << sidecar_for(noise_out).string() << ")\n";
    } else if (*den) {
      rec = base_manifest("denoise", args);
      const Raster v = load(den_in);
      const std::string image = image_key(den_image.empty() ? den_in.string() : den_image);
      const bool textured = den_preset == "textured";
      const MethodRun run = run_method(den_method, v, image, den_sigma, textured, ov, !den_trace.empty());
      if (!all_finite(run.result)) throw std::range_error("non-finite values in the result");
      save_result(den_out, run.result);
      std::optional<Raster> ref;
      if (!den_ref.empty()) ref = load(den_ref);
      if (run.trace) write_trace_csv(den_trace, *run.trace, ref ? &*ref : nullptr);
      rec["method"] = den_method;
      rec["params"] = run.params;
      if (den_sigma) rec["sigma"] = *den_sigma;
      rec["image_name"] = image;
      rec["inputs"] = {{"input", den_in.string()}, {"checksum", checksum(den_in)}};
      rec["outputs"] = {den_out.string()};
      std::cout << "method=" << den_method << " output=" << den_out.string();
      if (ref) {
        const double m = mse(*ref, run.result);
        std::cout << " mse=" << m << " psnr_db=" << format_psnr(psnr_from_mse(m));
        rec["psnr_db"] = psnr_from_mse(m);
      }
      if (run.trace) std::cout << " iterations=" << run.trace->iterations() << " stop=" << to_string(run.trace->reason);
      std::cout << '\n';
    } else if (*sel) {
      rec = base_manifest("sure-select", args);
      if (sel_region < 3 || sel_region > 32) throw UsageError("--region must lie in [3, 32]");
      const Raster v = load(sel_in);
      const std::vector<double> lambdas = parse_list(sel_lambdas);
      const std::string image = image_key(sel_image.empty() ? sel_in.string() : sel_image);
      VariationalParams p = presets::nltv(image);
      p.solver.n_iter = sel_iters;
      const RegionSelection result = select_regionwise(v, sel_sigma, sel_region, lambdas, p.spatial, p.solver);
      if (!sel_out.empty()) save_result(sel_out, result.selected());
      if (!sel_map.empty()) {
        std::ofstream out(sel_map);
        if (!out) throw IoError(sel_map.string() + ": cannot open for writing");
        out << "region,row,col,lambda,final_sure\n";
        for (std::size_t r = 0; r < result.grid.size(); ++r) {
          const Pixel o = result.grid.origin(r);
          out << r << ',' << o.row << ',' << o.col << ',' << result.chosen_lambda(r) << ','
              << result.final_sure[r][result.chosen[r]] << '\n';
        }
      }
      if (!sel_curves.empty()) {
        // Recomputes the traces for the curve dump; selection itself only keeps final values.
        std::ofstream out(sel_curves);
        if (!out) throw IoError(sel_curves.string() + ": cannot open for writing");
        out << "region,lambda,iteration,sure,divergence,chosen_lambda\n" << std::setprecision(10);
        for (std::size_t r = 0; r < result.grid.size(); ++r) {
          const Pixel o = result.grid.origin(r);
          const Raster region = crop(v, o.row, o.col, sel_region, sel_region);
          for (double lam : lambdas) {
            SolverConfig cfg = p.solver;
            cfg.lambda = lam;
            const SureReport rep = sure_trace(region, sel_sigma, p.spatial, cfg);
            for (std::size_t k = 0; k < rep.sure.size(); ++k)
              out << r << ',' << lam << ',' << k << ',' << rep.sure[k] << ',' << rep.divergence[k] << ','
                  << result.chosen_lambda(r) << '\n';
          }
        }
      }
      rec["params"] = {{"sigma", sel_sigma}, {"lambdas", lambdas}, {"region", sel_region},
                       {"solver", solver_json(p.solver)}, {"spatial", geometry_json(p.spatial)}};
      rec["inputs"] = {{"input", sel_in.string()}, {"checksum", checksum(sel_in)}};
      std::cout << "regions=" << result.grid.size();
      if (!sel_ref.empty()) {
        const Raster clean = load(sel_ref);
        const double sel_db = psnr(clean, result.selected());
        const double rnd_db = random_assignment_psnr(result, clean, sel_draws, sel_seed);
        std::cout << " psnr_selected_db=" << format_psnr(sel_db) << " psnr_random_mean_db=" << format_psnr(rnd_db);
        rec["psnr_selected_db"] = sel_db;
        rec["psnr_random_mean_db"] = rnd_db;
        rec["random"] = {{"draws", sel_draws}, {"seed", sel_seed}};
      }
      std::cout << '\n';
    } else if (*ev) {
      rec = base_manifest("eval", args);
      const Raster a = load(ev_ref), b = load(ev_test);
      const double m = mse(a, b);
      std::cout << "mse=" << std::setprecision(10) << m << " psnr_db=" << format_psnr(psnr_from_mse(m)) << '\n';
      rec["mse"] = m;
      rec["psnr_db"] = std::isinf(psnr_from_mse(m)) ? json("inf") : json(psnr_from_mse(m));
      rec["inputs"] = {{"ref", ev_ref.string()}, {"test", ev_test.string()}};
    } else if (*bench) {
      rec = base_manifest("bench", args);
      rec["params"] = {{"suite", bench_suite}, {"seeds", bench_seeds}};
      const std::vector<BenchRow> rows = run_bench(bench_suite, bench_dir, bench_seeds, bench_only, rec);
      if (bench_out.empty()) {
        write_bench_csv(std::cout, rows);
      } else {
        std::ofstream out(bench_out);
        if (!out) throw IoError(bench_out.string() + ": cannot open for writing");
        write_bench_csv(out, rows);
        rec["outputs"] = {bench_out.string()};
      }
    }
    rec["duration_s"] = seconds_since(t0);
    append_manifest(manifest_path, rec);
    return kOk;
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const IoError& e) {
    std::cerr << "I/O error: " << e.what() << '\n';
    return kIo;
  } catch (const StepSearchError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kNumerical;
  } catch (const RegionError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kNumerical;
  } catch (const std::range_error& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kNumerical;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::length_error& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kNumerical;
  }
}
