// lpr: simulate / reconstruct / bench / metrics / denoise-bridge-test
#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <random>
#include <regex>

#include "lpr/bench.hpp"
#include "lpr/image_io.hpp"
#include "lpr/metrics.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace lpr;

namespace {

constexpr int kOk = 0, kFail = 1, kConfig = 2, kSolver = 3;

struct SolverFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

Dims parse_tile(const std::string& s) {
  static const std::regex re(R"((\d+)[xX](\d+))");
  std::smatch m;
  if (!std::regex_match(s, m, re)) throw ConfigError("--tile: expected <h>x<w>, got '" + s + "'");
  const Dims d{std::stoul(m[1]), std::stoul(m[2])};
  if (d.height == 0 || d.width == 0) throw ConfigError("--tile: dims must be positive");
  return d;
}

std::string snr_tag(const std::optional<double>& s) {
  if (!s) return "inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", *s);
  return buf;
}

void write_json(const fs::path& p, const json& j) {
  std::ofstream out(p);
  if (!out) throw IoError("cannot write " + p.string());
  out << j.dump(2) << "\n";
}

void write_images(const fs::path& base, const ComplexField& f) {
  write_png_gray(base.string() + "_amp.png", abs(f), 0.0, std::max(max_value(abs(f)), 1e-300));
  write_png_gray(base.string() + "_phase.png", arg(f), -std::numbers::pi, std::numbers::pi);
}

struct Common {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> threads;
  std::string tile;
};

ExperimentConfig load(const Common& c) {
  if (c.config.empty()) throw ConfigError("--config is required");
  ExperimentConfig cfg = load_config(c.config);
  if (c.seed) cfg.noise_seed = *c.seed;
  if (c.threads) {
    if (*c.threads == 0) throw ConfigError("--threads must be >= 1");
    cfg.threads = *c.threads;
  }
  if (!c.out.empty()) cfg.output.dir = c.out;
  return cfg;
}

// Ground truth -> one LPRF stack per SNR entry.
int cmd_simulate(const Common& c) {
  ExperimentConfig cfg = load(c);
  if (cfg.output.dir.empty()) throw ConfigError("simulate: --out or output.dir is required");
  const fs::path dir = cfg.output.dir;
  fs::create_directories(dir);
  const ComplexField truth = make_truth(cfg);
  write_lprf_complex(dir / "truth.lprf", truth);
  write_images(dir / "truth", truth);
  const MeasurementSet clean = forward(truth, cfg.model);
  json stacks = json::array();
  for (std::size_t i = 0; i < cfg.snr_db.size(); ++i) {
    const auto& snr = cfg.snr_db[i];
    const MeasurementSet I = snr ? add_wgn(clean, {*snr, cfg.noise_seed + i}) : clean;
    const std::string name = "stack_snr" + snr_tag(snr) + ".lprf";
    write_lprf(dir / name, I.planes);
    stacks.push_back({{"file", name},
                      {"snr_db", snr ? json(*snr) : json()},
                      {"noise_seed", snr ? json(cfg.noise_seed + i) : json()},
                      {"planes", I.planes.size()}});
    std::cerr << "wrote " << (dir / name).string() << "\n";
  }
  write_json(dir / "manifest.json",
             {{"config", cfg.source}, {"truth", "truth.lprf"}, {"stacks", stacks}});
  return kOk;
}

int cmd_reconstruct(const Common& c, const std::string& stack, const std::string& alg_name) {
  ExperimentConfig cfg = load(c);
  if (cfg.output.dir.empty()) throw ConfigError("reconstruct: --out or output.dir is required");
  const AlgorithmSpec* alg = &cfg.algorithms.front();
  if (!alg_name.empty()) {
    alg = nullptr;
    for (const auto& a : cfg.algorithms) {
      if (a.name == alg_name) alg = &a;
    }
    if (!alg) throw ConfigError("reconstruct: no algorithm named '" + alg_name + "'");
  }
  if (alg->init == "truth") throw ConfigError("reconstruct: init 'truth' is bench-only");
  MeasurementSet I{cfg.modality(), read_lprf(stack)};
  try {
    require_consistent(I, cfg.model);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("reconstruct: stack does not match the model: ") + e.what());
  }

  Reconstruction r;
  try {
    r = reconstruct(I, cfg.model, *alg);
  } catch (const std::exception& e) {
    throw SolverFailure(e.what());
  }
  const fs::path dir = cfg.output.dir;
  fs::create_directories(dir);
  write_lprf_complex(dir / "field.lprf", r.field);
  write_images(dir / "field", r.field);
  write_json(dir / "report.json", r.report);
  std::ofstream(dir / "trace.csv") << r.csv;
  std::cerr << alg->name << ": " << r.report.value("iterations", 0) << " iterations\n";
  return kOk;
}

int cmd_bench(const Common& c, std::size_t overlap) {
  ExperimentConfig cfg = load(c);
  if (!c.tile.empty()) {
    TiledRunOptions opts;
    opts.tile = parse_tile(c.tile);
    opts.overlap = overlap;
    const TiledRunResult r =
        tiled_run(cfg, opts, [](const std::string& s) { std::cerr << s << "\n"; });
    std::cout << "channels " << r.channels.size() << ", wall " << r.wall_seconds << " s ("
              << r.wall_seconds / 60.0 << " min)\n"
              << "memory estimate: tiled " << r.memory.tiled_bytes << " B, untiled "
              << r.memory.untiled_bytes << " B\n";
    return kOk;
  }
  const ExperimentResult r = run_experiment(cfg);
  std::cout << rows_to_csv(r.rows, cfg.output.timing);
  return kOk;
}

struct Loaded {
  bool complex = false;
  ComplexField field;
};

Loaded load_image(const fs::path& p) {
  Loaded l;
  if (p.extension() == ".png") {
    l.field = to_complex(read_png_gray(p));
    return l;
  }
  const auto planes = read_lprf(p);
  if (planes.size() == 2) {
    l.complex = true;
    l.field = read_lprf_complex(p);
  } else if (planes.size() == 1) {
    l.field = to_complex(planes[0]);
  } else {
    throw ConfigError(p.string() + ": expected 1 (real) or 2 (complex) planes");
  }
  return l;
}

int cmd_metrics(const std::string& ref_path, const std::string& test_path,
                std::optional<double> peak, bool ambiguity, int max_shift) {
  const Loaded ref = load_image(ref_path), test = load_image(test_path);
  if (ref.field.height() != test.field.height() || ref.field.width() != test.field.width()) {
    throw ConfigError("metrics: image dims differ");
  }
  json j;
  if (ref.complex || test.complex || ambiguity) {
    const Score s = score(test.field, ref.field, {ambiguity, max_shift});
    j = {{"psnr_db", s.psnr}, {"ssim", s.ssim}, {"phase_rmse", s.phase_rmse},
         {"flipped", s.flipped}, {"shift", {s.shift_row, s.shift_col}}};
  } else {
    const RealImage a = real(ref.field), b = real(test.field);
    const double pk = peak ? *peak : max_value(a);
    j = {{"psnr_db", psnr(a, b, pk)}, {"ssim", ssim(a, b, pk)}, {"mse", mse(a, b)}};
  }
  std::cout << j.dump(2) << "\n";
  return kOk;
}

// Sends a random image through the command and checks what comes back.
int cmd_bridge_test(const std::string& command, double sigma, std::size_t size,
                    long timeout_ms) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  RealImage v(size, size);
  for (auto& x : v) x = u(rng);
  try {
    const RealImage out = external_bridge(v, command, sigma, std::chrono::milliseconds(timeout_ms));
    if (out.height() != size || out.width() != size) {
      std::cout << "FAIL: output dims " << out.height() << "x" << out.width() << "\n";
      return kFail;
    }
    for (double x : out) {
      if (!std::isfinite(x)) {
        std::cout << "FAIL: non-finite output\n";
        return kFail;
      }
    }
    std::cout << "OK: " << size << "x" << size << " round trip, rms change "
              << std::sqrt(mse(v, out)) << "\n";
    return kOk;
  } catch (const BridgeError& e) {
    std::cout << "FAIL: " << e.what() << "\n";
    return kFail;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"lpr - phase retrieval with plug-and-play priors"};
  app.require_subcommand(1);
  Common common;
  auto add_common = [&](CLI::App* s, bool tile) {
    s->add_option("--config", common.config, "experiment config (JSON)");
    s->add_option("--out", common.out, "output directory (overrides output.dir)");
    s->add_option("--seed", common.seed, "noise seed override");
    s->add_option("--threads", common.threads, "worker threads");
    if (tile) s->add_option("--tile", common.tile, "tiled CDP run with <h>x<w> enhancer tiles");
  };

  auto* sim = app.add_subcommand("simulate", "ground truth -> LPRF measurement stacks");
  add_common(sim, false);

  std::string stack, alg_name;
  auto* rec = app.add_subcommand("reconstruct", "stack + config -> field + report");
  add_common(rec, false);
  rec->add_option("--stack", stack, "LPRF measurement stack")->required();
  rec->add_option("--algorithm", alg_name, "algorithm name (default: first)");

  std::size_t overlap = 16;
  auto* bench = app.add_subcommand("bench", "full grid -> CSV, PNG, JSON");
  add_common(bench, true);
  bench->add_option("--overlap", overlap, "tile overlap in pixels");

  std::string ref_path, test_path;
  std::optional<double> peak;
  bool ambiguity = false;
  int max_shift = 4;
  auto* met = app.add_subcommand("metrics", "two images -> PSNR / SSIM");
  met->add_option("reference", ref_path, "PNG or LPRF")->required();
  met->add_option("test", test_path, "PNG or LPRF")->required();
  met->add_option("--peak", peak, "PSNR peak (default: max of reference)");
  met->add_flag("--ambiguity", ambiguity, "search conjugate flip and shifts");
  met->add_option("--max-shift", max_shift, "shift range for --ambiguity");

  std::string command;
  double sigma = 0.1;
  std::size_t size = 64;
  long timeout_ms = 60000;
  auto* bt = app.add_subcommand("denoise-bridge-test", "validate an external enhancer command");
  bt->add_option("--command", command, "invoked as <command> <dir>")->required();
  bt->add_option("--sigma", sigma, "noise level written to meta.json");
  bt->add_option("--size", size, "test image side")->check(CLI::PositiveNumber);
  bt->add_option("--timeout-ms", timeout_ms, "per-call timeout")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfig;
  }

  try {
    if (*sim) return cmd_simulate(common);
    if (*rec) return cmd_reconstruct(common, stack, alg_name);
    if (*bench) return cmd_bench(common, overlap);
    if (*met) return cmd_metrics(ref_path, test_path, peak, ambiguity, max_shift);
    if (*bt) return cmd_bridge_test(command, sigma, size, timeout_ms);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfig;
  } catch (const json::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfig;
  } catch (const SolverFailure& e) {
    std::cerr << "solver failure: " << e.what() << "\n";
    return kSolver;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFail;
  }
  return kFail;
}
