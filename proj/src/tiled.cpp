#include <chrono>
#include <filesystem>
#include <fstream>

#include "lpr/bench.hpp"
#include "lpr/image_io.hpp"

namespace lpr {

using nlohmann::json;

MemoryEstimate estimate_memory(Dims dims, std::size_t masks, std::size_t channels, Dims tile) {
  const std::size_t n = dims.height * dims.width;
  const std::size_t real = sizeof(double), cx = sizeof(cplx);
  // stack + masks + u, v, scratch spectrum, previous v
  const std::size_t solver = masks * n * real + masks * n * cx + 4 * n * cx;
  MemoryEstimate m;
  m.untiled_bytes = channels * (solver + 6 * n * real);
  const std::size_t t = std::min(tile.height, dims.height) * std::min(tile.width, dims.width);
  // one channel at a time; enhancer planes per tile plus weighted sum and weights
  m.tiled_bytes = solver + 6 * t * real + 2 * n * real;
  return m;
}

namespace {

using Clock = std::chrono::steady_clock;

const AlgorithmSpec& pick_lpr(const ExperimentConfig& cfg) {
  for (const auto& a : cfg.algorithms) {
    if (a.kind == AlgorithmKind::lpr) return a;
  }
  throw ConfigError("tiled run: config has no lpr algorithm");
}

void require_space(const std::filesystem::path& dir, std::uintmax_t need) {
  std::error_code ec;
  const auto sp = std::filesystem::space(dir, ec);
  if (!ec && sp.available < need) {
    throw IoError("tiled run: " + std::to_string(need) + " bytes needed in " + dir.string() +
                  ", " + std::to_string(sp.available) + " available");
  }
}

}  // namespace

TiledRunResult tiled_run(const ExperimentConfig& cfg, const TiledRunOptions& opts,
                         const std::function<void(const std::string&)>& log) {
  cfg.validate();
  const auto* cdp = std::get_if<CdpModel>(&cfg.model);
  if (!cdp) throw ConfigError("tiled run: only cdp is supported");
  if (opts.tile.height == 0 || opts.tile.width == 0) throw ConfigError("tiled run: empty tile");
  if (opts.tile.height > cfg.dims.height || opts.tile.width > cfg.dims.width) {
    throw ConfigError("tiled run: tile " + std::to_string(opts.tile.height) + "x" +
                      std::to_string(opts.tile.width) + " larger than image " +
                      std::to_string(cfg.dims.height) + "x" + std::to_string(cfg.dims.width));
  }
  if (opts.overlap >= std::min(opts.tile.height, opts.tile.width)) {
    throw ConfigError("tiled run: overlap must be smaller than the tile");
  }
  const AlgorithmSpec& alg = pick_lpr(cfg);
  if (alg.init == "ap_result") throw ConfigError("tiled run: init ap_result is not supported");
  if (cfg.output.dir.empty()) throw ConfigError("tiled run: output.dir is required");

  Enhancer enh = alg.enhancer;
  enh.tile = opts.tile;
  enh.tile_overlap = opts.overlap;
  std::optional<double> snr;
  if (!cfg.snr_db.empty()) snr = cfg.snr_db.front();

  const auto& dir = cfg.output.dir;
  std::filesystem::create_directories(dir);
  const std::size_t n = cfg.dims.height * cfg.dims.width;
  const std::size_t L = cdp->masks.size();
  // one float32 stack plus a float32 complex result per channel
  const std::vector<ComplexField> truths = make_truth_channels(cfg);
  const std::size_t channels = truths.size();
  if (opts.only_channel && *opts.only_channel >= channels) {
    throw ConfigError("tiled run: channel " + std::to_string(*opts.only_channel) + " out of range");
  }
  require_space(dir, channels * (16 + L * n * 4 + 16 + 2 * n * 4));

  TiledRunResult res;
  res.memory = estimate_memory(cfg.dims, L, channels, opts.tile);
  const auto t_all = Clock::now();
  json chans = json::array();
  for (std::size_t c = 0; c < channels; ++c) {
    if (opts.only_channel && c != *opts.only_channel) continue;
    const auto t0 = Clock::now();
    const auto stack_path = dir / ("channel" + std::to_string(c) + ".lprf");
    {
      MeasurementSet I = forward(truths[c], cfg.model);
      if (snr) I = add_wgn(I, {*snr, cfg.noise_seed + c});
      write_lprf(stack_path, I.planes);
    }
    MeasurementSet I{Modality::cdp, read_lprf(stack_path)};
    require_consistent(I, cfg.model);
    if (log) log("channel " + std::to_string(c) + ": stack " + stack_path.string());

    LprParams p = alg.lpr;
    if (alg.init == "truth") p.init.field = truths[c];
    LprResult r = lpr_solve(I, cfg.model, enh, p);
    I.planes.clear();
    if (!opts.keep_stacks) std::filesystem::remove(stack_path);

    const auto out_path = dir / ("channel" + std::to_string(c) + "_result.lprf");
    write_lprf_complex(out_path, r.field);
    const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    if (log) {
      log("channel " + std::to_string(c) + ": " + std::to_string(r.trace.iterations) +
          " iterations, " + std::to_string(secs) + " s");
    }
    json cj = {{"channel", c},
               {"result", out_path.filename().string()},
               {"iterations", r.trace.iterations},
               {"converged", r.trace.converged},
               {"noise_seed", snr ? json(cfg.noise_seed + c) : json()}};
    if (opts.keep_stacks) cj["stack"] = stack_path.filename().string();
    if (cfg.output.timing) cj["wall_seconds"] = secs;
    chans.push_back(cj);
    if (opts.keep_stacks) res.stacks.push_back(stack_path);
    res.channels.push_back(std::move(r.field));
    res.channel_seconds.push_back(secs);
  }
  res.wall_seconds = std::chrono::duration<double>(Clock::now() - t_all).count();
  res.manifest = {{"name", cfg.name},
                  {"config", cfg.source},
                  {"algorithm", alg.name},
                  {"tile", {opts.tile.height, opts.tile.width}},
                  {"overlap", opts.overlap},
                  {"snr_db", snr ? json(*snr) : json()},
                  {"memory_estimate_bytes",
                   {{"tiled", res.memory.tiled_bytes}, {"untiled", res.memory.untiled_bytes}}},
                  {"channels", chans}};
  std::ofstream(dir / "manifest.json") << res.manifest.dump(2) << "\n";
  return res;
}

}  // namespace lpr
