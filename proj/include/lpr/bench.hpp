#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "lpr/lpr_solver.hpp"
#include "lpr/wf.hpp"

namespace lpr {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ------------------------------------------------------------------ scoring

struct ScoreOptions {
  /// Search {identity, conjugate flip} x integer shifts in [-max_shift,
  /// max_shift]^2 (circular within the object frame). Meant for CDI.
  bool ambiguity = false;
  int max_shift = 4;
};

struct Score {
  double psnr = 0.0;
  double ssim = 0.0;
  double phase_rmse = 0.0;  // wrapped, radians
  bool flipped = false;
  int shift_row = 0;
  int shift_col = 0;
  ComplexField aligned;  // the winning candidate after phase alignment
};

/// Amplitude PSNR (peak = max |truth|) and SSIM (same dynamic range) of the
/// best ambiguity-group member, each candidate globally phase-aligned first.
Score score(const ComplexField& est, const ComplexField& truth, const ScoreOptions& opts = {});

// ------------------------------------------------------------------ config

struct TruthSpec {
  std::string pattern = "phantom";  // ignored when image is set
  std::filesystem::path image;
  std::uint64_t seed = 7;
  double lo = 0.1;
  double hi = 1.0;
  std::string phase_pattern;  // empty: zero phase
  std::uint64_t phase_seed = 8;
  double phase_max = 1.5707963267948966;
};

enum class AlgorithmKind { ap, lpr, wf };

std::string to_string(AlgorithmKind k);

/// LPR start values beyond InitKind: "ap_result" reuses the AP row of the
/// same SNR (time reported is excess over it), "truth" starts from the
/// ground truth (AP and LPR).
struct AlgorithmSpec {
  std::string name;
  AlgorithmKind kind = AlgorithmKind::ap;
  std::string init = "default";
  ApParams ap;
  LprParams lpr;
  Enhancer enhancer;
  WfParams wf;
};

struct OutputSpec {
  std::filesystem::path dir;
  bool images = true;
  bool traces = true;
  /// false writes NA in wall_seconds so reruns are byte-identical.
  bool timing = true;
};

struct ExperimentConfig {
  std::string name = "experiment";
  Model model;
  Dims dims{64, 64};
  TruthSpec truth;
  /// nullopt entries are noiseless cells (written as "inf").
  std::vector<std::optional<double>> snr_db;
  std::uint64_t noise_seed = 1;
  std::vector<AlgorithmSpec> algorithms;
  ScoreOptions scoring;
  OutputSpec output;
  std::size_t threads = 1;
  /// The parsed document, kept for the manifest.
  nlohmann::json source;

  Modality modality() const { return modality_of(model); }
  void validate() const;
};

/// Parses a config document. Relative image paths resolve against base_dir.
/// Unknown keys are errors.
ExperimentConfig parse_config(const nlohmann::json& doc, const std::filesystem::path& base_dir = {});
ExperimentConfig load_config(const std::filesystem::path& path);

/// Complex ground truth of cfg.dims (grayscale; color images are averaged).
ComplexField make_truth(const ExperimentConfig& cfg);
/// Per-channel ground truths: one per PNG channel, or three procedural
/// channels with seeds seed, seed+1, seed+2.
std::vector<ComplexField> make_truth_channels(const ExperimentConfig& cfg);

// ------------------------------------------------------------------ grid

struct BenchRow {
  std::string algorithm;
  std::optional<double> snr_db;
  double psnr_db = 0.0;
  double ssim = 0.0;
  double phase_rmse = 0.0;
  double wall_seconds = 0.0;
  double init_seconds = 0.0;  // shared AP warm start, not in wall_seconds
  std::size_t iterations = 0;
  bool converged = false;
  std::string status = "ok";
};

inline constexpr const char* kCsvHeader =
    "algorithm,snr_db,psnr_db,ssim,wall_seconds,iterations,converged,status";

std::string rows_to_csv(const std::vector<BenchRow>& rows, bool timing = true);

struct CellResult {
  BenchRow row;
  ComplexField field;  // best-aligned estimate
};

struct ExperimentResult {
  std::vector<BenchRow> rows;  // algorithm order x config SNR order
  std::vector<ComplexField> fields;
  nlohmann::json manifest;
};

/// Runs every (algorithm, SNR) cell. Cells of one SNR share the noisy stack
/// and run in one worker; SNRs are spread over cfg.threads workers. Failing
/// cells are reported in-row and never abort the grid. Writes results.csv,
/// manifest.json and per-cell artifacts when cfg.output.dir is set.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

/// Reconstructs one measured stack with one algorithm (no scoring).
struct Reconstruction {
  ComplexField field;
  nlohmann::json report;
  std::string csv;
};
Reconstruction reconstruct(const MeasurementSet& I, const Model& m, const AlgorithmSpec& alg,
                           const ComplexField* truth_for_init = nullptr);

// ------------------------------------------------------------------ tiled

struct MemoryEstimate {
  std::size_t tiled_bytes = 0;
  std::size_t untiled_bytes = 0;
};

/// Working-set model for a CDP LPR run: the measured stack, masks, four
/// complex work fields and six real enhancer planes (tile-sized when
/// tiled, plus the blend accumulators), times the channels held at once.
MemoryEstimate estimate_memory(Dims dims, std::size_t masks, std::size_t channels, Dims tile);

struct TiledRunOptions {
  Dims tile{256, 256};
  std::size_t overlap = 16;
  /// Keep each channel's float32 stack on disk after the run.
  bool keep_stacks = true;
  /// Process just this channel (same seeds and outputs as in a full run).
  std::optional<std::size_t> only_channel;
};

struct TiledRunResult {
  std::vector<ComplexField> channels;
  std::vector<double> channel_seconds;
  double wall_seconds = 0.0;
  MemoryEstimate memory;
  std::vector<std::filesystem::path> stacks;
  nlohmann::json manifest;
};

/// CDP only. Channels are processed one at a time: synthesize, write the
/// stack to <dir>/channel<c>.lprf, drop it, stream it back, run the first
/// LPR algorithm with its enhancer tiled, write <dir>/channel<c>_result.lprf.
/// Uses the first SNR entry; channel c draws noise from noise_seed + c.
/// Throws ConfigError for a non-CDP model, a tile larger than the image or a
/// missing LPR algorithm, IoError when the output disk is too small.
TiledRunResult tiled_run(const ExperimentConfig& cfg, const TiledRunOptions& opts,
                         const std::function<void(const std::string&)>& log = {});

}  // namespace lpr
