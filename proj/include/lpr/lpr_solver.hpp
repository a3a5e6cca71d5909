#pragma once

#include <optional>
#include <vector>

#include "lpr/ap_solver.hpp"
#include "lpr/denoise.hpp"

namespace lpr {

enum class InitKind { adjoint, ap_warmstart, provided };

std::string to_string(InitKind k);
InitKind init_kind_from_string(const std::string& s);

struct LprInit {
  InitKind kind = InitKind::ap_warmstart;
  std::size_t warmstart_iters = 20;
  std::optional<ComplexField> field;  // required for InitKind::provided
};

struct LprParams {
  std::size_t outer_max = 100;
  std::size_t inner_ap_iters = 3;
  double tol = 1e-6;
  /// Per outer iteration; the last value repeats. Empty selects a geometric
  /// decay from schedule_gain * (noise level estimated on the initial
  /// amplitude) down to that start / schedule_decay.
  std::vector<double> strength_schedule;
  double schedule_gain = 1.0;
  double schedule_decay = 10.0;
  ChannelPolicy channel_policy = ChannelPolicy::amp_phase;
  LprInit init;
  bool record_history = false;
  std::optional<ComplexField> reference;

  void validate() const;
};

LprParams default_lpr_params(Modality m);

struct LprTrace {
  std::size_t iterations = 0;
  /// Data-fidelity residual of u^(k+1), the output of the projection step.
  std::vector<double> residuals;
  /// Intensity change between v^(k+1) and v^(k).
  std::vector<double> intensity_changes;
  std::vector<double> strengths;
  std::vector<double> psnr;
  std::vector<double> ssim;
  std::vector<ComplexField> history;  // v^(1)..v^(n) when requested
  std::vector<double> schedule;       // the schedule actually applied
  bool converged = false;
  double init_seconds = 0.0;  // AP warm start, excluded from wall_seconds
  double wall_seconds = 0.0;
};

struct LprResult {
  ComplexField field;
  LprTrace trace;
};

/// Plug-and-play GAP: u^(k+1) = AP burst of inner_ap_iters steps warm-started
/// at v^(k); v^(k+1) = enhance_complex(u^(k+1)) at schedule[k]. Stops when
/// the intensity change of v falls below tol once the schedule has reached
/// its last strength, or after outer_max rounds.
LprResult lpr_solve(const MeasurementSet& I, const Model& m, const Enhancer& e,
                    const LprParams& p);

/// `count` values decaying geometrically from `start` to `end`.
std::vector<double> geometric_schedule(double start, double end, std::size_t count);

/// Blind Gaussian noise level: median(|HH|) / 0.6745 over the finest Haar
/// diagonal band.
double estimate_noise_sigma(const RealImage& img);

struct GapDiagnostic {
  double min_residual = 0.0;
  double final_residual = 0.0;
  std::optional<std::size_t> iterations_to_threshold;  // 1-based
};

/// Summary of the measurement-constraint residual along an LPR run.
GapDiagnostic gap_vs_admm_residual(const LprTrace& trace, double threshold = 1e-6);

}  // namespace lpr
