#include "lpr/lpr_solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "lpr/metrics.hpp"

namespace lpr {

std::string to_string(InitKind k) {
  switch (k) {
    case InitKind::adjoint: return "adjoint";
    case InitKind::ap_warmstart: return "ap_warmstart";
    case InitKind::provided: return "provided";
  }
  return "?";
}

InitKind init_kind_from_string(const std::string& s) {
  if (s == "adjoint") return InitKind::adjoint;
  if (s == "ap_warmstart") return InitKind::ap_warmstart;
  if (s == "provided") return InitKind::provided;
  throw ArgumentError("unknown init kind '" + s + "'");
}

void LprParams::validate() const {
  if (outer_max < 1) throw ArgumentError("lpr: outer_max must be >= 1");
  if (inner_ap_iters < 1) throw ArgumentError("lpr: inner_ap_iters must be >= 1");
  if (!(tol > 0.0)) throw ArgumentError("lpr: tol must be > 0");
  for (std::size_t k = 0; k < strength_schedule.size(); ++k) {
    const double s = strength_schedule[k];
    if (!(s >= 0.0) || !std::isfinite(s)) throw ArgumentError("lpr: strengths must be finite and >= 0");
    if (k > 0 && s > strength_schedule[k - 1]) {
      throw ArgumentError("lpr: strength schedule must be non-increasing");
    }
  }
  if (init.kind == InitKind::provided && !init.field) {
    throw ArgumentError("lpr: provided init needs a field");
  }
  if (init.kind == InitKind::ap_warmstart && init.warmstart_iters < 1) {
    throw ArgumentError("lpr: ap_warmstart needs at least one iteration");
  }
  if (!(schedule_gain >= 0.0) || !std::isfinite(schedule_gain)) {
    throw ArgumentError("lpr: schedule_gain must be finite and >= 0");
  }
  if (!(schedule_decay >= 1.0) || !std::isfinite(schedule_decay)) {
    throw ArgumentError("lpr: schedule_decay must be finite and >= 1");
  }
}

LprParams default_lpr_params(Modality m) {
  // The blind estimate sees the initial amplitude, which under-reads the
  // noise left after a projection; the gains were picked on 256x256 phantoms.
  LprParams p;
  switch (m) {
    case Modality::cdp:
      p.schedule_gain = 4.0;
      break;
    case Modality::cdi:
      p.schedule_gain = 100.0;
      p.schedule_decay = 1.0;
      break;
    case Modality::fpm:
      p.inner_ap_iters = 1;
      p.schedule_gain = 30.0;
      p.schedule_decay = 1.0;
      break;
  }
  return p;
}

std::vector<double> geometric_schedule(double start, double end, std::size_t count) {
  if (count == 0) return {};
  if (!(start >= 0.0) || !(end >= 0.0)) throw ArgumentError("schedule: strengths must be >= 0");
  std::vector<double> s(count, start);
  if (count == 1 || start == 0.0 || end == 0.0) {
    if (count > 1 && (start == 0.0 || end == 0.0)) s.back() = end;
    return s;
  }
  const double ratio = std::pow(end / start, 1.0 / double(count - 1));
  for (std::size_t k = 1; k < count; ++k) s[k] = s[k - 1] * ratio;
  s.back() = end;
  return s;
}

double estimate_noise_sigma(const RealImage& img) {
  require_nonempty(img, "estimate_noise_sigma");
  std::vector<double> hh;
  for (std::size_t r = 0; r + 1 < img.height(); r += 2) {
    for (std::size_t c = 0; c + 1 < img.width(); c += 2) {
      hh.push_back(std::abs(img(r, c) - img(r, c + 1) - img(r + 1, c) + img(r + 1, c + 1)) / 2.0);
    }
  }
  if (hh.empty()) return 0.0;
  auto mid = hh.begin() + long(hh.size() / 2);
  std::nth_element(hh.begin(), mid, hh.end());
  return *mid / 0.6745;
}

namespace {

using Clock = std::chrono::steady_clock;

ComplexField initial_estimate(const MeasurementSet& I, const Model& m, const LprParams& p) {
  switch (p.init.kind) {
    case InitKind::provided:
      if (dims_of(*p.init.field) != object_dims(m)) {
        throw ArgumentError("lpr: provided init has wrong dims");
      }
      return *p.init.field;
    case InitKind::adjoint: return default_init(I, m);
    case InitKind::ap_warmstart: {
      ApParams ap = default_ap_params(modality_of(m));
      ap.max_iters = p.init.warmstart_iters;
      ap.tol = p.tol;
      return ap_solve(I, m, default_init(I, m), ap).field;
    }
  }
  return default_init(I, m);
}

}  // namespace

LprResult lpr_solve(const MeasurementSet& I, const Model& m, const Enhancer& e,
                    const LprParams& p) {
  p.validate();
  e.validate();
  require_consistent(I, m);

  const auto t_init = Clock::now();
  ComplexField v = initial_estimate(I, m, p);
  LprResult out;
  LprTrace& tr = out.trace;
  tr.init_seconds = std::chrono::duration<double>(Clock::now() - t_init).count();

  const auto t0 = Clock::now();
  tr.schedule = p.strength_schedule;
  if (tr.schedule.empty()) {
    const double start = p.schedule_gain * estimate_noise_sigma(abs(v));
    tr.schedule = geometric_schedule(start, start / p.schedule_decay, p.outer_max);
  }

  ApParams inner = default_ap_params(modality_of(m));
  inner.max_iters = p.inner_ap_iters;
  inner.tol = p.tol;

  RealImage ref_amp;
  if (p.reference) ref_amp = abs(*p.reference);

  for (std::size_t k = 0; k < p.outer_max; ++k) {
    ApResult u = ap_solve(I, m, v, inner);
    const double strength = tr.schedule[std::min(k, tr.schedule.size() - 1)];
    ComplexField next = enhance_complex(u.field, e.with_strength(strength), p.channel_policy);
    if (!all_finite(next)) throw DivergenceError("lpr_solve: non-finite iterate", v, k);

    const double change = intensity_change(next, v);
    v = std::move(next);
    ++tr.iterations;
    tr.residuals.push_back(u.report.residuals.back());
    tr.intensity_changes.push_back(change);
    tr.strengths.push_back(strength);
    if (p.reference) {
      const RealImage est = abs(v);
      const double peak = max_value(ref_amp);
      tr.psnr.push_back(psnr(ref_amp, est, peak));
      if (est.height() >= 11 && est.width() >= 11) tr.ssim.push_back(ssim(ref_amp, est, peak));
    }
    if (p.record_history) tr.history.push_back(v);
    // a stall while the strength is still decaying is not convergence
    const bool settled = e.kind == EnhancerKind::identity || strength == tr.schedule.back();
    if (change < p.tol && settled) {
      tr.converged = true;
      break;
    }
  }
  tr.wall_seconds = std::chrono::duration<double>(Clock::now() - t0).count();
  out.field = std::move(v);
  return out;
}

GapDiagnostic gap_vs_admm_residual(const LprTrace& trace, double threshold) {
  if (trace.residuals.empty()) throw ArgumentError("gap diagnostic: empty trace");
  GapDiagnostic d;
  d.min_residual = *std::min_element(trace.residuals.begin(), trace.residuals.end());
  d.final_residual = trace.residuals.back();
  for (std::size_t k = 0; k < trace.residuals.size(); ++k) {
    if (trace.residuals[k] < threshold) {
      d.iterations_to_threshold = k + 1;
      break;
    }
  }
  return d;
}

}  // namespace lpr
