#include "lpr/wf.hpp"

#include <chrono>
#include <algorithm>
#include <cmath>
#include <random>

#include "lpr/metrics.hpp"

namespace lpr {

std::string to_string(WfInit k) { return k == WfInit::adjoint ? "adjoint" : "spectral"; }

WfInit wf_init_from_string(const std::string& s) {
  if (s == "spectral") return WfInit::spectral;
  if (s == "adjoint") return WfInit::adjoint;
  throw ArgumentError("unknown WF init '" + s + "'");
}

void WfParams::validate() const {
  if (max_iters < 1) throw ArgumentError("wf: max_iters must be >= 1");
  if (!(mu_max > 0.0)) throw ArgumentError("wf: mu_max must be > 0");
  if (!(t0 > 0.0)) throw ArgumentError("wf: t0 must be > 0");
  if (!(tol >= 0.0)) throw ArgumentError("wf: tol must be >= 0");
}

namespace {

double measured_energy(const MeasurementSet& I) {
  double e = 0.0;
  for (const auto& p : I.planes) e += sum(p);
  return e;
}

void match_energy(ComplexField& u, const Model& m, const MeasurementSet& I) {
  double model_energy = 0.0;
  for (const auto& y : linear_forward(u, m)) model_energy += energy(y);
  const double target = measured_energy(I);
  if (model_energy > 0.0 && target > 0.0) {
    const double s = std::sqrt(target / model_energy);
    for (auto& z : u) z *= s;
  }
}

}  // namespace

ComplexField wf_spectral_init(const MeasurementSet& I, const Model& m, std::size_t iters,
                              std::uint64_t seed) {
  require_consistent(I, m);
  const Dims d = object_dims(m);
  ComplexField z(d.height, d.width);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (auto& v : z) {
    const double re = gauss(rng);
    v = {re, gauss(rng)};
  }
  // Raw intensity weights let a few bright samples own the top eigenvector
  // unless there are many masks. The bounded weight (y-1)/(y+sqrt(delta)-1)
  // on y = I/mean(I), shifted to be non-negative, does not have that problem.
  double total = 0.0, samples = 0.0;
  for (const auto& p : I.planes) {
    for (double v : p) total += std::max(v, 0.0);
    samples += double(p.size());
  }
  const double mean_i = total / samples;
  const double c = std::max(std::sqrt(samples / double(d.height * d.width)) - 1.0, 0.1);
  std::vector<RealImage> w;
  for (const auto& p : I.planes) {
    RealImage wl(p.height(), p.width());
    for (std::size_t i = 0; i < p.size(); ++i) {
      const double y = mean_i > 0.0 ? std::max(p[i], 0.0) / mean_i : 0.0;
      wl[i] = (y - 1.0) / (y + c) + 1.0 / c;
    }
    w.push_back(std::move(wl));
  }
  for (std::size_t k = 0; k < iters; ++k) {
    std::vector<ComplexField> y = linear_forward(z, m);
    for (std::size_t l = 0; l < y.size(); ++l) {
      for (std::size_t i = 0; i < y[l].size(); ++i) y[l][i] *= w[l][i];
    }
    z = linear_adjoint(y, m);
    const double n = norm(z);
    if (!(n > 0.0)) break;
    for (auto& v : z) v /= n;
  }
  match_energy(z, m, I);
  return z;
}

ComplexField wf_gradient(const ComplexField& u, const Model& m, const MeasurementSet& I) {
  require_consistent(I, m);
  std::vector<ComplexField> y = linear_forward(u, m);
  // Rescaling each unitary transform by sqrt(P) (P = samples per plane)
  // gives unit-modulus rows, and the textbook gradient becomes
  // P^2 / M * A^*[(|Au|^2 - I) Au].
  double count = 0.0;
  for (std::size_t l = 0; l < y.size(); ++l) {
    auto& yl = y[l];
    const auto& il = I.planes[l];
    for (std::size_t i = 0; i < yl.size(); ++i) yl[i] *= std::norm(yl[i]) - il[i];
    count += double(yl.size());
  }
  ComplexField g = linear_adjoint(y, m);
  const double plane = double(y.front().size());
  const double scale = plane * plane / count;
  for (auto& z : g) z *= scale;
  return g;
}

ApResult wf_baseline(const MeasurementSet& I, const Model& m, const WfParams& p,
                     const ComplexField* init) {
  p.validate();
  require_consistent(I, m);
  const auto t0 = std::chrono::steady_clock::now();

  ComplexField u;
  if (init) {
    if (dims_of(*init) != object_dims(m)) throw ArgumentError("wf: init has wrong dims");
    u = *init;
  } else if (p.init == WfInit::spectral) {
    u = wf_spectral_init(I, m, p.power_iters, p.seed);
  } else {
    u = default_init(I, m);
    match_energy(u, m, I);
  }
  // ||u||^2 of a consistent u in the textbook normalization.
  double norm0 = energy(u);
  if (!(norm0 > 0.0)) norm0 = 1.0;

  ApResult out;
  RunReport& rep = out.report;
  RealImage ref_amp;
  if (p.reference) ref_amp = abs(*p.reference);
  for (std::size_t k = 0; k < p.max_iters; ++k) {
    const ComplexField g = wf_gradient(u, m, I);
    const double mu = std::min(1.0 - std::exp(-double(k + 1) / p.t0), p.mu_max);
    ComplexField next = u;
    for (std::size_t i = 0; i < u.size(); ++i) next[i] -= (mu / norm0) * g[i];
    if (!all_finite(next)) throw DivergenceError("wf_baseline: non-finite iterate", u, k);
    const double change = intensity_change(next, u);
    const double gnorm = norm(g) / std::max(norm(u), 1e-300);
    u = std::move(next);
    ++rep.iterations;
    rep.intensity_changes.push_back(change);
    rep.residuals.push_back(data_residual(u, m, I));
    if (p.reference) {
      const RealImage est = abs(global_phase_align(u, *p.reference).field);
      rep.psnr.push_back(psnr(ref_amp, est));
      if (est.height() >= 11 && est.width() >= 11) rep.ssim.push_back(ssim(ref_amp, est));
    }
    if (p.record_history) rep.history.push_back(u);
    if (gnorm < p.tol) {
      rep.converged = true;
      break;
    }
  }
  out.field = std::move(u);
  rep.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

}  // namespace lpr
