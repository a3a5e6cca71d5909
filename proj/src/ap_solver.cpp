#include "lpr/ap_solver.hpp"

#include <chrono>
#include <cmath>

#include "lpr/metrics.hpp"

namespace lpr {

std::string to_string(ApVariant v) {
  return v == ApVariant::hio ? "hio" : "error-reduction";
}

ApVariant ap_variant_from_string(const std::string& s) {
  if (s == "hio") return ApVariant::hio;
  if (s == "error-reduction" || s == "er") return ApVariant::error_reduction;
  throw ArgumentError("unknown AP variant '" + s + "'");
}

void ApParams::validate() const {
  if (max_iters < 1) throw ArgumentError("ap: max_iters must be >= 1");
  if (!(tol > 0.0)) throw ArgumentError("ap: tol must be > 0");
  if (!(hio_beta > 0.0 && hio_beta <= 1.0)) throw ArgumentError("ap: hio_beta must be in (0, 1]");
}

ApParams default_ap_params(Modality m) {
  ApParams p;
  switch (m) {
    case Modality::cdi: p.max_iters = 1000; break;
    case Modality::cdp: p.max_iters = 300; break;
    case Modality::fpm: p.max_iters = 50; break;
  }
  return p;
}

double intensity_change(const ComplexField& a, const ComplexField& b) {
  require_same_shape(a, b, "intensity_change");
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double nb = std::norm(b[i]);
    num += std::abs(std::norm(a[i]) - nb);
    den += nb;
  }
  if (den == 0.0) return num == 0.0 ? 0.0 : INFINITY;
  return num / den;
}

void apply_object_constraint(ComplexField& u, const Model& m) {
  const auto* cdi = std::get_if<CdiModel>(&m);
  if (!cdi || !(cdi->enforce_real || cdi->enforce_nonnegative)) return;
  // Nonnegativity implies realness.
  for (auto& z : u) {
    z = cdi->enforce_nonnegative ? std::max(z.real(), 0.0) : z.real();
  }
}

namespace {

using Clock = std::chrono::steady_clock;

void trace_quality(RunReport& r, const ApParams& p, const ComplexField& u) {
  if (!p.reference) return;
  const RealImage ref = abs(*p.reference);
  const RealImage est = abs(u);
  const double peak = max_value(ref);
  r.psnr.push_back(psnr(ref, est, peak));
  if (ref.height() >= 11 && ref.width() >= 11) r.ssim.push_back(ssim(ref, est, peak));
}

// Whether a pixel of the padded CDI grid satisfies the object constraints.
bool cdi_admissible(const CdiModel& m, bool in_support, cplx z) {
  if (!in_support) return false;
  if (m.enforce_nonnegative && z.real() < 0.0) return false;
  return true;
}

ApResult solve_hio(const MeasurementSet& I, const CdiModel& m, const Model& model,
                   const ComplexField& init, const ApParams& p) {
  const auto t0 = Clock::now();
  const Dims padded = m.padded();
  const Dims off = center_offset(padded, m.object);
  Mask support(padded.height, padded.width, 0);
  for (std::size_t r = 0; r < m.object.height; ++r) {
    for (std::size_t c = 0; c < m.object.width; ++c) {
      support(r + off.height, c + off.width) = m.support(r, c);
    }
  }

  ApResult out;
  RunReport& rep = out.report;
  ComplexField g = zero_pad_to(init, padded);
  ComplexField u = init;
  for (std::size_t k = 0; k < p.max_iters; ++k) {
    ComplexField gp = fft2(g);
    replace_magnitude(gp, I.planes[0]);
    ifft2_inplace(gp);
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (cdi_admissible(m, support[i] != 0, gp[i])) {
        g[i] = gp[i];
      } else {
        g[i] -= p.hio_beta * gp[i];
      }
    }
    ComplexField next = crop_center(gp, m.object);
    for (std::size_t i = 0; i < next.size(); ++i) {
      if (!m.support[i]) next[i] = 0.0;
    }
    apply_object_constraint(next, model);
    if (!all_finite(next) || !all_finite(g)) {
      throw DivergenceError("ap_solve(hio): non-finite iterate", u, k);
    }
    const double change = intensity_change(next, u);
    u = std::move(next);
    ++rep.iterations;
    rep.intensity_changes.push_back(change);
    rep.residuals.push_back(data_residual(u, model, I));
    trace_quality(rep, p, u);
    if (p.record_history) rep.history.push_back(u);
    if (change < p.tol) {
      rep.converged = true;
      break;
    }
  }
  out.field = std::move(u);
  rep.wall_seconds = std::chrono::duration<double>(Clock::now() - t0).count();
  return out;
}

}  // namespace

ApResult ap_solve(const MeasurementSet& I, const Model& m, const ComplexField& init,
                  const ApParams& p) {
  p.validate();
  require_consistent(I, m);
  if (dims_of(init) != object_dims(m)) {
    throw ArgumentError("ap_solve: init is " + to_string(dims_of(init)) + ", expected " +
                        to_string(object_dims(m)));
  }
  if (!all_finite(init)) throw ArgumentError("ap_solve: init must be finite");

  if (p.variant == ApVariant::hio) {
    const auto* cdi = std::get_if<CdiModel>(&m);
    if (!cdi) throw ArgumentError("ap_solve: HIO needs a support constraint (CDI only)");
    return solve_hio(I, *cdi, m, init, p);
  }

  const auto t0 = Clock::now();
  ApResult out;
  RunReport& rep = out.report;
  ComplexField u = init;
  for (std::size_t k = 0; k < p.max_iters; ++k) {
    Projection proj = project_with_residual(u, m, I);
    apply_object_constraint(proj.field, m);
    if (!all_finite(proj.field)) {
      throw DivergenceError("ap_solve: non-finite iterate", u, k);
    }
    // The projection measured the residual of u_k, i.e. of the previous
    // iteration's output.
    if (k > 0) rep.residuals.push_back(proj.input_residual);
    const double change = intensity_change(proj.field, u);
    u = std::move(proj.field);
    ++rep.iterations;
    rep.intensity_changes.push_back(change);
    trace_quality(rep, p, u);
    if (p.record_history) rep.history.push_back(u);
    if (change < p.tol) {
      rep.converged = true;
      break;
    }
  }
  rep.residuals.push_back(data_residual(u, m, I));
  out.field = std::move(u);
  rep.wall_seconds = std::chrono::duration<double>(Clock::now() - t0).count();
  return out;
}

namespace {

RealImage sqrt_clamped(const RealImage& I) {
  RealImage out(I.height(), I.width());
  for (std::size_t i = 0; i < I.size(); ++i) out[i] = std::sqrt(std::max(I[i], 0.0));
  return out;
}

// Bilinear resampling with pixel centers aligned (edge-clamped).
RealImage upsample_bilinear(const RealImage& in, Dims out_dims) {
  RealImage out(out_dims.height, out_dims.width);
  const double sy = double(in.height()) / double(out_dims.height);
  const double sx = double(in.width()) / double(out_dims.width);
  for (std::size_t r = 0; r < out_dims.height; ++r) {
    const double y = std::clamp((double(r) + 0.5) * sy - 0.5, 0.0, double(in.height() - 1));
    const std::size_t y0 = std::size_t(y);
    const std::size_t y1 = std::min(y0 + 1, in.height() - 1);
    const double fy = y - double(y0);
    for (std::size_t c = 0; c < out_dims.width; ++c) {
      const double x = std::clamp((double(c) + 0.5) * sx - 0.5, 0.0, double(in.width() - 1));
      const std::size_t x0 = std::size_t(x);
      const std::size_t x1 = std::min(x0 + 1, in.width() - 1);
      const double fx = x - double(x0);
      out(r, c) = (1 - fy) * ((1 - fx) * in(y0, x0) + fx * in(y0, x1)) +
                  fy * ((1 - fx) * in(y1, x0) + fx * in(y1, x1));
    }
  }
  return out;
}

}  // namespace

ComplexField default_init(const MeasurementSet& I, const Model& m, std::uint64_t /*seed*/) {
  require_consistent(I, m);
  if (const auto* cdi = std::get_if<CdiModel>(&m)) {
    ComplexField spec = to_complex(sqrt_clamped(I.planes[0]));
    ComplexField u = crop_center(ifft2(spec), cdi->object);
    for (std::size_t i = 0; i < u.size(); ++i) {
      if (!cdi->support[i]) u[i] = 0.0;
    }
    return u;
  }
  if (const auto* cdp = std::get_if<CdpModel>(&m)) {
    const Dims d = cdp->object();
    ComplexField acc(d.height, d.width);
    for (std::size_t l = 0; l < cdp->masks.size(); ++l) {
      ComplexField back = ifft2(to_complex(sqrt_clamped(I.planes[l])));
      for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += std::conj(cdp->masks[l][i]) * back[i];
    }
    const double inv = 1.0 / double(cdp->masks.size());
    for (auto& z : acc) z *= inv;
    return acc;
  }
  const auto& fpm = std::get<FpmModel>(m);
  // The LR image of a unit-amplitude object has amplitude equal to the
  // downsample factor under unitary transforms.
  RealImage amp = upsample_bilinear(sqrt_clamped(I.planes[fpm.center_led()]), fpm.hr);
  const double scale = 1.0 / double(fpm.downsample());
  for (auto& v : amp) v *= scale;
  return to_complex(amp);
}

PhaseAlignment global_phase_align(const ComplexField& est, const ComplexField& ref) {
  require_same_shape(est, ref, "global_phase_align");
  require_nonempty(est, "global_phase_align");
  cplx s = 0.0;
  for (std::size_t i = 0; i < est.size(); ++i) s += est[i] * std::conj(ref[i]);
  if (s == cplx(0.0)) return {est, 0.0, false};
  const double phi = std::arg(s);
  const cplx rot = std::polar(1.0, -phi);
  PhaseAlignment out{ComplexField(est.height(), est.width()), phi, true};
  for (std::size_t i = 0; i < est.size(); ++i) out.field[i] = est[i] * rot;
  return out;
}

}  // namespace lpr
