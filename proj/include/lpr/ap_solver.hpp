#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "lpr/models.hpp"

namespace lpr {

/// A solver produced a non-finite iterate. Carries the last finite one.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(const std::string& what, ComplexField last_finite, std::size_t iteration)
      : std::runtime_error(what), last_finite_(std::move(last_finite)), iteration_(iteration) {}

  const ComplexField& last_finite() const noexcept { return last_finite_; }
  std::size_t iteration() const noexcept { return iteration_; }

 private:
  ComplexField last_finite_;
  std::size_t iteration_;
};

enum class ApVariant { error_reduction, hio };

std::string to_string(ApVariant v);
ApVariant ap_variant_from_string(const std::string& s);

struct ApParams {
  std::size_t max_iters = 300;
  double tol = 1e-6;
  ApVariant variant = ApVariant::error_reduction;
  double hio_beta = 0.9;
  /// Keep every iterate u_1..u_n in RunReport::history.
  bool record_history = false;
  /// When set, amplitude PSNR/SSIM against |reference| are traced.
  std::optional<ComplexField> reference;

  void validate() const;
};

/// Iteration budgets from the desk-scale convergence study.
ApParams default_ap_params(Modality m);

struct RunReport {
  std::size_t iterations = 0;
  /// residuals[k] = ||I - |A u_{k+1}|^2|| / ||I||
  std::vector<double> residuals;
  /// Normalized mean absolute intensity change between u_{k+1} and u_k.
  std::vector<double> intensity_changes;
  std::vector<double> psnr;
  std::vector<double> ssim;
  std::vector<ComplexField> history;
  double wall_seconds = 0.0;
  bool converged = false;
};

/// sum | |a|^2 - |b|^2 | / sum |b|^2 (zero when both are zero).
double intensity_change(const ComplexField& a, const ComplexField& b);

/// Object-domain constraint applied after each magnitude projection. Identity
/// for CDP and FPM; support is already enforced inside the CDI projection, so
/// only the optional realness/nonnegativity flags act here.
void apply_object_constraint(ComplexField& u, const Model& m);

struct ApResult {
  ComplexField field;
  RunReport report;
};

/// Alternating projections: u_{k+1} = C(P(u_k)), or the hybrid input-output
/// update outside the support (CDI only). Stops after max_iters or when the
/// intensity change drops below tol.
ApResult ap_solve(const MeasurementSet& I, const Model& m, const ComplexField& init,
                  const ApParams& p);

/// Adjoint-style initializer:
///  - CDI: ifft2(sqrt(I)) cropped to the object and masked by the support
///    (the zero-phase peak wraps to the corners and is cropped away);
///  - CDP: mean over masks of conj(d_l) * ifft2(sqrt(I_l));
///  - FPM: bilinear upsampling of the center-LED amplitude, zero phase.
/// Deterministic; the seed is accepted for interface stability and only
/// feeds randomized variants.
ComplexField default_init(const MeasurementSet& I, const Model& m, std::uint64_t seed = 0);

struct PhaseAlignment {
  ComplexField field;
  double phase = 0.0;
  bool aligned = true;  // false when sum(est * conj(ref)) == 0
};

/// est * exp(-i phi*), phi* = arg(sum est * conj(ref)).
PhaseAlignment global_phase_align(const ComplexField& est, const ComplexField& ref);

}  // namespace lpr
