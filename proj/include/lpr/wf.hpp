#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "lpr/ap_solver.hpp"

namespace lpr {

enum class WfInit { spectral, adjoint };

std::string to_string(WfInit k);
WfInit wf_init_from_string(const std::string& s);

/// Plain Wirtinger flow on f(u) = 1/(2M) sum (|Au|^2 - I)^2. The start is
/// either the leading eigenvector of A^* diag(I) A (power iterations from a
/// seeded random field) or default_init, rescaled to the measured energy.
/// Step mu_t = min(1 - exp(-t / t0), mu_max) / ||u_0||^2.
struct WfParams {
  std::size_t max_iters = 2000;
  WfInit init = WfInit::spectral;
  std::size_t power_iters = 50;
  std::uint64_t seed = 0;
  double mu_max = 0.2;
  double t0 = 330.0;
  /// Stops when ||grad|| / ||u|| drops below this.
  double tol = 1e-12;
  bool record_history = false;
  std::optional<ComplexField> reference;

  void validate() const;
};

/// Wirtinger gradient d f / d conj(u), scaled as in the update rule.
ComplexField wf_gradient(const ComplexField& u, const Model& m, const MeasurementSet& I);

/// Power-method start, scaled so that ||Au||^2 matches sum(I).
ComplexField wf_spectral_init(const MeasurementSet& I, const Model& m, std::size_t iters,
                              std::uint64_t seed);

/// init: nullptr selects the start named by p.init.
ApResult wf_baseline(const MeasurementSet& I, const Model& m, const WfParams& p,
                     const ComplexField* init = nullptr);

}  // namespace lpr
