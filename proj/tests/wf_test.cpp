#include "common.hpp"
#include "lpr/metrics.hpp"
#include "lpr/phantom.hpp"
#include "lpr/wf.hpp"

using namespace lpr;
using namespace lpr::test;

namespace {

double misfit(const ComplexField& u, const Model& m, const MeasurementSet& I) {
  const MeasurementSet y = forward(u, m);
  double s = 0.0;
  for (std::size_t l = 0; l < y.planes.size(); ++l)
    for (std::size_t i = 0; i < y.planes[l].size(); ++i) s += std::pow(y.planes[l][i] - I.planes[l][i], 2);
  return s;
}

}  // namespace

TEST_SUITE("wf") {

TEST_CASE("gradient vanishes at the truth and matches finite differences") {
  const ComplexField u = random_complex({16, 16}, 3);
  const Model m = CdpModel::gaussian_phase({16, 16}, 3, 4);
  const MeasurementSet I = forward(u, m);
  CHECK(norm(wf_gradient(u, m, I)) / norm(u) < 1e-8);

  // sum (|Av|^2 - I)^2 has directional derivative 4 Re<A^*[(|Av|^2-I) Av], d>;
  // wf_gradient carries an extra P^2/M
  const ComplexField v = random_complex({16, 16}, 5);
  const ComplexField d = random_complex({16, 16}, 6);
  const double scale = 256.0 * 256.0 / (3.0 * 256.0);
  const ComplexField g = wf_gradient(v, m, I);
  double analytic = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) analytic += 4.0 * std::real(std::conj(g[i]) * d[i]) / scale;
  const double eps = 1e-6;
  ComplexField vp = v, vm = v;
  for (std::size_t i = 0; i < v.size(); ++i) {
    vp[i] += eps * d[i];
    vm[i] -= eps * d[i];
  }
  const double numeric = (misfit(vp, m, I) - misfit(vm, m, I)) / (2.0 * eps);
  CHECK(numeric == doctest::Approx(analytic).epsilon(1e-5));
}

TEST_CASE("spectral init carries the measured energy and correlates with the truth") {
  const ComplexField u = random_complex({32, 32}, 8);
  const Model m = CdpModel::gaussian_phase({32, 32}, 5, 9);
  const MeasurementSet I = forward(u, m);
  const ComplexField z = wf_spectral_init(I, m, 50, 1);
  double total = 0.0, model = 0.0;
  const MeasurementSet y = forward(z, m);
  for (std::size_t l = 0; l < I.planes.size(); ++l)
    for (std::size_t i = 0; i < I.planes[l].size(); ++i) {
      total += I.planes[l][i];
      model += y.planes[l][i];
    }
  CHECK(model == doctest::Approx(total).epsilon(1e-9));
  std::complex<double> ip = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) ip += std::conj(u[i]) * z[i];
  CHECK(std::abs(ip) / (norm(u) * norm(z)) > 0.6);
  CHECK(max_abs_diff(z, wf_spectral_init(I, m, 50, 1)) == 0.0);
}

TEST_CASE("five masks, noiseless: exact recovery") {
  const ComplexField u = random_complex({32, 32}, 10);
  const Model m = CdpModel::gaussian_phase({32, 32}, 5, 11);
  const MeasurementSet I = forward(u, m);
  WfParams p;
  p.max_iters = 2500;
  const ApResult r = wf_baseline(I, m, p);
  const ComplexField a = global_phase_align(r.field, u).field;
  CHECK(rel_err(a, u) < 1e-3);
  CHECK(r.report.residuals.back() < 1e-6);
}

TEST_CASE("single mask fails to recover") {
  const Dims d{64, 64};
  const ComplexField u = to_complex(make_pattern("phantom", d, 7, 0.1, 1.0));
  const Model m = CdpModel::gaussian_phase(d, 1, 12);
  WfParams p;
  p.max_iters = 500;
  const ApResult r = wf_baseline(forward(u, m), m, p);
  CHECK(psnr(abs(u), abs(r.field)) < 15.0);
}

TEST_CASE("truth start stays put, validation") {
  const ComplexField u = random_complex({16, 16}, 13);
  const Model m = CdpModel::gaussian_phase({16, 16}, 4, 14);
  WfParams p;
  p.max_iters = 20;
  const ApResult r = wf_baseline(forward(u, m), m, p, &u);
  CHECK(max_abs_diff(r.field, u) < 1e-8);
  p.mu_max = 0.0;
  CHECK_THROWS_AS(p.validate(), ArgumentError);
  CHECK(wf_init_from_string(to_string(WfInit::adjoint)) == WfInit::adjoint);
}

}  // TEST_SUITE
