#include "common.hpp"
#include "lpr/lpr_solver.hpp"
#include "lpr/metrics.hpp"
#include "lpr/phantom.hpp"

using namespace lpr;
using namespace lpr::test;

namespace {

Enhancer tv() {
  Enhancer e;
  e.kind = EnhancerKind::tv;
  return e;
}

}  // namespace

TEST_SUITE("lpr") {

TEST_CASE("parameter validation") {
  LprParams p;
  p.outer_max = 0;
  CHECK_THROWS_AS(p.validate(), ArgumentError);
  p = {};
  p.inner_ap_iters = 0;
  CHECK_THROWS_AS(p.validate(), ArgumentError);
  p = {};
  p.strength_schedule = {0.1, 0.2};
  CHECK_THROWS_AS(p.validate(), ArgumentError);
  p.strength_schedule = {0.1, -0.1};
  CHECK_THROWS_AS(p.validate(), ArgumentError);
  p = {};
  p.init.kind = InitKind::provided;
  CHECK_THROWS_AS(p.validate(), ArgumentError);
  p = {};
  p.schedule_decay = 0.5;
  CHECK_THROWS_AS(p.validate(), ArgumentError);
}

TEST_CASE("geometric schedule") {
  const auto s = geometric_schedule(1.0, 0.01, 3);
  REQUIRE(s.size() == 3);
  CHECK(s[0] == 1.0);
  CHECK(s[1] == doctest::Approx(0.1));
  CHECK(s[2] == 0.01);
  const auto z = geometric_schedule(0.5, 0.0, 4);
  CHECK(z == std::vector<double>{0.5, 0.5, 0.5, 0.0});
  CHECK(geometric_schedule(1.0, 1.0, 0).empty());
}

TEST_CASE("blind noise estimate on white noise") {
  const RealImage n = gaussian_noise({256, 256}, 0.3, 4);
  CHECK(estimate_noise_sigma(n) == doctest::Approx(0.3).epsilon(0.03));
  CHECK(estimate_noise_sigma(RealImage(16, 16, 1.0)) == 0.0);
}

TEST_CASE("identity enhancer reproduces AP iterate by iterate") {
  const ComplexField u = random_complex({32, 32}, 1);
  const Model m = CdpModel::gaussian_phase({32, 32}, 3, 2);
  const MeasurementSet I = add_wgn(forward(u, m), {25.0, 1});
  const ComplexField init = default_init(I, m);

  ApParams ap;
  ap.max_iters = 40;
  ap.record_history = true;
  const ApResult a = ap_solve(I, m, init, ap);

  Enhancer id;
  LprParams p;
  p.outer_max = 40;
  p.inner_ap_iters = 1;
  p.tol = ap.tol;
  p.record_history = true;
  p.init.kind = InitKind::provided;
  p.init.field = init;
  const LprResult l = lpr_solve(I, m, id, p);
  REQUIRE(l.trace.history.size() == a.report.history.size());
  for (std::size_t k = 0; k < a.report.history.size(); ++k)
    CHECK(rel_err(l.trace.history[k], a.report.history[k]) <= 1e-12);
  REQUIRE(l.trace.residuals.size() == a.report.residuals.size());
  for (std::size_t k = 0; k < a.report.residuals.size(); ++k)
    CHECK(l.trace.residuals[k] == doctest::Approx(a.report.residuals[k]).epsilon(1e-12));
}

TEST_CASE("noiseless recovery survives a schedule ending at zero") {
  const Dims d{64, 64};
  const ComplexField u = to_complex(make_pattern("phantom", d, 7, 0.1, 1.0));
  const Model m = CdpModel::gaussian_phase(d, 5, 11);
  const MeasurementSet I = forward(u, m);

  LprParams p = default_lpr_params(Modality::cdp);
  p.outer_max = 400;
  p.tol = 1e-14;
  p.strength_schedule = geometric_schedule(0.05, 0.0, 20);  // then zero
  const LprResult l = lpr_solve(I, m, tv(), p);
  const double lpr_db = psnr(abs(u), abs(global_phase_align(l.field, u).field));

  ApParams ap;
  ap.max_iters = p.init.warmstart_iters + p.outer_max * p.inner_ap_iters;
  ap.tol = 1e-14;
  const ApResult a = ap_solve(I, m, default_init(I, m), ap);
  const double ap_db = psnr(abs(u), abs(global_phase_align(a.field, u).field));
  CHECK(lpr_db >= 45.0);
  CHECK(lpr_db >= std::min(ap_db, 100.0) - 3.0);
}

TEST_CASE("residual diagnostics") {
  const Dims d{64, 64};
  const ComplexField u = to_complex(make_pattern("phantom", d, 3, 0.1, 1.0));
  const Model m = CdpModel::gaussian_phase(d, 5, 4);
  const MeasurementSet clean = forward(u, m);

  LprParams p = default_lpr_params(Modality::cdp);
  p.outer_max = 400;
  p.tol = 1e-14;
  p.strength_schedule = geometric_schedule(0.02, 0.0, 20);
  const LprResult exact = lpr_solve(clean, m, tv(), p);
  CHECK(gap_vs_admm_residual(exact.trace).final_residual < 1e-6);
  CHECK(gap_vs_admm_residual(exact.trace, 1e-6).iterations_to_threshold.has_value());

  // the measurement-constraint residual settles near ||w|| / ||I||
  const MeasurementSet noisy = add_wgn(clean, {20.0, 9});
  double wn = 0.0, in = 0.0;
  for (std::size_t l = 0; l < clean.planes.size(); ++l)
    for (std::size_t i = 0; i < clean.planes[l].size(); ++i) {
      wn += std::pow(noisy.planes[l][i] - clean.planes[l][i], 2);
      in += noisy.planes[l][i] * noisy.planes[l][i];
    }
  const double floor = std::sqrt(wn / in);
  const LprResult r = lpr_solve(noisy, m, tv(), default_lpr_params(Modality::cdp));
  const double fin = gap_vs_admm_residual(r.trace).final_residual;
  CHECK(fin <= 3.0 * floor);
  CHECK(fin >= floor / 3.0);
  CHECK_THROWS_AS(gap_vs_admm_residual(LprTrace{}), ArgumentError);
}

TEST_CASE("trace bookkeeping and defaults") {
  const ComplexField u = random_complex({32, 32}, 2);
  const Model m = CdpModel::gaussian_phase({32, 32}, 2, 3);
  const MeasurementSet I = add_wgn(forward(u, m), {15.0, 2});
  LprParams p;
  p.outer_max = 7;
  p.tol = 1e-14;
  p.strength_schedule = {0.3, 0.2};
  p.reference = u;
  const LprResult r = lpr_solve(I, m, tv(), p);
  CHECK(r.trace.iterations == 7);
  CHECK(r.trace.strengths == std::vector<double>{0.3, 0.2, 0.2, 0.2, 0.2, 0.2, 0.2});
  CHECK(r.trace.residuals.size() == 7);
  CHECK(r.trace.psnr.size() == 7);
  CHECK(r.trace.ssim.size() == 7);

  p.strength_schedule.clear();
  const LprResult auto_s = lpr_solve(I, m, tv(), p);
  REQUIRE(auto_s.trace.schedule.size() == 7);
  CHECK(auto_s.trace.schedule.front() == doctest::Approx(auto_s.trace.schedule.back() * p.schedule_decay));

  CHECK(default_lpr_params(Modality::fpm).inner_ap_iters == 1);
  CHECK_NOTHROW(default_lpr_params(Modality::cdi).validate());
}

TEST_CASE("adjoint init and fixed point") {
  const ComplexField u = random_complex({16, 16}, 4);
  const Model m = CdpModel::gaussian_phase({16, 16}, 4, 5);
  const MeasurementSet I = forward(u, m);
  LprParams p;
  p.outer_max = 3;
  p.init.kind = InitKind::provided;
  p.init.field = u;
  p.strength_schedule = {0.0};
  const LprResult r = lpr_solve(I, m, tv(), p);
  CHECK(max_abs_diff(r.field, u) < 1e-8);
  p.init = {};
  p.init.kind = InitKind::adjoint;
  CHECK_NOTHROW(lpr_solve(I, m, tv(), p));
}

}  // TEST_SUITE
