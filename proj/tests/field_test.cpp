#include "common.hpp"
#include "lpr/field.hpp"

using namespace lpr;
using namespace lpr::test;

TEST_SUITE("field") {

TEST_CASE("plane rejects empty and overflowing dims") {
  CHECK_THROWS_AS(RealImage(0, 4), SizeError);
  CHECK_THROWS_AS(RealImage(4, 0), SizeError);
  CHECK_THROWS_AS(ComplexField(SIZE_MAX / 2, 4), SizeError);
  RealImage a(3, 5, 2.0);
  CHECK(a.size() == 15);
  CHECK(a(2, 4) == 2.0);
}

TEST_CASE("fft2 of a constant is a DC spike of c*N") {
  const std::size_t n = 8;
  ComplexField f(n, n, cplx(0.5, -0.25));
  const ComplexField F = fft2(f);
  CHECK(std::abs(F(0, 0) - cplx(0.5, -0.25) * double(n)) < 1e-12);
  double rest = 0.0;
  for (std::size_t i = 1; i < F.size(); ++i) rest += std::abs(F[i]);
  CHECK(rest < 1e-12);
}

TEST_CASE("fft2 round trip and Parseval") {
  const ComplexField x = random_field({16, 16}, 1);
  CHECK(max_abs_diff(ifft2(fft2(x)), x) < 1e-10);

  const ComplexField y = random_field({64, 64}, 2);
  double direct = 0.0;
  for (auto v : y) direct += std::norm(v);
  double spec = 0.0;
  for (auto v : fft2(y)) spec += std::norm(v);
  CHECK(std::abs(spec - direct) / direct < 1e-9);
}

TEST_CASE("fft2 matches the numpy oracle") {
  const auto& o = oracles()["fft2"];
  const ComplexField F = fft2(field_z(o["dims"][0], o["dims"][1]));
  const auto& probes = oracles()["probes"];
  for (std::size_t k = 0; k < probes.size(); ++k) {
    const cplx want(o["values"][k][0], o["values"][k][1]);
    CHECK(std::abs(F(probes[k][0], probes[k][1]) - want) < 1e-12);
  }
  CHECK(energy(F) == doctest::Approx(o["energy"].get<double>()).epsilon(1e-12));
}

TEST_CASE("fft2 handles non-square and odd sizes") {
  const ComplexField x = random_field({7, 12}, 3);
  const ComplexField F = fft2(x);
  // direct DFT at one bin
  const std::size_t kr = 3, kc = 5;
  cplx s = 0.0;
  for (std::size_t r = 0; r < 7; ++r)
    for (std::size_t c = 0; c < 12; ++c)
      s += x(r, c) * std::polar(1.0, -2.0 * M_PI * (double(kr * r) / 7.0 + double(kc * c) / 12.0));
  CHECK(std::abs(F(kr, kc) - s / std::sqrt(84.0)) < 1e-12);
  CHECK(max_abs_diff(ifft2(F), x) < 1e-12);
}

TEST_CASE("fftshift and ifftshift are inverse on odd dims") {
  const ComplexField x = random_field({5, 6}, 4);
  CHECK(ifftshift(fftshift(x)) == x);
  CHECK(fftshift(x)(2, 3) == x(0, 0));
}

TEST_CASE("zero_pad / crop_center") {
  const ComplexField x = random_field({9, 6}, 5);
  CHECK(zero_pad(x, 1.0, 1.0) == x);
  const ComplexField p = zero_pad(x, 2.0, 2.0);
  CHECK(p.height() == 18);
  CHECK(p.width() == 12);
  CHECK(crop_center(p, dims_of(x)) == x);
  CHECK(energy(p) == doctest::Approx(energy(x)));
  CHECK_THROWS_AS(zero_pad(x, 0.5, 2.0), ArgumentError);
}

TEST_CASE("zero_pad dims for a 1356x2040 frame") {
  // the 2x pad of a 1356x2040 frame, checked on the size rule only
  const ComplexField x(1356, 2040);
  const ComplexField p = zero_pad(x, 2.0, 2.0);
  CHECK(p.height() == 2712);
  CHECK(p.width() == 4080);
}

TEST_CASE("add_wgn calibration and determinism") {
  RealImage flat(512, 512, 3.0);
  const RealImage n1 = add_wgn(flat, {20.0, 9});
  const RealImage n2 = add_wgn(flat, {20.0, 9});
  CHECK(n1 == n2);
  double noise = 0.0;
  for (std::size_t i = 0; i < flat.size(); ++i) noise += std::pow(n1[i] - flat[i], 2);
  const double snr = 10.0 * std::log10(mean_square(flat) / (noise / double(flat.size())));
  CHECK(std::abs(snr - 20.0) < 0.1);

  const RealImage x = random_image({32, 32}, 6, 0.5, 1.0);
  const RealImage quiet = add_wgn(x, {300.0, 1});
  CHECK(max_abs_diff(quiet, x) / max_value(x) < 1e-9);
  CHECK_THROWS_AS(add_wgn(x, {NAN, 1}), ArgumentError);
  CHECK_THROWS_AS(add_wgn(x, {INFINITY, 1}), ArgumentError);
}

TEST_CASE("wgn_sigma closed form") {
  CHECK(wgn_sigma(4.0, 20.0) == doctest::Approx(0.2));
  CHECK(wgn_sigma(1.0, 0.0) == doctest::Approx(1.0));
}

}  // TEST_SUITE
