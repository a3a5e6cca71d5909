#include <filesystem>

#include "common.hpp"
#include "lpr/denoise.hpp"
#include "lpr/phantom.hpp"

using namespace lpr;
using namespace lpr::test;

namespace {

Enhancer make(EnhancerKind k, double s) {
  Enhancer e;
  e.kind = k;
  e.strength = s;
  return e;
}

std::string script(const char* name) { return std::string(LPR_BRIDGE_DIR) + "/" + name; }

// three flat blocks
RealImage blocks(Dims d) {
  RealImage x(d.height, d.width);
  for (std::size_t r = 0; r < d.height; ++r)
    for (std::size_t c = 0; c < d.width; ++c) x(r, c) = c < d.width / 3 ? 0.2 : (r < d.height / 2 ? 0.9 : 0.5);
  return x;
}

double region_var(const RealImage& x, std::size_t r0, std::size_t r1, std::size_t c0, std::size_t c1) {
  double s = 0, s2 = 0, n = 0;
  for (std::size_t r = r0; r < r1; ++r)
    for (std::size_t c = c0; c < c1; ++c) {
      s += x(r, c);
      s2 += x(r, c) * x(r, c);
      n += 1;
    }
  return s2 / n - (s / n) * (s / n);
}

}  // namespace

TEST_SUITE("denoise") {

TEST_CASE("identity is an exact no-op") {
  const RealImage x = random_image({16, 20}, 1);
  CHECK(enhance(x, make(EnhancerKind::identity, 0.0)) == x);
  const ComplexField z = random_field({16, 20}, 2);
  for (auto p : {ChannelPolicy::amp_phase, ChannelPolicy::real_imag, ChannelPolicy::amplitude_only})
    CHECK(enhance_complex(z, make(EnhancerKind::identity, 0.3), p) == z);
}

TEST_CASE("tv lowers the objective and flattens flat regions") {
  const Dims d{96, 96};
  const RealImage clean = blocks(d);
  const double sigma = 0.1;
  RealImage noisy = clean;
  const RealImage n = gaussian_noise(d, sigma, 3);
  for (std::size_t i = 0; i < noisy.size(); ++i) noisy[i] += n[i];
  const RealImage out = enhance(noisy, make(EnhancerKind::tv, sigma));
  CHECK(tv_objective(out, noisy, sigma) <= tv_objective(noisy, noisy, sigma));
  // interior of the left block
  CHECK(region_var(out, 8, 88, 4, 28) <= 0.5 * region_var(noisy, 8, 88, 4, 28));
}

TEST_CASE("tv_denoise at zero weight is the identity") {
  const RealImage x = random_image({12, 12}, 4);
  CHECK(max_abs_diff(tv_denoise(x, 0.0), x) < 1e-15);
  CHECK(total_variation(RealImage(5, 5, 2.0)) == 0.0);
}

TEST_CASE("large gaussian strength tends to the mean plane") {
  const RealImage x = random_image({32, 32}, 5, 0.2, 1.0);
  const RealImage out = enhance(x, make(EnhancerKind::gaussian, 100.0));
  const double m = mean(x);
  for (double v : out) CHECK(std::abs(v - m) <= 0.01 * m);
}

TEST_CASE("gaussian blur and median match scipy") {
  const auto& o = oracles();
  const auto& probes = o["probes"];
  const RealImage a = img_a(32, 40);
  for (const char* key : {"gaussian_1.5", "gaussian_2.0"}) {
    const RealImage g = gaussian_blur(a, o[key]["sigma"].get<double>());
    for (std::size_t k = 0; k < probes.size(); ++k)
      CHECK(std::abs(g(probes[k][0], probes[k][1]) - o[key]["values"][k].get<double>()) < 1e-12);
  }
  const RealImage m = median_filter(a, 2);
  for (std::size_t k = 0; k < probes.size(); ++k)
    CHECK(m(probes[k][0], probes[k][1]) == o["median_r2"]["values"][k].get<double>());
}

TEST_CASE("channel policies") {
  // non-negative real field: the phase plane is zero and stays zero
  const RealImage amp = random_image({24, 24}, 6, 0.1, 1.0);
  const Enhancer tv = make(EnhancerKind::tv, 0.05);
  const ComplexField out = enhance_complex(to_complex(amp), tv, ChannelPolicy::amp_phase);
  CHECK(max_abs_diff(out, to_complex(enhance(amp, tv))) < 1e-15);

  const ComplexField z = random_field({24, 24}, 7);
  const ComplexField a = enhance_complex(z, tv, ChannelPolicy::amplitude_only);
  const RealImage want = enhance(abs(z), tv);
  for (std::size_t i = 0; i < z.size(); ++i) {
    CHECK(std::abs(std::arg(a[i]) - std::arg(z[i])) < 1e-14);
    CHECK(std::abs(std::abs(a[i]) - std::max(want[i], 0.0)) < 1e-14);
  }
  const ComplexField ri = enhance_complex(z, tv, ChannelPolicy::real_imag);
  CHECK(max_abs_diff(real(ri), enhance(real(z), tv)) == 0.0);
  CHECK(max_abs_diff(imag(ri), enhance(imag(z), tv)) == 0.0);
}

TEST_CASE("tile starts cover the extent") {
  CHECK(tile_starts(100, 40, 10) == std::vector<std::size_t>{0, 30, 60});
  CHECK(tile_starts(64, 64, 16) == std::vector<std::size_t>{0});
  CHECK(tile_starts(30, 64, 16) == std::vector<std::size_t>{0});
  CHECK_THROWS_AS(tile_starts(100, 16, 16), ArgumentError);
}

TEST_CASE("tiled tv stays close to untiled on 512x512") {
  const Dims d{512, 512};
  RealImage x = make_pattern("phantom", d, 3, 0.0, 1.0);
  const RealImage n = gaussian_noise(d, 0.05, 4);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] += n[i];
  Enhancer e = make(EnhancerKind::tv, 0.05);
  const RealImage whole = enhance(x, e);
  e.tile = {128, 128};
  e.tile_overlap = 16;
  const RealImage tiled = enhance(x, e);
  const double range = max_value(whole) - min_value(whole);
  CHECK(max_abs_diff(tiled, whole) < 1e-3 * range);
}

TEST_CASE("tiling a smooth filter is exact away from seams") {
  const RealImage x = random_image({100, 90}, 8);
  Enhancer e = make(EnhancerKind::median, 0.1);  // radius 1
  const RealImage whole = enhance(x, e);
  e.tile = {40, 40};
  e.tile_overlap = 12;
  CHECK(max_abs_diff(enhance(x, e), whole) < 1e-12);
}

TEST_CASE("external bridge: echo, box blur, failures") {
  const RealImage x = random_image({20, 24}, 9);
  const RealImage echo = external_bridge(x, script("copy.sh"), 0.1);
  CHECK(max_abs_diff(echo, x) < 1e-7);  // float32 transport

  // in-process 3x3 box blur, half-sample symmetric boundary
  RealImage box(20, 24);
  const auto at = [&](long r, long c) {
    r = r < 0 ? -r - 1 : (r >= 20 ? 39 - r : r);
    c = c < 0 ? -c - 1 : (c >= 24 ? 47 - c : c);
    return x(std::size_t(r), std::size_t(c));
  };
  for (long r = 0; r < 20; ++r)
    for (long c = 0; c < 24; ++c) {
      double s = 0;
      for (long dr = -1; dr <= 1; ++dr)
        for (long dc = -1; dc <= 1; ++dc) s += at(r + dr, c + dc);
      box(r, c) = s / 9.0;
    }
  const RealImage blurred = external_bridge(x, "python3 " + script("box3.py"), 0.1);
  CHECK(max_abs_diff(blurred, box) < 1e-6);

  CHECK_THROWS_AS(external_bridge(x, script("fail.sh"), 0.1), BridgeError);
  const auto t0 = std::chrono::steady_clock::now();
  CHECK_THROWS_AS(external_bridge(x, script("sleep.sh"), 0.1, std::chrono::milliseconds(300)), BridgeError);
  CHECK(std::chrono::steady_clock::now() - t0 < std::chrono::seconds(5));
}

TEST_CASE("enhancer validation") {
  Enhancer e = make(EnhancerKind::tv, -1.0);
  CHECK_THROWS(e.validate());
  e = make(EnhancerKind::external, 0.1);
  CHECK_THROWS(e.validate());  // no bridge
  CHECK_THROWS_AS(enhance(RealImage(4, 4, NAN), make(EnhancerKind::tv, 0.1)), ArgumentError);
}

}  // TEST_SUITE
