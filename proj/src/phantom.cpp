#include "lpr/phantom.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "lpr/denoise.hpp"

namespace lpr {

namespace {

void rescale(RealImage& img, double lo, double hi) {
  const double mn = min_value(img), mx = max_value(img);
  const double span = mx > mn ? mx - mn : 1.0;
  for (auto& v : img) v = lo + (hi - lo) * (v - mn) / span;
}

}  // namespace

RealImage make_phantom(const PhantomSpec& spec) {
  const std::size_t h = spec.dims.height, w = spec.dims.width;
  RealImage img(h, w);
  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);

  const double gx = uni(rng) - 0.5, gy = uni(rng) - 0.5;
  for (std::size_t r = 0; r < h; ++r) {
    for (std::size_t c = 0; c < w; ++c) {
      img(r, c) = 0.4 + 0.3 * (gx * double(c) / double(w) + gy * double(r) / double(h));
    }
  }

  const double scale = double(std::min(h, w));
  for (std::size_t e = 0; e < spec.ellipses; ++e) {
    const double cy = uni(rng) * double(h), cx = uni(rng) * double(w);
    const double ay = (0.04 + 0.2 * uni(rng)) * scale, ax = (0.04 + 0.2 * uni(rng)) * scale;
    const double th = uni(rng) * std::numbers::pi;
    const double level = uni(rng) - 0.5;
    const double ct = std::cos(th), st = std::sin(th);
    for (std::size_t r = 0; r < h; ++r) {
      for (std::size_t c = 0; c < w; ++c) {
        const double dy = double(r) - cy, dx = double(c) - cx;
        const double u = (ct * dx + st * dy) / ax, v = (-st * dx + ct * dy) / ay;
        if (u * u + v * v <= 1.0) img(r, c) += level;
      }
    }
  }

  for (std::size_t b = 0; b < spec.blobs; ++b) {
    const double cy = uni(rng) * double(h), cx = uni(rng) * double(w);
    const double s = (0.03 + 0.1 * uni(rng)) * scale;
    const double amp = 0.8 * (uni(rng) - 0.5);
    for (std::size_t r = 0; r < h; ++r) {
      for (std::size_t c = 0; c < w; ++c) {
        const double dy = double(r) - cy, dx = double(c) - cx;
        img(r, c) += amp * std::exp(-(dx * dx + dy * dy) / (2 * s * s));
      }
    }
  }

  if (spec.texture > 0.0) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    RealImage tex(h, w);
    for (auto& v : tex) v = gauss(rng);
    tex = gaussian_blur(tex, 1.0);
    const double rms = std::sqrt(mean_square(tex));
    for (std::size_t i = 0; i < img.size(); ++i) img[i] += spec.texture * tex[i] / rms;
  }

  rescale(img, spec.lo, spec.hi);
  return img;
}

RealImage make_pattern(const std::string& name, Dims dims, std::uint64_t seed, double lo,
                       double hi) {
  if (name == "phantom") {
    PhantomSpec s;
    s.dims = dims;
    s.seed = seed;
    s.lo = lo;
    s.hi = hi;
    return make_phantom(s);
  }
  RealImage img(dims.height, dims.width);
  if (name == "checker") {
    const std::size_t cell = std::max<std::size_t>(1, std::min(dims.height, dims.width) / 8);
    for (std::size_t r = 0; r < dims.height; ++r) {
      for (std::size_t c = 0; c < dims.width; ++c) {
        img(r, c) = ((r / cell + c / cell) % 2) ? hi : lo;
      }
    }
    return img;
  }
  if (name == "rings") {
    const double cy = 0.5 * double(dims.height), cx = 0.5 * double(dims.width);
    const double period = double(std::min(dims.height, dims.width)) / 6.0;
    for (std::size_t r = 0; r < dims.height; ++r) {
      for (std::size_t c = 0; c < dims.width; ++c) {
        const double d = std::hypot(double(r) - cy, double(c) - cx);
        img(r, c) = lo + (hi - lo) * 0.5 * (1.0 + std::cos(2.0 * std::numbers::pi * d / period));
      }
    }
    return img;
  }
  if (name == "random_complex") {
    const ComplexField z = random_complex(dims, seed);
    for (std::size_t i = 0; i < img.size(); ++i) img[i] = std::abs(z[i]);
    return img;
  }
  throw ArgumentError("unknown pattern '" + name + "'");
}

ComplexField random_complex(Dims dims, std::uint64_t seed) {
  ComplexField z(dims.height, dims.width);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (auto& v : z) {
    const double re = gauss(rng);
    v = {re, gauss(rng)};
  }
  return z;
}

}  // namespace lpr
