#pragma once

#include <cmath>
#include <fstream>
#include <random>

#include <doctest.h>
#include <json.hpp>

#include "lpr/field.hpp"

namespace lpr::test {

inline const nlohmann::json& oracles() {
  static const nlohmann::json j = [] {
    std::ifstream in(LPR_ORACLE_FILE);
    REQUIRE(in.good());
    return nlohmann::json::parse(in);
  }();
  return j;
}

// Closed-form inputs shared with tests/oracles/gen_oracles.py.
inline RealImage img_a(std::size_t h, std::size_t w) {
  RealImage a(h, w);
  for (std::size_t r = 0; r < h; ++r)
    for (std::size_t c = 0; c < w; ++c)
      a(r, c) = 0.5 + 0.4 * std::sin(0.37 * r + 0.91 * c + 0.013 * double(r * c));
  return a;
}

inline RealImage img_b(std::size_t h, std::size_t w) {
  RealImage b = img_a(h, w);
  for (std::size_t r = 0; r < h; ++r)
    for (std::size_t c = 0; c < w; ++c) b(r, c) += 0.1 * std::cos(1.3 * r - 0.7 * c);
  return b;
}

inline ComplexField field_z(std::size_t h, std::size_t w) {
  const RealImage a = img_a(h, w);
  ComplexField z(h, w);
  for (std::size_t r = 0; r < h; ++r)
    for (std::size_t c = 0; c < w; ++c)
      z(r, c) = std::polar(a(r, c), 0.21 * r - 0.17 * c + 0.02 * double(r * c));
  return z;
}

inline ComplexField mask_d(std::size_t h, std::size_t w, std::size_t l) {
  ComplexField d(h, w);
  for (std::size_t r = 0; r < h; ++r)
    for (std::size_t c = 0; c < w; ++c) {
      const double g = std::fmod(0.1234 * double(r * r) + 0.567 * c + 0.31 * double(l) * (r + 2.0 * c), 1.0);
      d(r, c) = std::polar(1.0, 2.0 * M_PI * g);
    }
  return d;
}

inline ComplexField random_field(Dims d, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  ComplexField f(d.height, d.width);
  for (auto& v : f) v = {g(rng), g(rng)};
  return f;
}

inline RealImage random_image(Dims d, std::uint64_t seed, double lo = 0.0, double hi = 1.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(lo, hi);
  RealImage f(d.height, d.width);
  for (auto& v : f) v = u(rng);
  return f;
}

inline double max_abs_diff(const ComplexField& a, const ComplexField& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

inline double max_abs_diff(const RealImage& a, const RealImage& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

inline double rel_err(const ComplexField& est, const ComplexField& ref) {
  double e = 0.0, n = 0.0;
  for (std::size_t i = 0; i < ref.size(); ++i) {
    e += std::norm(est[i] - ref[i]);
    n += std::norm(ref[i]);
  }
  return std::sqrt(e / n);
}

}  // namespace lpr::test
