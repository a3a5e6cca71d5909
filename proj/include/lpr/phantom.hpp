#pragma once

#include <cstdint>
#include <string>

#include "lpr/field.hpp"

namespace lpr {

/// Procedural stand-ins for natural images: a smooth background, overlapping
/// ellipses of constant brightness, soft Gaussian blobs and a little band-
/// limited texture. Values are rescaled into [lo, hi].
struct PhantomSpec {
  Dims dims{256, 256};
  std::uint64_t seed = 1;
  std::size_t ellipses = 24;
  std::size_t blobs = 6;
  double texture = 0.05;
  double lo = 0.1;
  double hi = 1.0;
};

RealImage make_phantom(const PhantomSpec& spec);

/// Named patterns accepted in experiment configs: "phantom", "checker",
/// "rings", "random_complex" (amplitude only; phase handled by the caller).
RealImage make_pattern(const std::string& name, Dims dims, std::uint64_t seed, double lo = 0.1,
                       double hi = 1.0);

/// i.i.d. complex Gaussian samples, unit variance per component.
ComplexField random_complex(Dims dims, std::uint64_t seed);

}  // namespace lpr
