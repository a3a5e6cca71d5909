#pragma once

#include "lpr/field.hpp"

namespace lpr {

/// Returned by psnr() when the two images are identical.
inline constexpr double kPsnrCap = 999.0;

/// 10*log10(peak^2 / MSE); kPsnrCap when MSE is zero.
double psnr(const RealImage& ref, const RealImage& test, double peak);
/// Peak taken as max(ref).
double psnr(const RealImage& ref, const RealImage& test);

struct SsimParams {
  int window = 11;
  double sigma = 1.5;
  double k1 = 0.01;
  double k2 = 0.03;
};

/// Mean SSIM over every fully-contained Gaussian window (no boundary
/// padding). `dynamic_range` is the L in C1 = (K1 L)^2, C2 = (K2 L)^2.
double ssim(const RealImage& ref, const RealImage& test, double dynamic_range,
            const SsimParams& params = {});
/// Dynamic range taken as max(ref).
double ssim(const RealImage& ref, const RealImage& test);

double mse(const RealImage& a, const RealImage& b);

/// Root-mean-square of the wrapped difference angle(exp(i(a-b))).
double wrapped_phase_rmse(const RealImage& a, const RealImage& b);

/// Wraps an angle into (-pi, pi].
double wrap_angle(double a);

}  // namespace lpr
