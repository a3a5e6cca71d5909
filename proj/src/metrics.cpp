#include "lpr/metrics.hpp"

#include <cmath>
#include <numbers>
#include <vector>

namespace lpr {

double mse(const RealImage& a, const RealImage& b) {
  require_same_shape(a, b, "mse");
  require_nonempty(a, "mse");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s / double(a.size());
}

double psnr(const RealImage& ref, const RealImage& test, double peak) {
  if (!(peak > 0.0)) throw ArgumentError("psnr: peak must be > 0");
  const double e = mse(ref, test);
  if (e == 0.0) return kPsnrCap;
  return std::min(kPsnrCap, 10.0 * std::log10(peak * peak / e));
}

double psnr(const RealImage& ref, const RealImage& test) {
  return psnr(ref, test, max_value(ref));
}

namespace {

std::vector<double> gaussian_taps(int window, double sigma) {
  std::vector<double> taps(window);
  const double c = 0.5 * (window - 1);
  double s = 0.0;
  for (int i = 0; i < window; ++i) {
    const double x = i - c;
    taps[i] = std::exp(-x * x / (2.0 * sigma * sigma));
    s += taps[i];
  }
  for (auto& t : taps) t /= s;
  return taps;
}

// Separable 'valid' correlation: output is (H-win+1) x (W-win+1).
RealImage filter_valid(const RealImage& in, const std::vector<double>& taps) {
  const std::size_t win = taps.size();
  const std::size_t oh = in.height() - win + 1, ow = in.width() - win + 1;
  RealImage rows(in.height(), ow);
  for (std::size_t r = 0; r < in.height(); ++r) {
    for (std::size_t c = 0; c < ow; ++c) {
      double s = 0.0;
      for (std::size_t k = 0; k < win; ++k) s += taps[k] * in(r, c + k);
      rows(r, c) = s;
    }
  }
  RealImage out(oh, ow);
  for (std::size_t r = 0; r < oh; ++r) {
    for (std::size_t c = 0; c < ow; ++c) {
      double s = 0.0;
      for (std::size_t k = 0; k < win; ++k) s += taps[k] * rows(r + k, c);
      out(r, c) = s;
    }
  }
  return out;
}

RealImage product(const RealImage& a, const RealImage& b) {
  RealImage out(a.height(), a.width());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] * b[i];
  return out;
}

}  // namespace

double ssim(const RealImage& ref, const RealImage& test, double dynamic_range,
            const SsimParams& params) {
  require_same_shape(ref, test, "ssim");
  require_nonempty(ref, "ssim");
  if (params.window < 1) throw ArgumentError("ssim: window must be >= 1");
  const std::size_t win = std::size_t(params.window);
  if (ref.height() < win || ref.width() < win) {
    throw ArgumentError("ssim: image smaller than the " + std::to_string(win) + "x" +
                        std::to_string(win) + " window");
  }
  if (!(dynamic_range > 0.0)) throw ArgumentError("ssim: dynamic range must be > 0");

  const auto taps = gaussian_taps(params.window, params.sigma);
  const double c1 = std::pow(params.k1 * dynamic_range, 2);
  const double c2 = std::pow(params.k2 * dynamic_range, 2);

  const RealImage mu_x = filter_valid(ref, taps);
  const RealImage mu_y = filter_valid(test, taps);
  const RealImage xx = filter_valid(product(ref, ref), taps);
  const RealImage yy = filter_valid(product(test, test), taps);
  const RealImage xy = filter_valid(product(ref, test), taps);

  double total = 0.0;
  for (std::size_t i = 0; i < mu_x.size(); ++i) {
    const double mx = mu_x[i], my = mu_y[i];
    const double vx = xx[i] - mx * mx;
    const double vy = yy[i] - my * my;
    const double cxy = xy[i] - mx * my;
    total += ((2.0 * mx * my + c1) * (2.0 * cxy + c2)) /
             ((mx * mx + my * my + c1) * (vx + vy + c2));
  }
  return total / double(mu_x.size());
}

double ssim(const RealImage& ref, const RealImage& test) {
  return ssim(ref, test, max_value(ref));
}

double wrap_angle(double a) {
  constexpr double pi = std::numbers::pi;
  double w = std::remainder(a, 2.0 * pi);
  if (w <= -pi) w += 2.0 * pi;
  return w;
}

double wrapped_phase_rmse(const RealImage& a, const RealImage& b) {
  require_same_shape(a, b, "wrapped_phase_rmse");
  require_nonempty(a, "wrapped_phase_rmse");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = wrap_angle(a[i] - b[i]);
    s += d * d;
  }
  return std::sqrt(s / double(a.size()));
}

}  // namespace lpr
