#include "lpr/field.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <random>
#include <tuple>

namespace lpr {

std::string to_string(Dims d) {
  return std::to_string(d.height) + "x" + std::to_string(d.width);
}

namespace {

template <typename F>
RealImage map_real(const ComplexField& f, F fn) {
  require_nonempty(f, "map_real");
  RealImage out(f.height(), f.width());
  for (std::size_t i = 0; i < f.size(); ++i) out[i] = fn(f[i]);
  return out;
}

// FFTW's planner is not re-entrant; execution with new-array execute is.
// Plans are created once per (h, w, sign) under a lock and never destroyed.
class PlanCache {
 public:
  static PlanCache& instance() {
    static PlanCache cache;
    return cache;
  }

  fftw_plan get(std::size_t h, std::size_t w, int sign) {
    std::lock_guard lock(mu_);
    auto key = std::make_tuple(h, w, sign);
    if (auto it = plans_.find(key); it != plans_.end()) return it->second;
    if (h > std::size_t(INT32_MAX) || w > std::size_t(INT32_MAX)) {
      throw SizeError("fft2: dimension exceeds FFT backend limits");
    }
    auto* buf = fftw_alloc_complex(h * w);
    if (buf == nullptr) throw SizeError("fft2: cannot allocate plan buffer");
    fftw_plan p = fftw_plan_dft_2d(int(h), int(w), buf, buf, sign, FFTW_ESTIMATE);
    fftw_free(buf);
    if (p == nullptr) throw SizeError("fft2: planner rejected " + std::to_string(h) + "x" +
                                      std::to_string(w));
    plans_.emplace(key, p);
    return p;
  }

 private:
  std::mutex mu_;
  std::map<std::tuple<std::size_t, std::size_t, int>, fftw_plan> plans_;
};

void transform(ComplexField& f, int sign) {
  require_nonempty(f, "fft2");
  fftw_plan plan = PlanCache::instance().get(f.height(), f.width(), sign);
  auto* ptr = reinterpret_cast<fftw_complex*>(f.data());
  fftw_execute_dft(plan, ptr, ptr);
  const double scale = 1.0 / std::sqrt(double(f.size()));
  for (auto& v : f) v *= scale;
}

}  // namespace

RealImage abs(const ComplexField& f) {
  return map_real(f, [](cplx z) { return std::abs(z); });
}
RealImage abs2(const ComplexField& f) {
  return map_real(f, [](cplx z) { return std::norm(z); });
}
RealImage arg(const ComplexField& f) {
  return map_real(f, [](cplx z) { return std::arg(z); });
}
RealImage real(const ComplexField& f) {
  return map_real(f, [](cplx z) { return z.real(); });
}
RealImage imag(const ComplexField& f) {
  return map_real(f, [](cplx z) { return z.imag(); });
}

ComplexField to_complex(const RealImage& re) {
  require_nonempty(re, "to_complex");
  ComplexField out(re.height(), re.width());
  for (std::size_t i = 0; i < re.size(); ++i) out[i] = re[i];
  return out;
}

ComplexField from_real_imag(const RealImage& re, const RealImage& im) {
  require_same_shape(re, im, "from_real_imag");
  require_nonempty(re, "from_real_imag");
  ComplexField out(re.height(), re.width());
  for (std::size_t i = 0; i < re.size(); ++i) out[i] = {re[i], im[i]};
  return out;
}

ComplexField from_polar(const RealImage& amplitude, const RealImage& phase) {
  require_same_shape(amplitude, phase, "from_polar");
  require_nonempty(amplitude, "from_polar");
  ComplexField out(amplitude.height(), amplitude.width());
  for (std::size_t i = 0; i < amplitude.size(); ++i) {
    out[i] = amplitude[i] * cplx(std::cos(phase[i]), std::sin(phase[i]));
  }
  return out;
}

double energy(const ComplexField& f) {
  double s = 0.0;
  for (const auto& z : f) s += std::norm(z);
  return s;
}

double norm(const ComplexField& f) { return std::sqrt(energy(f)); }

double sum(const RealImage& r) {
  double s = 0.0;
  for (double v : r) s += v;
  return s;
}

double mean(const RealImage& r) {
  require_nonempty(r, "mean");
  return sum(r) / double(r.size());
}

double mean_square(const RealImage& r) {
  require_nonempty(r, "mean_square");
  double s = 0.0;
  for (double v : r) s += v * v;
  return s / double(r.size());
}

double max_value(const RealImage& r) {
  require_nonempty(r, "max_value");
  return *std::max_element(r.begin(), r.end());
}

double min_value(const RealImage& r) {
  require_nonempty(r, "min_value");
  return *std::min_element(r.begin(), r.end());
}

bool all_finite(const ComplexField& f) {
  return std::all_of(f.begin(), f.end(), [](cplx z) {
    return std::isfinite(z.real()) && std::isfinite(z.imag());
  });
}

bool all_finite(const RealImage& r) {
  return std::all_of(r.begin(), r.end(), [](double v) { return std::isfinite(v); });
}

void fft2_inplace(ComplexField& f) { transform(f, FFTW_FORWARD); }
void ifft2_inplace(ComplexField& f) { transform(f, FFTW_BACKWARD); }

ComplexField fft2(const ComplexField& f) {
  ComplexField out = f;
  fft2_inplace(out);
  return out;
}

ComplexField ifft2(const ComplexField& f) {
  ComplexField out = f;
  ifft2_inplace(out);
  return out;
}

namespace {
template <typename T>
Plane<T> circshift(const Plane<T>& p, std::size_t dr, std::size_t dc) {
  require_nonempty(p, "fftshift");
  Plane<T> out(p.height(), p.width());
  const std::size_t h = p.height(), w = p.width();
  for (std::size_t r = 0; r < h; ++r) {
    const std::size_t rr = (r + dr) % h;
    for (std::size_t c = 0; c < w; ++c) out(rr, (c + dc) % w) = p(r, c);
  }
  return out;
}
}  // namespace

template <typename T>
Plane<T> fftshift(const Plane<T>& p) {
  return circshift(p, p.height() / 2, p.width() / 2);
}

template <typename T>
Plane<T> ifftshift(const Plane<T>& p) {
  return circshift(p, p.height() - p.height() / 2, p.width() - p.width() / 2);
}

template ComplexField fftshift(const ComplexField&);
template RealImage fftshift(const RealImage&);
template ComplexField ifftshift(const ComplexField&);
template RealImage ifftshift(const RealImage&);

Dims center_offset(Dims outer, Dims inner) {
  if (inner.height > outer.height || inner.width > outer.width) {
    throw ArgumentError("center_offset: inner block larger than outer block");
  }
  return {(outer.height - inner.height) / 2, (outer.width - inner.width) / 2};
}

ComplexField zero_pad_to(const ComplexField& f, Dims out) {
  require_nonempty(f, "zero_pad");
  const Dims off = center_offset(out, dims_of(f));
  ComplexField padded(out.height, out.width);
  for (std::size_t r = 0; r < f.height(); ++r) {
    std::copy_n(&f(r, 0), f.width(), &padded(r + off.height, off.width));
  }
  return padded;
}

ComplexField zero_pad(const ComplexField& f, double factor_h, double factor_w) {
  if (!(factor_h >= 1.0) || !(factor_w >= 1.0)) {
    throw ArgumentError("zero_pad: factors must be >= 1");
  }
  require_nonempty(f, "zero_pad");
  const auto grow = [](std::size_t n, double factor) {
    const double v = std::ceil(double(n) * factor);
    if (v > double(PTRDIFF_MAX)) throw SizeError("zero_pad: padded size overflow");
    return std::size_t(v);
  };
  return zero_pad_to(f, {grow(f.height(), factor_h), grow(f.width(), factor_w)});
}

template <typename T>
Plane<T> crop_center(const Plane<T>& f, Dims out) {
  require_nonempty(f, "crop_center");
  const Dims off = center_offset(dims_of(f), out);
  Plane<T> cropped(out.height, out.width);
  for (std::size_t r = 0; r < out.height; ++r) {
    std::copy_n(&f(r + off.height, off.width), out.width, &cropped(r, 0));
  }
  return cropped;
}

template ComplexField crop_center(const ComplexField&, Dims);
template RealImage crop_center(const RealImage&, Dims);

RealImage wgn_realization(const RealImage& i, const NoiseSpec& spec) {
  require_nonempty(i, "add_wgn");
  if (!std::isfinite(spec.snr_db)) throw ArgumentError("add_wgn: snr_db must be finite");
  if (!all_finite(i)) throw ArgumentError("add_wgn: input must be finite");
  return gaussian_noise(dims_of(i), wgn_sigma(mean_square(i), spec.snr_db), spec.seed);
}

double wgn_sigma(double ms, double snr_db) {
  if (!std::isfinite(snr_db)) throw ArgumentError("add_wgn: snr_db must be finite");
  return std::sqrt(ms / std::pow(10.0, snr_db / 10.0));
}

RealImage gaussian_noise(Dims dims, double sigma, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  RealImage n(dims.height, dims.width);
  for (auto& v : n) v = sigma * gauss(rng);
  return n;
}

RealImage add_wgn(const RealImage& i, const NoiseSpec& spec) {
  RealImage out = wgn_realization(i, spec);
  for (std::size_t k = 0; k < out.size(); ++k) out[k] += i[k];
  return out;
}

}  // namespace lpr
