#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <new>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace lpr {

using cplx = std::complex<double>;

struct SizeError : std::length_error {
  using std::length_error::length_error;
};

struct ArgumentError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// 64-byte aligned storage so FFTW can run its SIMD codelets on plane data
/// directly, without staging copies.
template <typename T>
struct AlignedAllocator {
  using value_type = T;
  static constexpr std::align_val_t kAlign{64};

  AlignedAllocator() noexcept = default;
  template <typename U>
  AlignedAllocator(const AlignedAllocator<U>&) noexcept {}

  T* allocate(std::size_t n) {
    return static_cast<T*>(::operator new(n * sizeof(T), kAlign));
  }
  void deallocate(T* p, std::size_t) noexcept { ::operator delete(p, kAlign); }

  template <typename U>
  bool operator==(const AlignedAllocator<U>&) const noexcept {
    return true;
  }
};

/// Dense row-major 2-D plane. A default-constructed plane is empty (0x0);
/// every public operation that consumes a plane rejects the empty state.
template <typename T>
class Plane {
 public:
  using value_type = T;
  using storage = std::vector<T, AlignedAllocator<T>>;

  Plane() = default;
  Plane(std::size_t height, std::size_t width, T fill = T{})
      : height_(height), width_(width) {
    if (height == 0 || width == 0) {
      throw SizeError("plane dimensions must be >= 1");
    }
    if (width > max_elements() / height) {
      throw SizeError("plane dimensions overflow addressable size");
    }
    data_.assign(height * width, fill);
  }

  std::size_t height() const noexcept { return height_; }
  std::size_t width() const noexcept { return width_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  T& operator()(std::size_t r, std::size_t c) noexcept {
    return data_[r * width_ + c];
  }
  const T& operator()(std::size_t r, std::size_t c) const noexcept {
    return data_[r * width_ + c];
  }
  T& operator[](std::size_t i) noexcept { return data_[i]; }
  const T& operator[](std::size_t i) const noexcept { return data_[i]; }

  std::span<T> values() noexcept { return data_; }
  std::span<const T> values() const noexcept { return data_; }
  T* data() noexcept { return data_.data(); }
  const T* data() const noexcept { return data_.data(); }

  auto begin() noexcept { return data_.begin(); }
  auto end() noexcept { return data_.end(); }
  auto begin() const noexcept { return data_.begin(); }
  auto end() const noexcept { return data_.end(); }

  template <typename U>
  bool same_shape(const Plane<U>& o) const noexcept {
    return height_ == o.height() && width_ == o.width();
  }

  friend bool operator==(const Plane& a, const Plane& b) {
    return a.height_ == b.height_ && a.width_ == b.width_ && a.data_ == b.data_;
  }

 private:
  static constexpr std::size_t max_elements() {
    return std::size_t(PTRDIFF_MAX) / sizeof(T);
  }

  std::size_t height_ = 0;
  std::size_t width_ = 0;
  storage data_;
};

using ComplexField = Plane<cplx>;
using RealImage = Plane<double>;

struct Dims {
  std::size_t height = 0;
  std::size_t width = 0;
  friend bool operator==(const Dims&, const Dims&) = default;
};

template <typename T>
Dims dims_of(const Plane<T>& p) {
  return {p.height(), p.width()};
}

std::string to_string(Dims d);

/// Throws ArgumentError naming `what` when shapes differ.
template <typename A, typename B>
void require_same_shape(const Plane<A>& a, const Plane<B>& b, const char* what) {
  if (!a.same_shape(b)) {
    throw ArgumentError(std::string(what) + ": dimension mismatch (" +
                        to_string(dims_of(a)) + " vs " + to_string(dims_of(b)) + ")");
  }
}

template <typename T>
void require_nonempty(const Plane<T>& p, const char* what) {
  if (p.empty()) throw SizeError(std::string(what) + ": empty plane");
}

// Channel helpers.
RealImage abs(const ComplexField& f);
RealImage abs2(const ComplexField& f);
RealImage arg(const ComplexField& f);
RealImage real(const ComplexField& f);
RealImage imag(const ComplexField& f);
ComplexField to_complex(const RealImage& re);
ComplexField from_real_imag(const RealImage& re, const RealImage& im);
ComplexField from_polar(const RealImage& amplitude, const RealImage& phase);

double energy(const ComplexField& f);
double norm(const ComplexField& f);
double sum(const RealImage& r);
double mean(const RealImage& r);
double mean_square(const RealImage& r);
double max_value(const RealImage& r);
double min_value(const RealImage& r);
bool all_finite(const ComplexField& f);
bool all_finite(const RealImage& r);

/// Unitary 2-D DFT (1/sqrt(HW) on both directions), DC at index (0,0).
ComplexField fft2(const ComplexField& f);
ComplexField ifft2(const ComplexField& f);
void fft2_inplace(ComplexField& f);
void ifft2_inplace(ComplexField& f);

/// Moves DC to (floor(H/2), floor(W/2)) and back.
template <typename T>
Plane<T> fftshift(const Plane<T>& p);
template <typename T>
Plane<T> ifftshift(const Plane<T>& p);

/// Offset of an (h, w) block centered in an (H, W) block.
Dims center_offset(Dims outer, Dims inner);

/// Output dims are ceil(factor * dims); input sits at center_offset, the
/// border is exactly zero.
ComplexField zero_pad(const ComplexField& f, double factor_h, double factor_w);
ComplexField zero_pad_to(const ComplexField& f, Dims out);
template <typename T>
Plane<T> crop_center(const Plane<T>& f, Dims out);

struct NoiseSpec {
  double snr_db = 30.0;
  std::uint64_t seed = 0;
};

/// i + n with n ~ N(0, mean(i^2) / 10^(snr/10)). No clamping.
RealImage add_wgn(const RealImage& i, const NoiseSpec& spec);
/// Same draw as add_wgn but returns only the noise realization.
RealImage wgn_realization(const RealImage& i, const NoiseSpec& spec);

/// sqrt(mean_square / 10^(snr_db/10)).
double wgn_sigma(double mean_square, double snr_db);
/// i.i.d. N(0, sigma^2), row-major from one mt19937_64(seed) stream.
RealImage gaussian_noise(Dims dims, double sigma, std::uint64_t seed);

}  // namespace lpr
