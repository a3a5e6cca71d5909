#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "lpr/field.hpp"

namespace lpr {

struct GeometryError : std::domain_error {
  using std::domain_error::domain_error;
};

enum class Modality { cdi, cdp, fpm };

std::string to_string(Modality m);
Modality modality_from_string(const std::string& s);

using Mask = Plane<std::uint8_t>;

/// Far-field diffraction of a zero-padded object.
struct CdiModel {
  Dims object;
  double oversample_h = 2.0;
  double oversample_w = 2.0;
  Mask support;  // object dims, 1 = object region
  bool enforce_real = false;
  bool enforce_nonnegative = false;

  /// Support equal to the whole object rectangle.
  static CdiModel make(Dims object, double oversample = 2.0);

  Dims padded() const;
  void validate() const;
};

/// How the per-mask magnitude projections are combined in one AP step.
/// `sequential` applies them one after another (mask order); `average` takes
/// the uniform mean of the L independent back-projections.
enum class CdpCombine { sequential, average };

std::string to_string(CdpCombine c);
CdpCombine cdp_combine_from_string(const std::string& s);

/// Coded diffraction patterns: one unit-modulus modulation per acquisition.
struct CdpModel {
  std::vector<ComplexField> masks;
  std::uint64_t mask_seed = 0;
  std::string mask_law = "gaussian_phase";
  CdpCombine combine = CdpCombine::sequential;

  /// d = exp(i 2 pi g), g ~ N(0, 1), drawn mask by mask from one stream.
  static CdpModel gaussian_phase(Dims object, std::size_t count, std::uint64_t seed);
  /// `count` masks identically 1.
  static CdpModel identity(Dims object, std::size_t count = 1);

  Dims object() const;
  void validate() const;
};

/// Optical parameters of an LED-array microscope. Lengths in meters.
struct FpmGeometry {
  double wavelength = 625e-9;
  double na = 0.08;
  double led_pitch = 4e-3;
  double led_height = 84.8e-3;
  std::size_t grid = 15;
  double pixel_size = 3.4e-6;  // camera plane
  double magnification = 2.0;
  Dims hr{2048, 2048};
  std::size_t downsample = 4;
};

struct SpectralOffset {
  long row = 0;
  long col = 0;
};

struct FpmModel {
  FpmGeometry geometry;
  Dims hr;
  Dims lr;
  ComplexField pupil;                   // LR grid, DC at center_offset
  std::vector<double> kx, ky;           // per LED, cycles per meter
  std::vector<SpectralOffset> offsets;  // per LED, HR spectral pixels
  std::vector<std::size_t> order;       // update order, spiral from center
  double spectral_pitch_h = 0.0;        // cycles per meter per pixel
  double spectral_pitch_w = 0.0;
  double pupil_radius_px = 0.0;

  static FpmModel from_geometry(const FpmGeometry& g);
  /// LR dims == HR dims, single centered LED, all-pass pupil.
  static FpmModel transparent(Dims dims);

  std::size_t led_count() const { return offsets.size(); }
  std::size_t downsample() const { return hr.height / lr.height; }
  /// Index of the LED nearest normal incidence.
  std::size_t center_led() const { return order.front(); }
  /// Number of HR spectral pixels reached by at least one pupil window.
  std::size_t coverage(std::size_t leds = SIZE_MAX) const;
  void validate() const;
};

using Model = std::variant<CdiModel, CdpModel, FpmModel>;

Modality modality_of(const Model& m);
/// Object-space dims (object dims for CDI/CDP, HR dims for FPM).
Dims object_dims(const Model& m);
/// Expected plane count and plane dims of a consistent MeasurementSet.
std::size_t expected_planes(const Model& m);
Dims plane_dims(const Model& m);

struct MeasurementSet {
  Modality modality = Modality::cdp;
  std::vector<RealImage> planes;
};

/// Throws ArgumentError unless plane count, dims and modality match m.
void require_consistent(const MeasurementSet& I, const Model& m);

MeasurementSet cdi_forward(const ComplexField& u, const CdiModel& m);
MeasurementSet cdp_forward(const ComplexField& u, const CdpModel& m);
MeasurementSet fpm_forward(const ComplexField& u, const FpmModel& m);
MeasurementSet forward(const ComplexField& u, const Model& m);

/// One noise level for the whole stack: sigma^2 = mean(I^2) over all planes
/// / 10^(snr/10). Plane k draws from seed + k * 0x9E3779B97F4A7C15.
MeasurementSet add_wgn(const MeasurementSet& I, const NoiseSpec& spec);

/// The linear part of the measurement map, before |.|^2: one complex plane
/// per measured plane, in the same order and dims as forward().
std::vector<ComplexField> linear_forward(const ComplexField& u, const Model& m);
/// Exact adjoint of linear_forward (all transforms are unitary).
ComplexField linear_adjoint(const std::vector<ComplexField>& y, const Model& m);

/// Enforces measured magnitudes while keeping current phases, mapped back to
/// object space:
///  - CDI: magnitude replacement on the padded spectrum, crop, support mask.
///  - CDP: per-mask replacement and demodulation by conj(d), either chained
///    through the masks in order or averaged (CdpModel::combine).
///  - FPM: one sequential sweep over LEDs in `order`, writing each corrected
///    sub-spectrum back inside the pupil.
/// Negative intensities are clamped to zero before the square root.
ComplexField magnitude_project(const ComplexField& v, const Model& m, const MeasurementSet& I);

struct Projection {
  ComplexField field;
  double input_residual = 0.0;  // residual of v, not of field
};

/// Same as magnitude_project and also reports data_residual(v).
Projection project_with_residual(const ComplexField& v, const Model& m, const MeasurementSet& I);

/// ||I - |A u|^2|| / ||I|| over all planes.
double data_residual(const ComplexField& u, const Model& m, const MeasurementSet& I);

/// || sqrt(I) - |A u| || / || sqrt(I) ||: the distance error reduction
/// provably never increases (the intensity residual above can).
double amplitude_residual(const ComplexField& u, const Model& m, const MeasurementSet& I);

/// Per-pixel magnitude replacement y <- sqrt(max(I,0)) * y / |y|; where
/// |y| == 0 the phase is taken as zero.
void replace_magnitude(ComplexField& spectrum, const RealImage& intensity);

}  // namespace lpr
