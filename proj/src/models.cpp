#include "lpr/models.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace lpr {

std::string to_string(Modality m) {
  switch (m) {
    case Modality::cdi: return "cdi";
    case Modality::cdp: return "cdp";
    case Modality::fpm: return "fpm";
  }
  return "?";
}

Modality modality_from_string(const std::string& s) {
  if (s == "cdi") return Modality::cdi;
  if (s == "cdp") return Modality::cdp;
  if (s == "fpm") return Modality::fpm;
  throw ArgumentError("unknown modality '" + s + "'");
}

// ---------------------------------------------------------------- CDI

CdiModel CdiModel::make(Dims object, double oversample) {
  CdiModel m;
  m.object = object;
  m.oversample_h = oversample;
  m.oversample_w = oversample;
  m.support = Mask(object.height, object.width, 1);
  m.validate();
  return m;
}

Dims CdiModel::padded() const {
  return {std::size_t(std::ceil(double(object.height) * oversample_h)),
          std::size_t(std::ceil(double(object.width) * oversample_w))};
}

void CdiModel::validate() const {
  if (object.height == 0 || object.width == 0) throw SizeError("cdi: empty object");
  if (!(oversample_h >= 2.0) || !(oversample_w >= 2.0)) {
    throw ArgumentError("cdi: oversampling must be >= 2 per axis");
  }
  if (dims_of(support) != object) throw ArgumentError("cdi: support dims must equal object dims");
}

// ---------------------------------------------------------------- CDP

std::string to_string(CdpCombine c) {
  return c == CdpCombine::average ? "average" : "sequential";
}

CdpCombine cdp_combine_from_string(const std::string& s) {
  if (s == "sequential") return CdpCombine::sequential;
  if (s == "average") return CdpCombine::average;
  throw ArgumentError("unknown CDP combine rule '" + s + "'");
}

CdpModel CdpModel::gaussian_phase(Dims object, std::size_t count, std::uint64_t seed) {
  if (count == 0) throw ArgumentError("cdp: need at least one mask");
  CdpModel m;
  m.mask_seed = seed;
  m.mask_law = "gaussian_phase";
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  constexpr double two_pi = 2.0 * std::numbers::pi;
  for (std::size_t l = 0; l < count; ++l) {
    ComplexField d(object.height, object.width);
    for (auto& z : d) {
      const double g = two_pi * gauss(rng);
      z = {std::cos(g), std::sin(g)};
    }
    m.masks.push_back(std::move(d));
  }
  return m;
}

CdpModel CdpModel::identity(Dims object, std::size_t count) {
  if (count == 0) throw ArgumentError("cdp: need at least one mask");
  CdpModel m;
  m.mask_law = "identity";
  m.masks.assign(count, ComplexField(object.height, object.width, cplx(1.0, 0.0)));
  return m;
}

Dims CdpModel::object() const {
  if (masks.empty()) throw ArgumentError("cdp: empty mask list");
  return dims_of(masks.front());
}

void CdpModel::validate() const {
  if (masks.empty()) throw ArgumentError("cdp: empty mask list");
  for (const auto& d : masks) {
    require_nonempty(d, "cdp mask");
    require_same_shape(d, masks.front(), "cdp masks");
    for (const auto& z : d) {
      if (std::abs(std::abs(z) - 1.0) > 1e-12) throw ArgumentError("cdp: masks must be unit-modulus");
    }
  }
}

// ---------------------------------------------------------------- FPM

namespace {

// LED index along one axis, centered on the optical axis.
double led_coordinate(std::size_t i, std::size_t grid) {
  return double(i) - 0.5 * double(grid - 1);
}

ComplexField disk_pupil(Dims lr, double radius_h, double radius_w) {
  ComplexField p(lr.height, lr.width);
  const Dims c{lr.height / 2, lr.width / 2};
  for (std::size_t r = 0; r < lr.height; ++r) {
    for (std::size_t col = 0; col < lr.width; ++col) {
      const double y = (double(r) - double(c.height)) / radius_h;
      const double x = (double(col) - double(c.width)) / radius_w;
      if (x * x + y * y <= 1.0) p(r, col) = 1.0;
    }
  }
  return p;
}

// Top-left corner of LED j's LR window inside the centered HR spectrum.
SpectralOffset window_origin(const FpmModel& m, std::size_t j) {
  return {long(m.hr.height / 2) + m.offsets[j].row - long(m.lr.height / 2),
          long(m.hr.width / 2) + m.offsets[j].col - long(m.lr.width / 2)};
}

void check_windows(const FpmModel& m) {
  for (std::size_t j = 0; j < m.led_count(); ++j) {
    const auto o = window_origin(m, j);
    if (o.row < 0 || o.col < 0 || o.row + long(m.lr.height) > long(m.hr.height) ||
        o.col + long(m.lr.width) > long(m.hr.width)) {
      throw GeometryError("fpm: LED " + std::to_string(j) + " offset (" +
                          std::to_string(m.offsets[j].row) + ", " +
                          std::to_string(m.offsets[j].col) +
                          ") pushes the pupil window outside the HR spectrum");
    }
  }
}

}  // namespace

FpmModel FpmModel::from_geometry(const FpmGeometry& g) {
  if (!(g.wavelength > 0) || !(g.na > 0) || !(g.led_height > 0) || !(g.pixel_size > 0) ||
      !(g.magnification > 0) || !(g.led_pitch >= 0)) {
    throw ArgumentError("fpm: geometry values must be positive");
  }
  if (g.grid == 0) throw ArgumentError("fpm: LED grid must be >= 1");
  if (g.downsample == 0) throw ArgumentError("fpm: downsample must be >= 1");
  if (g.hr.height % g.downsample != 0 || g.hr.width % g.downsample != 0) {
    throw ArgumentError("fpm: HR dims must be a multiple of the downsample factor");
  }

  FpmModel m;
  m.geometry = g;
  m.hr = g.hr;
  m.lr = {g.hr.height / g.downsample, g.hr.width / g.downsample};
  if (m.lr.height == 0 || m.lr.width == 0) throw SizeError("fpm: empty LR grid");

  // Object-plane sampling; the LR and HR grids span the same field of view,
  // so both share one spectral pitch.
  const double lr_pixel = g.pixel_size / g.magnification;
  m.spectral_pitch_h = 1.0 / (double(m.lr.height) * lr_pixel);
  m.spectral_pitch_w = 1.0 / (double(m.lr.width) * lr_pixel);
  const double cutoff = g.na / g.wavelength;
  m.pupil_radius_px = cutoff / m.spectral_pitch_w;
  m.pupil = disk_pupil(m.lr, cutoff / m.spectral_pitch_h, cutoff / m.spectral_pitch_w);

  struct Led {
    double ring, angle;
    std::size_t index;
  };
  std::vector<Led> leds;
  for (std::size_t i = 0; i < g.grid; ++i) {
    for (std::size_t k = 0; k < g.grid; ++k) {
      const double iy = led_coordinate(i, g.grid), ix = led_coordinate(k, g.grid);
      const double kx = std::sin(std::atan(ix * g.led_pitch / g.led_height)) / g.wavelength;
      const double ky = std::sin(std::atan(iy * g.led_pitch / g.led_height)) / g.wavelength;
      m.kx.push_back(kx);
      m.ky.push_back(ky);
      m.offsets.push_back({std::lround(ky / m.spectral_pitch_h), std::lround(kx / m.spectral_pitch_w)});
      double angle = std::atan2(iy, ix);
      if (angle < 0) angle += 2.0 * std::numbers::pi;
      leds.push_back({std::max(std::abs(ix), std::abs(iy)), angle, m.offsets.size() - 1});
    }
  }
  std::sort(leds.begin(), leds.end(), [](const Led& a, const Led& b) {
    if (a.ring != b.ring) return a.ring < b.ring;
    if (a.angle != b.angle) return a.angle < b.angle;
    return a.index < b.index;
  });
  for (const auto& l : leds) m.order.push_back(l.index);

  check_windows(m);
  return m;
}

FpmModel FpmModel::transparent(Dims dims) {
  FpmModel m;
  m.geometry.grid = 1;
  m.geometry.downsample = 1;
  m.geometry.hr = dims;
  m.hr = dims;
  m.lr = dims;
  m.pupil = ComplexField(dims.height, dims.width, cplx(1.0, 0.0));
  m.kx = {0.0};
  m.ky = {0.0};
  m.offsets = {{0, 0}};
  m.order = {0};
  m.spectral_pitch_h = m.spectral_pitch_w = 1.0;
  m.pupil_radius_px = double(std::max(dims.height, dims.width));
  return m;
}

std::size_t FpmModel::coverage(std::size_t leds) const {
  Mask covered(hr.height, hr.width, 0);
  const std::size_t n = std::min(leds, led_count());
  for (std::size_t s = 0; s < n; ++s) {
    const auto o = window_origin(*this, order[s]);
    for (std::size_t r = 0; r < lr.height; ++r) {
      for (std::size_t c = 0; c < lr.width; ++c) {
        if (pupil(r, c) != cplx(0.0)) covered(std::size_t(o.row) + r, std::size_t(o.col) + c) = 1;
      }
    }
  }
  return std::size_t(std::count(covered.begin(), covered.end(), 1));
}

void FpmModel::validate() const {
  if (hr.height == 0 || lr.height == 0) throw SizeError("fpm: empty grid");
  if (hr.height % lr.height != 0 || hr.width % lr.width != 0 ||
      hr.height / lr.height != hr.width / lr.width) {
    throw ArgumentError("fpm: HR dims must be an integer multiple of LR dims");
  }
  if (dims_of(pupil) != lr) throw ArgumentError("fpm: pupil must live on the LR grid");
  if (offsets.empty() || order.size() != offsets.size()) throw ArgumentError("fpm: no LEDs");
  check_windows(*this);
}

// ---------------------------------------------------------------- common

Modality modality_of(const Model& m) {
  return std::visit(
      [](const auto& x) {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, CdiModel>) return Modality::cdi;
        else if constexpr (std::is_same_v<T, CdpModel>) return Modality::cdp;
        else return Modality::fpm;
      },
      m);
}

Dims object_dims(const Model& m) {
  return std::visit(
      [](const auto& x) -> Dims {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, CdiModel>) return x.object;
        else if constexpr (std::is_same_v<T, CdpModel>) return x.object();
        else return x.hr;
      },
      m);
}

std::size_t expected_planes(const Model& m) {
  return std::visit(
      [](const auto& x) -> std::size_t {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, CdiModel>) return 1;
        else if constexpr (std::is_same_v<T, CdpModel>) return x.masks.size();
        else return x.led_count();
      },
      m);
}

Dims plane_dims(const Model& m) {
  return std::visit(
      [](const auto& x) -> Dims {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, CdiModel>) return x.padded();
        else if constexpr (std::is_same_v<T, CdpModel>) return x.object();
        else return x.lr;
      },
      m);
}

void require_consistent(const MeasurementSet& I, const Model& m) {
  if (I.modality != modality_of(m)) {
    throw ArgumentError("measurements are " + to_string(I.modality) + " but model is " +
                        to_string(modality_of(m)));
  }
  if (I.planes.size() != expected_planes(m)) {
    throw ArgumentError("expected " + std::to_string(expected_planes(m)) +
                        " measurement planes, got " + std::to_string(I.planes.size()));
  }
  const Dims d = plane_dims(m);
  for (const auto& p : I.planes) {
    if (dims_of(p) != d) {
      throw ArgumentError("measurement plane is " + to_string(dims_of(p)) + ", expected " +
                          to_string(d));
    }
  }
}

void replace_magnitude(ComplexField& spectrum, const RealImage& intensity) {
  for (std::size_t i = 0; i < spectrum.size(); ++i) {
    const double target = std::sqrt(std::max(intensity[i], 0.0));
    const double mag = std::abs(spectrum[i]);
    spectrum[i] = mag > 0.0 ? spectrum[i] * (target / mag) : cplx(target, 0.0);
  }
}

namespace {

void require_object_dims(const ComplexField& u, Dims expected, const char* what) {
  require_nonempty(u, what);
  if (dims_of(u) != expected) {
    throw ArgumentError(std::string(what) + ": field is " + to_string(dims_of(u)) +
                        ", model expects " + to_string(expected));
  }
}

// Accumulates sum (I - |y|^2)^2 and sum I^2 for one plane.
struct ResidualAccumulator {
  double num = 0.0, den = 0.0;
  void add(const ComplexField& y, const RealImage& I) {
    for (std::size_t i = 0; i < y.size(); ++i) {
      const double d = I[i] - std::norm(y[i]);
      num += d * d;
      den += I[i] * I[i];
    }
  }
  double value() const { return den > 0.0 ? std::sqrt(num / den) : std::sqrt(num); }
};

ComplexField modulate(const ComplexField& u, const ComplexField& d) {
  ComplexField out(u.height(), u.width());
  for (std::size_t i = 0; i < u.size(); ++i) out[i] = u[i] * d[i];
  return out;
}

ComplexField cdi_spectrum(const ComplexField& u, const CdiModel& m) {
  ComplexField padded = zero_pad_to(u, m.padded());
  fft2_inplace(padded);
  return padded;
}

// Centered HR spectrum window for one LED, pupil applied, DC-at-origin LR
// spectrum returned.
ComplexField fpm_lr_spectrum(const ComplexField& hr_centered, const FpmModel& m, std::size_t j) {
  const auto o = window_origin(m, j);
  ComplexField sub(m.lr.height, m.lr.width);
  for (std::size_t r = 0; r < m.lr.height; ++r) {
    for (std::size_t c = 0; c < m.lr.width; ++c) {
      sub(r, c) = m.pupil(r, c) * hr_centered(std::size_t(o.row) + r, std::size_t(o.col) + c);
    }
  }
  return ifftshift(sub);
}

ComplexField fpm_hr_centered(const ComplexField& u) { return fftshift(fft2(u)); }

ComplexField project_cdi(const ComplexField& v, const CdiModel& m, const MeasurementSet& I,
                         double* residual) {
  ComplexField spec = cdi_spectrum(v, m);
  if (residual) {
    ResidualAccumulator acc;
    acc.add(spec, I.planes[0]);
    *residual = acc.value();
  }
  replace_magnitude(spec, I.planes[0]);
  ifft2_inplace(spec);
  ComplexField out = crop_center(spec, m.object);
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (!m.support[i]) out[i] = 0.0;
  }
  return out;
}

ComplexField project_cdp(const ComplexField& v, const CdpModel& m, const MeasurementSet& I,
                         double* residual) {
  ResidualAccumulator res;
  if (m.combine == CdpCombine::sequential) {
    // The residual must describe v itself, which the chained updates no
    // longer hold after the first mask.
    if (residual) *residual = data_residual(v, Model(std::in_place_type<CdpModel>, m), I);
    ComplexField cur = v;
    for (std::size_t l = 0; l < m.masks.size(); ++l) {
      const auto& d = m.masks[l];
      ComplexField y = modulate(cur, d);
      fft2_inplace(y);
      replace_magnitude(y, I.planes[l]);
      ifft2_inplace(y);
      for (std::size_t i = 0; i < y.size(); ++i) cur[i] = y[i] * std::conj(d[i]);
    }
    return cur;
  }
  ComplexField acc(v.height(), v.width());
  for (std::size_t l = 0; l < m.masks.size(); ++l) {
    ComplexField y = modulate(v, m.masks[l]);
    fft2_inplace(y);
    if (residual) res.add(y, I.planes[l]);
    replace_magnitude(y, I.planes[l]);
    ifft2_inplace(y);
    const auto& d = m.masks[l];
    for (std::size_t i = 0; i < y.size(); ++i) acc[i] += y[i] * std::conj(d[i]);
  }
  const double inv = 1.0 / double(m.masks.size());
  for (auto& z : acc) z *= inv;
  if (residual) *residual = res.value();
  return acc;
}

ComplexField project_fpm(const ComplexField& v, const FpmModel& m, const MeasurementSet& I,
                         double* residual) {
  ComplexField hr = fpm_hr_centered(v);
  if (residual) {
    ResidualAccumulator res;
    for (std::size_t j = 0; j < m.led_count(); ++j) {
      ComplexField y = fpm_lr_spectrum(hr, m, j);
      ifft2_inplace(y);
      res.add(y, I.planes[j]);
    }
    *residual = res.value();
  }
  double pmax2 = 0.0;
  for (const auto& p : m.pupil) pmax2 = std::max(pmax2, std::norm(p));
  if (pmax2 == 0.0) return v;

  for (std::size_t j : m.order) {
    const ComplexField before = fftshift(fpm_lr_spectrum(hr, m, j));
    ComplexField field = ifft2(ifftshift(before));
    replace_magnitude(field, I.planes[j]);
    fft2_inplace(field);
    const ComplexField after = fftshift(field);
    const auto o = window_origin(m, j);
    for (std::size_t r = 0; r < m.lr.height; ++r) {
      for (std::size_t c = 0; c < m.lr.width; ++c) {
        const cplx p = m.pupil(r, c);
        if (p == cplx(0.0)) continue;
        hr(std::size_t(o.row) + r, std::size_t(o.col) + c) +=
            std::conj(p) * (after(r, c) - before(r, c)) / pmax2;
      }
    }
  }
  return ifft2(ifftshift(hr));
}

}  // namespace

MeasurementSet cdi_forward(const ComplexField& u, const CdiModel& m) {
  m.validate();
  require_object_dims(u, m.object, "cdi_forward");
  return {Modality::cdi, {abs2(cdi_spectrum(u, m))}};
}

MeasurementSet cdp_forward(const ComplexField& u, const CdpModel& m) {
  if (m.masks.empty()) throw ArgumentError("cdp_forward: empty mask list");
  require_object_dims(u, m.object(), "cdp_forward");
  MeasurementSet out{Modality::cdp, {}};
  for (const auto& d : m.masks) {
    require_same_shape(u, d, "cdp_forward");
    ComplexField y = modulate(u, d);
    fft2_inplace(y);
    out.planes.push_back(abs2(y));
  }
  return out;
}

MeasurementSet fpm_forward(const ComplexField& u, const FpmModel& m) {
  m.validate();
  require_object_dims(u, m.hr, "fpm_forward");
  const ComplexField hr = fpm_hr_centered(u);
  MeasurementSet out{Modality::fpm, {}};
  for (std::size_t j = 0; j < m.led_count(); ++j) {
    ComplexField y = fpm_lr_spectrum(hr, m, j);
    ifft2_inplace(y);
    out.planes.push_back(abs2(y));
  }
  return out;
}

MeasurementSet forward(const ComplexField& u, const Model& m) {
  return std::visit(
      [&](const auto& x) -> MeasurementSet {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, CdiModel>) return cdi_forward(u, x);
        else if constexpr (std::is_same_v<T, CdpModel>) return cdp_forward(u, x);
        else return fpm_forward(u, x);
      },
      m);
}

std::vector<ComplexField> linear_forward(const ComplexField& u, const Model& m) {
  require_object_dims(u, object_dims(m), "linear_forward");
  std::vector<ComplexField> out;
  if (const auto* cdi = std::get_if<CdiModel>(&m)) {
    out.push_back(cdi_spectrum(u, *cdi));
  } else if (const auto* cdp = std::get_if<CdpModel>(&m)) {
    for (const auto& d : cdp->masks) out.push_back(fft2(modulate(u, d)));
  } else {
    const auto& fpm = std::get<FpmModel>(m);
    const ComplexField hr = fpm_hr_centered(u);
    for (std::size_t j = 0; j < fpm.led_count(); ++j) {
      out.push_back(ifft2(fpm_lr_spectrum(hr, fpm, j)));
    }
  }
  return out;
}

ComplexField linear_adjoint(const std::vector<ComplexField>& y, const Model& m) {
  if (y.size() != expected_planes(m)) throw ArgumentError("linear_adjoint: wrong plane count");
  for (const auto& p : y) require_object_dims(p, plane_dims(m), "linear_adjoint");
  if (const auto* cdi = std::get_if<CdiModel>(&m)) {
    ComplexField out = crop_center(ifft2(y[0]), cdi->object);
    return out;
  }
  if (const auto* cdp = std::get_if<CdpModel>(&m)) {
    ComplexField acc(y[0].height(), y[0].width());
    for (std::size_t l = 0; l < y.size(); ++l) {
      const ComplexField x = ifft2(y[l]);
      const auto& d = cdp->masks[l];
      for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += std::conj(d[i]) * x[i];
    }
    return acc;
  }
  const auto& fpm = std::get<FpmModel>(m);
  ComplexField hr(fpm.hr.height, fpm.hr.width);
  for (std::size_t j = 0; j < fpm.led_count(); ++j) {
    const ComplexField sub = fftshift(fft2(y[j]));
    const auto o = window_origin(fpm, j);
    for (std::size_t r = 0; r < fpm.lr.height; ++r) {
      for (std::size_t c = 0; c < fpm.lr.width; ++c) {
        hr(std::size_t(o.row) + r, std::size_t(o.col) + c) += std::conj(fpm.pupil(r, c)) * sub(r, c);
      }
    }
  }
  return ifft2(ifftshift(hr));
}

MeasurementSet add_wgn(const MeasurementSet& I, const NoiseSpec& spec) {
  // The stack is one signal: a single sigma from the mean square over every
  // plane, so dim planes (FPM dark field) are not given their own SNR. Each
  // plane still draws from its own seed stream.
  if (I.planes.empty()) throw ArgumentError("add_wgn: empty measurement set");
  double ms = 0.0, count = 0.0;
  for (const auto& p : I.planes) {
    require_nonempty(p, "add_wgn");
    if (!all_finite(p)) throw ArgumentError("add_wgn: input must be finite");
    ms += mean_square(p) * double(p.size());
    count += double(p.size());
  }
  const double sigma = wgn_sigma(ms / count, spec.snr_db);
  MeasurementSet out{I.modality, {}};
  for (std::size_t k = 0; k < I.planes.size(); ++k) {
    RealImage n = gaussian_noise(dims_of(I.planes[k]), sigma,
                                 spec.seed + 0x9E3779B97F4A7C15ull * std::uint64_t(k));
    for (std::size_t i = 0; i < n.size(); ++i) n[i] += I.planes[k][i];
    out.planes.push_back(std::move(n));
  }
  return out;
}

Projection project_with_residual(const ComplexField& v, const Model& m, const MeasurementSet& I) {
  require_consistent(I, m);
  require_object_dims(v, object_dims(m), "magnitude_project");
  Projection p;
  p.field = std::visit(
      [&](const auto& x) -> ComplexField {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, CdiModel>) return project_cdi(v, x, I, &p.input_residual);
        else if constexpr (std::is_same_v<T, CdpModel>) return project_cdp(v, x, I, &p.input_residual);
        else return project_fpm(v, x, I, &p.input_residual);
      },
      m);
  return p;
}

ComplexField magnitude_project(const ComplexField& v, const Model& m, const MeasurementSet& I) {
  require_consistent(I, m);
  require_object_dims(v, object_dims(m), "magnitude_project");
  return std::visit(
      [&](const auto& x) -> ComplexField {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, CdiModel>) return project_cdi(v, x, I, nullptr);
        else if constexpr (std::is_same_v<T, CdpModel>) return project_cdp(v, x, I, nullptr);
        else return project_fpm(v, x, I, nullptr);
      },
      m);
}

double data_residual(const ComplexField& u, const Model& m, const MeasurementSet& I) {
  require_consistent(I, m);
  const MeasurementSet sim = forward(u, m);
  double num = 0.0, den = 0.0;
  for (std::size_t k = 0; k < I.planes.size(); ++k) {
    for (std::size_t i = 0; i < I.planes[k].size(); ++i) {
      const double d = I.planes[k][i] - sim.planes[k][i];
      num += d * d;
      den += I.planes[k][i] * I.planes[k][i];
    }
  }
  return den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
}

double amplitude_residual(const ComplexField& u, const Model& m, const MeasurementSet& I) {
  require_consistent(I, m);
  const MeasurementSet sim = forward(u, m);
  double num = 0.0, den = 0.0;
  for (std::size_t k = 0; k < I.planes.size(); ++k) {
    for (std::size_t i = 0; i < I.planes[k].size(); ++i) {
      const double a = std::sqrt(std::max(I.planes[k][i], 0.0));
      const double d = a - std::sqrt(sim.planes[k][i]);
      num += d * d;
      den += a * a;
    }
  }
  return den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
}

}  // namespace lpr
