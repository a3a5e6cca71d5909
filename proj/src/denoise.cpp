#include "lpr/denoise.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace lpr {

std::string to_string(EnhancerKind k) {
  switch (k) {
    case EnhancerKind::identity: return "identity";
    case EnhancerKind::gaussian: return "gaussian";
    case EnhancerKind::median: return "median";
    case EnhancerKind::tv: return "tv";
    case EnhancerKind::external: return "external";
  }
  return "?";
}

EnhancerKind enhancer_kind_from_string(const std::string& s) {
  if (s == "identity") return EnhancerKind::identity;
  if (s == "gaussian") return EnhancerKind::gaussian;
  if (s == "median") return EnhancerKind::median;
  if (s == "tv") return EnhancerKind::tv;
  if (s == "external") return EnhancerKind::external;
  throw ArgumentError("unknown enhancer kind '" + s + "'");
}

std::string to_string(ChannelPolicy p) {
  switch (p) {
    case ChannelPolicy::amp_phase: return "amp_phase";
    case ChannelPolicy::real_imag: return "real_imag";
    case ChannelPolicy::amplitude_only: return "amplitude_only";
  }
  return "?";
}

ChannelPolicy channel_policy_from_string(const std::string& s) {
  if (s == "amp_phase") return ChannelPolicy::amp_phase;
  if (s == "real_imag") return ChannelPolicy::real_imag;
  if (s == "amplitude_only") return ChannelPolicy::amplitude_only;
  throw ArgumentError("unknown channel policy '" + s + "'");
}

void Enhancer::validate() const {
  if (!(strength >= 0.0) || !std::isfinite(strength)) {
    throw ArgumentError("enhancer: strength must be finite and >= 0");
  }
  if (kind == EnhancerKind::tv && (tv.iterations < 0 || !(tv.step > 0.0))) {
    throw ArgumentError("enhancer: tv needs iterations >= 0 and step > 0");
  }
  if (kind == EnhancerKind::external && !bridge) {
    throw ArgumentError("enhancer: external kind needs a bridge command");
  }
}

namespace {

// Half-sample symmetric extension: ... b a | a b c ... c | c b ...
std::size_t reflect(long i, std::size_t n) {
  const long period = 2 * long(n);
  long m = i % period;
  if (m < 0) m += period;
  return m < long(n) ? std::size_t(m) : std::size_t(period - 1 - m);
}

}  // namespace

double total_variation(const RealImage& z) {
  double tv = 0.0;
  const std::size_t h = z.height(), w = z.width();
  for (std::size_t r = 0; r < h; ++r) {
    for (std::size_t c = 0; c < w; ++c) {
      const double dx = c + 1 < w ? z(r, c + 1) - z(r, c) : 0.0;
      const double dy = r + 1 < h ? z(r + 1, c) - z(r, c) : 0.0;
      tv += std::sqrt(dx * dx + dy * dy);
    }
  }
  return tv;
}

double tv_objective(const RealImage& z, const RealImage& v, double weight) {
  require_same_shape(z, v, "tv_objective");
  double fid = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) fid += (z[i] - v[i]) * (z[i] - v[i]);
  return 0.5 * fid + weight * total_variation(z);
}

RealImage tv_denoise(const RealImage& v, double weight, const TvSettings& s) {
  require_nonempty(v, "tv_denoise");
  if (weight == 0.0 || s.iterations == 0) return v;
  const std::size_t h = v.height(), w = v.width();
  RealImage px(h, w), py(h, w), div(h, w);

  const auto divergence = [&] {
    for (std::size_t r = 0; r < h; ++r) {
      for (std::size_t c = 0; c < w; ++c) {
        double d = 0.0;
        if (c + 1 < w) d += px(r, c);
        if (c > 0) d -= px(r, c - 1);
        if (r + 1 < h) d += py(r, c);
        if (r > 0) d -= py(r - 1, c);
        div(r, c) = d;
      }
    }
  };

  const double inv_weight = 1.0 / weight;
  RealImage t(h, w);
  for (int it = 0; it < s.iterations; ++it) {
    divergence();
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = div[i] - v[i] * inv_weight;
    for (std::size_t r = 0; r < h; ++r) {
      for (std::size_t c = 0; c < w; ++c) {
        const double gx = c + 1 < w ? t(r, c + 1) - t(r, c) : 0.0;
        const double gy = r + 1 < h ? t(r + 1, c) - t(r, c) : 0.0;
        double nx = px(r, c) + s.step * gx;
        double ny = py(r, c) + s.step * gy;
        const double mag = std::max(1.0, std::sqrt(nx * nx + ny * ny));
        px(r, c) = nx / mag;
        py(r, c) = ny / mag;
      }
    }
  }
  divergence();
  RealImage z(h, w);
  for (std::size_t i = 0; i < z.size(); ++i) z[i] = v[i] - weight * div[i];
  return z;
}

RealImage gaussian_blur(const RealImage& v, double sigma_px) {
  require_nonempty(v, "gaussian_blur");
  if (sigma_px <= 0.0) return v;
  const std::size_t h = v.height(), w = v.width();

  const auto taps_for = [&](std::size_t n) {
    // Beyond a few periods of the symmetric extension the kernel is flat to
    // within rounding, so the radius is capped.
    const long radius = long(std::min(std::ceil(4.0 * sigma_px), 8.0 * double(n)));
    std::vector<double> taps(std::size_t(2 * radius + 1));
    double s = 0.0;
    for (long k = -radius; k <= radius; ++k) {
      const double t = std::exp(-double(k * k) / (2.0 * sigma_px * sigma_px));
      taps[std::size_t(k + radius)] = t;
      s += t;
    }
    for (auto& t : taps) t /= s;
    return std::make_pair(radius, taps);
  };

  const auto [rw, tw] = taps_for(w);
  RealImage tmp(h, w);
  for (std::size_t r = 0; r < h; ++r) {
    for (std::size_t c = 0; c < w; ++c) {
      double acc = 0.0;
      for (long k = -rw; k <= rw; ++k) acc += tw[std::size_t(k + rw)] * v(r, reflect(long(c) + k, w));
      tmp(r, c) = acc;
    }
  }
  const auto [rh, th] = taps_for(h);
  RealImage out(h, w);
  for (std::size_t r = 0; r < h; ++r) {
    for (std::size_t c = 0; c < w; ++c) {
      double acc = 0.0;
      for (long k = -rh; k <= rh; ++k) acc += th[std::size_t(k + rh)] * tmp(reflect(long(r) + k, h), c);
      out(r, c) = acc;
    }
  }
  return out;
}

RealImage median_filter(const RealImage& v, std::size_t radius) {
  require_nonempty(v, "median_filter");
  if (radius == 0) return v;
  const std::size_t h = v.height(), w = v.width();
  const long rad = long(radius);
  std::vector<double> window;
  window.reserve((2 * radius + 1) * (2 * radius + 1));
  RealImage out(h, w);
  for (std::size_t r = 0; r < h; ++r) {
    for (std::size_t c = 0; c < w; ++c) {
      window.clear();
      for (long dr = -rad; dr <= rad; ++dr) {
        const std::size_t rr = reflect(long(r) + dr, h);
        for (long dc = -rad; dc <= rad; ++dc) window.push_back(v(rr, reflect(long(c) + dc, w)));
      }
      auto mid = window.begin() + long(window.size() / 2);
      std::nth_element(window.begin(), mid, window.end());
      out(r, c) = *mid;
    }
  }
  return out;
}

std::vector<std::size_t> tile_starts(std::size_t extent, std::size_t tile, std::size_t overlap) {
  if (tile == 0) throw ArgumentError("tile size must be >= 1");
  if (overlap >= tile) throw ArgumentError("tile overlap must be smaller than the tile");
  if (tile >= extent) return {0};
  std::vector<std::size_t> s;
  for (std::size_t o = 0;; o += tile - overlap) {
    if (o + tile >= extent) {
      s.push_back(extent - tile);
      break;
    }
    s.push_back(o);
  }
  return s;
}

namespace {

RealImage enhance_whole(const RealImage& v, const Enhancer& e) {
  switch (e.kind) {
    case EnhancerKind::identity: return v;
    case EnhancerKind::gaussian: return gaussian_blur(v, e.strength * e.gaussian_px_per_unit);
    case EnhancerKind::median:
      return median_filter(v, std::size_t(std::lround(e.strength * e.median_px_per_unit)));
    case EnhancerKind::tv: return tv_denoise(v, e.strength, e.tv);
    case EnhancerKind::external: {
      RealImage out = e.bridge->run(v, e.strength);
      if (!all_finite(out)) throw BridgeError("external enhancer returned non-finite samples");
      return out;
    }
  }
  return v;
}

// Weight of sample i in a tile [0, n) whose neighbours overlap `lead` samples
// before and `trail` after. Each tile hands over to its neighbour in the
// middle of the shared zone through a short linear ramp; the outer part,
// where the tile's own boundary condition distorts the output, gets weight 0.
double ramp_in(std::size_t i, std::size_t zone) {
  const std::size_t guard = zone >= 2 ? (zone - 2) / 2 : 0;
  if (i < guard) return 0.0;
  return std::min(1.0, double(i - guard + 1) / double(zone - 2 * guard + 1));
}

double ramp(std::size_t i, std::size_t n, std::size_t lead, std::size_t trail) {
  double w = 1.0;
  if (lead > 0 && i < lead) w = std::min(w, ramp_in(i, lead));
  if (trail > 0 && i >= n - trail) w = std::min(w, ramp_in(n - 1 - i, trail));
  return w;
}

RealImage enhance_tiled(const RealImage& v, const Enhancer& e) {
  const std::size_t h = v.height(), w = v.width();
  const std::size_t th = std::min(e.tile.height, h), tw = std::min(e.tile.width, w);
  const auto rows = tile_starts(h, th, std::min(e.tile_overlap, th - 1));
  const auto cols = tile_starts(w, tw, std::min(e.tile_overlap, tw - 1));
  RealImage acc(h, w), wsum(h, w);
  for (std::size_t ri = 0; ri < rows.size(); ++ri) {
    for (std::size_t ci = 0; ci < cols.size(); ++ci) {
      const std::size_t r0 = rows[ri], c0 = cols[ci];
      RealImage t(th, tw);
      for (std::size_t r = 0; r < th; ++r) {
        for (std::size_t c = 0; c < tw; ++c) t(r, c) = v(r0 + r, c0 + c);
      }
      const RealImage out = enhance_whole(t, e);
      const std::size_t lead_r = ri > 0 ? rows[ri - 1] + th - r0 : 0;
      const std::size_t trail_r = ri + 1 < rows.size() ? r0 + th - rows[ri + 1] : 0;
      const std::size_t lead_c = ci > 0 ? cols[ci - 1] + tw - c0 : 0;
      const std::size_t trail_c = ci + 1 < cols.size() ? c0 + tw - cols[ci + 1] : 0;
      for (std::size_t r = 0; r < th; ++r) {
        const double wr = ramp(r, th, lead_r, trail_r);
        for (std::size_t c = 0; c < tw; ++c) {
          const double wt = wr * ramp(c, tw, lead_c, trail_c);
          acc(r0 + r, c0 + c) += wt * out(r, c);
          wsum(r0 + r, c0 + c) += wt;
        }
      }
    }
  }
  for (std::size_t i = 0; i < acc.size(); ++i) acc[i] /= wsum[i];
  return acc;
}

}  // namespace

RealImage enhance(const RealImage& v, const Enhancer& e) {
  require_nonempty(v, "enhance");
  e.validate();
  if (!all_finite(v)) throw ArgumentError("enhance: input must be finite");
  if (e.kind == EnhancerKind::identity) return v;
  const bool tiled = e.tile.height > 0 && e.tile.width > 0 &&
                     (e.tile.height < v.height() || e.tile.width < v.width());
  return tiled ? enhance_tiled(v, e) : enhance_whole(v, e);
}

ComplexField enhance_complex(const ComplexField& v, const Enhancer& e, ChannelPolicy policy) {
  require_nonempty(v, "enhance_complex");
  e.validate();
  if (e.kind == EnhancerKind::identity) return v;

  const auto clamp_nonneg = [](RealImage a) {
    for (auto& x : a) x = std::max(x, 0.0);
    return a;
  };

  switch (policy) {
    case ChannelPolicy::amp_phase: {
      const RealImage amp = clamp_nonneg(enhance(abs(v), e));
      const RealImage phase = enhance(arg(v), e.with_strength(e.strength * e.phase_scale));
      return from_polar(amp, phase);
    }
    case ChannelPolicy::real_imag:
      return from_real_imag(enhance(real(v), e), enhance(imag(v), e));
    case ChannelPolicy::amplitude_only: {
      const RealImage amp = clamp_nonneg(enhance(abs(v), e));
      ComplexField out(v.height(), v.width());
      for (std::size_t i = 0; i < v.size(); ++i) {
        const double mag = std::abs(v[i]);
        out[i] = mag > 0.0 ? v[i] * (amp[i] / mag) : cplx(amp[i], 0.0);
      }
      return out;
    }
  }
  return v;
}

}  // namespace lpr
