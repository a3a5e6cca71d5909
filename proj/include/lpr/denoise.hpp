#pragma once

#include <chrono>
#include <filesystem>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <string>
#include <vector>

#include "lpr/field.hpp"

namespace lpr {

struct BridgeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class EnhancerKind { identity, gaussian, median, tv, external };
enum class ChannelPolicy { amp_phase, real_imag, amplitude_only };

std::string to_string(EnhancerKind k);
EnhancerKind enhancer_kind_from_string(const std::string& s);
std::string to_string(ChannelPolicy p);
ChannelPolicy channel_policy_from_string(const std::string& s);

/// Out-of-process denoiser reached through files: `<dir>/in.lprf`,
/// `<dir>/meta.json` ({"sigma": ...}) in, `<dir>/out.lprf` back, with the
/// command invoked as `<command> <dir>`. One call in flight per instance.
class ExternalBridge {
 public:
  ExternalBridge(std::string command, std::chrono::milliseconds timeout,
                 std::filesystem::path scratch = {});

  RealImage run(const RealImage& v, double sigma) const;

  const std::string& command() const noexcept { return command_; }
  std::chrono::milliseconds timeout() const noexcept { return timeout_; }

 private:
  std::string command_;
  std::chrono::milliseconds timeout_;
  std::filesystem::path scratch_;
  mutable std::mutex mu_;
};

struct TvSettings {
  int iterations = 30;
  double step = 0.248;
};

/// The prior step. `strength` is a noise level in image-value units; the
/// smoothing kinds map it to a spatial scale through *_px_per_unit.
struct Enhancer {
  EnhancerKind kind = EnhancerKind::identity;
  double strength = 0.0;
  TvSettings tv;
  double gaussian_px_per_unit = 10.0;
  double median_px_per_unit = 10.0;
  /// Multiplier on strength for the phase channel under amp_phase.
  double phase_scale = 1.0;
  std::shared_ptr<const ExternalBridge> bridge;
  /// When nonzero and smaller than the image, the real-plane denoiser runs
  /// tile by tile; neighbours share `tile_overlap` pixels and hand over in
  /// the middle of the shared zone with a short linear ramp.
  Dims tile{0, 0};
  std::size_t tile_overlap = 16;

  Enhancer with_strength(double s) const {
    Enhancer e = *this;
    e.strength = s;
    return e;
  }
  void validate() const;
};

RealImage enhance(const RealImage& v, const Enhancer& e);
ComplexField enhance_complex(const ComplexField& v, const Enhancer& e,
                             ChannelPolicy policy = ChannelPolicy::amp_phase);

/// One bridge round trip with a fresh bridge object.
RealImage external_bridge(const RealImage& v, const std::string& command, double sigma,
                          std::chrono::milliseconds timeout = std::chrono::seconds(60));

// Building blocks, exposed for tests and tiling.

/// Isotropic TV with forward differences and Neumann boundary.
double total_variation(const RealImage& z);
/// 0.5 ||z - v||^2 + weight * TV(z)
double tv_objective(const RealImage& z, const RealImage& v, double weight);
/// Chambolle dual projected gradient for min 0.5||z-v||^2 + weight TV(z).
RealImage tv_denoise(const RealImage& v, double weight, const TvSettings& s = {});
/// Separable Gaussian blur, half-sample symmetric boundary.
RealImage gaussian_blur(const RealImage& v, double sigma_px);
/// Square (2r+1)^2 median, half-sample symmetric boundary.
RealImage median_filter(const RealImage& v, std::size_t radius);

/// Tile origins along one axis: stride tile - overlap, last tile flush with
/// the end.
std::vector<std::size_t> tile_starts(std::size_t extent, std::size_t tile, std::size_t overlap);

}  // namespace lpr
