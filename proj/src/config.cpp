#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include "lpr/bench.hpp"
#include "lpr/image_io.hpp"
#include "lpr/phantom.hpp"

namespace lpr {

using nlohmann::json;

namespace {

// Reads keys from one object and remembers which were consumed, so that
// typos surface as errors instead of silently falling back to defaults.
class Section {
 public:
  Section(const json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) throw ConfigError(where_ + ": expected an object");
  }

  bool has(const std::string& k) const { return j_.contains(k) && !j_.at(k).is_null(); }

  const json& raw(const std::string& k) {
    seen_.insert(k);
    return j_.at(k);
  }

  template <typename T>
  T get(const std::string& k, T fallback) {
    seen_.insert(k);
    if (!has(k)) return fallback;
    try {
      return j_.at(k).get<T>();
    } catch (const json::exception&) {
      throw ConfigError(where_ + "." + k + ": wrong type");
    }
  }

  double number(const std::string& k, double fallback) {
    const double v = get<double>(k, fallback);
    if (!std::isfinite(v)) throw ConfigError(where_ + "." + k + ": must be finite");
    return v;
  }

  std::size_t count(const std::string& k, std::size_t fallback) {
    seen_.insert(k);
    if (!has(k)) return fallback;
    const json& v = j_.at(k);
    if (!v.is_number_integer() || v.get<long long>() < 0) {
      throw ConfigError(where_ + "." + k + ": expected a non-negative integer");
    }
    return v.get<std::size_t>();
  }

  Dims dims(const std::string& k, Dims fallback) {
    seen_.insert(k);
    if (!has(k)) return fallback;
    const json& v = j_.at(k);
    if (v.is_array() && v.size() == 2 && v[0].is_number_integer() && v[1].is_number_integer() &&
        v[0].get<long long>() > 0 && v[1].get<long long>() > 0) {
      return {v[0].get<std::size_t>(), v[1].get<std::size_t>()};
    }
    throw ConfigError(where_ + "." + k + ": expected [height, width] with positive entries");
  }

  Section sub(const std::string& k) {
    seen_.insert(k);
    return Section(j_.at(k), where_ + "." + k);
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!seen_.count(it.key())) throw ConfigError(where_ + ": unknown key '" + it.key() + "'");
    }
  }

  const std::string& where() const { return where_; }

 private:
  const json& j_;
  std::string where_;
  std::set<std::string> seen_;
};

template <typename F>
auto translate(const std::string& where, F&& f) {
  try {
    return f();
  } catch (const ArgumentError& e) {
    throw ConfigError(where + ": " + e.what());
  } catch (const GeometryError& e) {
    throw ConfigError(where + ": " + e.what());
  } catch (const SizeError& e) {
    throw ConfigError(where + ": " + e.what());
  }
}

Model parse_model(Modality mod, Dims dims, const json& doc) {
  static const json empty = json::object();
  Section s(doc.is_null() ? empty : doc, "model");
  Model m;
  switch (mod) {
    case Modality::cdi: {
      double oh = 2.0, ow = 2.0;
      if (s.has("oversample")) {
        const json& o = s.raw("oversample");
        if (o.is_number()) {
          oh = ow = o.get<double>();
        } else if (o.is_array() && o.size() == 2 && o[0].is_number() && o[1].is_number()) {
          oh = o[0].get<double>();
          ow = o[1].get<double>();
        } else {
          throw ConfigError("model.oversample: expected a number or [h, w]");
        }
      }
      CdiModel c = translate("model", [&] { return CdiModel::make(dims, 2.0); });
      c.oversample_h = oh;
      c.oversample_w = ow;
      c.enforce_real = s.get<bool>("enforce_real", false);
      c.enforce_nonnegative = s.get<bool>("enforce_nonnegative", false);
      translate("model", [&] { c.validate(); return 0; });
      m = std::move(c);
      break;
    }
    case Modality::cdp: {
      const std::size_t masks = s.count("masks", 5);
      const auto seed = s.get<std::uint64_t>("mask_seed", 11);
      const auto law = s.get<std::string>("mask_law", "gaussian_phase");
      CdpModel c;
      if (law == "gaussian_phase") {
        c = translate("model", [&] { return CdpModel::gaussian_phase(dims, masks, seed); });
      } else if (law == "identity") {
        c = translate("model", [&] { return CdpModel::identity(dims, masks); });
      } else {
        throw ConfigError("model.mask_law: unknown law '" + law + "'");
      }
      c.combine = translate("model", [&] {
        return cdp_combine_from_string(s.get<std::string>("combine", "sequential"));
      });
      m = std::move(c);
      break;
    }
    case Modality::fpm: {
      FpmGeometry g;
      g.wavelength = s.number("wavelength", g.wavelength);
      g.na = s.number("na", g.na);
      g.led_pitch = s.number("led_pitch", g.led_pitch);
      g.led_height = s.number("led_height", g.led_height);
      g.grid = s.count("grid", g.grid);
      g.pixel_size = s.number("pixel_size", g.pixel_size);
      g.magnification = s.number("magnification", g.magnification);
      g.downsample = s.count("downsample", g.downsample);
      g.hr = dims;
      m = translate("model", [&] { return FpmModel::from_geometry(g); });
      break;
    }
  }
  s.finish();
  return m;
}

Enhancer parse_enhancer(Section s) {
  Enhancer e;
  e.kind = translate(s.where(), [&] { return enhancer_kind_from_string(s.get<std::string>("kind", "tv")); });
  e.strength = s.number("strength", 0.0);
  e.tv.iterations = int(s.count("tv_iterations", std::size_t(e.tv.iterations)));
  e.tv.step = s.number("tv_step", e.tv.step);
  e.gaussian_px_per_unit = s.number("gaussian_px_per_unit", e.gaussian_px_per_unit);
  e.median_px_per_unit = s.number("median_px_per_unit", e.median_px_per_unit);
  e.phase_scale = s.number("phase_scale", e.phase_scale);
  e.tile = s.dims("tile", {0, 0});
  e.tile_overlap = s.count("tile_overlap", e.tile_overlap);
  const auto command = s.get<std::string>("command", "");
  const auto timeout_ms = s.count("timeout_ms", 60000);
  const auto scratch = s.get<std::string>("scratch", "");
  if (e.kind == EnhancerKind::external) {
    if (command.empty()) throw ConfigError(s.where() + ": external enhancer needs 'command'");
    e.bridge = std::make_shared<ExternalBridge>(command, std::chrono::milliseconds(timeout_ms),
                                                std::filesystem::path(scratch));
  }
  s.finish();
  translate(s.where(), [&] { e.validate(); return 0; });
  return e;
}

AlgorithmSpec parse_algorithm(const json& doc, Modality mod, std::size_t index) {
  Section s(doc, "algorithms[" + std::to_string(index) + "]");
  AlgorithmSpec a;
  const auto kind = s.get<std::string>("kind", "");
  if (kind == "ap") a.kind = AlgorithmKind::ap;
  else if (kind == "lpr") a.kind = AlgorithmKind::lpr;
  else if (kind == "wf") a.kind = AlgorithmKind::wf;
  else throw ConfigError(s.where() + ".kind: expected ap, lpr or wf");
  a.name = s.get<std::string>("name", to_string(a.kind));
  if (a.name.empty() || a.name.find_first_of(",\n\"") != std::string::npos) {
    throw ConfigError(s.where() + ".name: must be nonempty without commas, quotes or newlines");
  }

  translate(s.where(), [&] {
    switch (a.kind) {
      case AlgorithmKind::ap: {
        a.ap = default_ap_params(mod);
        a.init = s.get<std::string>("init", "default");
        if (a.init != "default" && a.init != "truth") {
          throw ConfigError(s.where() + ".init: expected default or truth");
        }
        a.ap.max_iters = s.count("max_iters", a.ap.max_iters);
        a.ap.tol = s.number("tol", a.ap.tol);
        a.ap.variant = ap_variant_from_string(s.get<std::string>("variant", to_string(a.ap.variant)));
        a.ap.hio_beta = s.number("hio_beta", a.ap.hio_beta);
        a.ap.validate();
        break;
      }
      case AlgorithmKind::lpr: {
        a.lpr = default_lpr_params(mod);
        a.init = s.get<std::string>("init", "ap_warmstart");
        if (a.init == "ap_warmstart" || a.init == "adjoint") {
          a.lpr.init.kind = init_kind_from_string(a.init);
        } else if (a.init == "ap_result" || a.init == "truth") {
          a.lpr.init.kind = InitKind::provided;
        } else {
          throw ConfigError(s.where() + ".init: expected ap_warmstart, adjoint, ap_result or truth");
        }
        a.lpr.init.warmstart_iters = s.count("warmstart_iters", a.lpr.init.warmstart_iters);
        a.lpr.outer_max = s.count("outer_max", a.lpr.outer_max);
        a.lpr.inner_ap_iters = s.count("inner_ap_iters", a.lpr.inner_ap_iters);
        a.lpr.tol = s.number("tol", a.lpr.tol);
        a.lpr.strength_schedule = s.get<std::vector<double>>("strength_schedule", {});
        a.lpr.schedule_gain = s.number("schedule_gain", a.lpr.schedule_gain);
        a.lpr.schedule_decay = s.number("schedule_decay", a.lpr.schedule_decay);
        a.lpr.channel_policy =
            channel_policy_from_string(s.get<std::string>("channel_policy", to_string(a.lpr.channel_policy)));
        static const json tv = {{"kind", "tv"}};
        a.enhancer = parse_enhancer(s.has("enhancer") ? s.sub("enhancer") : Section(tv, s.where() + ".enhancer"));
        // Provided-init validation happens once the field exists.
        LprParams check = a.lpr;
        if (check.init.kind == InitKind::provided) check.init.kind = InitKind::adjoint;
        check.validate();
        break;
      }
      case AlgorithmKind::wf: {
        a.init = s.get<std::string>("init", to_string(a.wf.init));
        a.wf.init = wf_init_from_string(a.init);
        a.wf.max_iters = s.count("max_iters", a.wf.max_iters);
        a.wf.mu_max = s.number("mu_max", a.wf.mu_max);
        a.wf.t0 = s.number("t0", a.wf.t0);
        a.wf.tol = s.number("tol", a.wf.tol);
        a.wf.power_iters = s.count("power_iters", a.wf.power_iters);
        a.wf.seed = s.get<std::uint64_t>("seed", a.wf.seed);
        a.wf.validate();
        break;
      }
    }
    return 0;
  });
  s.finish();
  return a;
}

RealImage fit_to_dims(const RealImage& img, Dims dims, const std::string& what) {
  if (img.height() < dims.height || img.width() < dims.width) {
    throw ConfigError(what + ": image is " + to_string(dims_of(img)) + ", smaller than dims " +
                      to_string(dims));
  }
  return crop_center(img, dims);
}

ComplexField combine_truth(const RealImage& amp01, const TruthSpec& t, Dims dims) {
  RealImage amp = amp01;
  for (auto& v : amp) v = t.lo + (t.hi - t.lo) * v;
  if (t.phase_pattern.empty()) return to_complex(amp);
  const RealImage ph = make_pattern(t.phase_pattern, dims, t.phase_seed, 0.0, t.phase_max);
  return from_polar(amp, ph);
}

ComplexField procedural_truth(const TruthSpec& t, Dims dims, std::uint64_t seed) {
  if (t.pattern == "random_complex") return random_complex(dims, seed);
  const RealImage amp = make_pattern(t.pattern, dims, seed, t.lo, t.hi);
  if (t.phase_pattern.empty()) return to_complex(amp);
  const RealImage ph = make_pattern(t.phase_pattern, dims, t.phase_seed, 0.0, t.phase_max);
  return from_polar(amp, ph);
}

}  // namespace

std::string to_string(AlgorithmKind k) {
  switch (k) {
    case AlgorithmKind::ap: return "ap";
    case AlgorithmKind::lpr: return "lpr";
    case AlgorithmKind::wf: return "wf";
  }
  return "?";
}

void ExperimentConfig::validate() const {
  if (algorithms.empty()) throw ConfigError("config: at least one algorithm is required");
  if (snr_db.empty()) throw ConfigError("config: noise.snr_db must list at least one entry");
  for (const auto& s : snr_db) {
    if (s && !std::isfinite(*s)) throw ConfigError("config: SNR entries must be finite");
  }
  if (object_dims(model) != dims) throw ConfigError("config: model dims disagree with dims");
  if (threads < 1) throw ConfigError("config: threads must be >= 1");
  if (scoring.max_shift < 0) throw ConfigError("scoring.max_shift must be >= 0");
  for (const auto& a : algorithms) {
    if (a.kind == AlgorithmKind::lpr && a.init == "ap_result") {
      bool found = false;
      for (const auto& b : algorithms) found = found || b.kind == AlgorithmKind::ap;
      if (!found) throw ConfigError("config: init ap_result needs an ap algorithm in the list");
    }
  }
}

ExperimentConfig parse_config(const json& doc, const std::filesystem::path& base_dir) {
  ExperimentConfig cfg;
  cfg.source = doc;
  Section s(doc, "config");
  cfg.name = s.get<std::string>("name", cfg.name);
  const auto mod_name = s.get<std::string>("modality", "");
  const Modality mod = translate("config.modality", [&] { return modality_from_string(mod_name); });
  cfg.dims = s.dims("dims", cfg.dims);
  cfg.model = parse_model(mod, cfg.dims, s.has("model") ? s.raw("model") : json());

  if (s.has("truth")) {
    Section t = s.sub("truth");
    const auto image = t.get<std::string>("image", "");
    if (!image.empty()) {
      std::filesystem::path p = image;
      if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
      cfg.truth.image = p;
    }
    cfg.truth.pattern = t.get<std::string>("pattern", cfg.truth.pattern);
    cfg.truth.seed = t.get<std::uint64_t>("seed", cfg.truth.seed);
    if (t.has("range")) {
      const auto r = t.get<std::vector<double>>("range", {});
      if (r.size() != 2 || !(r[0] < r[1])) throw ConfigError("truth.range: expected [lo, hi], lo < hi");
      cfg.truth.lo = r[0];
      cfg.truth.hi = r[1];
    }
    if (t.has("phase")) {
      Section p = t.sub("phase");
      cfg.truth.phase_pattern = p.get<std::string>("pattern", "phantom");
      cfg.truth.phase_seed = p.get<std::uint64_t>("seed", cfg.truth.phase_seed);
      cfg.truth.phase_max = p.number("max", cfg.truth.phase_max);
      p.finish();
    }
    t.finish();
  }

  if (!s.has("noise")) throw ConfigError("config: missing 'noise'");
  {
    Section n = s.sub("noise");
    if (!n.has("snr_db") || !n.raw("snr_db").is_array()) {
      throw ConfigError("noise.snr_db: expected a list (null entries are noiseless)");
    }
    for (const auto& v : n.raw("snr_db")) {
      if (v.is_null()) cfg.snr_db.push_back(std::nullopt);
      else if (v.is_number()) cfg.snr_db.push_back(v.get<double>());
      else throw ConfigError("noise.snr_db: entries must be numbers or null");
    }
    // rows come out in ascending SNR, noiseless last
    std::stable_sort(cfg.snr_db.begin(), cfg.snr_db.end(), [](const auto& a, const auto& b) {
      return a && (!b || *a < *b);
    });
    cfg.noise_seed = n.get<std::uint64_t>("seed", cfg.noise_seed);
    n.finish();
  }

  if (!s.has("algorithms") || !s.raw("algorithms").is_array()) {
    throw ConfigError("config: 'algorithms' must be a list");
  }
  {
    const json& algs = s.raw("algorithms");
    for (std::size_t i = 0; i < algs.size(); ++i) cfg.algorithms.push_back(parse_algorithm(algs[i], mod, i));
    std::set<std::string> names;
    for (const auto& a : cfg.algorithms) {
      if (!names.insert(a.name).second) throw ConfigError("config: duplicate algorithm name '" + a.name + "'");
    }
  }

  if (s.has("scoring")) {
    Section sc = s.sub("scoring");
    const json& amb = sc.has("ambiguity") ? sc.raw("ambiguity") : json("auto");
    if (amb.is_boolean()) cfg.scoring.ambiguity = amb.get<bool>();
    else if (amb == "auto") cfg.scoring.ambiguity = mod == Modality::cdi;
    else throw ConfigError("scoring.ambiguity: expected true, false or \"auto\"");
    cfg.scoring.max_shift = int(sc.count("max_shift", std::size_t(cfg.scoring.max_shift)));
    sc.finish();
  } else {
    cfg.scoring.ambiguity = mod == Modality::cdi;
  }

  if (s.has("output")) {
    Section o = s.sub("output");
    const auto dir = o.get<std::string>("dir", "");
    if (!dir.empty()) cfg.output.dir = dir;
    cfg.output.images = o.get<bool>("images", true);
    cfg.output.traces = o.get<bool>("traces", true);
    cfg.output.timing = o.get<bool>("timing", true);
    o.finish();
  }
  cfg.threads = s.count("threads", 1);
  s.finish();
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  json doc;
  try {
    doc = json::parse(in, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return parse_config(doc, path.parent_path());
}

ComplexField make_truth(const ExperimentConfig& cfg) {
  if (!cfg.truth.image.empty()) {
    RealImage g;
    try {
      g = read_png_gray(cfg.truth.image);
    } catch (const IoError& e) {
      throw ConfigError(std::string("truth.image: ") + e.what());
    }
    return combine_truth(fit_to_dims(g, cfg.dims, "truth.image"), cfg.truth, cfg.dims);
  }
  return translate("truth", [&] { return procedural_truth(cfg.truth, cfg.dims, cfg.truth.seed); });
}

std::vector<ComplexField> make_truth_channels(const ExperimentConfig& cfg) {
  std::vector<ComplexField> out;
  if (!cfg.truth.image.empty()) {
    std::vector<RealImage> ch;
    try {
      ch = read_png_channels(cfg.truth.image);
    } catch (const IoError& e) {
      throw ConfigError(std::string("truth.image: ") + e.what());
    }
    for (const auto& c : ch) out.push_back(combine_truth(fit_to_dims(c, cfg.dims, "truth.image"), cfg.truth, cfg.dims));
    return out;
  }
  for (std::uint64_t c = 0; c < 3; ++c) {
    out.push_back(translate("truth", [&] { return procedural_truth(cfg.truth, cfg.dims, cfg.truth.seed + c); }));
  }
  return out;
}

}  // namespace lpr
