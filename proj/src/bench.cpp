#include "lpr/bench.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <thread>

#include "lpr/image_io.hpp"
#include "lpr/metrics.hpp"
#include "lpr/report_io.hpp"

namespace lpr {

using nlohmann::json;

// ------------------------------------------------------------------ scoring

namespace {

ComplexField group_member(const ComplexField& est, bool flip, int dy, int dx) {
  const long h = long(est.height()), w = long(est.width());
  ComplexField out(est.height(), est.width());
  for (long r = 0; r < h; ++r) {
    for (long c = 0; c < w; ++c) {
      long sr = ((r - dy) % h + h) % h, sc = ((c - dx) % w + w) % w;
      if (flip) {
        sr = h - 1 - sr;
        sc = w - 1 - sc;
      }
      const cplx z = est(std::size_t(sr), std::size_t(sc));
      out(std::size_t(r), std::size_t(c)) = flip ? std::conj(z) : z;
    }
  }
  return out;
}

}  // namespace

Score score(const ComplexField& est, const ComplexField& truth, const ScoreOptions& opts) {
  require_same_shape(est, truth, "score");
  require_nonempty(est, "score");
  if (opts.max_shift < 0) throw ArgumentError("score: max_shift must be >= 0");
  const RealImage ref = abs(truth);
  const double peak = max_value(ref);
  const int s = opts.ambiguity ? opts.max_shift : 0;

  Score best;
  best.psnr = -INFINITY;
  for (int flip = 0; flip < (opts.ambiguity ? 2 : 1); ++flip) {
    for (int dy = -s; dy <= s; ++dy) {
      for (int dx = -s; dx <= s; ++dx) {
        ComplexField cand = (flip || dy || dx) ? group_member(est, flip != 0, dy, dx) : est;
        ComplexField aligned = global_phase_align(cand, truth).field;
        const double p = psnr(ref, abs(aligned), peak);
        if (p > best.psnr) {
          best.psnr = p;
          best.flipped = flip != 0;
          best.shift_row = dy;
          best.shift_col = dx;
          best.aligned = std::move(aligned);
        }
      }
    }
  }
  const RealImage amp = abs(best.aligned);
  best.ssim = (amp.height() >= 11 && amp.width() >= 11) ? ssim(ref, amp, peak) : NAN;
  best.phase_rmse = wrapped_phase_rmse(arg(truth), arg(best.aligned));
  return best;
}

// ------------------------------------------------------------------ csv

namespace {

std::string fixed(double v, int digits = 6) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string snr_label(const std::optional<double>& snr) {
  if (!snr) return "inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", *snr);
  return buf;
}

std::string csv_safe(std::string s) {
  for (auto& c : s) {
    if (c == ',' || c == '\n' || c == '\r' || c == '"') c = c == ',' ? ';' : ' ';
  }
  return s;
}

std::string file_safe(const std::string& s) {
  std::string out = s;
  for (auto& c : out) {
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '-' && c != '_' && c != '.') c = '_';
  }
  return out;
}

json num(double v) { return std::isfinite(v) ? json(v) : json(); }

}  // namespace

std::string rows_to_csv(const std::vector<BenchRow>& rows, bool timing) {
  std::string out = std::string(kCsvHeader) + "\n";
  for (const auto& r : rows) {
    out += csv_safe(r.algorithm) + ',' + snr_label(r.snr_db) + ',' + fixed(r.psnr_db) + ',' +
           fixed(r.ssim) + ',' + (timing ? fixed(r.wall_seconds) : std::string("NA")) + ',' +
           std::to_string(r.iterations) + ',' + (r.converged ? "true" : "false") + ',' +
           csv_safe(r.status) + '\n';
  }
  return out;
}

// ------------------------------------------------------------------ manifest helpers

namespace {

json model_to_json(const Model& m) {
  json j;
  j["modality"] = to_string(modality_of(m));
  const Dims d = object_dims(m);
  j["dims"] = {d.height, d.width};
  if (const auto* c = std::get_if<CdiModel>(&m)) {
    j["oversample"] = {c->oversample_h, c->oversample_w};
    j["padded"] = {c->padded().height, c->padded().width};
    j["enforce_real"] = c->enforce_real;
    j["enforce_nonnegative"] = c->enforce_nonnegative;
  } else if (const auto* c = std::get_if<CdpModel>(&m)) {
    j["masks"] = c->masks.size();
    j["mask_seed"] = c->mask_seed;
    j["mask_law"] = c->mask_law;
    j["combine"] = to_string(c->combine);
  } else {
    const auto& f = std::get<FpmModel>(m);
    const auto& g = f.geometry;
    j["wavelength"] = g.wavelength;
    j["na"] = g.na;
    j["led_pitch"] = g.led_pitch;
    j["led_height"] = g.led_height;
    j["grid"] = g.grid;
    j["pixel_size"] = g.pixel_size;
    j["magnification"] = g.magnification;
    j["downsample"] = g.downsample;
    j["lr_dims"] = {f.lr.height, f.lr.width};
    j["pupil_radius_px"] = f.pupil_radius_px;
    j["leds"] = f.led_count();
  }
  return j;
}

json enhancer_to_json(const Enhancer& e) {
  json j;
  j["kind"] = to_string(e.kind);
  j["strength"] = e.strength;
  j["tv_iterations"] = e.tv.iterations;
  j["tv_step"] = e.tv.step;
  j["gaussian_px_per_unit"] = e.gaussian_px_per_unit;
  j["median_px_per_unit"] = e.median_px_per_unit;
  j["phase_scale"] = e.phase_scale;
  j["tile"] = {e.tile.height, e.tile.width};
  j["tile_overlap"] = e.tile_overlap;
  if (e.bridge) {
    j["command"] = e.bridge->command();
    j["timeout_ms"] = e.bridge->timeout().count();
  }
  return j;
}

json algorithm_to_json(const AlgorithmSpec& a) {
  json j;
  j["name"] = a.name;
  j["kind"] = to_string(a.kind);
  j["init"] = a.init;
  switch (a.kind) {
    case AlgorithmKind::ap:
      j["max_iters"] = a.ap.max_iters;
      j["tol"] = a.ap.tol;
      j["variant"] = to_string(a.ap.variant);
      j["hio_beta"] = a.ap.hio_beta;
      break;
    case AlgorithmKind::lpr:
      j["outer_max"] = a.lpr.outer_max;
      j["inner_ap_iters"] = a.lpr.inner_ap_iters;
      j["tol"] = a.lpr.tol;
      j["warmstart_iters"] = a.lpr.init.warmstart_iters;
      j["strength_schedule"] = a.lpr.strength_schedule;
      j["schedule_gain"] = a.lpr.schedule_gain;
      j["schedule_decay"] = a.lpr.schedule_decay;
      j["channel_policy"] = to_string(a.lpr.channel_policy);
      j["enhancer"] = enhancer_to_json(a.enhancer);
      break;
    case AlgorithmKind::wf:
      j["max_iters"] = a.wf.max_iters;
      j["mu_max"] = a.wf.mu_max;
      j["t0"] = a.wf.t0;
      j["tol"] = a.wf.tol;
      j["power_iters"] = a.wf.power_iters;
      j["seed"] = a.wf.seed;
      break;
  }
  return j;
}

void write_text(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw IoError("cannot write " + p.string());
  out << text;
  if (!out) throw IoError("write failed: " + p.string());
}

void write_field_images(const std::filesystem::path& base, const ComplexField& f, double amp_peak) {
  write_png_gray(base.string() + "_amp.png", abs(f), 0.0, amp_peak > 0 ? amp_peak : 1.0);
  write_png_gray(base.string() + "_phase.png", arg(f), -std::numbers::pi, std::numbers::pi);
}

using Clock = std::chrono::steady_clock;

struct CellOutput {
  BenchRow row;
  ComplexField raw;      // solver output as returned
  ComplexField aligned;  // best ambiguity-group member, phase-aligned
  std::string trace_csv;
  json report;
  Score score;
  bool scored = false;
};

// Runs one algorithm on one stack. Never throws for solver trouble; the
// status column carries it.
CellOutput run_cell(const AlgorithmSpec& alg, const MeasurementSet& I, const Model& m,
                    const ComplexField& truth, const ScoreOptions& scoring,
                    const ComplexField* ap_field, double ap_seconds) {
  CellOutput out;
  BenchRow& row = out.row;
  row.algorithm = alg.name;
  const auto t0 = Clock::now();
  std::optional<ComplexField> field;
  try {
    switch (alg.kind) {
      case AlgorithmKind::ap: {
        const ComplexField init = alg.init == "truth" ? truth : default_init(I, m);
        ApResult r = ap_solve(I, m, init, alg.ap);
        row.iterations = r.report.iterations;
        row.converged = r.report.converged;
        row.wall_seconds = r.report.wall_seconds;
        out.trace_csv = to_csv(r.report);
        out.report = to_json(r.report);
        field = std::move(r.field);
        break;
      }
      case AlgorithmKind::lpr: {
        LprParams p = alg.lpr;
        if (alg.init == "ap_result") {
          if (!ap_field) throw std::runtime_error("no AP result to start from");
          p.init.field = *ap_field;
        } else if (alg.init == "truth") {
          p.init.field = truth;
        }
        LprResult r = lpr_solve(I, m, alg.enhancer, p);
        row.iterations = r.trace.iterations;
        row.converged = r.trace.converged;
        if (alg.init == "ap_result") {
          // Shared warm start: report the excess time only.
          row.wall_seconds = r.trace.wall_seconds;
          row.init_seconds = ap_seconds;
        } else {
          row.wall_seconds = r.trace.init_seconds + r.trace.wall_seconds;
          row.init_seconds = r.trace.init_seconds;
        }
        out.trace_csv = to_csv(r.trace);
        out.report = to_json(r.trace);
        field = std::move(r.field);
        break;
      }
      case AlgorithmKind::wf: {
        ApResult r = wf_baseline(I, m, alg.wf);
        row.iterations = r.report.iterations;
        row.converged = r.report.converged;
        row.wall_seconds = r.report.wall_seconds;
        out.trace_csv = to_csv(r.report);
        out.report = to_json(r.report);
        field = std::move(r.field);
        break;
      }
    }
  } catch (const DivergenceError& e) {
    row.status = "diverged";
    row.iterations = e.iteration();
    row.wall_seconds = std::chrono::duration<double>(Clock::now() - t0).count();
    field = e.last_finite();
    out.report = {{"error", e.what()}};
  } catch (const std::exception& e) {
    row.status = std::string("failed: ") + e.what();
    row.wall_seconds = std::chrono::duration<double>(Clock::now() - t0).count();
    out.report = {{"error", e.what()}};
  }

  if (field) {
    try {
      out.score = score(*field, truth, scoring);
      out.scored = true;
      row.psnr_db = out.score.psnr;
      row.ssim = out.score.ssim;
      row.phase_rmse = out.score.phase_rmse;
      out.aligned = out.score.aligned;
      out.raw = std::move(*field);
    } catch (const std::exception& e) {
      row.status = std::string("failed: scoring: ") + e.what();
      field.reset();
    }
  }
  if (!field) {
    row.psnr_db = row.ssim = row.phase_rmse = NAN;
  }
  return out;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const ComplexField truth = make_truth(cfg);
  const MeasurementSet clean = forward(truth, cfg.model);
  const std::size_t na = cfg.algorithms.size(), ns = cfg.snr_db.size();
  std::vector<CellOutput> cells(na * ns);

  // AP rows run first inside a group so LPR can start from them.
  std::vector<std::size_t> order;
  for (std::size_t a = 0; a < na; ++a) {
    if (cfg.algorithms[a].kind == AlgorithmKind::ap) order.push_back(a);
  }
  const std::size_t first_ap = order.empty() ? na : order.front();
  for (std::size_t a = 0; a < na; ++a) {
    if (cfg.algorithms[a].kind != AlgorithmKind::ap) order.push_back(a);
  }

  auto run_group = [&](std::size_t si) {
    const auto& snr = cfg.snr_db[si];
    const MeasurementSet I = snr ? add_wgn(clean, {*snr, cfg.noise_seed + si}) : clean;
    for (std::size_t a : order) {
      const ComplexField* ap_field = nullptr;
      double ap_seconds = 0.0;
      if (first_ap < na) {
        const CellOutput& ap = cells[first_ap * ns + si];
        if (!ap.raw.empty() && ap.row.status == "ok") ap_field = &ap.raw;
        ap_seconds = ap.row.wall_seconds;
      }
      CellOutput c = run_cell(cfg.algorithms[a], I, cfg.model, truth, cfg.scoring, ap_field, ap_seconds);
      c.row.snr_db = snr;
      cells[a * ns + si] = std::move(c);
    }
  };

  const std::size_t workers = std::min(cfg.threads, ns);
  if (workers <= 1) {
    for (std::size_t si = 0; si < ns; ++si) run_group(si);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t si = next++; si < ns; si = next++) run_group(si);
      });
    }
    for (auto& t : pool) t.join();
  }

  ExperimentResult res;
  json cells_json = json::array();
  const double peak = max_value(abs(truth));
  const auto& dir = cfg.output.dir;
  if (!dir.empty()) std::filesystem::create_directories(dir);
  for (std::size_t a = 0; a < na; ++a) {
    for (std::size_t si = 0; si < ns; ++si) {
      CellOutput& c = cells[a * ns + si];
      json cj;
      cj["algorithm"] = c.row.algorithm;
      cj["snr_db"] = c.row.snr_db ? json(*c.row.snr_db) : json();
      cj["noise_seed"] = c.row.snr_db ? json(cfg.noise_seed + si) : json();
      cj["psnr_db"] = num(c.row.psnr_db);
      cj["ssim"] = num(c.row.ssim);
      cj["phase_rmse"] = num(c.row.phase_rmse);
      cj["iterations"] = c.row.iterations;
      cj["converged"] = c.row.converged;
      cj["status"] = c.row.status;
      if (c.scored) {
        cj["ambiguity"] = {{"flipped", c.score.flipped},
                           {"shift", {c.score.shift_row, c.score.shift_col}}};
      }
      if (cfg.output.timing) {
        cj["wall_seconds"] = c.row.wall_seconds;
        cj["init_seconds"] = c.row.init_seconds;
      }
      if (!dir.empty()) {
        const std::string base = file_safe(c.row.algorithm) + "_snr" + snr_label(c.row.snr_db);
        json files;
        if (!c.aligned.empty()) {
          write_lprf_complex(dir / (base + ".lprf"), c.aligned);
          files["field"] = base + ".lprf";
          if (cfg.output.images) {
            write_field_images(dir / base, c.aligned, peak);
            files["amplitude_png"] = base + "_amp.png";
            files["phase_png"] = base + "_phase.png";
          }
        }
        if (cfg.output.traces && !c.trace_csv.empty()) {
          write_text(dir / (base + "_trace.csv"), c.trace_csv);
          files["trace"] = base + "_trace.csv";
          json rep = c.report;
          if (!cfg.output.timing) {
            rep.erase("wall_seconds");
            rep.erase("init_seconds");
          }
          write_text(dir / (base + "_report.json"), rep.dump(2) + "\n");
          files["report"] = base + "_report.json";
        }
        cj["files"] = files;
      }
      cells_json.push_back(cj);
      res.rows.push_back(c.row);
      res.fields.push_back(std::move(c.aligned));
    }
  }

  json resolved = json::array();
  for (const auto& a : cfg.algorithms) resolved.push_back(algorithm_to_json(a));
  json snrs = json::array();
  for (const auto& s : cfg.snr_db) snrs.push_back(s ? json(*s) : json());
  res.manifest = {
      {"name", cfg.name},
      {"config", cfg.source},
      {"model", model_to_json(cfg.model)},
      {"algorithms", resolved},
      {"noise", {{"snr_db", snrs}, {"seed", cfg.noise_seed}, {"seed_rule", "seed + snr index"}}},
      {"scoring", {{"ambiguity", cfg.scoring.ambiguity}, {"max_shift", cfg.scoring.max_shift}}},
      {"threads", cfg.threads},
      {"cells", cells_json},
      {"csv", "results.csv"},
  };
  if (!dir.empty()) {
    write_text(dir / "results.csv", rows_to_csv(res.rows, cfg.output.timing));
    write_text(dir / "manifest.json", res.manifest.dump(2) + "\n");
    if (cfg.output.images) write_field_images(dir / "truth", truth, peak);
  }
  return res;
}

Reconstruction reconstruct(const MeasurementSet& I, const Model& m, const AlgorithmSpec& alg,
                           const ComplexField* truth_for_init) {
  Reconstruction out;
  switch (alg.kind) {
    case AlgorithmKind::ap: {
      ComplexField init;
      if (alg.init == "truth") {
        if (!truth_for_init) throw ArgumentError("reconstruct: init 'truth' needs a reference field");
        init = *truth_for_init;
      } else {
        init = default_init(I, m);
      }
      ApResult r = ap_solve(I, m, init, alg.ap);
      out.field = std::move(r.field);
      out.report = to_json(r.report);
      out.csv = to_csv(r.report);
      break;
    }
    case AlgorithmKind::lpr: {
      LprParams p = alg.lpr;
      double ap_seconds = 0.0;
      if (alg.init == "ap_result") {
        ApResult ap = ap_solve(I, m, default_init(I, m), default_ap_params(modality_of(m)));
        ap_seconds = ap.report.wall_seconds;
        p.init.field = std::move(ap.field);
      } else if (alg.init == "truth") {
        if (!truth_for_init) throw ArgumentError("reconstruct: init 'truth' needs a reference field");
        p.init.field = *truth_for_init;
      }
      LprResult r = lpr_solve(I, m, alg.enhancer, p);
      out.field = std::move(r.field);
      out.report = to_json(r.trace);
      if (alg.init == "ap_result") out.report["init_seconds"] = ap_seconds;
      out.csv = to_csv(r.trace);
      break;
    }
    case AlgorithmKind::wf: {
      ApResult r = wf_baseline(I, m, alg.wf);
      out.field = std::move(r.field);
      out.report = to_json(r.report);
      out.csv = to_csv(r.report);
      break;
    }
  }
  out.report["algorithm"] = algorithm_to_json(alg);
  out.report["model"] = model_to_json(m);
  return out;
}

}  // namespace lpr
