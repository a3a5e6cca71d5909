#include "lpr/report_io.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

namespace lpr {

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

namespace {

std::string cell(const std::vector<double>& v, std::size_t k) {
  return k < v.size() ? format_number(v[k]) : std::string();
}

// JSON has no NaN/Inf; those become null.
nlohmann::json num(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(); }

nlohmann::json series(const std::vector<double>& v) {
  nlohmann::json a = nlohmann::json::array();
  for (double x : v) a.push_back(num(x));
  return a;
}

}  // namespace

std::string to_csv(const RunReport& r) {
  std::ostringstream os;
  os << "iteration,residual,intensity_change,psnr,ssim\n";
  for (std::size_t k = 0; k < r.iterations; ++k) {
    os << k + 1 << ',' << cell(r.residuals, k) << ',' << cell(r.intensity_changes, k) << ','
       << cell(r.psnr, k) << ',' << cell(r.ssim, k) << '\n';
  }
  return os.str();
}

std::string to_csv(const LprTrace& t) {
  std::ostringstream os;
  os << "iteration,residual,intensity_change,psnr,ssim,strength\n";
  for (std::size_t k = 0; k < t.iterations; ++k) {
    os << k + 1 << ',' << cell(t.residuals, k) << ',' << cell(t.intensity_changes, k) << ','
       << cell(t.psnr, k) << ',' << cell(t.ssim, k) << ',' << cell(t.strengths, k) << '\n';
  }
  return os.str();
}

nlohmann::json to_json(const RunReport& r) {
  nlohmann::json j;
  j["iterations"] = r.iterations;
  j["converged"] = r.converged;
  j["wall_seconds"] = num(r.wall_seconds);
  j["final_residual"] = r.residuals.empty() ? nlohmann::json() : num(r.residuals.back());
  j["residuals"] = series(r.residuals);
  j["intensity_changes"] = series(r.intensity_changes);
  if (!r.psnr.empty()) j["psnr"] = series(r.psnr);
  if (!r.ssim.empty()) j["ssim"] = series(r.ssim);
  return j;
}

nlohmann::json to_json(const LprTrace& t) {
  nlohmann::json j;
  j["iterations"] = t.iterations;
  j["converged"] = t.converged;
  j["wall_seconds"] = num(t.wall_seconds);
  j["init_seconds"] = num(t.init_seconds);
  j["final_residual"] = t.residuals.empty() ? nlohmann::json() : num(t.residuals.back());
  j["residuals"] = series(t.residuals);
  j["intensity_changes"] = series(t.intensity_changes);
  j["strengths"] = series(t.strengths);
  j["schedule"] = series(t.schedule);
  if (!t.psnr.empty()) j["psnr"] = series(t.psnr);
  if (!t.ssim.empty()) j["ssim"] = series(t.ssim);
  return j;
}

}  // namespace lpr
