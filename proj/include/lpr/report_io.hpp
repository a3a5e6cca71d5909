#pragma once

#include <string>

#include <json.hpp>

#include "lpr/lpr_solver.hpp"

namespace lpr {

/// Shortest round-trip decimal text for a double ("nan", "inf", "-inf" for
/// non-finite values).
std::string format_number(double v);

/// One row per iteration:
/// iteration,residual,intensity_change,psnr,ssim (empty cells when untraced).
std::string to_csv(const RunReport& r);
/// Same columns plus strength.
std::string to_csv(const LprTrace& t);

nlohmann::json to_json(const RunReport& r);
nlohmann::json to_json(const LprTrace& t);

}  // namespace lpr
