#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "fusion/json_io.hpp"
#include "fusion/metrics.hpp"

namespace fusion {

void to_json(Json& j, const MetricsReport& r);
void from_json(const Json& j, MetricsReport& r);

/// Stable-key JSON text of a report.
std::string report_json(const MetricsReport& r);
/// Header row plus one summary row.
std::string report_csv(const MetricsReport& r);
/// One <path> per ROC curve.
std::string roc_svg(const MetricsReport& r);

/// Named series drawn against a shared x axis (epochs).
using Series = std::pair<std::string, std::vector<double>>;
std::string curves_svg(const std::string& title, const std::vector<Series>& series);

struct RenderFormats {
  bool json = true;
  bool csv = true;
  bool svg = false;
};

/// Writes `<stem>.json`, `<stem>.csv` and `<stem>_roc.svg` under `dir` as
/// selected. Throws IoError if the directory cannot be written.
std::vector<std::filesystem::path> render_report(const MetricsReport& r,
                                                 const std::filesystem::path& dir,
                                                 const RenderFormats& formats,
                                                 const std::string& stem = "report");

MetricsReport load_report(const std::filesystem::path& path);

void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

}  // namespace fusion
