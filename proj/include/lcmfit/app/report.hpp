#pragma once

#include <filesystem>
#include <ostream>

#include "json.hpp"

#include "lcmfit/app/pipeline.hpp"

namespace lcmfit::app {

/// JSON form of a report; layout documented by docs/report.schema.json. Infinite
/// interval ends and absent blocks are null. Doubles are written in their shortest
/// round-trip form.
nlohmann::json report_to_json(const Report& report);

void write_report(const Report& report, const std::filesystem::path& path);

/// CSV with columns target_id, x_label, observed, lower, upper, alpha: one row per
/// solved interval. Throws IoError when the file cannot be written.
void emit_plot_data(const Report& report, std::ostream& out);
void emit_plot_data(const Report& report, const std::filesystem::path& path);

}  // namespace lcmfit::app
