#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include <json.hpp>

#include "fwf/kernel_stats.hpp"
#include "fwf/methods.hpp"
#include "fwf/signal_gen.hpp"

namespace fwf {

/// Doubles as text with 17 significant digits.
std::string format_double(double x);

/// Single-column CSV with header `value`.
void write_series_csv(std::ostream& os, const Series& s);
Series read_series_csv(std::istream& is, const std::string& source = "<stream>");
/// Throws IoError naming the path when the file cannot be opened.
Series read_series_csv(const std::filesystem::path& path);

/// Two-column CSV with header `lag,value`.
void write_lag_profile_csv(std::ostream& os, const LagProfile& p);

/// Affine maps applied to inputs and targets before the model sees them;
/// predictions are mapped back with the target statistics.
struct Standardization {
    bool enabled = false;
    double input_mean = 0.0;
    double input_std = 1.0;
    double target_mean = 0.0;
    double target_std = 1.0;
};

/// A fitted model plus what is needed to apply it to raw series.
struct SavedModel {
    Model model;
    std::size_t order = 0;
    std::size_t horizon = 0;
    Standardization standardization;
};

inline constexpr int kModelFormatVersion = 1;

nlohmann::json to_json(const SavedModel& m);
/// Throws IoError on a malformed or unsupported document.
SavedModel saved_model_from_json(const nlohmann::json& j);

void save_model(const std::filesystem::path& path, const SavedModel& m);
SavedModel load_model(const std::filesystem::path& path);

}  // namespace fwf
