#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>

#include "cellcount/dataset.hpp"
#include "cellcount/predictors.hpp"

namespace cellcount {

// Plain-text key=value configuration ('#' comments, blank lines ignored).
// Keys are namespaced render.*, train.*, ensemble.*, scenario.*.
struct Config {
    std::map<std::string, std::string> values;

    bool has(const std::string& key) const { return values.count(key) != 0; }
    std::string get_string(const std::string& key, const std::string& fallback) const;
    long long get_int(const std::string& key, long long fallback) const;
    double get_real(const std::string& key, double fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;
};

Config parse_config(std::istream& in);
Config load_config(const std::filesystem::path& path);

// Applies render.* keys on top of the defaults: image_width, image_height,
// radius_min, radius_max, nuclei_peak, body_peak, body_radius_multiplier,
// sigma_l1, sigma_l23, sigma_l48, background, max_overlap_fraction.
PlateRenderConfig render_config_from(const Config& config);

// train.* keys: learning_rate, epochs, l2_penalty.
TrainingConfig training_config_from(const Config& config);

}  // namespace cellcount
