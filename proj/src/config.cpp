#include "cellcount/config.hpp"

#include <fstream>
#include <sstream>

#include "cellcount/errors.hpp"

namespace cellcount {

namespace {

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) return {};
    const auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

}  // namespace

std::string Config::get_string(const std::string& key, const std::string& fallback) const {
    const auto it = values.find(key);
    return it == values.end() ? fallback : it->second;
}

long long Config::get_int(const std::string& key, long long fallback) const {
    const auto it = values.find(key);
    if (it == values.end()) return fallback;
    try {
        std::size_t used = 0;
        const long long v = std::stoll(it->second, &used);
        if (used != it->second.size()) throw std::invalid_argument(it->second);
        return v;
    } catch (const std::exception&) {
        throw SyntaxError("config key " + key + ": not an integer: " + it->second);
    }
}

double Config::get_real(const std::string& key, double fallback) const {
    const auto it = values.find(key);
    if (it == values.end()) return fallback;
    try {
        std::size_t used = 0;
        const double v = std::stod(it->second, &used);
        if (used != it->second.size()) throw std::invalid_argument(it->second);
        return v;
    } catch (const std::exception&) {
        throw SyntaxError("config key " + key + ": not a number: " + it->second);
    }
}

bool Config::get_bool(const std::string& key, bool fallback) const {
    const auto it = values.find(key);
    if (it == values.end()) return fallback;
    if (it->second == "true" || it->second == "1") return true;
    if (it->second == "false" || it->second == "0") return false;
    throw SyntaxError("config key " + key + ": not a boolean: " + it->second);
}

Config parse_config(std::istream& in) {
    Config config;
    std::string line;
    int line_number = 0;
    while (std::getline(in, line)) {
        ++line_number;
        const std::string stripped = trim(line);
        if (stripped.empty() || stripped.front() == '#') continue;
        const auto eq = stripped.find('=');
        if (eq == std::string::npos) {
            throw SyntaxError("config line " + std::to_string(line_number) +
                              ": expected key=value, got: " + stripped);
        }
        const std::string key = trim(stripped.substr(0, eq));
        const std::string value = trim(stripped.substr(eq + 1));
        if (key.empty()) {
            throw SyntaxError("config line " + std::to_string(line_number) + ": empty key");
        }
        config.values[key] = value;
    }
    return config;
}

Config load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config: " + path.string());
    return parse_config(in);
}

PlateRenderConfig render_config_from(const Config& config) {
    PlateRenderConfig r;
    r.image_width = static_cast<int>(config.get_int("render.image_width", r.image_width));
    r.image_height = static_cast<int>(config.get_int("render.image_height", r.image_height));
    r.cell_radius_min = config.get_real("render.radius_min", r.cell_radius_min);
    r.cell_radius_max = config.get_real("render.radius_max", r.cell_radius_max);
    r.nuclei_peak_intensity =
        static_cast<int>(config.get_int("render.nuclei_peak", r.nuclei_peak_intensity));
    r.body_peak_intensity =
        static_cast<int>(config.get_int("render.body_peak", r.body_peak_intensity));
    r.body_radius_multiplier =
        config.get_real("render.body_radius_multiplier", r.body_radius_multiplier);
    for (auto& [level, sigma] : r.blur_sigma_map) {
        const std::string key =
            "render.sigma_l" + std::to_string(static_cast<int>(level));
        sigma = config.get_real(key, sigma);
    }
    r.background_level =
        static_cast<int>(config.get_int("render.background", r.background_level));
    r.max_overlap_fraction =
        config.get_real("render.max_overlap_fraction", r.max_overlap_fraction);
    return r;
}

TrainingConfig training_config_from(const Config& config) {
    TrainingConfig t;
    t.learning_rate = config.get_real("train.learning_rate", t.learning_rate);
    t.epochs = static_cast<int>(config.get_int("train.epochs", t.epochs));
    t.l2_penalty = config.get_real("train.l2_penalty", t.l2_penalty);
    return t;
}

}  // namespace cellcount
