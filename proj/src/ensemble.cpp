#include "cellcount/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "cellcount/features.hpp"

namespace cellcount {

namespace {

// index of the q-quantile in a sorted run of n values, nearest-rank style
std::size_t quantile_index(std::size_t n, double q) {
    const double pos = q * static_cast<double>(n - 1);
    return static_cast<std::size_t>(std::llround(pos));
}

}  // namespace

BeliefIntervalModel fit_belief_model(const std::vector<std::pair<double, int>>& points,
                                     StainType stain, BlurLevel blur, double quantile) {
    if (points.empty()) throw EmptyInput("fit_belief_model: no points");
    if (quantile < 0.0 || quantile >= 0.5) {
        throw Error("fit_belief_model: quantile must be in [0, 0.5)");
    }

    std::map<int, std::vector<double>> by_count;
    for (const auto& [intensity, count] : points) by_count[count].push_back(intensity);

    const int degree = stain == StainType::Nuclei ? 1 : 2;
    const std::size_t min_counts = static_cast<std::size_t>(degree) + 2;
    if (by_count.size() < min_counts) {
        throw TooFewCounts("fit_belief_model: need at least " + std::to_string(min_counts) +
                           " distinct counts, got " + std::to_string(by_count.size()));
    }

    // per count: low quantile bounds the count from above, high from below
    std::vector<double> low_x, high_x, counts;
    for (auto& [count, intensities] : by_count) {
        std::sort(intensities.begin(), intensities.end());
        low_x.push_back(intensities[quantile_index(intensities.size(), quantile)]);
        high_x.push_back(intensities[quantile_index(intensities.size(), 1.0 - quantile)]);
        counts.push_back(static_cast<double>(count));
    }

    const auto [lo_min, lo_max] = std::minmax_element(low_x.begin(), low_x.end());
    const auto [hi_min, hi_max] = std::minmax_element(high_x.begin(), high_x.end());
    if (*lo_max - *lo_min < 1e-12 || *hi_max - *hi_min < 1e-12) {
        throw DegenerateIntensities("fit_belief_model: intensities do not vary with count");
    }

    BeliefIntervalModel model;
    model.stain = stain;
    model.blur = blur;
    model.upper_envelope = {degree, polyfit(low_x, counts, degree)};
    model.lower_envelope = {degree, polyfit(high_x, counts, degree)};
    model.count_floor = 1;
    model.count_ceiling = by_count.rbegin()->first;
    return model;
}

std::pair<double, double> belief_interval(const BeliefIntervalModel& model,
                                          const GrayImage& image) {
    const double intensity = average_intensity(image);
    double lower = envelope_value(model.lower_envelope, intensity);
    double upper = envelope_value(model.upper_envelope, intensity);
    if (lower > upper) {
        const double mid = 0.5 * (lower + upper);
        lower = upper = mid;
    }
    const auto clamp = [&](double v) {
        return std::clamp(v, static_cast<double>(model.count_floor),
                          static_cast<double>(model.count_ceiling));
    };
    return {clamp(lower), clamp(upper)};
}

PredictionRecord ensemble_predict(const ClassifierModel& classifier,
                                  const RegressorModel& regressor,
                                  const BeliefIntervalModel& belief_model,
                                  const ImageRecord& record, const GrayImage& image,
                                  const EnsembleOptions& options) {
    if (record.stain != belief_model.stain || record.blur != belief_model.blur) {
        throw GroupMismatch("ensemble_predict: record group does not match belief model");
    }

    const FeatureVector features = extract_features(image);
    const auto [lower, upper] = belief_interval(belief_model, image);
    const ClassPrediction cls = predict_class(classifier, features);

    PredictionRecord out;
    out.true_count = record.count;
    out.interval_lower = lower;
    out.interval_upper = upper;
    out.classifier_count = cls.count;

    if (lower <= cls.count && cls.count <= upper) {
        out.predicted_count = cls.count;
        out.source = PredictorSource::Classifier;
    } else {
        double estimate = predict_regression(regressor, features);
        if (options.clamp_fallback) estimate = std::clamp(estimate, lower, upper);
        out.predicted_count = static_cast<int>(std::llround(estimate));
        out.source = PredictorSource::Regressor;
    }
    return out;
}

}  // namespace cellcount
