#pragma once

#include <array>
#include <optional>
#include <utility>
#include <vector>

#include "cellcount/dataset.hpp"
#include "cellcount/linalg.hpp"
#include "cellcount/predictors.hpp"

namespace cellcount {

// Polynomial regression of count on average intensity: c = a0 + a1*I (+ a2*I^2).
struct EnvelopeFit {
    int degree = 1;
    std::array<double, 3> coefficients{};  // a2 stays 0 for degree 1
};

inline double envelope_value(const EnvelopeFit& fit, double intensity) {
    return polyval(fit.coefficients, intensity);
}

// Per-(stain, blur) belief-interval model. The upper envelope is fitted
// through the per-count minimum-intensity points (dimmest image of each
// count bounds the count from above at a given intensity); the lower
// envelope through the maximum-intensity points. Nuclei groups use degree 1,
// body groups degree 2.
struct BeliefIntervalModel {
    StainType stain = StainType::Nuclei;
    BlurLevel blur = BlurLevel::L1;
    EnvelopeFit upper_envelope;
    EnvelopeFit lower_envelope;
    int count_floor = 1;
    int count_ceiling = 1;  // max train count
};

// points: (average intensity, count) of one group's train images. quantile
// q generalizes the min/max extreme selection to the q / 1-q per-count
// intensity quantiles (q = 0 reproduces min/max). Requires 3 distinct
// counts for nuclei, 4 for body (TooFewCounts) and non-identical
// intensities (DegenerateIntensities).
BeliefIntervalModel fit_belief_model(const std::vector<std::pair<double, int>>& points,
                                     StainType stain, BlurLevel blur,
                                     double quantile = 0.0);

// Evaluates both envelopes at the image's average intensity. A crossover
// (lower > upper, possible outside the train range) collapses to the
// zero-width midpoint interval; both ends are then clamped to
// [count_floor, count_ceiling].
std::pair<double, double> belief_interval(const BeliefIntervalModel& model,
                                          const GrayImage& image);

enum class PredictorSource { Classifier, Regressor };

struct PredictionRecord {
    int true_count = 0;
    int predicted_count = 0;
    PredictorSource source = PredictorSource::Classifier;
    double interval_lower = 0.0;
    double interval_upper = 0.0;
    // Raw classifier output, kept for decision audits; absent when no
    // classifier participated (regressor-only scoring).
    std::optional<int> classifier_count;
};

struct EnsembleOptions {
    // When set, the regressor fallback is clamped into the belief interval
    // instead of being used as-is.
    bool clamp_fallback = false;
};

// The gating rule: trust the classifier inside the closed belief interval,
// otherwise answer with the regressor's estimate rounded half away from
// zero (unclamped unless options.clamp_fallback). Throws GroupMismatch when
// the record's stain/blur is not the belief model's group.
PredictionRecord ensemble_predict(const ClassifierModel& classifier,
                                  const RegressorModel& regressor,
                                  const BeliefIntervalModel& belief_model,
                                  const ImageRecord& record, const GrayImage& image,
                                  const EnsembleOptions& options = {});

}  // namespace cellcount
