#pragma once

#include <cstdint>
#include <vector>

#include "cellcount/errors.hpp"
#include "cellcount/features.hpp"

namespace cellcount {

struct Example {
    FeatureVector features;
    int count = 1;
};

struct TrainingConfig {
    double learning_rate = 0.1;
    int epochs = 500;
    double l2_penalty = 1e-4;
    std::uint64_t rng_seed = 0;  // reserved; full-batch training from zero init ignores it
};

// Per-dimension standardization statistics, fitted on the training set and
// stored in the model so prediction is self-contained. Dimensions with
// deviation under the floor collapse to 0 rather than exploding.
struct Standardizer {
    std::vector<double> mean;
    std::vector<double> stdev;  // floored at 1e-8

    static Standardizer fit(const std::vector<Example>& examples);
    std::vector<double> transform(const FeatureVector& features) const;
};

// Multinomial logistic regression over the distinct train counts.
struct ClassifierModel {
    std::vector<int> label_set;                       // sorted ascending
    Standardizer standardizer;
    std::vector<std::vector<double>> weights;         // |labels| x (dim+1), bias last
    TrainingConfig training_config;
    double final_train_loss = 0.0;
};

struct ClassPrediction {
    int count = 0;
    double confidence = 0.0;  // max softmax probability
};

// Mean cross-entropy plus 0.5*l2*||W||^2 over the non-bias columns.
// `inputs` rows already include whatever preprocessing applies; each weights
// row has inputs-dim + 1 entries with the bias last. class_index addresses
// the weights rows. Exposed for gradient verification.
double softmax_ce_loss(const std::vector<std::vector<double>>& weights,
                       const std::vector<std::vector<double>>& inputs,
                       const std::vector<int>& class_index, double l2_penalty);
std::vector<std::vector<double>> softmax_ce_gradient(
    const std::vector<std::vector<double>>& weights,
    const std::vector<std::vector<double>>& inputs,
    const std::vector<int>& class_index, double l2_penalty);

// Full-batch gradient descent from zero weights on standardized features;
// deterministic. Throws DegenerateLabels with fewer than 2 distinct counts.
ClassifierModel train_classifier(const std::vector<Example>& train,
                                 const TrainingConfig& config);

// Argmax of the softmax; ties break toward the smaller count.
ClassPrediction predict_class(const ClassifierModel& model, const FeatureVector& features);

// Ridge regression of the count on standardized features. Minimizes
// sum((y - w.z - b)^2) + l2*||w||^2 exactly (bias unpenalized) via the
// normal equations.
struct RegressorModel {
    Standardizer standardizer;
    std::vector<double> weights;
    double bias = 0.0;
    double l2_penalty = 0.0;
};

// Throws SingularSystem when l2_penalty is 0 and the Gram matrix is
// rank-deficient; EmptyInput on an empty training set.
RegressorModel train_regressor(const std::vector<Example>& train, double l2_penalty);

// Unrounded w.z + b; rounding and clamping are the caller's policy.
double predict_regression(const RegressorModel& model, const FeatureVector& features);

}  // namespace cellcount
