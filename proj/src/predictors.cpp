#include "cellcount/predictors.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "cellcount/linalg.hpp"

namespace cellcount {

Standardizer Standardizer::fit(const std::vector<Example>& examples) {
    if (examples.empty()) throw EmptyInput("standardizer: no examples");
    const double n = static_cast<double>(examples.size());

    Standardizer s;
    s.mean.assign(kFeatureDim, 0.0);
    s.stdev.assign(kFeatureDim, 0.0);
    for (const Example& e : examples) {
        for (int d = 0; d < kFeatureDim; ++d) s.mean[static_cast<std::size_t>(d)] += e.features.values[static_cast<std::size_t>(d)];
    }
    for (double& m : s.mean) m /= n;
    for (const Example& e : examples) {
        for (int d = 0; d < kFeatureDim; ++d) {
            const double diff = e.features.values[static_cast<std::size_t>(d)] - s.mean[static_cast<std::size_t>(d)];
            s.stdev[static_cast<std::size_t>(d)] += diff * diff;
        }
    }
    for (double& v : s.stdev) v = std::max(std::sqrt(v / n), 1e-8);
    return s;
}

std::vector<double> Standardizer::transform(const FeatureVector& features) const {
    std::vector<double> z(kFeatureDim);
    for (int d = 0; d < kFeatureDim; ++d) {
        z[static_cast<std::size_t>(d)] =
            (features.values[static_cast<std::size_t>(d)] - mean[static_cast<std::size_t>(d)]) /
            stdev[static_cast<std::size_t>(d)];
    }
    return z;
}

namespace {

std::vector<double> logits_of(const std::vector<std::vector<double>>& weights,
                              const std::vector<double>& input) {
    std::vector<double> logits(weights.size());
    for (std::size_t k = 0; k < weights.size(); ++k) {
        const std::vector<double>& w = weights[k];
        double acc = w.back();  // bias
        for (std::size_t d = 0; d < input.size(); ++d) acc += w[d] * input[d];
        logits[k] = acc;
    }
    return logits;
}

// softmax in place, numerically stable
void softmax(std::vector<double>& logits) {
    const double top = *std::max_element(logits.begin(), logits.end());
    double total = 0.0;
    for (double& v : logits) {
        v = std::exp(v - top);
        total += v;
    }
    for (double& v : logits) v /= total;
}

void check_problem(const std::vector<std::vector<double>>& weights,
                   const std::vector<std::vector<double>>& inputs,
                   const std::vector<int>& class_index) {
    if (weights.empty() || inputs.empty()) throw EmptyInput("softmax: empty weights or inputs");
    if (inputs.size() != class_index.size()) {
        throw DimensionMismatch("softmax: inputs and class_index sizes differ");
    }
    const std::size_t dim = inputs.front().size();
    for (const auto& z : inputs) {
        if (z.size() != dim) throw DimensionMismatch("softmax: ragged inputs");
    }
    for (const auto& w : weights) {
        if (w.size() != dim + 1) {
            throw DimensionMismatch("softmax: weight rows must have input dim + 1 entries");
        }
    }
    for (int y : class_index) {
        if (y < 0 || static_cast<std::size_t>(y) >= weights.size()) {
            throw Error("softmax: class index out of range");
        }
    }
}

}  // namespace

double softmax_ce_loss(const std::vector<std::vector<double>>& weights,
                       const std::vector<std::vector<double>>& inputs,
                       const std::vector<int>& class_index, double l2_penalty) {
    check_problem(weights, inputs, class_index);
    const double n = static_cast<double>(inputs.size());
    double loss = 0.0;
    for (std::size_t i = 0; i < inputs.size(); ++i) {
        std::vector<double> logits = logits_of(weights, inputs[i]);
        const double top = *std::max_element(logits.begin(), logits.end());
        double total = 0.0;
        for (double v : logits) total += std::exp(v - top);
        loss += -(logits[static_cast<std::size_t>(class_index[i])] - top - std::log(total));
    }
    loss /= n;
    double reg = 0.0;
    for (const auto& w : weights) {
        for (std::size_t d = 0; d + 1 < w.size(); ++d) reg += w[d] * w[d];
    }
    return loss + 0.5 * l2_penalty * reg;
}

std::vector<std::vector<double>> softmax_ce_gradient(
    const std::vector<std::vector<double>>& weights,
    const std::vector<std::vector<double>>& inputs,
    const std::vector<int>& class_index, double l2_penalty) {
    check_problem(weights, inputs, class_index);
    const std::size_t dim = inputs.front().size();
    const double n = static_cast<double>(inputs.size());

    std::vector<std::vector<double>> grad(weights.size(), std::vector<double>(dim + 1, 0.0));
    for (std::size_t i = 0; i < inputs.size(); ++i) {
        std::vector<double> p = logits_of(weights, inputs[i]);
        softmax(p);
        p[static_cast<std::size_t>(class_index[i])] -= 1.0;
        for (std::size_t k = 0; k < weights.size(); ++k) {
            const double coef = p[k] / n;
            std::vector<double>& g = grad[k];
            for (std::size_t d = 0; d < dim; ++d) g[d] += coef * inputs[i][d];
            g[dim] += coef;
        }
    }
    for (std::size_t k = 0; k < weights.size(); ++k) {
        for (std::size_t d = 0; d < dim; ++d) grad[k][d] += l2_penalty * weights[k][d];
    }
    return grad;
}

ClassifierModel train_classifier(const std::vector<Example>& train,
                                 const TrainingConfig& config) {
    if (train.empty()) throw EmptyInput("train_classifier: no examples");
    std::set<int> labels;
    for (const Example& e : train) labels.insert(e.count);
    if (labels.size() < 2) {
        throw DegenerateLabels("train_classifier: need at least 2 distinct counts");
    }

    ClassifierModel model;
    model.label_set.assign(labels.begin(), labels.end());
    model.standardizer = Standardizer::fit(train);
    model.training_config = config;

    std::vector<std::vector<double>> inputs;
    std::vector<int> class_index;
    inputs.reserve(train.size());
    for (const Example& e : train) {
        inputs.push_back(model.standardizer.transform(e.features));
        class_index.push_back(static_cast<int>(
            std::lower_bound(model.label_set.begin(), model.label_set.end(), e.count) -
            model.label_set.begin()));
    }

    model.weights.assign(model.label_set.size(),
                         std::vector<double>(static_cast<std::size_t>(kFeatureDim) + 1, 0.0));
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        const auto grad =
            softmax_ce_gradient(model.weights, inputs, class_index, config.l2_penalty);
        for (std::size_t k = 0; k < model.weights.size(); ++k) {
            for (std::size_t d = 0; d < model.weights[k].size(); ++d) {
                model.weights[k][d] -= config.learning_rate * grad[k][d];
            }
        }
    }
    model.final_train_loss =
        softmax_ce_loss(model.weights, inputs, class_index, config.l2_penalty);
    return model;
}

ClassPrediction predict_class(const ClassifierModel& model, const FeatureVector& features) {
    std::vector<double> logits = logits_of(model.weights, model.standardizer.transform(features));
    std::size_t best = 0;
    for (std::size_t k = 1; k < logits.size(); ++k) {
        if (logits[k] > logits[best]) best = k;  // ties keep the smaller count
    }
    softmax(logits);
    return {model.label_set[best], logits[best]};
}

RegressorModel train_regressor(const std::vector<Example>& train, double l2_penalty) {
    if (train.empty()) throw EmptyInput("train_regressor: no examples");
    if (l2_penalty < 0.0) throw Error("train_regressor: l2_penalty must be non-negative");

    RegressorModel model;
    model.standardizer = Standardizer::fit(train);
    model.l2_penalty = l2_penalty;

    const std::size_t n = train.size();
    const std::size_t dim = kFeatureDim;
    std::vector<std::vector<double>> z;
    z.reserve(n);
    double y_mean = 0.0;
    std::vector<double> z_mean(dim, 0.0);
    for (const Example& e : train) {
        z.push_back(model.standardizer.transform(e.features));
        y_mean += e.count;
        for (std::size_t d = 0; d < dim; ++d) z_mean[d] += z.back()[d];
    }
    y_mean /= static_cast<double>(n);
    for (double& v : z_mean) v /= static_cast<double>(n);

    // normal equations of the bias-unpenalized objective, centered exactly
    std::vector<double> gram(dim * dim, 0.0), rhs(dim, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const double dy = train[i].count - y_mean;
        for (std::size_t r = 0; r < dim; ++r) {
            const double zr = z[i][r] - z_mean[r];
            rhs[r] += zr * dy;
            for (std::size_t c = r; c < dim; ++c) {
                gram[r * dim + c] += zr * (z[i][c] - z_mean[c]);
            }
        }
    }
    for (std::size_t r = 0; r < dim; ++r) {
        gram[r * dim + r] += l2_penalty;
        for (std::size_t c = r + 1; c < dim; ++c) gram[c * dim + r] = gram[r * dim + c];
    }

    model.weights = cholesky_solve(std::move(gram), std::move(rhs));
    double wz = 0.0;
    for (std::size_t d = 0; d < dim; ++d) wz += model.weights[d] * z_mean[d];
    model.bias = y_mean - wz;
    return model;
}

double predict_regression(const RegressorModel& model, const FeatureVector& features) {
    const std::vector<double> z = model.standardizer.transform(features);
    double acc = model.bias;
    for (std::size_t d = 0; d < z.size(); ++d) acc += model.weights[d] * z[d];
    return acc;
}

}  // namespace cellcount
