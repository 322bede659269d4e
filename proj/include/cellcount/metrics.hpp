#pragma once

#include <map>
#include <span>

#include "cellcount/ensemble.hpp"
#include "cellcount/errors.hpp"

namespace cellcount {

// sqrt(mean squared residual) and mean absolute residual over predictions.
// Both throw EmptyRecords on an empty span.
double rmse(std::span<const PredictionRecord> records);
double mae(std::span<const PredictionRecord> records);

struct MetricsReport {
    double rmse = 0.0;
    double mae = 0.0;
    int n = 0;
    std::map<int, double> per_count_mae;
    int classifier_predictions = 0;
    int regressor_predictions = 0;
};

MetricsReport compute_metrics(std::span<const PredictionRecord> records);

}  // namespace cellcount
