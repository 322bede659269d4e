#include "cellcount/metrics.hpp"

#include <cmath>
#include <cstdlib>

namespace cellcount {

double rmse(std::span<const PredictionRecord> records) {
    if (records.empty()) throw EmptyRecords("rmse: no prediction records");
    double acc = 0.0;
    for (const PredictionRecord& r : records) {
        const double diff = r.predicted_count - r.true_count;
        acc += diff * diff;
    }
    return std::sqrt(acc / static_cast<double>(records.size()));
}

double mae(std::span<const PredictionRecord> records) {
    if (records.empty()) throw EmptyRecords("mae: no prediction records");
    double acc = 0.0;
    for (const PredictionRecord& r : records) {
        acc += std::abs(r.predicted_count - r.true_count);
    }
    return acc / static_cast<double>(records.size());
}

MetricsReport compute_metrics(std::span<const PredictionRecord> records) {
    MetricsReport report;
    report.rmse = rmse(records);
    report.mae = mae(records);
    report.n = static_cast<int>(records.size());

    std::map<int, std::pair<double, int>> sums;  // count -> (abs error sum, n)
    for (const PredictionRecord& r : records) {
        auto& [total, n] = sums[r.true_count];
        total += std::abs(r.predicted_count - r.true_count);
        ++n;
        if (r.source == PredictorSource::Classifier) {
            ++report.classifier_predictions;
        } else {
            ++report.regressor_predictions;
        }
    }
    for (const auto& [count, entry] : sums) {
        report.per_count_mae[count] = entry.first / entry.second;
    }
    return report;
}

}  // namespace cellcount
