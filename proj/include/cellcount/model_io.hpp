#pragma once

#include <filesystem>
#include <iosfwd>
#include <vector>

#include "cellcount/ensemble.hpp"
#include "cellcount/predictors.hpp"

namespace cellcount {

// Versioned plain-text model files ("cellcount-model v1 <kind>"); doubles
// are written with 17 significant digits so save/load round-trips exactly.
void save_classifier(const ClassifierModel& model, const std::filesystem::path& path);
ClassifierModel load_classifier(const std::filesystem::path& path);

void save_regressor(const RegressorModel& model, const std::filesystem::path& path);
RegressorModel load_regressor(const std::filesystem::path& path);

// All six per-group belief models travel as one bundle.
void save_belief_models(const std::vector<BeliefIntervalModel>& models,
                        const std::filesystem::path& path);
std::vector<BeliefIntervalModel> load_belief_models(const std::filesystem::path& path);

}  // namespace cellcount
