#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "cellcount/augment.hpp"
#include "cellcount/config.hpp"
#include "cellcount/dataset.hpp"
#include "cellcount/ensemble.hpp"
#include "cellcount/metrics.hpp"

namespace cellcount {

enum class Scenario { Exp1Full, Exp2RandomMissing, Exp3ConsecutiveMissing, Exp4Halved };
enum class Arm { CeOnly, MseOnly, DaOnly, EnsembleOnly, DaEnsemble };

std::string scenario_to_string(Scenario s);
Scenario scenario_from_string(const std::string& s);
std::string arm_to_string(Arm a);
Arm arm_from_string(const std::string& s);

// The published deleted-count rounds for the two missing-count scenarios.
const std::vector<std::vector<int>>& exp2_deleted_counts();
const std::vector<std::vector<int>>& exp3_deleted_counts();

struct ScenarioConfig {
    Scenario scenario = Scenario::Exp1Full;
    int rounds = 1;
    std::vector<std::vector<int>> deleted_counts;  // one list per round; Exp2/Exp3 only
    std::vector<Arm> arms;
    std::uint64_t rng_seed = 0;
    int images_per_missing_count = 6;
    TrainingConfig train_config;
    double ridge_l2 = 1e-4;
    double envelope_quantile = 0.0;
    bool clamp_fallback = false;
    // Per-round formula pools for the DA arms. Empty means: use the shipped
    // fixtures when the deleted counts are the published ones, otherwise a
    // DA arm raises MissingFormulae.
    std::vector<std::map<int, FormulaPool>> pools_per_round;
};

// rounds/arms/deleted counts prefilled to mirror the published setup.
ScenarioConfig default_scenario_config(Scenario scenario, std::uint64_t rng_seed);

struct ArmRoundResult {
    int round = 0;
    MetricsReport metrics;
    std::vector<PredictionRecord> predictions;  // in-memory only, for audits
};

struct ArmResult {
    Arm arm = Arm::CeOnly;
    std::vector<ArmRoundResult> rounds;
    double mean_rmse = 0.0, std_rmse = 0.0;  // population std across rounds
    double mean_mae = 0.0, std_mae = 0.0;
};

struct ScenarioResult {
    ScenarioConfig config;
    std::string dataset_dir;
    std::vector<ArmResult> arms;
};

// Per round: applies the scenario's training-set surgery, runs every arm
// (sharing one synthetic-image batch between the DA arms), trains the
// required predictors, scores the untouched test split. Deterministic per
// (config, dataset, seed). Belief envelopes are fitted on the non-DA train
// records of the round.
ScenarioResult run_scenario(const ScenarioConfig& config,
                            const std::filesystem::path& dataset_dir);

// JSON report; generated_at is the only field that varies between
// identical runs. write_report creates parent directories.
std::string report_to_json(const ScenarioResult& result);  // no timestamp, for comparisons
void write_report(const ScenarioResult& result, const std::filesystem::path& path);

// Checks that manifest.csv parses, every record's file is a readable PGM of
// uniform size, non-synthetic plates have exactly their 6 images, and the
// train:test split is uniform across (stain, blur, count) cells. Returns
// human-readable violations; empty means valid.
std::vector<std::string> validate_manifest(const std::filesystem::path& dataset_dir);

}  // namespace cellcount
