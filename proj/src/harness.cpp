#include "cellcount/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <tuple>
#include <unordered_map>

#include <json.hpp>

#include "cellcount/features.hpp"
#include "cellcount/pgm.hpp"
#include "cellcount/rng.hpp"

namespace cellcount {

std::string scenario_to_string(Scenario s) {
    switch (s) {
        case Scenario::Exp1Full: return "exp1_full";
        case Scenario::Exp2RandomMissing: return "exp2_random_missing";
        case Scenario::Exp3ConsecutiveMissing: return "exp3_consecutive_missing";
        case Scenario::Exp4Halved: return "exp4_halved";
    }
    throw Error("scenario_to_string: bad enum value");
}

Scenario scenario_from_string(const std::string& s) {
    if (s == "exp1_full" || s == "exp1") return Scenario::Exp1Full;
    if (s == "exp2_random_missing" || s == "exp2") return Scenario::Exp2RandomMissing;
    if (s == "exp3_consecutive_missing" || s == "exp3") return Scenario::Exp3ConsecutiveMissing;
    if (s == "exp4_halved" || s == "exp4") return Scenario::Exp4Halved;
    throw Error("unknown scenario: " + s);
}

std::string arm_to_string(Arm a) {
    switch (a) {
        case Arm::CeOnly: return "ce";
        case Arm::MseOnly: return "mse";
        case Arm::DaOnly: return "da";
        case Arm::EnsembleOnly: return "ensemble";
        case Arm::DaEnsemble: return "da_ensemble";
    }
    throw Error("arm_to_string: bad enum value");
}

Arm arm_from_string(const std::string& s) {
    if (s == "ce") return Arm::CeOnly;
    if (s == "mse") return Arm::MseOnly;
    if (s == "da") return Arm::DaOnly;
    if (s == "ensemble") return Arm::EnsembleOnly;
    if (s == "da_ensemble" || s == "da+ensemble") return Arm::DaEnsemble;
    throw Error("unknown arm: " + s);
}

const std::vector<std::vector<int>>& exp2_deleted_counts() {
    static const std::vector<std::vector<int>> rounds = {
        {14, 35, 57, 66, 83}, {10, 31, 70, 83, 91}, {18, 27, 44, 53, 91}};
    return rounds;
}

const std::vector<std::vector<int>>& exp3_deleted_counts() {
    static const std::vector<std::vector<int>> rounds = {
        {61, 66, 70, 74, 78}, {70, 74, 78, 83, 87}, {83, 87, 91, 96, 100}};
    return rounds;
}

ScenarioConfig default_scenario_config(Scenario scenario, std::uint64_t rng_seed) {
    ScenarioConfig config;
    config.scenario = scenario;
    config.rng_seed = rng_seed;
    switch (scenario) {
        case Scenario::Exp1Full:
            config.rounds = 1;
            config.arms = {Arm::CeOnly, Arm::MseOnly};
            break;
        case Scenario::Exp2RandomMissing:
            config.rounds = 3;
            config.deleted_counts = exp2_deleted_counts();
            config.arms = {Arm::CeOnly, Arm::DaOnly, Arm::EnsembleOnly, Arm::DaEnsemble};
            break;
        case Scenario::Exp3ConsecutiveMissing:
            config.rounds = 3;
            config.deleted_counts = exp3_deleted_counts();
            config.arms = {Arm::CeOnly, Arm::DaOnly, Arm::EnsembleOnly, Arm::DaEnsemble};
            break;
        case Scenario::Exp4Halved:
            config.rounds = 3;
            config.arms = {Arm::MseOnly, Arm::CeOnly, Arm::EnsembleOnly};
            break;
    }
    return config;
}

namespace {

using GroupKey = std::pair<StainType, BlurLevel>;

bool arm_uses_da(Arm a) { return a == Arm::DaOnly || a == Arm::DaEnsemble; }
bool arm_uses_ensemble(Arm a) { return a == Arm::EnsembleOnly || a == Arm::DaEnsemble; }

void check_scenario_config(const ScenarioConfig& config) {
    if (config.rounds < 1) throw Error("scenario config: rounds must be >= 1");
    if (config.arms.empty()) throw Error("scenario config: no arms selected");
    const bool missing_count_scenario = config.scenario == Scenario::Exp2RandomMissing ||
                                        config.scenario == Scenario::Exp3ConsecutiveMissing;
    if (missing_count_scenario) {
        if (config.deleted_counts.size() != static_cast<std::size_t>(config.rounds)) {
            throw Error("scenario config: need one deleted-count list per round");
        }
        for (const auto& list : config.deleted_counts) {
            if (list.empty()) throw Error("scenario config: empty deleted-count list");
        }
    } else if (!config.deleted_counts.empty()) {
        throw Error("scenario config: deleted counts are only valid for the missing-count scenarios");
    }
    if (!config.pools_per_round.empty() &&
        config.pools_per_round.size() != static_cast<std::size_t>(config.rounds)) {
        throw Error("scenario config: need one formula pool map per round");
    }
    if (config.images_per_missing_count < 1) {
        throw Error("scenario config: images_per_missing_count must be >= 1");
    }
}

// Fixture pools apply only when the round's deleted counts are exactly the
// published ones for that round.
std::map<int, FormulaPool> resolve_pools(const ScenarioConfig& config, int round_index,
                                         const std::set<int>& missing) {
    if (!config.pools_per_round.empty()) {
        return config.pools_per_round[static_cast<std::size_t>(round_index)];
    }
    const std::vector<std::vector<int>>* published = nullptr;
    FixtureSet which = FixtureSet::Exp2;
    if (config.scenario == Scenario::Exp2RandomMissing) {
        published = &exp2_deleted_counts();
    } else if (config.scenario == Scenario::Exp3ConsecutiveMissing) {
        published = &exp3_deleted_counts();
        which = FixtureSet::Exp3;
    }
    if (published != nullptr && round_index < static_cast<int>(published->size())) {
        const auto& round_list = (*published)[static_cast<std::size_t>(round_index)];
        if (std::set<int>(round_list.begin(), round_list.end()) == missing) {
            const auto fixtures = load_formula_fixtures(which);
            std::map<int, FormulaPool> pools;
            for (int count : missing) pools[count] = fixtures.at({round_index + 1, count});
            return pools;
        }
    }
    std::string counts;
    for (int c : missing) counts += (counts.empty() ? "" : ",") + std::to_string(c);
    throw MissingFormulae("no formula pools for missing counts {" + counts +
                          "}; pass a pool file");
}

class ImageStore {
  public:
    explicit ImageStore(const DatasetManifest& manifest) : manifest_(&manifest) {}

    const GrayImage& image(const ImageRecord& record) {
        auto it = images_.find(record.image_path);
        if (it == images_.end()) {
            it = images_.emplace(record.image_path, read_pgm(manifest_->resolve(record))).first;
        }
        return it->second;
    }

    const FeatureVector& features(const ImageRecord& record) {
        auto it = features_.find(record.image_path);
        if (it == features_.end()) {
            it = features_.emplace(record.image_path, extract_features(image(record))).first;
        }
        return it->second;
    }

  private:
    const DatasetManifest* manifest_;
    std::unordered_map<std::string, GrayImage> images_;
    std::unordered_map<std::string, FeatureVector> features_;
};

// One trained predictor pair per training-set variant (plain vs augmented).
struct PredictorSet {
    ClassifierModel classifier;
    RegressorModel regressor;
    int max_train_count = 0;
};

// Synthetic overlays exist to hand the classifier its missing classes; the
// regressor is the ordinal fallback and, like the envelope fits, learns the
// intensity scale of real plates only.
PredictorSet train_predictors(const DatasetManifest& manifest, ImageStore& store,
                              const ScenarioConfig& config) {
    std::vector<Example> class_examples;
    std::vector<Example> real_examples;
    for (const ImageRecord& record : manifest.records) {
        if (record.split != Split::Train) continue;
        Example example{store.features(record), record.count};
        if (record.provenance != Provenance::SyntheticDA) real_examples.push_back(example);
        class_examples.push_back(std::move(example));
    }
    PredictorSet set;
    set.classifier = train_classifier(class_examples, config.train_config);
    set.regressor = train_regressor(real_examples, config.ridge_l2);
    set.max_train_count = set.classifier.label_set.back();
    return set;
}

std::map<GroupKey, BeliefIntervalModel> fit_belief_models(const DatasetManifest& manifest,
                                                          ImageStore& store,
                                                          double quantile) {
    std::map<GroupKey, std::vector<std::pair<double, int>>> points;
    for (const ImageRecord& record : manifest.records) {
        if (record.split != Split::Train || record.provenance == Provenance::SyntheticDA) {
            continue;
        }
        points[{record.stain, record.blur}].emplace_back(
            average_intensity(store.image(record)), record.count);
    }
    std::map<GroupKey, BeliefIntervalModel> models;
    for (const auto& [key, group_points] : points) {
        models[key] = fit_belief_model(group_points, key.first, key.second, quantile);
    }
    return models;
}

std::vector<PredictionRecord> score_arm(Arm arm, const std::vector<ImageRecord>& test_records,
                                        ImageStore& store, const PredictorSet& predictors,
                                        const std::map<GroupKey, BeliefIntervalModel>* beliefs,
                                        const ScenarioConfig& config) {
    std::vector<PredictionRecord> predictions;
    predictions.reserve(test_records.size());
    for (const ImageRecord& record : test_records) {
        PredictionRecord p;
        if (arm_uses_ensemble(arm)) {
            EnsembleOptions options;
            options.clamp_fallback = config.clamp_fallback;
            p = ensemble_predict(predictors.classifier, predictors.regressor,
                                 beliefs->at({record.stain, record.blur}), record,
                                 store.image(record), options);
        } else {
            p.true_count = record.count;
            p.interval_lower = 1.0;
            p.interval_upper = static_cast<double>(predictors.max_train_count);
            if (arm == Arm::MseOnly) {
                const double estimate =
                    predict_regression(predictors.regressor, store.features(record));
                p.predicted_count = static_cast<int>(std::llround(estimate));
                p.source = PredictorSource::Regressor;
            } else {
                const ClassPrediction cls =
                    predict_class(predictors.classifier, store.features(record));
                p.predicted_count = cls.count;
                p.source = PredictorSource::Classifier;
                p.classifier_count = cls.count;
            }
        }
        predictions.push_back(std::move(p));
    }
    return predictions;
}

void finalize_arm_stats(ArmResult& arm) {
    const double n = static_cast<double>(arm.rounds.size());
    double rmse_sum = 0.0, mae_sum = 0.0;
    for (const ArmRoundResult& r : arm.rounds) {
        rmse_sum += r.metrics.rmse;
        mae_sum += r.metrics.mae;
    }
    arm.mean_rmse = rmse_sum / n;
    arm.mean_mae = mae_sum / n;
    double rmse_dev = 0.0, mae_dev = 0.0;
    for (const ArmRoundResult& r : arm.rounds) {
        rmse_dev += (r.metrics.rmse - arm.mean_rmse) * (r.metrics.rmse - arm.mean_rmse);
        mae_dev += (r.metrics.mae - arm.mean_mae) * (r.metrics.mae - arm.mean_mae);
    }
    arm.std_rmse = std::sqrt(rmse_dev / n);
    arm.std_mae = std::sqrt(mae_dev / n);
}

}  // namespace

ScenarioResult run_scenario(const ScenarioConfig& config,
                            const std::filesystem::path& dataset_dir) {
    check_scenario_config(config);
    const DatasetManifest manifest = load_dataset(dataset_dir);

    std::vector<ImageRecord> test_records;
    for (const ImageRecord& record : manifest.records) {
        if (record.split == Split::Test) test_records.push_back(record);
    }
    if (test_records.empty()) throw EmptyRecords("run_scenario: dataset has no test records");

    ScenarioResult result;
    result.config = config;
    result.dataset_dir = dataset_dir.string();
    result.arms.resize(config.arms.size());
    for (std::size_t a = 0; a < config.arms.size(); ++a) result.arms[a].arm = config.arms[a];

    const bool any_da = std::any_of(config.arms.begin(), config.arms.end(), arm_uses_da);
    const bool any_ensemble =
        std::any_of(config.arms.begin(), config.arms.end(), arm_uses_ensemble);
    const bool any_plain = std::any_of(config.arms.begin(), config.arms.end(),
                                       [](Arm a) { return !arm_uses_da(a); });

    for (int r = 0; r < config.rounds; ++r) {
        const std::uint64_t round_seed =
            derive_seed(config.rng_seed, seed_tag("round"), static_cast<std::uint64_t>(r));

        DatasetManifest surgered = manifest;
        switch (config.scenario) {
            case Scenario::Exp1Full:
                break;
            case Scenario::Exp2RandomMissing:
            case Scenario::Exp3ConsecutiveMissing: {
                const auto& list = config.deleted_counts[static_cast<std::size_t>(r)];
                surgered = delete_counts(manifest, std::set<int>(list.begin(), list.end()));
                break;
            }
            case Scenario::Exp4Halved:
                surgered = halve_training_set(manifest, round_seed);
                break;
        }

        ImageStore store(manifest);  // all variants share the dataset root

        // One synthetic batch per round, shared by the DA arms.
        std::optional<DatasetManifest> augmented;
        if (any_da) {
            std::set<int> missing;
            const std::set<int> train_labels = surgered.train_label_set();
            for (int count : surgered.count_grid) {
                if (train_labels.count(count) == 0) missing.insert(count);
            }
            std::map<int, FormulaPool> pools;
            if (!missing.empty()) pools = resolve_pools(config, r, missing);
            const std::string tag =
                "da_" + scenario_to_string(config.scenario) + "_r" + std::to_string(r + 1);
            augmented = augment_missing_counts(surgered, pools, config.images_per_missing_count,
                                               derive_seed(round_seed, seed_tag("da")), tag)
                            .manifest;
        }

        std::optional<PredictorSet> plain_predictors, da_predictors;
        if (any_plain) plain_predictors = train_predictors(surgered, store, config);
        if (any_da) da_predictors = train_predictors(*augmented, store, config);

        // Envelopes come from the real (non-synthetic) train images only, so
        // both ensemble arms share one belief model set per round.
        std::map<GroupKey, BeliefIntervalModel> beliefs;
        if (any_ensemble) beliefs = fit_belief_models(surgered, store, config.envelope_quantile);

        for (std::size_t a = 0; a < config.arms.size(); ++a) {
            const Arm arm = config.arms[a];
            const PredictorSet& predictors =
                arm_uses_da(arm) ? *da_predictors : *plain_predictors;
            ArmRoundResult round_result;
            round_result.round = r + 1;
            round_result.predictions =
                score_arm(arm, test_records, store, predictors, &beliefs, config);
            round_result.metrics = compute_metrics(round_result.predictions);
            result.arms[a].rounds.push_back(std::move(round_result));
        }
    }

    for (ArmResult& arm : result.arms) finalize_arm_stats(arm);
    return result;
}

namespace {

nlohmann::ordered_json report_json(const ScenarioResult& result, bool with_timestamp) {
    nlohmann::ordered_json j;
    if (with_timestamp) {
        char stamp[32];
        const std::time_t now = std::time(nullptr);
        std::tm tm_utc{};
        gmtime_r(&now, &tm_utc);
        std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
        j["generated_at"] = stamp;
    }
    j["scenario"] = scenario_to_string(result.config.scenario);
    j["dataset"] = result.dataset_dir;
    j["rng_seed"] = result.config.rng_seed;
    j["rounds"] = result.config.rounds;
    if (!result.config.deleted_counts.empty()) {
        j["deleted_counts"] = result.config.deleted_counts;
    }
    j["images_per_missing_count"] = result.config.images_per_missing_count;
    j["train"] = {{"learning_rate", result.config.train_config.learning_rate},
                  {"epochs", result.config.train_config.epochs},
                  {"l2_penalty", result.config.train_config.l2_penalty}};
    j["ridge_l2"] = result.config.ridge_l2;
    j["envelope_quantile"] = result.config.envelope_quantile;
    j["clamp_fallback"] = result.config.clamp_fallback;
    j["environment"] = {{"toolkit", "cellcount"},
                        {"compiler", __VERSION__},
                        {"feature_dim", kFeatureDim}};

    j["arms"] = nlohmann::ordered_json::array();
    for (const ArmResult& arm : result.arms) {
        nlohmann::ordered_json ja;
        ja["arm"] = arm_to_string(arm.arm);
        ja["mean_rmse"] = arm.mean_rmse;
        ja["std_rmse"] = arm.std_rmse;
        ja["mean_mae"] = arm.mean_mae;
        ja["std_mae"] = arm.std_mae;
        ja["rounds"] = nlohmann::ordered_json::array();
        for (const ArmRoundResult& round : arm.rounds) {
            nlohmann::ordered_json jr;
            jr["round"] = round.round;
            jr["rmse"] = round.metrics.rmse;
            jr["mae"] = round.metrics.mae;
            jr["n"] = round.metrics.n;
            jr["classifier_predictions"] = round.metrics.classifier_predictions;
            jr["regressor_predictions"] = round.metrics.regressor_predictions;
            nlohmann::ordered_json per_count = nlohmann::ordered_json::object();
            for (const auto& [count, value] : round.metrics.per_count_mae) {
                per_count[std::to_string(count)] = value;
            }
            jr["per_count_mae"] = std::move(per_count);
            ja["rounds"].push_back(std::move(jr));
        }
        j["arms"].push_back(std::move(ja));
    }
    return j;
}

}  // namespace

std::string report_to_json(const ScenarioResult& result) {
    return report_json(result, false).dump(2) + "\n";
}

void write_report(const ScenarioResult& result, const std::filesystem::path& path) {
    std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw IoError("cannot open report for writing: " + path.string());
    out << report_json(result, true).dump(2) << "\n";
    if (!out) throw IoError("report write failed: " + path.string());
}

std::vector<std::string> validate_manifest(const std::filesystem::path& dataset_dir) {
    std::vector<std::string> violations;
    DatasetManifest manifest;
    try {
        manifest = load_dataset(dataset_dir);
    } catch (const Error& e) {
        violations.push_back(std::string("manifest unreadable: ") + e.what());
        return violations;
    }

    std::set<std::string> seen_paths;
    int width = -1, height = -1;
    for (const ImageRecord& record : manifest.records) {
        if (!seen_paths.insert(record.image_path).second) {
            violations.push_back("duplicate image path: " + record.image_path);
        }
        try {
            const GrayImage image = read_pgm(manifest.resolve(record));
            if (width < 0) {
                width = image.width();
                height = image.height();
            } else if (image.width() != width || image.height() != height) {
                violations.push_back("image size mismatch: " + record.image_path);
            }
        } catch (const Error& e) {
            violations.push_back("unreadable image " + record.image_path + ": " + e.what());
        }
    }

    // a physical plate is 6 views (2 stains x 3 blurs) of one count, one split
    std::map<long long, std::vector<const ImageRecord*>> plates;
    for (const ImageRecord& record : manifest.records) {
        if (record.provenance != Provenance::SyntheticDA) {
            plates[record.plate_id].push_back(&record);
        }
    }
    for (const auto& [plate_id, records] : plates) {
        std::set<GroupKey> groups;
        std::set<int> counts;
        std::set<Split> splits;
        for (const ImageRecord* record : records) {
            groups.insert({record->stain, record->blur});
            counts.insert(record->count);
            splits.insert(record->split);
        }
        if (records.size() != 6 || groups.size() != 6) {
            violations.push_back("plate " + std::to_string(plate_id) +
                                 ": expected 6 images covering every stain/blur pair, got " +
                                 std::to_string(records.size()));
        }
        if (counts.size() != 1) {
            violations.push_back("plate " + std::to_string(plate_id) + ": mixed counts");
        }
        if (splits.size() != 1) {
            violations.push_back("plate " + std::to_string(plate_id) +
                                 ": straddles the train/test split");
        }
    }

    // split sizes must agree across every (stain, blur, count) cell
    std::map<std::tuple<StainType, BlurLevel, int>, std::pair<int, int>> cells;
    for (const ImageRecord& record : manifest.records) {
        if (record.provenance == Provenance::SyntheticDA) continue;
        auto& [n_train, n_test] = cells[{record.stain, record.blur, record.count}];
        (record.split == Split::Train ? n_train : n_test)++;
    }
    std::set<std::pair<int, int>> shapes;
    for (const auto& [cell, shape] : cells) shapes.insert(shape);
    if (shapes.size() > 1) {
        violations.push_back("train/test split is not uniform across stain/blur/count cells");
    }

    return violations;
}

}  // namespace cellcount
