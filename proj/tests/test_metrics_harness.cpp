#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "cellcount/harness.hpp"
#include "doctest.h"
#include "helpers.hpp"

using namespace cellcount;
namespace fs = std::filesystem;

namespace {

PredictionRecord record_of(int true_count, int predicted, PredictorSource source) {
    PredictionRecord r;
    r.true_count = true_count;
    r.predicted_count = predicted;
    r.source = source;
    return r;
}

DatasetManifest generate_harness_dataset(const fs::path& root, const std::vector<int>& grid,
                                         int ipcpg, SplitRatio ratio, std::uint64_t seed) {
    PlateRenderConfig cfg;
    cfg.image_width = 32;
    cfg.image_height = 32;
    return generate_dataset(root, cfg, grid, ipcpg, ratio, seed);
}

std::uint64_t truth_hash(const std::vector<PredictionRecord>& predictions) {
    std::uint64_t h = 1469598103934665603ULL;
    for (const PredictionRecord& p : predictions) {
        h = testutil::fnv1a(&p.true_count, sizeof p.true_count, h);
    }
    return h;
}

// In-band classifier claims must be used as-is; everything else must fall
// back to the regressor. Holds for the ensemble arms only.
void check_decision_soundness(const std::vector<PredictionRecord>& predictions) {
    for (const PredictionRecord& p : predictions) {
        REQUIRE(p.classifier_count.has_value());
        const int claim = *p.classifier_count;
        const bool in_band = p.interval_lower <= claim && claim <= p.interval_upper;
        if (p.source == PredictorSource::Classifier) {
            CHECK(in_band);
            CHECK(p.predicted_count == claim);
        } else {
            CHECK(!in_band);
        }
    }
}

}  // namespace

TEST_CASE("error metrics compute exactly on known residuals") {
    std::vector<PredictionRecord> records;
    records.push_back(record_of(10, 13, PredictorSource::Classifier));
    records.push_back(record_of(10, 6, PredictorSource::Regressor));
    CHECK(rmse(records) == std::sqrt(12.5));
    CHECK(mae(records) == 3.5);

    std::vector<PredictionRecord> perfect;
    perfect.push_back(record_of(7, 7, PredictorSource::Classifier));
    CHECK(rmse(perfect) == 0.0);
    CHECK(mae(perfect) == 0.0);

    CHECK_THROWS_AS(rmse(std::vector<PredictionRecord>{}), EmptyRecords);
    CHECK_THROWS_AS(mae(std::vector<PredictionRecord>{}), EmptyRecords);
}

TEST_CASE("error metrics match a naive accumulation on random residuals") {
    testutil::Lcg lcg(55);
    std::vector<PredictionRecord> records;
    double sq = 0.0, ab = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const int truth = 1 + lcg.below(100);
        const int predicted = 1 + lcg.below(100);
        records.push_back(record_of(truth, predicted, PredictorSource::Classifier));
        const double r = truth - predicted;
        sq += r * r;
        ab += std::abs(r);
    }
    CHECK(rmse(records) == doctest::Approx(std::sqrt(sq / 1000.0)).epsilon(1e-12));
    CHECK(mae(records) == doctest::Approx(ab / 1000.0).epsilon(1e-12));
    CHECK(mae(records) <= rmse(records) + 1e-12);
}

TEST_CASE("metric reports carry counts and per-count breakdowns") {
    std::vector<PredictionRecord> records;
    records.push_back(record_of(5, 5, PredictorSource::Classifier));
    records.push_back(record_of(5, 7, PredictorSource::Regressor));
    records.push_back(record_of(9, 9, PredictorSource::Classifier));
    const MetricsReport report = compute_metrics(records);
    CHECK(report.n == 3);
    CHECK(report.classifier_predictions == 2);
    CHECK(report.regressor_predictions == 1);
    REQUIRE(report.per_count_mae.size() == 2);
    CHECK(report.per_count_mae.at(5) == 1.0);
    CHECK(report.per_count_mae.at(9) == 0.0);
    CHECK(report.rmse == doctest::Approx(std::sqrt(4.0 / 3.0)).epsilon(1e-12));
    CHECK(report.mae == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("published deletion rounds are exactly the recorded ones") {
    const std::vector<std::vector<int>> exp2{
        {14, 35, 57, 66, 83}, {10, 31, 70, 83, 91}, {18, 27, 44, 53, 91}};
    const std::vector<std::vector<int>> exp3{
        {61, 66, 70, 74, 78}, {70, 74, 78, 83, 87}, {83, 87, 91, 96, 100}};
    CHECK(exp2_deleted_counts() == exp2);
    CHECK(exp3_deleted_counts() == exp3);
}

TEST_CASE("default scenario configs mirror the published setup") {
    const ScenarioConfig exp2 = default_scenario_config(Scenario::Exp2RandomMissing, 0);
    CHECK(exp2.rounds == 3);
    CHECK(exp2.deleted_counts == exp2_deleted_counts());
    CHECK(exp2.arms ==
          std::vector<Arm>{Arm::CeOnly, Arm::DaOnly, Arm::EnsembleOnly, Arm::DaEnsemble});
    CHECK(exp2.images_per_missing_count == 6);

    const ScenarioConfig exp4 = default_scenario_config(Scenario::Exp4Halved, 0);
    CHECK(exp4.rounds == 3);
    CHECK(exp4.deleted_counts.empty());
    CHECK(exp4.arms == std::vector<Arm>{Arm::MseOnly, Arm::CeOnly, Arm::EnsembleOnly});
}

TEST_CASE("scenario and arm names round-trip") {
    for (Scenario s : {Scenario::Exp1Full, Scenario::Exp2RandomMissing,
                       Scenario::Exp3ConsecutiveMissing, Scenario::Exp4Halved}) {
        CHECK(scenario_from_string(scenario_to_string(s)) == s);
    }
    for (Arm a : {Arm::CeOnly, Arm::MseOnly, Arm::DaOnly, Arm::EnsembleOnly, Arm::DaEnsemble}) {
        CHECK(arm_from_string(arm_to_string(a)) == a);
    }
    CHECK(scenario_from_string("exp2") == Scenario::Exp2RandomMissing);
    CHECK(arm_from_string("da+ensemble") == Arm::DaEnsemble);
}

TEST_CASE("scenario configs are validated before any work") {
    ScenarioConfig bad1;
    bad1.scenario = Scenario::Exp1Full;
    bad1.arms = {Arm::CeOnly};
    bad1.deleted_counts = {{5}};
    CHECK_THROWS_AS(run_scenario(bad1, "nonexistent"), Error);

    ScenarioConfig bad2;
    bad2.scenario = Scenario::Exp2RandomMissing;
    bad2.arms = {Arm::CeOnly};
    bad2.rounds = 2;  // no deleted-count lists at all
    CHECK_THROWS_AS(run_scenario(bad2, "nonexistent"), Error);

    ScenarioConfig bad3;
    bad3.scenario = Scenario::Exp1Full;
    bad3.arms = {};
    CHECK_THROWS_AS(run_scenario(bad3, "nonexistent"), Error);
}

TEST_CASE("a full scenario run scores every arm on one frozen test set") {
    const fs::path root = testutil::scratch_dir("harness_exp2");
    generate_harness_dataset(root, {1, 5, 10, 15, 20}, 5, SplitRatio{3, 2}, 21);

    ScenarioConfig config;
    config.scenario = Scenario::Exp2RandomMissing;
    config.rounds = 2;
    config.deleted_counts = {{10}, {10}};
    config.arms = {Arm::CeOnly, Arm::MseOnly, Arm::DaOnly, Arm::EnsembleOnly, Arm::DaEnsemble};
    config.rng_seed = 11;
    config.images_per_missing_count = 2;
    config.train_config.epochs = 60;
    std::map<int, FormulaPool> pool{{10, FormulaPool{10, {parse_formula("10 = 5x(2)")}}}};
    config.pools_per_round = {pool, pool};

    const ScenarioResult result = run_scenario(config, root);
    REQUIRE(result.arms.size() == 5);

    const int test_size = 5 * 6 * 2;  // counts x groups x test images per cell
    for (const ArmResult& arm : result.arms) {
        REQUIRE(arm.rounds.size() == 2);
        CHECK(arm.rounds[0].round == 1);
        CHECK(arm.rounds[1].round == 2);
        for (const ArmRoundResult& round : arm.rounds) {
            CHECK(round.metrics.n == test_size);
            CHECK(static_cast<int>(round.predictions.size()) == test_size);
            CHECK(round.metrics.rmse ==
                  doctest::Approx(rmse(round.predictions)).epsilon(1e-12));
            CHECK(round.metrics.mae == doctest::Approx(mae(round.predictions)).epsilon(1e-12));
        }

        // round statistics are the population mean/std over rounds
        const double m = (arm.rounds[0].metrics.rmse + arm.rounds[1].metrics.rmse) / 2.0;
        CHECK(arm.mean_rmse == doctest::Approx(m).epsilon(1e-12));
        double dev = 0.0;
        for (const ArmRoundResult& round : arm.rounds) {
            dev += (round.metrics.rmse - m) * (round.metrics.rmse - m);
        }
        CHECK(arm.std_rmse == doctest::Approx(std::sqrt(dev / 2.0)).epsilon(1e-12));
    }

    // every arm sees the same test records in the same order
    for (int r = 0; r < 2; ++r) {
        const std::uint64_t reference =
            truth_hash(result.arms[0].rounds[static_cast<std::size_t>(r)].predictions);
        for (const ArmResult& arm : result.arms) {
            CHECK(truth_hash(arm.rounds[static_cast<std::size_t>(r)].predictions) == reference);
        }
    }

    for (const ArmResult& arm : result.arms) {
        for (const ArmRoundResult& round : arm.rounds) {
            switch (arm.arm) {
                case Arm::CeOnly:
                case Arm::DaOnly:
                    for (const PredictionRecord& p : round.predictions) {
                        CHECK(p.source == PredictorSource::Classifier);
                        REQUIRE(p.classifier_count.has_value());
                        CHECK(*p.classifier_count == p.predicted_count);
                    }
                    break;
                case Arm::MseOnly:
                    for (const PredictionRecord& p : round.predictions) {
                        CHECK(p.source == PredictorSource::Regressor);
                        CHECK(!p.classifier_count.has_value());
                    }
                    break;
                case Arm::EnsembleOnly:
                case Arm::DaEnsemble:
                    check_decision_soundness(round.predictions);
                    break;
            }
        }
    }

    // The plain arms cannot claim the deleted count, the DA arms can.
    for (const ArmResult& arm : result.arms) {
        if (arm.arm != Arm::CeOnly) continue;
        for (const ArmRoundResult& round : arm.rounds) {
            for (const PredictionRecord& p : round.predictions) {
                CHECK(*p.classifier_count != 10);
            }
        }
    }
}

TEST_CASE("plain experiment runs are deterministic") {
    const fs::path root = testutil::scratch_dir("harness_exp1");
    generate_harness_dataset(root, {1, 5, 10}, 4, SplitRatio{1, 1}, 33);

    ScenarioConfig config;
    config.scenario = Scenario::Exp1Full;
    config.arms = {Arm::CeOnly, Arm::MseOnly};
    config.rng_seed = 7;
    config.train_config.epochs = 40;

    const ScenarioResult one = run_scenario(config, root);
    const ScenarioResult two = run_scenario(config, root);
    CHECK(report_to_json(one) == report_to_json(two));

    for (const ArmResult& arm : one.arms) {
        REQUIRE(arm.rounds.size() == 1);
        const auto& predictions = arm.rounds[0].predictions;
        CHECK(static_cast<int>(predictions.size()) == 3 * 6 * 2);
        if (arm.arm == Arm::MseOnly) {
            for (const PredictionRecord& p : predictions) {
                CHECK(p.source == PredictorSource::Regressor);
                CHECK(!p.classifier_count.has_value());
                CHECK(p.interval_lower == 1.0);
                CHECK(p.interval_upper == 10.0);  // max train count
            }
        }
    }
}

TEST_CASE("a written report differs from the comparison form only by its timestamp") {
    const fs::path root = testutil::scratch_dir("harness_report");
    generate_harness_dataset(root, {1, 5, 10}, 2, SplitRatio{1, 1}, 44);

    ScenarioConfig config;
    config.scenario = Scenario::Exp1Full;
    config.arms = {Arm::CeOnly};
    config.train_config.epochs = 20;

    const ScenarioResult result = run_scenario(config, root);
    const fs::path report_path = root / "reports" / "exp1.json";
    write_report(result, report_path);

    std::ifstream in(report_path);
    REQUIRE(in.good());
    std::string written, line;
    bool saw_timestamp = false;
    while (std::getline(in, line)) {
        if (line.find("generated_at") != std::string::npos) {
            saw_timestamp = true;
            continue;
        }
        written += line;
        written += '\n';
    }
    CHECK(saw_timestamp);
    CHECK(written == report_to_json(result));

    // The comparison form names the scenario and every arm.
    const std::string json = report_to_json(result);
    CHECK(json.find("\"exp1_full\"") != std::string::npos);
    CHECK(json.find("\"ce\"") != std::string::npos);
}

TEST_CASE("missing formula pools stop a data-augmentation arm") {
    const fs::path root = testutil::scratch_dir("harness_nopool");
    generate_harness_dataset(root, {1, 5, 10, 15, 20}, 5, SplitRatio{3, 2}, 21);

    ScenarioConfig config;
    config.scenario = Scenario::Exp2RandomMissing;
    config.rounds = 1;
    config.deleted_counts = {{10}};  // not a published round, no pools passed
    config.arms = {Arm::DaOnly};
    config.train_config.epochs = 10;
    CHECK_THROWS_AS(run_scenario(config, root), MissingFormulae);
}

TEST_CASE("manifest validation accepts generated datasets and names broken records") {
    const fs::path root = testutil::scratch_dir("harness_validate");
    const DatasetManifest manifest =
        generate_harness_dataset(root, {1, 5}, 2, SplitRatio{1, 1}, 50);
    CHECK(validate_manifest(root).empty());

    // Destroying one image file must produce a violation naming its record.
    const std::string victim = manifest.records.front().image_path;
    fs::remove(root / victim);
    const std::vector<std::string> violations = validate_manifest(root);
    REQUIRE(!violations.empty());
    bool named = false;
    for (const std::string& v : violations) {
        if (v.find(victim) != std::string::npos) named = true;
    }
    CHECK(named);
}
