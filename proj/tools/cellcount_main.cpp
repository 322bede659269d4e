// Command-line front end: dataset synthesis, augmentation, training,
// ensemble fitting, prediction, validation, and the experiment harness.
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "cellcount/augment.hpp"
#include "cellcount/config.hpp"
#include "cellcount/dataset.hpp"
#include "cellcount/ensemble.hpp"
#include "cellcount/features.hpp"
#include "cellcount/harness.hpp"
#include "cellcount/metrics.hpp"
#include "cellcount/model_io.hpp"
#include "cellcount/pgm.hpp"

namespace cc = cellcount;
namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace {

struct GlobalOptions {
    std::uint64_t seed = 0;
    std::string dataset_dir;
    std::string config_path;

    cc::Config config() const {
        return config_path.empty() ? cc::Config{} : cc::load_config(config_path);
    }
    fs::path dataset() const {
        if (dataset_dir.empty()) throw cc::Error("--dataset is required for this command");
        return dataset_dir;
    }
};

void print_json(const ordered_json& j) { std::cout << j.dump(2) << "\n"; }

std::map<int, cc::FormulaPool> pools_for_round(const fs::path& path, int round) {
    const auto by_round = cc::load_formula_file(path);
    const auto it = by_round.find(round);
    if (it == by_round.end()) {
        throw cc::MissingPool("pool file " + path.string() + " has no round " +
                              std::to_string(round));
    }
    return it->second;
}

ordered_json metrics_json(const cc::MetricsReport& metrics) {
    ordered_json j;
    j["rmse"] = metrics.rmse;
    j["mae"] = metrics.mae;
    j["n"] = metrics.n;
    j["classifier_predictions"] = metrics.classifier_predictions;
    j["regressor_predictions"] = metrics.regressor_predictions;
    ordered_json per_count = ordered_json::object();
    for (const auto& [count, value] : metrics.per_count_mae) {
        per_count[std::to_string(count)] = value;
    }
    j["per_count_mae"] = std::move(per_count);
    return j;
}

const cc::BeliefIntervalModel& belief_for_group(
    const std::vector<cc::BeliefIntervalModel>& models, cc::StainType stain,
    cc::BlurLevel blur) {
    for (const cc::BeliefIntervalModel& m : models) {
        if (m.stain == stain && m.blur == blur) return m;
    }
    throw cc::GroupMismatch("no belief model for group " + cc::stain_to_string(stain) + "/b" +
                            std::to_string(static_cast<int>(blur)));
}

void run_synth(const GlobalOptions& global, const std::vector<int>& counts,
               int images_per_count, int train_ratio, int test_ratio) {
    const cc::Config config = global.config();
    const cc::PlateRenderConfig render = cc::render_config_from(config);
    const std::vector<int>& grid = counts.empty() ? cc::default_count_grid() : counts;
    const cc::DatasetManifest manifest =
        cc::generate_dataset(global.dataset(), render, grid, images_per_count,
                             {train_ratio, test_ratio}, global.seed);
    ordered_json j;
    j["dataset"] = manifest.root_dir.string();
    j["records"] = manifest.records.size();
    j["counts"] = manifest.count_grid.size();
    j["images_per_count_per_group"] = manifest.images_per_count_per_group;
    print_json(j);
}

void run_augment(const GlobalOptions& global, const std::string& formulae_path,
                 const std::string& fixtures_name, int round,
                 const std::vector<int>& delete_list, int images_per_missing_count,
                 const std::string& tag) {
    cc::DatasetManifest manifest = cc::load_dataset(global.dataset());
    if (!delete_list.empty()) {
        manifest =
            cc::delete_counts(manifest, std::set<int>(delete_list.begin(), delete_list.end()));
    }

    std::map<int, cc::FormulaPool> pools;
    if (!formulae_path.empty()) {
        pools = pools_for_round(formulae_path, round);
    } else if (!fixtures_name.empty()) {
        const cc::FixtureSet which =
            fixtures_name == "exp2" ? cc::FixtureSet::Exp2 : cc::FixtureSet::Exp3;
        for (const auto& [key, pool] : cc::load_formula_fixtures(which)) {
            if (key.first == round) pools[key.second] = pool;
        }
        if (pools.empty()) {
            throw cc::MissingPool("fixture set " + fixtures_name + " has no round " +
                                  std::to_string(round));
        }
    } else {
        throw cc::Error("augment needs --formulae or --fixtures");
    }

    const cc::AugmentResult result = cc::augment_missing_counts(
        manifest, pools, images_per_missing_count, global.seed, tag);
    cc::save_manifest(result.manifest);

    ordered_json log = ordered_json::array();
    for (const cc::AugmentLogEntry& entry : result.log) {
        log.push_back({{"synthetic", entry.synthetic_path}, {"donors", entry.donor_paths}});
    }
    const fs::path log_path = global.dataset() / "reports" / ("augment_" + tag + ".json");
    fs::create_directories(log_path.parent_path());
    std::ofstream out(log_path);
    out << log.dump(2) << "\n";
    if (!out) throw cc::IoError("cannot write " + log_path.string());

    ordered_json j;
    j["synthesized"] = result.log.size();
    j["train_records"] = result.manifest.records.size();
    j["log"] = log_path.string();
    print_json(j);
}

void run_train(const GlobalOptions& global, const std::string& out_dir, double ridge_l2) {
    const cc::Config config = global.config();
    cc::TrainingConfig train_config = cc::training_config_from(config);
    train_config.rng_seed = global.seed;

    // The classifier trains on every train record including synthetic
    // overlays; the regressor learns the real intensity scale only.
    const cc::DatasetManifest manifest = cc::load_dataset(global.dataset());
    std::vector<cc::Example> examples;
    std::vector<cc::Example> real_examples;
    for (const cc::ImageRecord& record : manifest.records) {
        if (record.split != cc::Split::Train) continue;
        cc::Example example{cc::extract_features(cc::read_pgm(manifest.resolve(record))),
                            record.count};
        if (record.provenance != cc::Provenance::SyntheticDA) real_examples.push_back(example);
        examples.push_back(std::move(example));
    }
    const cc::ClassifierModel classifier = cc::train_classifier(examples, train_config);
    const cc::RegressorModel regressor = cc::train_regressor(real_examples, ridge_l2);

    const fs::path models = out_dir.empty() ? global.dataset() / "models" : fs::path(out_dir);
    fs::create_directories(models);
    cc::save_classifier(classifier, models / "classifier.txt");
    cc::save_regressor(regressor, models / "regressor.txt");

    ordered_json j;
    j["train_examples"] = examples.size();
    j["labels"] = classifier.label_set.size();
    j["final_train_loss"] = classifier.final_train_loss;
    j["models"] = models.string();
    print_json(j);
}

void run_fit_ensemble(const GlobalOptions& global, const std::string& out_dir,
                      double quantile) {
    const cc::DatasetManifest manifest = cc::load_dataset(global.dataset());
    std::map<std::pair<cc::StainType, cc::BlurLevel>, std::vector<std::pair<double, int>>>
        points;
    for (const cc::ImageRecord& record : manifest.records) {
        if (record.split != cc::Split::Train ||
            record.provenance == cc::Provenance::SyntheticDA) {
            continue;
        }
        points[{record.stain, record.blur}].emplace_back(
            cc::average_intensity(cc::read_pgm(manifest.resolve(record))), record.count);
    }
    std::vector<cc::BeliefIntervalModel> models;
    for (const auto& [key, group_points] : points) {
        models.push_back(cc::fit_belief_model(group_points, key.first, key.second, quantile));
    }

    const fs::path dir = out_dir.empty() ? global.dataset() / "models" : fs::path(out_dir);
    fs::create_directories(dir);
    cc::save_belief_models(models, dir / "belief.txt");

    ordered_json groups = ordered_json::array();
    for (const cc::BeliefIntervalModel& m : models) {
        groups.push_back({{"stain", cc::stain_to_string(m.stain)},
                          {"blur", static_cast<int>(m.blur)},
                          {"upper", m.upper_envelope.coefficients},
                          {"lower", m.lower_envelope.coefficients},
                          {"count_ceiling", m.count_ceiling}});
    }
    ordered_json j;
    j["groups"] = std::move(groups);
    j["models"] = (dir / "belief.txt").string();
    print_json(j);
}

void run_predict(const GlobalOptions& global, const std::string& models_dir,
                 const std::string& image_path, const std::string& stain_name, int blur_int,
                 bool clamp_fallback, const std::string& report_name) {
    const fs::path models =
        models_dir.empty() ? global.dataset() / "models" : fs::path(models_dir);
    const cc::ClassifierModel classifier = cc::load_classifier(models / "classifier.txt");
    const cc::RegressorModel regressor = cc::load_regressor(models / "regressor.txt");
    const std::vector<cc::BeliefIntervalModel> beliefs =
        cc::load_belief_models(models / "belief.txt");
    cc::EnsembleOptions options;
    options.clamp_fallback = clamp_fallback;

    if (!image_path.empty()) {
        if (stain_name.empty() || blur_int == 0) {
            throw cc::Error("predict --image needs --stain and --blur");
        }
        cc::ImageRecord record;
        record.image_path = image_path;
        record.stain = cc::stain_from_string(stain_name);
        record.blur = cc::blur_level_from_int(blur_int);
        const cc::GrayImage image = cc::read_pgm(image_path);
        const cc::PredictionRecord p =
            cc::ensemble_predict(classifier, regressor, belief_for_group(beliefs, record.stain, record.blur),
                                 record, image, options);
        const cc::FeatureVector features = cc::extract_features(image);
        ordered_json j;
        j["image"] = image_path;
        j["predicted_count"] = p.predicted_count;
        j["source"] = p.source == cc::PredictorSource::Classifier ? "classifier" : "regressor";
        j["classifier_count"] = *p.classifier_count;
        j["regressor_estimate"] = cc::predict_regression(regressor, features);
        j["interval"] = {p.interval_lower, p.interval_upper};
        print_json(j);
        return;
    }

    const cc::DatasetManifest manifest = cc::load_dataset(global.dataset());
    std::vector<cc::PredictionRecord> predictions;
    for (const cc::ImageRecord& record : manifest.records) {
        if (record.split != cc::Split::Test) continue;
        predictions.push_back(
            cc::ensemble_predict(classifier, regressor,
                                 belief_for_group(beliefs, record.stain, record.blur), record,
                                 cc::read_pgm(manifest.resolve(record)), options));
    }
    const ordered_json j = metrics_json(cc::compute_metrics(predictions));
    if (!report_name.empty()) {
        const fs::path path = global.dataset() / "reports" / report_name;
        fs::create_directories(path.parent_path());
        std::ofstream out(path);
        out << j.dump(2) << "\n";
        if (!out) throw cc::IoError("cannot write " + path.string());
    }
    print_json(j);
}

void run_evaluate(const GlobalOptions& global) {
    const std::vector<std::string> violations = cc::validate_manifest(global.dataset());
    ordered_json j;
    j["dataset"] = global.dataset().string();
    j["valid"] = violations.empty();
    j["violations"] = violations;

    const fs::path path = global.dataset() / "reports" / "validation.json";
    fs::create_directories(path.parent_path());
    std::ofstream out(path);
    out << j.dump(2) << "\n";
    if (!out) throw cc::IoError("cannot write " + path.string());
    print_json(j);

    if (!violations.empty()) {
        throw cc::ValidationFailure("dataset validation failed", violations);
    }
}

void run_experiment(const GlobalOptions& global, const std::string& scenario_name,
                    int rounds_override, const std::vector<std::string>& arm_names,
                    int images_override, const std::string& formulae_path,
                    double quantile_override, bool quantile_given, bool clamp_fallback,
                    const std::string& report_name) {
    const cc::Config config = global.config();
    cc::ScenarioConfig scenario =
        cc::default_scenario_config(cc::scenario_from_string(scenario_name), global.seed);
    scenario.train_config = cc::training_config_from(config);
    scenario.train_config.rng_seed = global.seed;
    scenario.ridge_l2 = config.get_real("train.ridge_l2", scenario.ridge_l2);
    scenario.rounds = static_cast<int>(config.get_int("scenario.rounds", scenario.rounds));
    scenario.images_per_missing_count = static_cast<int>(config.get_int(
        "scenario.images_per_missing_count", scenario.images_per_missing_count));
    scenario.envelope_quantile =
        config.get_real("ensemble.envelope_quantile", scenario.envelope_quantile);
    scenario.clamp_fallback =
        config.get_bool("ensemble.clamp_fallback", scenario.clamp_fallback);

    if (rounds_override > 0) {
        scenario.rounds = rounds_override;
        if (!scenario.deleted_counts.empty()) {
            scenario.deleted_counts.resize(static_cast<std::size_t>(rounds_override));
            for (auto& list : scenario.deleted_counts) {
                if (list.empty()) {
                    throw cc::Error("no published deleted counts for round " +
                                    std::to_string(rounds_override) + "; pass --formulae");
                }
            }
        }
    }
    if (!arm_names.empty()) {
        scenario.arms.clear();
        for (const std::string& name : arm_names) scenario.arms.push_back(cc::arm_from_string(name));
    }
    if (images_override > 0) scenario.images_per_missing_count = images_override;
    if (quantile_given) scenario.envelope_quantile = quantile_override;
    if (clamp_fallback) scenario.clamp_fallback = true;
    if (!formulae_path.empty()) {
        const auto by_round = cc::load_formula_file(formulae_path);
        scenario.pools_per_round.resize(static_cast<std::size_t>(scenario.rounds));
        for (int r = 0; r < scenario.rounds; ++r) {
            const auto it = by_round.find(r + 1);
            if (it == by_round.end()) {
                throw cc::MissingPool("pool file has no round " + std::to_string(r + 1));
            }
            scenario.pools_per_round[static_cast<std::size_t>(r)] = it->second;
        }
    }

    const std::vector<std::string> violations = cc::validate_manifest(global.dataset());
    if (!violations.empty()) {
        throw cc::ValidationFailure("dataset validation failed", violations);
    }

    const cc::ScenarioResult result = cc::run_scenario(scenario, global.dataset());

    const std::string file_name = report_name.empty()
                                      ? cc::scenario_to_string(scenario.scenario) + "_seed" +
                                            std::to_string(global.seed) + ".json"
                                      : report_name;
    const fs::path report_path = global.dataset() / "reports" / file_name;
    cc::write_report(result, report_path);

    ordered_json j;
    j["scenario"] = cc::scenario_to_string(scenario.scenario);
    j["report"] = report_path.string();
    j["arms"] = ordered_json::array();
    for (const cc::ArmResult& arm : result.arms) {
        j["arms"].push_back({{"arm", cc::arm_to_string(arm.arm)},
                             {"mean_rmse", arm.mean_rmse},
                             {"std_rmse", arm.std_rmse},
                             {"mean_mae", arm.mean_mae},
                             {"std_mae", arm.std_mae}});
    }
    print_json(j);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"annotation-free cell counting toolkit"};
    app.require_subcommand(1);

    GlobalOptions global;
    app.add_option("--seed", global.seed, "RNG seed")->capture_default_str();
    app.add_option("--dataset", global.dataset_dir, "dataset directory");
    app.add_option("--config", global.config_path, "key=value config file");

    // synth
    auto* synth = app.add_subcommand("synth", "generate a synthetic plate dataset");
    std::vector<int> synth_counts;
    int synth_ipc = 5, synth_train = 3, synth_test = 2;
    synth->add_option("--counts", synth_counts, "count grid (default: built-in 24 counts)")
        ->delimiter(',');
    synth->add_option("--images-per-count", synth_ipc, "plates per count")
        ->capture_default_str();
    synth->add_option("--train-ratio", synth_train, "train share of the split")
        ->capture_default_str();
    synth->add_option("--test-ratio", synth_test, "test share of the split")
        ->capture_default_str();
    synth->callback(
        [&] { run_synth(global, synth_counts, synth_ipc, synth_train, synth_test); });

    // augment
    auto* augment = app.add_subcommand("augment", "synthesize images for missing counts");
    std::string aug_formulae, aug_fixtures, aug_tag = "da";
    int aug_round = 0, aug_images = 6;
    std::vector<int> aug_delete;
    augment->add_option("--formulae", aug_formulae, "formula pool file");
    augment->add_option("--fixtures", aug_fixtures, "built-in pools: exp2 or exp3")
        ->check(CLI::IsMember({"exp2", "exp3"}));
    augment->add_option("--round", aug_round, "round section to use")->capture_default_str();
    augment->add_option("--delete-counts", aug_delete, "train counts to delete first")
        ->delimiter(',');
    augment->add_option("--images-per-missing-count", aug_images, "synthetic images per group")
        ->capture_default_str();
    augment->add_option("--tag", aug_tag, "filename tag for synthetic images")
        ->capture_default_str();
    augment->callback([&] {
        run_augment(global, aug_formulae, aug_fixtures, aug_round, aug_delete, aug_images,
                    aug_tag);
    });

    // train
    auto* train = app.add_subcommand("train", "train the classifier/regressor pair");
    std::string train_out;
    double train_ridge = 1e-4;
    train->add_option("--out-dir", train_out, "model directory (default <dataset>/models)");
    train->add_option("--ridge-l2", train_ridge, "regressor l2 penalty")
        ->capture_default_str();
    train->callback([&] { run_train(global, train_out, train_ridge); });

    // fit-ensemble
    auto* fit = app.add_subcommand("fit-ensemble", "fit per-group belief intervals");
    std::string fit_out;
    double fit_quantile = 0.0;
    fit->add_option("--out-dir", fit_out, "model directory (default <dataset>/models)");
    fit->add_option("--envelope-quantile", fit_quantile,
                    "per-count intensity quantile (0 = min/max)")
        ->capture_default_str();
    fit->callback([&] { run_fit_ensemble(global, fit_out, fit_quantile); });

    // predict
    auto* predict = app.add_subcommand("predict", "predict counts with saved models");
    std::string pred_models, pred_image, pred_stain, pred_report;
    int pred_blur = 0;
    bool pred_clamp = false;
    predict->add_option("--models", pred_models, "model directory");
    predict->add_option("--image", pred_image, "single PGM image (otherwise: test split)");
    predict->add_option("--stain", pred_stain, "nuclei or body (with --image)");
    predict->add_option("--blur", pred_blur, "blur level 1, 23 or 48 (with --image)");
    predict->add_flag("--clamp-fallback", pred_clamp, "clamp regressor fallback to interval");
    predict->add_option("--report", pred_report, "also write <dataset>/reports/<name>");
    predict->callback([&] {
        run_predict(global, pred_models, pred_image, pred_stain, pred_blur, pred_clamp,
                    pred_report);
    });

    // evaluate
    auto* evaluate = app.add_subcommand("evaluate", "validate a dataset directory");
    evaluate->callback([&] { run_evaluate(global); });

    // experiment
    auto* experiment = app.add_subcommand("experiment", "run an evaluation scenario");
    std::string exp_scenario, exp_formulae, exp_report;
    std::vector<std::string> exp_arms;
    int exp_rounds = 0, exp_images = 0;
    double exp_quantile = 0.0;
    bool exp_clamp = false;
    experiment->add_option("--scenario", exp_scenario, "exp1, exp2, exp3 or exp4")
        ->required();
    experiment->add_option("--rounds", exp_rounds, "override round count");
    experiment->add_option("--arms", exp_arms, "arms: ce, mse, da, ensemble, da_ensemble")
        ->delimiter(',');
    experiment->add_option("--images-per-missing-count", exp_images,
                           "synthetic images per missing count per group");
    auto* exp_quantile_opt =
        experiment->add_option("--envelope-quantile", exp_quantile,
                               "per-count intensity quantile (0 = min/max)");
    experiment->add_flag("--clamp-fallback", exp_clamp,
                         "clamp regressor fallback to interval");
    experiment->add_option("--formulae", exp_formulae,
                           "pool file with '# round=<r> ...' sections");
    experiment->add_option("--report-name", exp_report, "report file name");
    experiment->callback([&] {
        run_experiment(global, exp_scenario, exp_rounds, exp_arms, exp_images, exp_formulae,
                       exp_quantile, exp_quantile_opt->count() > 0, exp_clamp, exp_report);
    });

    for (CLI::App* sub : app.get_subcommands({})) sub->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    } catch (const cc::ValidationFailure& e) {
        std::cerr << "error: " << e.what() << "\n";
        for (const std::string& v : e.violations) std::cerr << "  - " << v << "\n";
        return 1;
    } catch (const cc::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
