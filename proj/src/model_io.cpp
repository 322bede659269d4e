#include "cellcount/model_io.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>

namespace cellcount {

namespace {

constexpr int kDoubleDigits = 17;

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open for writing: " + path.string());
    out << std::setprecision(kDoubleDigits);
    return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open for reading: " + path.string());
    return in;
}

void expect_header(std::istream& in, const std::string& kind,
                   const std::filesystem::path& path) {
    std::string magic, version, got_kind;
    if (!(in >> magic >> version >> got_kind) || magic != "cellcount-model" ||
        version != "v1" || got_kind != kind) {
        throw MalformedHeader("not a cellcount-model v1 " + kind + " file: " + path.string());
    }
}

void write_standardizer(std::ostream& out, const Standardizer& s) {
    out << s.mean.size() << "\n";
    for (double v : s.mean) out << v << " ";
    out << "\n";
    for (double v : s.stdev) out << v << " ";
    out << "\n";
}

Standardizer read_standardizer(std::istream& in, const std::filesystem::path& path) {
    std::size_t dim = 0;
    if (!(in >> dim) || dim == 0) {
        throw IoError("bad standardizer dimension in " + path.string());
    }
    Standardizer s;
    s.mean.resize(dim);
    s.stdev.resize(dim);
    for (double& v : s.mean) in >> v;
    for (double& v : s.stdev) in >> v;
    if (!in) throw IoError("truncated standardizer in " + path.string());
    return s;
}

}  // namespace

void save_classifier(const ClassifierModel& model, const std::filesystem::path& path) {
    std::ofstream out = open_out(path);
    out << "cellcount-model v1 classifier\n";
    out << model.label_set.size() << "\n";
    for (int label : model.label_set) out << label << " ";
    out << "\n";
    write_standardizer(out, model.standardizer);
    out << model.weights.size() << " " << (model.weights.empty() ? 0 : model.weights.front().size())
        << "\n";
    for (const auto& row : model.weights) {
        for (double v : row) out << v << " ";
        out << "\n";
    }
    out << model.training_config.learning_rate << " " << model.training_config.epochs << " "
        << model.training_config.l2_penalty << " " << model.training_config.rng_seed << "\n";
    out << model.final_train_loss << "\n";
    if (!out) throw IoError("write failed: " + path.string());
}

ClassifierModel load_classifier(const std::filesystem::path& path) {
    std::ifstream in = open_in(path);
    expect_header(in, "classifier", path);
    ClassifierModel model;
    std::size_t n_labels = 0;
    in >> n_labels;
    model.label_set.resize(n_labels);
    for (int& label : model.label_set) in >> label;
    if (!in) throw IoError("truncated label set in " + path.string());
    model.standardizer = read_standardizer(in, path);
    std::size_t rows = 0, cols = 0;
    in >> rows >> cols;
    model.weights.assign(rows, std::vector<double>(cols));
    for (auto& row : model.weights) {
        for (double& v : row) in >> v;
    }
    in >> model.training_config.learning_rate >> model.training_config.epochs >>
        model.training_config.l2_penalty >> model.training_config.rng_seed;
    in >> model.final_train_loss;
    if (!in) throw IoError("truncated classifier model in " + path.string());
    return model;
}

void save_regressor(const RegressorModel& model, const std::filesystem::path& path) {
    std::ofstream out = open_out(path);
    out << "cellcount-model v1 regressor\n";
    write_standardizer(out, model.standardizer);
    out << model.weights.size() << "\n";
    for (double v : model.weights) out << v << " ";
    out << "\n";
    out << model.bias << " " << model.l2_penalty << "\n";
    if (!out) throw IoError("write failed: " + path.string());
}

RegressorModel load_regressor(const std::filesystem::path& path) {
    std::ifstream in = open_in(path);
    expect_header(in, "regressor", path);
    RegressorModel model;
    model.standardizer = read_standardizer(in, path);
    std::size_t dim = 0;
    in >> dim;
    model.weights.resize(dim);
    for (double& v : model.weights) in >> v;
    in >> model.bias >> model.l2_penalty;
    if (!in) throw IoError("truncated regressor model in " + path.string());
    return model;
}

void save_belief_models(const std::vector<BeliefIntervalModel>& models,
                        const std::filesystem::path& path) {
    std::ofstream out = open_out(path);
    out << "cellcount-model v1 belief\n";
    out << models.size() << "\n";
    for (const BeliefIntervalModel& m : models) {
        out << stain_to_string(m.stain) << " " << static_cast<int>(m.blur) << " " << m.count_floor
            << " " << m.count_ceiling << "\n";
        for (const EnvelopeFit* fit : {&m.upper_envelope, &m.lower_envelope}) {
            out << fit->degree;
            for (double c : fit->coefficients) out << " " << c;
            out << "\n";
        }
    }
    if (!out) throw IoError("write failed: " + path.string());
}

std::vector<BeliefIntervalModel> load_belief_models(const std::filesystem::path& path) {
    std::ifstream in = open_in(path);
    expect_header(in, "belief", path);
    std::size_t n = 0;
    in >> n;
    std::vector<BeliefIntervalModel> models(n);
    for (BeliefIntervalModel& m : models) {
        std::string stain;
        int blur = 0;
        in >> stain >> blur >> m.count_floor >> m.count_ceiling;
        if (!in) throw IoError("truncated belief bundle in " + path.string());
        m.stain = stain_from_string(stain);
        m.blur = blur_level_from_int(blur);
        for (EnvelopeFit* fit : {&m.upper_envelope, &m.lower_envelope}) {
            in >> fit->degree;
            for (double& c : fit->coefficients) in >> c;
        }
    }
    if (!in) throw IoError("truncated belief bundle in " + path.string());
    return models;
}

}  // namespace cellcount
