#include "cellcount/dataset.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <sstream>
#include <tuple>

#include "cellcount/pgm.hpp"
#include "cellcount/rng.hpp"

namespace cellcount {

std::string stain_to_string(StainType s) {
    return s == StainType::Nuclei ? "nuclei" : "body";
}

StainType stain_from_string(const std::string& s) {
    if (s == "nuclei") return StainType::Nuclei;
    if (s == "body") return StainType::Body;
    throw Error("unknown stain '" + s + "'");
}

std::string split_to_string(Split s) {
    return s == Split::Train ? "train" : "test";
}

Split split_from_string(const std::string& s) {
    if (s == "train") return Split::Train;
    if (s == "test") return Split::Test;
    throw Error("unknown split '" + s + "'");
}

std::string provenance_to_string(Provenance p) {
    switch (p) {
        case Provenance::Real: return "real";
        case Provenance::SyntheticPlate: return "synth_plate";
        case Provenance::SyntheticDA: return "synth_da";
    }
    throw Error("invalid provenance value");
}

Provenance provenance_from_string(const std::string& s) {
    if (s == "real") return Provenance::Real;
    if (s == "synth_plate") return Provenance::SyntheticPlate;
    if (s == "synth_da") return Provenance::SyntheticDA;
    throw Error("unknown provenance '" + s + "'");
}

std::set<int> DatasetManifest::train_label_set() const {
    std::set<int> labels;
    for (const ImageRecord& r : records) {
        if (r.split == Split::Train) labels.insert(r.count);
    }
    return labels;
}

const std::vector<int>& default_count_grid() {
    static const std::vector<int> grid = {1,  5,  10, 14, 18, 23, 27, 31, 35, 40, 44, 48,
                                          53, 57, 61, 66, 70, 74, 78, 83, 87, 91, 96, 100};
    return grid;
}

namespace {

void check_render_config(const PlateRenderConfig& c) {
    if (c.image_width <= 0 || c.image_height <= 0) {
        throw Error("render config: image dimensions must be positive");
    }
    if (c.cell_radius_min < 1.0 || c.cell_radius_max < c.cell_radius_min) {
        throw Error("render config: need 1 <= radius_min <= radius_max");
    }
    if (c.nuclei_peak_intensity < 0 || c.nuclei_peak_intensity > 255 ||
        c.body_peak_intensity < 0 || c.body_peak_intensity > 255 ||
        c.background_level < 0 || c.background_level > 255) {
        throw Error("render config: intensities must lie in [0, 255]");
    }
    if (!(c.body_radius_multiplier > 1.0)) {
        throw Error("render config: body_radius_multiplier must exceed 1");
    }
    if (c.max_overlap_fraction < 0.0 || c.max_overlap_fraction > 1.0) {
        throw Error("render config: max_overlap_fraction must lie in [0, 1]");
    }
    for (BlurLevel b : {BlurLevel::L1, BlurLevel::L23, BlurLevel::L48}) {
        auto it = c.blur_sigma_map.find(b);
        if (it == c.blur_sigma_map.end() || !(it->second > 0.0)) {
            throw InvalidSigma("render config: blur_sigma_map must give a positive sigma for level " +
                               std::to_string(blur_level_value(b)));
        }
    }
}

struct Disc {
    int cx, cy;
    double radius;  // base radius; body rendering scales it
};

// Fraction of the smaller disc covered by the lens intersection.
double overlap_fraction(const Disc& a, const Disc& b) {
    const double d = std::hypot(static_cast<double>(a.cx - b.cx), static_cast<double>(a.cy - b.cy));
    const double r1 = a.radius, r2 = b.radius;
    if (d >= r1 + r2) return 0.0;
    const double rmin = std::min(r1, r2);
    if (d <= std::abs(r1 - r2)) return 1.0;
    const double lens =
        r1 * r1 * std::acos((d * d + r1 * r1 - r2 * r2) / (2.0 * d * r1)) +
        r2 * r2 * std::acos((d * d + r2 * r2 - r1 * r1) / (2.0 * d * r2)) -
        0.5 * std::sqrt((-d + r1 + r2) * (d + r1 - r2) * (d - r1 + r2) * (d + r1 + r2));
    return lens / (std::numbers::pi * rmin * rmin);
}

// Rejection-samples `count` disc placements under two-level stratification.
// A strata grid with spacing of one base diameter tiles the valid center
// region; a (count, variant)-keyed quota balances cells across a 4x4
// arrangement of coarse blocks, and a keyed shuffle picks concrete strata
// within each block. The occupied strata therefore depend only on the count
// and the layout variant, so image statistics track the count instead of
// fingerprinting individual plates, while distinct variants of one count
// occupy different strata and overlaying them stacks mass. Per-plate
// variation within a variant comes from center jitter and radius draws.
// Centers land on integer pixels with a margin wide enough that even the
// body-scaled disc stays inside the frame; base radii drive the overlap
// limit, so body views of the same geometry overlap more. Counts too dense
// for the strata grid fall back to unstratified proposals over the region.
std::vector<Disc> place_cells(int count, int layout_variant, const PlateRenderConfig& config,
                              Rng& rng) {
    const double area = static_cast<double>(config.image_width) * config.image_height;
    const double r_max = config.cell_radius_max;
    if (count * std::numbers::pi * r_max * r_max > area) {
        throw CapacityExceeded("count " + std::to_string(count) + " cannot fit a " +
                               std::to_string(config.image_width) + "x" +
                               std::to_string(config.image_height) + " image");
    }
    const int margin =
        static_cast<int>(std::ceil(config.cell_radius_max * config.body_radius_multiplier));
    const int x_hi = config.image_width - 1 - margin;
    const int y_hi = config.image_height - 1 - margin;
    if (x_hi < margin || y_hi < margin) {
        throw CapacityExceeded("image too small for the configured cell radius");
    }
    const int span_x = x_hi - margin + 1;
    const int span_y = y_hi - margin + 1;

    const int gx = std::max(1, static_cast<int>(std::floor(span_x / (2.0 * r_max))));
    const int gy = std::max(1, static_cast<int>(std::floor(span_y / (2.0 * r_max))));
    std::vector<int> chosen;
    if (static_cast<long long>(gx) * gy >= count) {
        std::array<std::vector<int>, 16> block_strata;
        for (int s = 0; s < gx * gy; ++s) {
            const int cx = margin + ((s % gx) * span_x + span_x / 2) / gx;
            const int cy = margin + ((s / gx) * span_y + span_y / 2) / gy;
            const int bx = std::min(3, cx * 4 / config.image_width);
            const int by = std::min(3, cy * 4 / config.image_height);
            block_strata[static_cast<std::size_t>(by * 4 + bx)].push_back(s);
        }
        // Quota pattern depends on the count alone; the variant re-keys only
        // the stratum choice inside each block, so variants of one count
        // share coarse structure yet overlay onto distinct strata.
        std::vector<int> block_order(block_strata.size());
        for (std::size_t i = 0; i < block_order.size(); ++i) block_order[i] = static_cast<int>(i);
        Rng quota_rng(derive_seed(seed_tag("quota"), static_cast<std::uint64_t>(count)));
        quota_rng.shuffle(block_order);
        Rng layout_rng(derive_seed(seed_tag("layout"), static_cast<std::uint64_t>(count),
                                   static_cast<std::uint64_t>(layout_variant)));
        std::array<int, 16> quota{};
        for (int remaining = count; remaining > 0;) {
            for (int b : block_order) {
                if (remaining == 0) break;
                const auto ub = static_cast<std::size_t>(b);
                if (quota[ub] < static_cast<int>(block_strata[ub].size())) {
                    ++quota[ub];
                    --remaining;
                }
            }
        }
        for (std::size_t b = 0; b < block_strata.size(); ++b) {
            if (quota[b] == 0) continue;
            for (int i : layout_rng.sample_without_replacement(
                     static_cast<int>(block_strata[b].size()), quota[b])) {
                chosen.push_back(block_strata[b][static_cast<std::size_t>(i)]);
            }
        }
    }

    constexpr int kJitter = 1;
    std::vector<Disc> placed;
    placed.reserve(static_cast<std::size_t>(count));
    long long attempts_left = 1000LL * count;
    for (int i = 0; i < count; ++i) {
        int jx_lo = margin, jx_hi = x_hi, jy_lo = margin, jy_hi = y_hi;
        if (!chosen.empty()) {
            const int s = chosen[static_cast<std::size_t>(i)];
            const int sx_lo = margin + (s % gx) * span_x / gx;
            const int sx_hi = margin + (s % gx + 1) * span_x / gx - 1;
            const int sy_lo = margin + (s / gx) * span_y / gy;
            const int sy_hi = margin + (s / gx + 1) * span_y / gy - 1;
            const int cx = (sx_lo + sx_hi) / 2;
            const int cy = (sy_lo + sy_hi) / 2;
            jx_lo = std::max(sx_lo, cx - kJitter);
            jx_hi = std::min(sx_hi, cx + kJitter);
            jy_lo = std::max(sy_lo, cy - kJitter);
            jy_hi = std::min(sy_hi, cy + kJitter);
        }
        for (;;) {
            if (attempts_left-- <= 0) {
                throw CapacityExceeded("placement attempt budget exhausted at " +
                                       std::to_string(placed.size()) + " of " +
                                       std::to_string(count) + " cells");
            }
            Disc d{static_cast<int>(rng.uniform_int(jx_lo, jx_hi)),
                   static_cast<int>(rng.uniform_int(jy_lo, jy_hi)),
                   rng.uniform_real(config.cell_radius_min, config.cell_radius_max)};
            bool ok = true;
            for (const Disc& p : placed) {
                if (overlap_fraction(d, p) > config.max_overlap_fraction) {
                    ok = false;
                    break;
                }
            }
            if (ok) {
                placed.push_back(d);
                break;
            }
        }
    }
    return placed;
}

void rasterize(GrayImage& img, const Disc& disc, double radius, int peak) {
    const int lo_x = std::max(0, disc.cx - static_cast<int>(std::ceil(radius)));
    const int hi_x = std::min(img.width() - 1, disc.cx + static_cast<int>(std::ceil(radius)));
    const int lo_y = std::max(0, disc.cy - static_cast<int>(std::ceil(radius)));
    const int hi_y = std::min(img.height() - 1, disc.cy + static_cast<int>(std::ceil(radius)));
    for (int row = lo_y; row <= hi_y; ++row) {
        for (int col = lo_x; col <= hi_x; ++col) {
            const double d = std::hypot(static_cast<double>(col - disc.cx),
                                        static_cast<double>(row - disc.cy));
            if (d >= radius) continue;
            const double v = peak * std::cos(std::numbers::pi * d / (2.0 * radius));
            const auto q = static_cast<std::uint8_t>(std::clamp<long long>(std::llround(v), 0, 255));
            img.at(row, col) = std::max(img.at(row, col), q);
        }
    }
}

GrayImage render_variant(int count, int layout_variant, StainType stain, BlurLevel blur,
                         const PlateRenderConfig& config, std::uint64_t rng_seed) {
    check_render_config(config);
    if (count < 1) throw Error("render_plate: count must be positive");

    Rng rng(rng_seed);
    const std::vector<Disc> discs = place_cells(count, layout_variant, config, rng);

    GrayImage img(config.image_width, config.image_height,
                  static_cast<std::uint8_t>(config.background_level));
    const bool body = stain == StainType::Body;
    const int peak = body ? config.body_peak_intensity : config.nuclei_peak_intensity;
    const double scale = body ? config.body_radius_multiplier : 1.0;
    for (const Disc& d : discs) rasterize(img, d, d.radius * scale, peak);

    return gaussian_blur(img, config.blur_sigma_map.at(blur));
}

}  // namespace

GrayImage render_plate(int count, StainType stain, BlurLevel blur,
                       const PlateRenderConfig& config, std::uint64_t rng_seed) {
    return render_variant(count, 0, stain, blur, config, rng_seed);
}

namespace {

std::string image_filename(long long plate_id, StainType stain, BlurLevel blur, int count) {
    std::ostringstream name;
    name << "images/p" << std::setw(5) << std::setfill('0') << plate_id << '_'
         << stain_to_string(stain) << "_b" << std::setw(2) << std::setfill('0')
         << blur_level_value(blur) << "_c" << std::setw(3) << std::setfill('0') << count
         << ".pgm";
    return name.str();
}

}  // namespace

DatasetManifest generate_dataset(const std::filesystem::path& dir,
                                 const PlateRenderConfig& config,
                                 const std::vector<int>& grid,
                                 int images_per_count_per_group,
                                 SplitRatio split_ratio, std::uint64_t rng_seed) {
    check_render_config(config);
    if (grid.empty()) throw EmptyInput("generate_dataset: empty count grid");
    std::vector<int> counts = grid;
    std::sort(counts.begin(), counts.end());
    counts.erase(std::unique(counts.begin(), counts.end()), counts.end());
    if (counts.front() < 1) throw Error("generate_dataset: counts must be positive");
    if (images_per_count_per_group < 2) {
        throw Error("generate_dataset: need at least 2 images per count per group");
    }
    if (split_ratio.train < 1 || split_ratio.test < 1) {
        throw Error("generate_dataset: split ratio parts must be positive");
    }

    std::filesystem::create_directories(dir / "images");

    const int ipcpg = images_per_count_per_group;
    const long long n_train = std::clamp<long long>(
        std::llround(static_cast<double>(ipcpg) * split_ratio.train /
                     (split_ratio.train + split_ratio.test)),
        1, ipcpg - 1);

    DatasetManifest manifest;
    manifest.root_dir = dir;
    manifest.count_grid = counts;
    manifest.images_per_count_per_group = ipcpg;
    manifest.rng_seed = rng_seed;

    long long plate_id = 0;
    for (int count : counts) {
        // per-count plate shuffle decides which plates are held out
        std::vector<int> order(static_cast<std::size_t>(ipcpg));
        for (int i = 0; i < ipcpg; ++i) order[static_cast<std::size_t>(i)] = i;
        Rng split_rng(derive_seed(rng_seed, seed_tag("split"), static_cast<std::uint64_t>(count)));
        split_rng.shuffle(order);
        std::vector<Split> splits(static_cast<std::size_t>(ipcpg), Split::Test);
        for (long long i = 0; i < n_train; ++i) {
            splits[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])] = Split::Train;
        }

        // Test plates always render layout variant 0 and train plates
        // alternate between two variants, so every test layout family has
        // train representatives while same-count train plates still offer
        // spatially distinct donors for overlay synthesis.
        int train_rank = 0;
        for (int i = 0; i < ipcpg; ++i, ++plate_id) {
            const int variant =
                splits[static_cast<std::size_t>(i)] == Split::Train ? train_rank++ % 2 : 0;
            const std::uint64_t plate_seed =
                derive_seed(rng_seed, seed_tag("plate"), static_cast<std::uint64_t>(plate_id));
            for (StainType stain : {StainType::Nuclei, StainType::Body}) {
                for (BlurLevel blur : {BlurLevel::L1, BlurLevel::L23, BlurLevel::L48}) {
                    const GrayImage img =
                        render_variant(count, variant, stain, blur, config, plate_seed);
                    ImageRecord rec;
                    rec.image_path = image_filename(plate_id, stain, blur, count);
                    rec.stain = stain;
                    rec.blur = blur;
                    rec.count = count;
                    rec.split = splits[static_cast<std::size_t>(i)];
                    rec.provenance = Provenance::SyntheticPlate;
                    rec.plate_id = plate_id;
                    write_pgm(img, dir / rec.image_path);
                    manifest.records.push_back(std::move(rec));
                }
            }
        }
    }

    save_manifest(manifest);
    return manifest;
}

DatasetManifest delete_counts(const DatasetManifest& manifest,
                              const std::set<int>& counts_to_delete) {
    for (int c : counts_to_delete) {
        if (!std::binary_search(manifest.count_grid.begin(), manifest.count_grid.end(), c)) {
            throw UnknownCount("delete_counts: count " + std::to_string(c) +
                               " is not in the grid");
        }
    }
    DatasetManifest out = manifest;
    std::erase_if(out.records, [&](const ImageRecord& r) {
        return r.split == Split::Train && counts_to_delete.count(r.count) != 0;
    });
    return out;
}

DatasetManifest halve_training_set(const DatasetManifest& manifest, std::uint64_t rng_seed) {
    std::vector<std::size_t> train_idx;
    for (std::size_t i = 0; i < manifest.records.size(); ++i) {
        if (manifest.records[i].split == Split::Train) train_idx.push_back(i);
    }
    const int n = static_cast<int>(train_idx.size());
    const int k = n / 2;
    Rng rng(derive_seed(rng_seed, seed_tag("halve")));
    std::set<std::size_t> removed;
    for (int pos : rng.sample_without_replacement(n, k)) {
        removed.insert(train_idx[static_cast<std::size_t>(pos)]);
    }
    DatasetManifest out = manifest;
    out.records.clear();
    for (std::size_t i = 0; i < manifest.records.size(); ++i) {
        if (!removed.count(i)) out.records.push_back(manifest.records[i]);
    }
    return out;
}

namespace {

constexpr const char* kManifestHeader = "image_path,stain,blur,count,split,provenance,plate_id";

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            fields.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(ch);
        }
    }
    fields.push_back(cur);
    return fields;
}

}  // namespace

void save_manifest(const DatasetManifest& manifest) {
    const std::filesystem::path path = manifest.root_dir / "manifest.csv";
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    out << kManifestHeader << '\n';
    for (const ImageRecord& r : manifest.records) {
        out << r.image_path << ',' << stain_to_string(r.stain) << ','
            << blur_level_value(r.blur) << ',' << r.count << ',' << split_to_string(r.split)
            << ',' << provenance_to_string(r.provenance) << ',' << r.plate_id << '\n';
    }
    if (!out) throw IoError("failed writing '" + path.string() + "'");
}

DatasetManifest load_dataset(const std::filesystem::path& dir) {
    const std::filesystem::path path = dir / "manifest.csv";
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path.string() + "' for reading");

    std::string line;
    if (!std::getline(in, line) || line != kManifestHeader) {
        throw MalformedHeader("manifest header must be exactly '" +
                              std::string(kManifestHeader) + "'");
    }

    DatasetManifest manifest;
    manifest.root_dir = dir;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const std::vector<std::string> f = split_csv_line(line);
        if (f.size() != 7) {
            throw Error("manifest line " + std::to_string(line_no) + ": expected 7 fields, got " +
                        std::to_string(f.size()));
        }
        try {
            ImageRecord rec;
            rec.image_path = f[0];
            rec.stain = stain_from_string(f[1]);
            rec.blur = blur_level_from_int(std::stoi(f[2]));
            rec.count = std::stoi(f[3]);
            rec.split = split_from_string(f[4]);
            rec.provenance = provenance_from_string(f[5]);
            rec.plate_id = std::stoll(f[6]);
            if (rec.count < 1) throw Error("count must be positive");
            manifest.records.push_back(std::move(rec));
        } catch (const std::exception& e) {
            throw Error("manifest line " + std::to_string(line_no) + ": " + e.what());
        }
    }

    std::set<int> counts;
    std::map<std::tuple<StainType, BlurLevel, int>, int> cell_sizes;
    for (const ImageRecord& r : manifest.records) {
        counts.insert(r.count);
        if (r.provenance != Provenance::SyntheticDA) {
            ++cell_sizes[{r.stain, r.blur, r.count}];
        }
    }
    manifest.count_grid.assign(counts.begin(), counts.end());
    for (const auto& kv : cell_sizes) {
        manifest.images_per_count_per_group =
            std::max(manifest.images_per_count_per_group, kv.second);
    }
    return manifest;
}

}  // namespace cellcount
