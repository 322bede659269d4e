#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "cellcount/image.hpp"

namespace cellcount {

enum class Split { Train, Test };
enum class Provenance { Real, SyntheticPlate, SyntheticDA };

std::string stain_to_string(StainType s);
StainType stain_from_string(const std::string& s);
std::string split_to_string(Split s);
Split split_from_string(const std::string& s);
std::string provenance_to_string(Provenance p);
Provenance provenance_from_string(const std::string& s);

// One image plus its metadata; image_path is relative to the dataset root.
struct ImageRecord {
    std::string image_path;
    StainType stain = StainType::Nuclei;
    BlurLevel blur = BlurLevel::L1;
    int count = 1;
    Split split = Split::Train;
    Provenance provenance = Provenance::SyntheticPlate;
    long long plate_id = 0;
};

// Rendering knobs for the simulated plates. Cells are discs with cosine
// radial falloff composed by pixelwise max over the background; body stain
// reuses the same geometry with radius scaled by body_radius_multiplier so
// overlap is more severe there. Centers land on integer pixels, which keeps
// equal-radius renders translation-invariant (per-count intensity stays
// tight, the premise the belief intervals rest on).
struct PlateRenderConfig {
    int image_width = 64;
    int image_height = 64;
    double cell_radius_min = 1.8;
    double cell_radius_max = 2.3;
    int nuclei_peak_intensity = 200;
    int body_peak_intensity = 90;
    double body_radius_multiplier = 1.6;
    std::map<BlurLevel, double> blur_sigma_map = {
        {BlurLevel::L1, 0.5}, {BlurLevel::L23, 2.0}, {BlurLevel::L48, 4.0}};
    int background_level = 8;
    double max_overlap_fraction = 0.25;
};

struct SplitRatio {
    int train = 3;
    int test = 2;
};

struct DatasetManifest {
    std::filesystem::path root_dir;  // in-memory only; resolves image_path entries
    std::vector<ImageRecord> records;
    std::vector<int> count_grid;
    int images_per_count_per_group = 0;
    std::uint64_t rng_seed = 0;

    std::set<int> train_label_set() const;
    std::filesystem::path resolve(const ImageRecord& record) const {
        return root_dir / record.image_path;
    }
};

// The 24 counts used throughout; evenly spread over 1..100.
const std::vector<int>& default_count_grid();

// Renders one plate image. The seed alone fixes the cell geometry, so
// calling with the same seed but different stain/blur yields the 6 views of
// one physical plate. Throws CapacityExceeded when `count` cells cannot be
// placed under the pairwise-overlap limit within 1000*count attempts.
GrayImage render_plate(int count, StainType stain, BlurLevel blur,
                       const PlateRenderConfig& config, std::uint64_t rng_seed);

// Renders images_per_count_per_group plates for every count in the grid,
// writes images/*.pgm plus manifest.csv under dir, and assigns the split
// per plate (a plate never straddles train/test).
DatasetManifest generate_dataset(const std::filesystem::path& dir,
                                 const PlateRenderConfig& config,
                                 const std::vector<int>& grid,
                                 int images_per_count_per_group,
                                 SplitRatio split_ratio, std::uint64_t rng_seed);

// Drops the train records whose count is in counts_to_delete; test records
// and the grid itself are untouched.
DatasetManifest delete_counts(const DatasetManifest& manifest,
                              const std::set<int>& counts_to_delete);

// Uniformly removes floor(n/2) of the train records.
DatasetManifest halve_training_set(const DatasetManifest& manifest, std::uint64_t rng_seed);

// manifest.csv I/O. Exact header:
// image_path,stain,blur,count,split,provenance,plate_id
void save_manifest(const DatasetManifest& manifest);
DatasetManifest load_dataset(const std::filesystem::path& dir);

}  // namespace cellcount
