#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "cellcount/dataset.hpp"
#include "cellcount/formula.hpp"

namespace cellcount {

struct SynthesisResult {
    GrayImage image;
    ImageRecord record;                   // image_path and plate_id left for the caller
    std::vector<std::string> donor_paths; // in selection order
};

// Realizes one formula: samples, without replacement per basis count, the
// required donors and overlays them by pixelwise max. The result is labeled
// with the formula's target count and the donors' stain/blur group.
// Donor lists must all belong to one (stain, blur) group (MixedGroup) and
// each basis needs at least `multiplicity` donors (InsufficientDonors).
SynthesisResult synthesize_image(const Formula& formula,
                                 const std::map<int, std::vector<ImageRecord>>& donors,
                                 const std::filesystem::path& root_dir,
                                 std::uint64_t rng_seed);

struct AugmentLogEntry {
    std::string synthetic_path;
    std::vector<std::string> donor_paths;
};

struct AugmentResult {
    DatasetManifest manifest;
    std::vector<AugmentLogEntry> log;
};

// For every count in the manifest grid that is absent from the train label
// set, synthesizes images_per_missing_count train images per (stain, blur)
// group, drawing each formula uniformly from the feasible part of that
// count's pool (a formula is feasible for a group when every basis has
// enough distinct train donors there). Images are written under
// root_dir/images/; records are appended with provenance synth_da and fresh
// plate ids. name_tag keeps filenames distinct across scenario rounds.
AugmentResult augment_missing_counts(const DatasetManifest& manifest,
                                     const std::map<int, FormulaPool>& pools,
                                     int images_per_missing_count,
                                     std::uint64_t rng_seed,
                                     const std::string& name_tag = "da");

}  // namespace cellcount
