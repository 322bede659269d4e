#include "cellcount/augment.hpp"

#include <algorithm>
#include <iomanip>
#include <sstream>

#include "cellcount/pgm.hpp"
#include "cellcount/rng.hpp"

namespace cellcount {

SynthesisResult synthesize_image(const Formula& formula,
                                 const std::map<int, std::vector<ImageRecord>>& donors,
                                 const std::filesystem::path& root_dir,
                                 std::uint64_t rng_seed) {
    const ImageRecord* first = nullptr;
    for (const auto& [count, list] : donors) {
        (void)count;
        for (const ImageRecord& r : list) {
            if (!first) {
                first = &r;
            } else if (r.stain != first->stain || r.blur != first->blur) {
                throw MixedGroup("donors span multiple stain/blur groups ('" +
                                 first->image_path + "' vs '" + r.image_path + "')");
            }
        }
    }
    if (!first) throw InsufficientDonors("no donor records supplied");

    Rng rng(rng_seed);
    std::vector<const ImageRecord*> selected;
    for (const FormulaTerm& term : formula.terms) {
        auto it = donors.find(term.basis_count);
        const std::size_t have = it == donors.end() ? 0 : it->second.size();
        if (have < static_cast<std::size_t>(term.multiplicity)) {
            throw InsufficientDonors("need " + std::to_string(term.multiplicity) +
                                     " distinct donors of count " +
                                     std::to_string(term.basis_count) + ", have " +
                                     std::to_string(have));
        }
        for (int i : rng.sample_without_replacement(static_cast<int>(have), term.multiplicity)) {
            selected.push_back(&it->second[static_cast<std::size_t>(i)]);
        }
    }

    std::vector<GrayImage> images;
    std::vector<std::string> donor_paths;
    images.reserve(selected.size());
    for (const ImageRecord* r : selected) {
        images.push_back(read_pgm(root_dir / r->image_path));
        donor_paths.push_back(r->image_path);
    }

    SynthesisResult result{pixelwise_max(images), ImageRecord{}, std::move(donor_paths)};
    result.record.stain = first->stain;
    result.record.blur = first->blur;
    result.record.count = formula.target_count;
    result.record.split = Split::Train;
    result.record.provenance = Provenance::SyntheticDA;
    result.record.plate_id = -1;  // caller assigns
    return result;
}

AugmentResult augment_missing_counts(const DatasetManifest& manifest,
                                     const std::map<int, FormulaPool>& pools,
                                     int images_per_missing_count,
                                     std::uint64_t rng_seed,
                                     const std::string& name_tag) {
    if (images_per_missing_count < 0) {
        throw Error("augment: images_per_missing_count must be non-negative");
    }

    const std::set<int> train_labels = manifest.train_label_set();
    std::vector<int> missing;
    for (int c : manifest.count_grid) {
        if (!train_labels.count(c)) missing.push_back(c);
    }

    AugmentResult result{manifest, {}};
    if (images_per_missing_count == 0 || missing.empty()) return result;

    long long next_plate_id = 0;
    for (const ImageRecord& r : manifest.records) {
        next_plate_id = std::max(next_plate_id, r.plate_id + 1);
    }

    // train donors per group per count, in manifest order
    std::map<std::pair<StainType, BlurLevel>, std::map<int, std::vector<ImageRecord>>> donors;
    for (const ImageRecord& r : manifest.records) {
        if (r.split == Split::Train) donors[{r.stain, r.blur}][r.count].push_back(r);
    }

    for (int count : missing) {
        auto pool_it = pools.find(count);
        if (pool_it == pools.end() || pool_it->second.formulae.empty()) {
            throw MissingPool("no formula pool for missing count " + std::to_string(count));
        }
        const FormulaPool& pool = pool_it->second;

        int group_index = 0;
        for (StainType stain : {StainType::Nuclei, StainType::Body}) {
            for (BlurLevel blur : {BlurLevel::L1, BlurLevel::L23, BlurLevel::L48}) {
                const auto& group_donors = donors[{stain, blur}];

                // a formula qualifies when every basis has enough distinct donors here
                std::vector<const Formula*> feasible;
                for (const Formula& f : pool.formulae) {
                    bool ok = true;
                    for (const FormulaTerm& t : f.terms) {
                        auto it = group_donors.find(t.basis_count);
                        if (it == group_donors.end() ||
                            it->second.size() < static_cast<std::size_t>(t.multiplicity)) {
                            ok = false;
                            break;
                        }
                    }
                    if (ok) feasible.push_back(&f);
                }
                if (feasible.empty()) {
                    throw InsufficientDonors(
                        "no formula for count " + std::to_string(count) + " is realizable in group " +
                        stain_to_string(stain) + "/b" + std::to_string(blur_level_value(blur)));
                }

                Rng rng(derive_seed(rng_seed, seed_tag("da"),
                                    static_cast<std::uint64_t>(count),
                                    static_cast<std::uint64_t>(group_index)));
                for (int k = 0; k < images_per_missing_count; ++k) {
                    const Formula& f = *feasible[static_cast<std::size_t>(
                        rng.uniform_int(0, static_cast<long long>(feasible.size()) - 1))];
                    const std::uint64_t synth_seed = rng.next_u64();
                    SynthesisResult synth =
                        synthesize_image(f, group_donors, manifest.root_dir, synth_seed);

                    std::ostringstream name;
                    name << "images/" << name_tag << "_c" << std::setw(3) << std::setfill('0')
                         << count << '_' << stain_to_string(stain) << "_b" << std::setw(2)
                         << std::setfill('0') << blur_level_value(blur) << "_k" << k << '_'
                         << std::hex << std::setw(8) << std::setfill('0')
                         << static_cast<std::uint32_t>(synth_seed & 0xffffffffu) << ".pgm";
                    synth.record.image_path = name.str();
                    synth.record.plate_id = next_plate_id++;

                    write_pgm(synth.image, manifest.root_dir / synth.record.image_path);
                    result.log.push_back({synth.record.image_path, synth.donor_paths});
                    result.manifest.records.push_back(std::move(synth.record));
                }
                ++group_index;
            }
        }
    }
    return result;
}

}  // namespace cellcount
