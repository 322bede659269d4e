#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "cellcount/errors.hpp"

namespace cellcount {

struct FormulaTerm {
    int basis_count = 0;
    int multiplicity = 0;
    bool operator==(const FormulaTerm&) const = default;
};

// A target count decomposed into basis counts with multiplicities, e.g.
// "15 = 5x(1) + 10x(1)". Basis counts are distinct and the terms sum to the
// target; parse_formula enforces both.
struct Formula {
    int target_count = 0;
    std::vector<FormulaTerm> terms;
    bool operator==(const Formula&) const = default;
};

struct FormulaPool {
    int target_count = 0;
    std::vector<Formula> formulae;
};

// Grammar: TARGET = B1x(M1) [+ B2x(M2) ...]; whitespace-insensitive; the
// UTF-8 multiplication sign is accepted as an alias for 'x'.
Formula parse_formula(const std::string& text);
std::string format_formula(const Formula& formula);

// Plain-text pool files: one formula per line, '# round=<r> experiment=<e>'
// section headers, blank lines ignored. Lines before any header land in
// round 0. Returns round -> target count -> pool.
std::map<int, std::map<int, FormulaPool>> parse_formula_file(std::istream& in);
std::map<int, std::map<int, FormulaPool>> load_formula_file(const std::filesystem::path& path);

enum class FixtureSet { Exp2, Exp3 };

// The shipped augmentation formulae for the two missing-count experiments,
// keyed by (round, target count) with rounds 1..3.
std::map<std::pair<int, int>, FormulaPool> load_formula_fixtures(FixtureSet which);

// Raw fixture text in the pool-file format (also usable via --formulae).
const std::string& formula_fixture_text(FixtureSet which);

}  // namespace cellcount
