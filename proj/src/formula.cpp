#include "cellcount/formula.hpp"

#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

namespace cellcount {

namespace {

// strips whitespace and maps the UTF-8 multiplication sign (C3 97) to 'x'
std::string canonicalize(const std::string& text) {
    std::string out;
    for (std::size_t i = 0; i < text.size(); ++i) {
        const unsigned char c = static_cast<unsigned char>(text[i]);
        if (std::isspace(c)) continue;
        if (c == 0xC3 && i + 1 < text.size() &&
            static_cast<unsigned char>(text[i + 1]) == 0x97) {
            out.push_back('x');
            ++i;
            continue;
        }
        out.push_back(static_cast<char>(c));
    }
    return out;
}

// parses a positive integer at pos, advancing it
int parse_int(const std::string& s, std::size_t& pos, const std::string& what) {
    std::size_t start = pos;
    while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) ++pos;
    if (pos == start) {
        throw SyntaxError("expected " + what + " at position " + std::to_string(start) +
                          " of '" + s + "'");
    }
    const long long v = std::stoll(s.substr(start, pos - start));
    if (v < 1 || v > 1000000) {
        throw SyntaxError(what + " out of range in '" + s + "'");
    }
    return static_cast<int>(v);
}

void expect(const std::string& s, std::size_t& pos, char ch) {
    if (pos >= s.size() || s[pos] != ch) {
        throw SyntaxError("expected '" + std::string(1, ch) + "' at position " +
                          std::to_string(pos) + " of '" + s + "'");
    }
    ++pos;
}

}  // namespace

Formula parse_formula(const std::string& text) {
    const std::string s = canonicalize(text);
    std::size_t pos = 0;

    Formula f;
    f.target_count = parse_int(s, pos, "target count");
    expect(s, pos, '=');
    for (;;) {
        FormulaTerm term;
        term.basis_count = parse_int(s, pos, "basis count");
        expect(s, pos, 'x');
        expect(s, pos, '(');
        term.multiplicity = parse_int(s, pos, "multiplicity");
        expect(s, pos, ')');
        f.terms.push_back(term);
        if (pos == s.size()) break;
        expect(s, pos, '+');
    }

    std::set<int> bases;
    long long total = 0;
    for (const FormulaTerm& t : f.terms) {
        if (!bases.insert(t.basis_count).second) {
            throw DuplicateBasis("basis count " + std::to_string(t.basis_count) +
                                 " repeats in '" + text + "'");
        }
        total += static_cast<long long>(t.basis_count) * t.multiplicity;
    }
    if (total != f.target_count) {
        throw SumMismatch("terms of '" + text + "' total " + std::to_string(total) +
                          ", not " + std::to_string(f.target_count));
    }
    return f;
}

std::string format_formula(const Formula& formula) {
    std::ostringstream out;
    out << formula.target_count << " = ";
    for (std::size_t i = 0; i < formula.terms.size(); ++i) {
        if (i) out << " + ";
        out << formula.terms[i].basis_count << "x(" << formula.terms[i].multiplicity << ")";
    }
    return out.str();
}

namespace {

// header form: # round=<r> experiment=<e>
bool parse_section_header(const std::string& line, int& round, int& experiment) {
    std::istringstream in(line);
    std::string hash, tok;
    in >> hash;
    if (hash != "#") return false;
    int r = -1, e = -1;
    while (in >> tok) {
        if (tok.rfind("round=", 0) == 0) {
            r = std::stoi(tok.substr(6));
        } else if (tok.rfind("experiment=", 0) == 0) {
            e = std::stoi(tok.substr(11));
        }
    }
    if (r < 0) return false;
    round = r;
    experiment = e;
    return true;
}

}  // namespace

std::map<int, std::map<int, FormulaPool>> parse_formula_file(std::istream& in) {
    std::map<int, std::map<int, FormulaPool>> by_round;
    int round = 0;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string trimmed = line;
        while (!trimmed.empty() && std::isspace(static_cast<unsigned char>(trimmed.back()))) {
            trimmed.pop_back();
        }
        std::size_t first = 0;
        while (first < trimmed.size() &&
               std::isspace(static_cast<unsigned char>(trimmed[first]))) {
            ++first;
        }
        trimmed.erase(0, first);
        if (trimmed.empty()) continue;
        if (trimmed[0] == '#') {
            int r = 0, e = 0;
            if (parse_section_header(trimmed, r, e)) round = r;
            continue;  // plain comments are skipped
        }
        Formula f;
        try {
            f = parse_formula(trimmed);
        } catch (const Error& err) {
            throw SyntaxError("formula file line " + std::to_string(line_no) + ": " +
                              err.what());
        }
        FormulaPool& pool = by_round[round][f.target_count];
        pool.target_count = f.target_count;
        pool.formulae.push_back(std::move(f));
    }
    return by_round;
}

std::map<int, std::map<int, FormulaPool>> load_formula_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
    return parse_formula_file(in);
}

std::map<std::pair<int, int>, FormulaPool> load_formula_fixtures(FixtureSet which) {
    std::istringstream in(formula_fixture_text(which));
    std::map<std::pair<int, int>, FormulaPool> out;
    for (auto& [round, pools] : parse_formula_file(in)) {
        for (auto& [count, pool] : pools) {
            out[{round, count}] = std::move(pool);
        }
    }
    return out;
}

}  // namespace cellcount
