#include "cellcount/pgm.hpp"

#include <cctype>
#include <cerrno>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <string>

namespace cellcount {

namespace {

// reads the next header token, skipping whitespace and # comments
std::string next_token(std::istream& in) {
    std::string tok;
    int c = in.get();
    while (c != EOF) {
        if (c == '#') {
            while (c != EOF && c != '\n') c = in.get();
        } else if (std::isspace(c)) {
            c = in.get();
        } else {
            break;
        }
    }
    while (c != EOF && !std::isspace(c) && c != '#') {
        tok.push_back(static_cast<char>(c));
        c = in.get();
    }
    if (c == '#') in.unget();
    return tok;
}

int parse_dim(const std::string& tok, const char* what) {
    if (tok.empty()) {
        throw MalformedHeader(std::string("missing ") + what + " in header");
    }
    for (char ch : tok) {
        if (!std::isdigit(static_cast<unsigned char>(ch))) {
            throw MalformedHeader(std::string("non-numeric ") + what + " '" + tok + "'");
        }
    }
    errno = 0;
    const long v = std::strtol(tok.c_str(), nullptr, 10);
    if (errno != 0 || v <= 0 || v > std::numeric_limits<int>::max()) {
        throw MalformedHeader(std::string(what) + " out of range: '" + tok + "'");
    }
    return static_cast<int>(v);
}

}  // namespace

GrayImage read_pgm(std::istream& in) {
    const std::string magic = next_token(in);
    if (magic != "P5") {
        throw MalformedHeader("expected magic 'P5', got '" + magic + "'");
    }
    const int width = parse_dim(next_token(in), "width");
    const int height = parse_dim(next_token(in), "height");
    const std::string maxval_tok = next_token(in);
    if (maxval_tok.empty()) {
        throw MalformedHeader("missing maxval in header");
    }
    if (maxval_tok != "255") {
        throw UnsupportedMaxval("only maxval 255 is supported, got '" + maxval_tok + "'");
    }
    // exactly one whitespace byte separates the header from the payload; the
    // token reader above has already consumed it
    std::vector<std::uint8_t> pixels(static_cast<std::size_t>(width) * static_cast<std::size_t>(height));
    in.read(reinterpret_cast<char*>(pixels.data()), static_cast<std::streamsize>(pixels.size()));
    if (static_cast<std::size_t>(in.gcount()) != pixels.size()) {
        throw TruncatedPixelData("expected " + std::to_string(pixels.size()) +
                                 " pixel bytes, got " + std::to_string(in.gcount()));
    }
    return GrayImage(width, height, std::move(pixels));
}

GrayImage read_pgm(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open '" + path.string() + "' for reading");
    }
    return read_pgm(in);
}

void write_pgm(const GrayImage& image, std::ostream& out) {
    out << "P5\n" << image.width() << ' ' << image.height() << "\n255\n";
    auto px = image.pixels();
    out.write(reinterpret_cast<const char*>(px.data()), static_cast<std::streamsize>(px.size()));
    if (!out) {
        throw IoError("failed writing pixel data");
    }
}

void write_pgm(const GrayImage& image, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot open '" + path.string() + "' for writing");
    }
    write_pgm(image, out);
    out.flush();
    if (!out) {
        throw IoError("failed flushing '" + path.string() + "'");
    }
}

}  // namespace cellcount
