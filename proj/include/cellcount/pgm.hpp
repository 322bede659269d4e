#pragma once

#include <filesystem>
#include <iosfwd>

#include "cellcount/image.hpp"

namespace cellcount {

// Binary PGM ("P5"), maxval 255 only. Comment lines (#) are tolerated on
// read and never emitted on write; write-then-read round-trips bit-exactly.
GrayImage read_pgm(const std::filesystem::path& path);
GrayImage read_pgm(std::istream& in);

void write_pgm(const GrayImage& image, const std::filesystem::path& path);
void write_pgm(const GrayImage& image, std::ostream& out);

}  // namespace cellcount
