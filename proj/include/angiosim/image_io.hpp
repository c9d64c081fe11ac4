#pragma once

#include <filesystem>
#include <string>

#include "angiosim/image.hpp"

namespace angiosim {

/// Binary PGM (P5), maxval 255.
std::string encode_pgm(const GrayImage& image);
GrayImage decode_pgm(std::string_view bytes);

void write_pgm(const std::filesystem::path& path, const GrayImage& image);
void write_png(const std::filesystem::path& path, const GrayImage& image);

/// Decodes a P5 PGM or a PNG (converted to 8-bit grayscale), detected by
/// magic bytes. Throws DecodeError naming the offending header field.
GrayImage decode_image(const std::filesystem::path& path);

/// True for extensions decode_image understands (.pgm, .png).
bool is_image_file(const std::filesystem::path& path);

}  // namespace angiosim
