#include "angiosim/image_io.hpp"

#include <algorithm>
#include <cctype>
#include <cstring>
#include <fstream>
#include <sstream>

#include <fmt/core.h>
#include <png.h>

#include "angiosim/errors.hpp"

namespace angiosim {

namespace {

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::filesystem::path& path, std::string_view bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open for writing: " + path.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out.flush()) throw IoError("write failed: " + path.string());
}

class PnmHeaderReader {
public:
    explicit PnmHeaderReader(std::string_view bytes) : bytes_(bytes) {}

    long next_int(const char* field) {
        skip_space_and_comments();
        if (pos_ >= bytes_.size()) throw DecodeError(fmt::format("PGM header truncated before {}", field));
        if (!std::isdigit(static_cast<unsigned char>(bytes_[pos_])))
            throw DecodeError(fmt::format("PGM {}: expected a decimal integer", field));
        long v = 0;
        while (pos_ < bytes_.size() && std::isdigit(static_cast<unsigned char>(bytes_[pos_]))) {
            v = v * 10 + (bytes_[pos_++] - '0');
            if (v > 1'000'000'000) throw DecodeError(fmt::format("PGM {}: value too large", field));
        }
        return v;
    }

    // Exactly one whitespace byte separates maxval from the raster.
    void expect_single_space(const char* field) {
        if (pos_ >= bytes_.size() || !std::isspace(static_cast<unsigned char>(bytes_[pos_])))
            throw DecodeError(fmt::format("PGM {}: missing whitespace before pixel data", field));
        ++pos_;
    }

    std::size_t position() const { return pos_; }
    void advance(std::size_t n) { pos_ += n; }

private:
    void skip_space_and_comments() {
        while (pos_ < bytes_.size()) {
            const char c = bytes_[pos_];
            if (c == '#') {
                while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
            } else if (std::isspace(static_cast<unsigned char>(c))) {
                ++pos_;
            } else {
                break;
            }
        }
    }

    std::string_view bytes_;
    std::size_t pos_ = 0;
};

GrayImage decode_png(const std::filesystem::path& path) {
    png_image png;
    std::memset(&png, 0, sizeof(png));
    png.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_file(&png, path.c_str()))
        throw DecodeError(fmt::format("PNG header of {}: {}", path.string(), png.message));
    png.format = PNG_FORMAT_GRAY;
    if (png.width == 0 || png.height == 0 || png.width > 65536 || png.height > 65536) {
        png_image_free(&png);
        throw DecodeError(fmt::format("PNG width/height of {} out of range", path.string()));
    }
    GrayImage img(static_cast<int>(png.width), static_cast<int>(png.height));
    if (!png_image_finish_read(&png, nullptr, img.pixels.data(), 0, nullptr)) {
        const std::string msg = png.message;
        png_image_free(&png);
        throw DecodeError(fmt::format("PNG pixel data of {}: {}", path.string(), msg));
    }
    return img;
}

}  // namespace

std::string encode_pgm(const GrayImage& image) {
    if (image.width <= 0 || image.height <= 0 ||
        image.pixels.size() != static_cast<std::size_t>(image.width) * image.height)
        throw ValidationError("encode_pgm: inconsistent image dimensions");
    std::string out = fmt::format("P5\n{} {}\n255\n", image.width, image.height);
    out.append(reinterpret_cast<const char*>(image.pixels.data()), image.pixels.size());
    return out;
}

GrayImage decode_pgm(std::string_view bytes) {
    if (bytes.size() < 2 || bytes[0] != 'P') throw DecodeError("PGM magic: not a PNM file");
    if (bytes[1] != '5') throw DecodeError(fmt::format("PGM magic: 'P{}' is not binary graymap P5", bytes[1]));
    PnmHeaderReader header(bytes);
    header.advance(2);
    const long width = header.next_int("width");
    const long height = header.next_int("height");
    const long maxval = header.next_int("maxval");
    if (width <= 0) throw DecodeError("PGM width: must be positive");
    if (height <= 0) throw DecodeError("PGM height: must be positive");
    if (maxval <= 0) throw DecodeError("PGM maxval: must be positive");
    if (maxval > 255)
        throw DecodeError(fmt::format("PGM maxval: {} is not supported (8-bit images only, maxval <= 255)", maxval));
    header.expect_single_space("maxval");

    const std::size_t count = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
    if (bytes.size() - header.position() < count)
        throw DecodeError(fmt::format("PGM pixel data: truncated ({} of {} bytes)", bytes.size() - header.position(),
                                      count));

    GrayImage img(static_cast<int>(width), static_cast<int>(height));
    const auto* src = reinterpret_cast<const unsigned char*>(bytes.data() + header.position());
    if (maxval == 255) {
        std::copy(src, src + count, img.pixels.begin());
    } else {
        for (std::size_t i = 0; i < count; ++i) {
            const long v = std::min<long>(src[i], maxval);
            img.pixels[i] = static_cast<std::uint8_t>((v * 255 + maxval / 2) / maxval);
        }
    }
    return img;
}

void write_pgm(const std::filesystem::path& path, const GrayImage& image) { write_file(path, encode_pgm(image)); }

void write_png(const std::filesystem::path& path, const GrayImage& image) {
    png_image png;
    std::memset(&png, 0, sizeof(png));
    png.version = PNG_IMAGE_VERSION;
    png.width = static_cast<png_uint_32>(image.width);
    png.height = static_cast<png_uint_32>(image.height);
    png.format = PNG_FORMAT_GRAY;
    if (!png_image_write_to_file(&png, path.c_str(), 0, image.pixels.data(), 0, nullptr))
        throw IoError(fmt::format("cannot write PNG {}: {}", path.string(), png.message));
}

GrayImage decode_image(const std::filesystem::path& path) {
    const std::string bytes = read_file(path);
    static constexpr unsigned char kPngMagic[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
    if (bytes.size() >= 8 && std::memcmp(bytes.data(), kPngMagic, 8) == 0) return decode_png(path);
    if (!bytes.empty() && bytes[0] == 'P') return decode_pgm(bytes);
    throw DecodeError(fmt::format("{}: unrecognized magic bytes (expected P5 PGM or PNG)", path.string()));
}

bool is_image_file(const std::filesystem::path& path) {
    std::string ext = path.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    return ext == ".pgm" || ext == ".png";
}

}  // namespace angiosim
