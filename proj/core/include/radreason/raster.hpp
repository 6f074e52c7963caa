#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "radreason/synth.hpp"

namespace radreason {

/// 8-bit grayscale image, row-major; 0 is black ink, 255 is white background.
struct Bitmap {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> pixels;

    Bitmap() = default;
    Bitmap(int w, int h, std::uint8_t fill = 255)
        : width(w), height(h), pixels(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), fill) {}

    std::uint8_t at(int x, int y) const { return pixels[static_cast<std::size_t>(y) * width + x]; }
    std::uint8_t& at(int x, int y) { return pixels[static_cast<std::size_t>(y) * width + x]; }

    friend bool operator==(const Bitmap&, const Bitmap&) = default;
};

inline constexpr int kMinCanvas = 16;

/// Scales each glyph (nearest neighbour) into its rectangle on a white canvas and
/// composites by taking the darker pixel. Throws Error{reference} for a missing
/// glyph and Error{invalid_params} for a canvas below kMinCanvas.
Bitmap splice_raster(const std::map<RadicalId, Bitmap>& glyphs, const std::vector<GlyphBox>& layout, int canvas);

/// Binary PGM (P5, maxval 255).
std::string encode_pgm(const Bitmap& image);
void write_pgm(const std::filesystem::path& path, const Bitmap& image);
/// Reads P5 or P2 PGM; other maxvals are rescaled to 0..255. Throws Error{io|parse}.
Bitmap read_pgm(const std::filesystem::path& path);
Bitmap decode_pgm(const std::string& bytes);

}  // namespace radreason
