#include "radreason/raster.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "radreason/error.hpp"

namespace radreason {

namespace {

int to_pixel(double fraction, int canvas) {
    return std::clamp(static_cast<int>(std::lround(fraction * canvas)), 0, canvas);
}

}  // namespace

Bitmap splice_raster(const std::map<RadicalId, Bitmap>& glyphs, const std::vector<GlyphBox>& layout, int canvas) {
    if (canvas < kMinCanvas) {
        throw Error(ErrorKind::invalid_params, "canvas must be at least " + std::to_string(kMinCanvas) + " pixels");
    }
    Bitmap out(canvas, canvas, 255);
    for (const auto& box : layout) {
        auto it = glyphs.find(box.radical);
        if (it == glyphs.end()) throw Error(ErrorKind::reference, "no glyph for radical '" + box.radical.str() + "'");
        const Bitmap& glyph = it->second;
        if (glyph.width <= 0 || glyph.height <= 0) continue;

        const int x0 = to_pixel(box.rect.x, canvas);
        const int y0 = to_pixel(box.rect.y, canvas);
        const int x1 = to_pixel(box.rect.x + box.rect.w, canvas);
        const int y1 = to_pixel(box.rect.y + box.rect.h, canvas);
        const int pw = x1 - x0;
        const int ph = y1 - y0;
        if (pw <= 0 || ph <= 0) continue;

        for (int v = 0; v < ph; ++v) {
            const int sy = static_cast<int>(static_cast<long long>(v) * glyph.height / ph);
            for (int u = 0; u < pw; ++u) {
                const int sx = static_cast<int>(static_cast<long long>(u) * glyph.width / pw);
                std::uint8_t& dst = out.at(x0 + u, y0 + v);
                dst = std::min(dst, glyph.at(sx, sy));
            }
        }
    }
    return out;
}

std::string encode_pgm(const Bitmap& image) {
    std::string out = "P5\n" + std::to_string(image.width) + " " + std::to_string(image.height) + "\n255\n";
    out.append(reinterpret_cast<const char*>(image.pixels.data()), image.pixels.size());
    return out;
}

void write_pgm(const std::filesystem::path& path, const Bitmap& image) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::io, "cannot write '" + path.string() + "'");
    const std::string bytes = encode_pgm(image);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

namespace {

// Next whitespace-delimited header token, skipping '#' comments.
std::string header_token(const std::string& bytes, std::size_t& pos) {
    while (pos < bytes.size()) {
        if (bytes[pos] == '#') {
            while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
        } else if (std::isspace(static_cast<unsigned char>(bytes[pos]))) {
            ++pos;
        } else {
            break;
        }
    }
    const std::size_t start = pos;
    while (pos < bytes.size() && !std::isspace(static_cast<unsigned char>(bytes[pos])) && bytes[pos] != '#') ++pos;
    return bytes.substr(start, pos - start);
}

int header_int(const std::string& bytes, std::size_t& pos) {
    const std::string tok = header_token(bytes, pos);
    try {
        std::size_t used = 0;
        const int v = std::stoi(tok, &used);
        if (used != tok.size() || v <= 0) throw std::invalid_argument(tok);
        return v;
    } catch (const std::exception&) {
        throw Error(ErrorKind::parse, "pgm: bad header value '" + tok + "'");
    }
}

}  // namespace

Bitmap decode_pgm(const std::string& bytes) {
    std::size_t pos = 0;
    const std::string magic = header_token(bytes, pos);
    if (magic != "P5" && magic != "P2") throw Error(ErrorKind::parse, "pgm: unsupported magic '" + magic + "'");
    const int w = header_int(bytes, pos);
    const int h = header_int(bytes, pos);
    const int maxval = header_int(bytes, pos);
    if (maxval > 255) throw Error(ErrorKind::parse, "pgm: 16-bit images are not supported");

    Bitmap img(w, h, 255);
    auto scale = [maxval](int v) {
        return static_cast<std::uint8_t>(std::clamp((v * 255 + maxval / 2) / maxval, 0, 255));
    };
    if (magic == "P5") {
        ++pos;  // single whitespace after maxval
        if (bytes.size() < pos + img.pixels.size()) throw Error(ErrorKind::parse, "pgm: truncated pixel data");
        for (std::size_t i = 0; i < img.pixels.size(); ++i) {
            img.pixels[i] = scale(static_cast<unsigned char>(bytes[pos + i]));
        }
    } else {
        for (auto& px : img.pixels) {
            const std::string tok = header_token(bytes, pos);
            if (tok.empty()) throw Error(ErrorKind::parse, "pgm: truncated pixel data");
            px = scale(std::stoi(tok));
        }
    }
    return img;
}

Bitmap read_pgm(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::io, "cannot open '" + path.string() + "'");
    std::stringstream buffer;
    buffer << in.rdbuf();
    return decode_pgm(buffer.str());
}

}  // namespace radreason
