#include "tensorreg/image.hpp"

#include "tensorreg/tensor_io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>

namespace tensorreg {

namespace {

// Next header token, skipping whitespace and '#' comments.
std::string header_token(std::istream& is) {
    std::string tok;
    while (is) {
        const int c = is.peek();
        if (c == '#') {
            std::string skip;
            std::getline(is, skip);
        } else if (std::isspace(c)) {
            is.get();
        } else {
            break;
        }
    }
    is >> tok;
    if (tok.empty()) throw IoError("truncated PPM header");
    return tok;
}

std::size_t header_int(std::istream& is, const char* what) {
    const std::string tok = header_token(is);
    try {
        std::size_t pos = 0;
        const long v = std::stol(tok, &pos);
        if (pos != tok.size() || v < 1) throw IoError("");
        return static_cast<std::size_t>(v);
    } catch (...) {
        throw IoError(std::string("bad PPM ") + what + " '" + tok + "'");
    }
}

}  // namespace

DenseTensor read_ppm(std::istream& is) {
    const std::string magic = header_token(is);
    if (magic != "P3" && magic != "P6") throw IoError("not a PPM file (magic '" + magic + "')");
    const std::size_t w = header_int(is, "width");
    const std::size_t h = header_int(is, "height");
    const std::size_t maxval = header_int(is, "maxval");
    if (maxval > 255) throw IoError("only 8-bit PPM is supported (maxval " + std::to_string(maxval) + ")");
    DenseTensor img({h, w, 3});
    const double scale = 1.0 / static_cast<double>(maxval);
    if (magic == "P6") {
        is.get();  // single whitespace after maxval
        std::string buf(h * w * 3, '\0');
        if (!is.read(buf.data(), static_cast<std::streamsize>(buf.size()))) throw IoError("truncated PPM pixel data");
        std::size_t k = 0;
        for (std::size_t r = 0; r < h; ++r)
            for (std::size_t c = 0; c < w; ++c)
                for (std::size_t ch = 0; ch < 3; ++ch)
                    img.at({r, c, ch}) = static_cast<unsigned char>(buf[k++]) * scale;
    } else {
        for (std::size_t r = 0; r < h; ++r)
            for (std::size_t c = 0; c < w; ++c)
                for (std::size_t ch = 0; ch < 3; ++ch) {
                    long v = -1;
                    if (!(is >> v) || v < 0 || static_cast<std::size_t>(v) > maxval)
                        throw IoError("bad or missing P3 sample at row " + std::to_string(r) + ", column " +
                                      std::to_string(c));
                    img.at({r, c, ch}) = static_cast<double>(v) * scale;
                }
    }
    return img;
}

DenseTensor load_ppm(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open " + path.string());
    try {
        return read_ppm(is);
    } catch (const IoError& e) {
        throw IoError(path.string() + ": " + e.what());
    }
}

void write_ppm(std::ostream& os, const DenseTensor& image) {
    if (image.order() != 3 || image.dim(2) != 3)
        throw std::invalid_argument("expected an h x w x 3 image, got " + shape_to_string(image.shape()));
    const std::size_t h = image.dim(0), w = image.dim(1);
    os << "P6\n" << w << ' ' << h << "\n255\n";
    std::string buf;
    buf.reserve(h * w * 3);
    for (std::size_t r = 0; r < h; ++r)
        for (std::size_t c = 0; c < w; ++c)
            for (std::size_t ch = 0; ch < 3; ++ch) {
                const double v = std::clamp(image.at({r, c, ch}), 0.0, 1.0);
                buf.push_back(static_cast<char>(static_cast<unsigned char>(std::lround(v * 255.0))));
            }
    os.write(buf.data(), static_cast<std::streamsize>(buf.size()));
}

void save_ppm(const std::filesystem::path& path, const DenseTensor& image) {
    atomic_write(path, [&](std::ostream& os) { write_ppm(os, image); });
}

}  // namespace tensorreg
