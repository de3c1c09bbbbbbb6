#include "xaieval/raster_io.hpp"

#include <png.h>

#include <atomic>
#include <bit>
#include <cctype>
#include <cmath>
#include <csetjmp>
#include <cstring>
#include <fstream>
#include <optional>
#include <string_view>
#include <unistd.h>

#include "xaieval/error.hpp"

namespace fs = std::filesystem;

namespace xaieval {
namespace {

// ---------------------------------------------------------------------------
// PNG

struct PngPixels {
    std::uint32_t width = 0;
    std::uint32_t height = 0;
    int channels = 0;
    int bit_depth = 0;
    std::vector<std::uint8_t> bytes;  // rows packed; 16-bit samples big-endian
};

struct ReadCursor {
    const std::uint8_t* data;
    std::size_t size;
    std::size_t pos;
};

struct PngMessage {
    char text[256] = {};
};

void on_png_error(png_structp png, png_const_charp msg) {
    auto* out = static_cast<PngMessage*>(png_get_error_ptr(png));
    std::strncpy(out->text, msg, sizeof(out->text) - 1);
    png_longjmp(png, 1);
}

void on_png_warning(png_structp, png_const_charp) {}

void on_png_read(png_structp png, png_bytep out, png_size_t len) {
    auto* c = static_cast<ReadCursor*>(png_get_io_ptr(png));
    if (c->pos + len > c->size) {
        png_error(png, "corrupt stream: unexpected end of PNG data");
    }
    std::memcpy(out, c->data + c->pos, len);
    c->pos += len;
}

void on_png_write(png_structp png, png_bytep data, png_size_t len) {
    auto* sink = static_cast<std::vector<std::uint8_t>*>(png_get_io_ptr(png));
    sink->insert(sink->end(), data, data + len);
}

void on_png_flush(png_structp) {}

// No C++ objects are constructed between setjmp and any png call that may
// longjmp; locals touched after setjmp are only read on the success path.
bool decode_png_raw(std::span<const std::uint8_t> bytes, PngPixels& out, PngMessage& err) {
    if (bytes.size() < 8 || png_sig_cmp(bytes.data(), 0, 8) != 0) {
        std::strncpy(err.text, "corrupt stream: not a PNG file", sizeof(err.text) - 1);
        return false;
    }
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &err, on_png_error, on_png_warning);
    if (png == nullptr) {
        std::strncpy(err.text, "libpng initialisation failed", sizeof(err.text) - 1);
        return false;
    }
    png_infop info = png_create_info_struct(png);
    ReadCursor cursor{bytes.data(), bytes.size(), 0};
    std::vector<png_bytep> rows;

    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        return false;
    }
    png_set_read_fn(png, &cursor, on_png_read);
    png_read_info(png, info);

    const int color_type = png_get_color_type(png, info);
    if (color_type == PNG_COLOR_TYPE_GRAY) {
        out.channels = 1;
    } else if (color_type == PNG_COLOR_TYPE_RGB) {
        out.channels = 3;
    } else {
        png_error(png, "unsupported color type (expected gray or RGB without alpha)");
    }
    out.bit_depth = png_get_bit_depth(png, info);
    if (out.bit_depth != 8 && out.bit_depth != 16) {
        png_error(png, "unsupported bit depth");
    }
    out.width = png_get_image_width(png, info);
    out.height = png_get_image_height(png, info);
    png_set_interlace_handling(png);
    png_read_update_info(png, info);

    const std::size_t rowbytes = png_get_rowbytes(png, info);
    out.bytes.resize(rowbytes * out.height);
    rows.resize(out.height);
    for (std::uint32_t y = 0; y < out.height; ++y) {
        rows[y] = out.bytes.data() + y * rowbytes;
    }
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);
    return true;
}

PngPixels decode_png(std::span<const std::uint8_t> bytes) {
    PngPixels out;
    PngMessage err;
    if (!decode_png_raw(bytes, out, err)) {
        throw RasterError(err.text);
    }
    return out;
}

bool encode_png_raw(std::uint32_t width, std::uint32_t height, int color_type, int bit_depth,
                    const std::uint8_t* pixels, std::size_t rowbytes,
                    std::vector<std::uint8_t>& sink, PngMessage& err) {
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &err, on_png_error, on_png_warning);
    if (png == nullptr) {
        std::strncpy(err.text, "libpng initialisation failed", sizeof(err.text) - 1);
        return false;
    }
    png_infop info = png_create_info_struct(png);
    std::vector<png_bytep> rows(height);
    for (std::uint32_t y = 0; y < height; ++y) {
        rows[y] = const_cast<png_bytep>(pixels + y * rowbytes);
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        return false;
    }
    png_set_write_fn(png, &sink, on_png_write, on_png_flush);
    png_set_IHDR(png, info, width, height, bit_depth, color_type, PNG_INTERLACE_NONE,
                 PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_set_compression_level(png, 6);
    png_write_info(png, info);
    png_write_image(png, rows.data());
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
    return true;
}

std::vector<std::uint8_t> encode_png(std::size_t width, std::size_t height, int color_type,
                                     int bit_depth, std::span<const std::uint8_t> pixels) {
    const std::size_t channels = color_type == PNG_COLOR_TYPE_RGB ? 3 : 1;
    const std::size_t rowbytes = width * channels * static_cast<std::size_t>(bit_depth / 8);
    std::vector<std::uint8_t> sink;
    PngMessage err;
    if (!encode_png_raw(static_cast<std::uint32_t>(width), static_cast<std::uint32_t>(height),
                        color_type, bit_depth, pixels.data(), rowbytes, sink, err)) {
        throw RasterError(std::string("PNG encode failed: ") + err.text);
    }
    return sink;
}

// ---------------------------------------------------------------------------
// NPY

constexpr std::string_view kNpyMagic = "\x93NUMPY";

struct NpyHeader {
    std::string descr;
    bool fortran_order = false;
    std::vector<std::size_t> shape;
};

class NpyDictParser {
public:
    explicit NpyDictParser(std::string_view text) : text_(text) {}

    NpyHeader parse() {
        NpyHeader h;
        bool have_descr = false;
        bool have_order = false;
        bool have_shape = false;
        expect('{');
        while (true) {
            skip_ws();
            if (peek() == '}') {
                ++pos_;
                break;
            }
            const std::string key = quoted();
            expect(':');
            skip_ws();
            if (key == "descr") {
                h.descr = quoted();
                have_descr = true;
            } else if (key == "fortran_order") {
                h.fortran_order = boolean();
                have_order = true;
            } else if (key == "shape") {
                h.shape = tuple();
                have_shape = true;
            } else {
                fail("unexpected key '" + key + "'");
            }
            skip_ws();
            if (peek() == ',') {
                ++pos_;
            }
        }
        if (!have_descr || !have_order || !have_shape) {
            fail("missing descr, fortran_order or shape");
        }
        return h;
    }

private:
    [[noreturn]] void fail(const std::string& why) const {
        throw RasterError("malformed NPY header: " + why);
    }
    void skip_ws() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) {
            ++pos_;
        }
    }
    char peek() const { return pos_ < text_.size() ? text_[pos_] : '\0'; }
    void expect(char c) {
        skip_ws();
        if (peek() != c) {
            fail(std::string("expected '") + c + "'");
        }
        ++pos_;
    }
    std::string quoted() {
        skip_ws();
        const char q = peek();
        if (q != '\'' && q != '"') {
            fail("expected quoted string");
        }
        const auto end = text_.find(q, pos_ + 1);
        if (end == std::string_view::npos) {
            fail("unterminated string");
        }
        std::string s(text_.substr(pos_ + 1, end - pos_ - 1));
        pos_ = end + 1;
        return s;
    }
    bool boolean() {
        if (text_.substr(pos_, 4) == "True") {
            pos_ += 4;
            return true;
        }
        if (text_.substr(pos_, 5) == "False") {
            pos_ += 5;
            return false;
        }
        fail("expected True or False");
    }
    std::vector<std::size_t> tuple() {
        expect('(');
        std::vector<std::size_t> dims;
        while (true) {
            skip_ws();
            if (peek() == ')') {
                ++pos_;
                return dims;
            }
            if (!std::isdigit(static_cast<unsigned char>(peek()))) {
                fail("expected integer in shape");
            }
            std::size_t v = 0;
            while (std::isdigit(static_cast<unsigned char>(peek()))) {
                v = v * 10 + static_cast<std::size_t>(text_[pos_++] - '0');
            }
            dims.push_back(v);
            skip_ws();
            if (peek() == ',') {
                ++pos_;
            }
        }
    }

    std::string_view text_;
    std::size_t pos_ = 0;
};

Heatmap decode_npy(std::span<const std::uint8_t> bytes, std::string method_id) {
    if (bytes.size() < 10 ||
        std::memcmp(bytes.data(), kNpyMagic.data(), kNpyMagic.size()) != 0) {
        throw RasterError("malformed NPY header: bad magic");
    }
    if (bytes[6] != 1 || bytes[7] != 0) {
        throw RasterError("malformed NPY header: unsupported version " + std::to_string(bytes[6]) +
                          "." + std::to_string(bytes[7]));
    }
    const std::size_t header_len = static_cast<std::size_t>(bytes[8]) |
                                   (static_cast<std::size_t>(bytes[9]) << 8);
    if (10 + header_len > bytes.size()) {
        throw RasterError("malformed NPY header: truncated");
    }
    const std::string_view text(reinterpret_cast<const char*>(bytes.data() + 10), header_len);
    const NpyHeader h = NpyDictParser(text).parse();
    if (h.descr != "<f4") {
        throw RasterError("unsupported NPY dtype '" + h.descr + "' (expected '<f4')");
    }
    if (h.fortran_order) {
        throw RasterError("unsupported NPY layout: fortran_order must be False");
    }
    if (h.shape.size() != 2) {
        throw RasterError("wrong shape rank " + std::to_string(h.shape.size()) +
                          " (expected (height, width))");
    }
    const std::size_t height = h.shape[0];
    const std::size_t width = h.shape[1];
    const std::size_t payload = bytes.size() - 10 - header_len;
    if (payload != width * height * sizeof(float)) {
        throw RasterError("NPY data length does not match shape");
    }
    std::vector<float> values(width * height);
    std::memcpy(values.data(), bytes.data() + 10 + header_len, payload);
    if constexpr (std::endian::native == std::endian::big) {
        for (auto& v : values) {
            v = std::bit_cast<float>(__builtin_bswap32(std::bit_cast<std::uint32_t>(v)));
        }
    }
    return Heatmap(width, height, std::move(values), std::move(method_id));
}

}  // namespace

// ---------------------------------------------------------------------------

std::vector<std::uint8_t> read_file_bytes(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw RasterError("cannot open file: " + path.string());
    }
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file_bytes(const fs::path& path, std::span<const std::uint8_t> bytes) {
    static std::atomic<unsigned> counter{0};
    if (path.has_parent_path()) {
        std::error_code ec;
        fs::create_directories(path.parent_path(), ec);
    }
    fs::path tmp = path;
    tmp += ".tmp." + std::to_string(::getpid()) + "." + std::to_string(counter++);
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw RasterError("cannot write file: " + path.string());
        }
        out.write(reinterpret_cast<const char*>(bytes.data()),
                  static_cast<std::streamsize>(bytes.size()));
        if (!out) {
            throw RasterError("write failed: " + path.string());
        }
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) {
        fs::remove(tmp, ec);
        throw RasterError("cannot write file: " + path.string());
    }
}

ImageRaster decode_image_png(std::span<const std::uint8_t> bytes) {
    PngPixels px = decode_png(bytes);
    if (px.bit_depth != 8) {
        throw RasterError("unsupported bit depth " + std::to_string(px.bit_depth) +
                          " for image (expected 8)");
    }
    return ImageRaster(px.width, px.height, static_cast<std::size_t>(px.channels), std::move(px.bytes));
}

BinaryMask decode_mask_png(std::span<const std::uint8_t> bytes, MaskRole role) {
    PngPixels px = decode_png(bytes);
    if (px.channels != 1) {
        throw RasterError("mask must be single-channel");
    }
    if (px.bit_depth != 8) {
        throw RasterError("unsupported bit depth " + std::to_string(px.bit_depth) +
                          " for mask (expected 8)");
    }
    return BinaryMask(px.width, px.height, std::move(px.bytes), role);
}

Heatmap decode_heatmap(std::span<const std::uint8_t> bytes, std::string method_id) {
    if (bytes.size() >= kNpyMagic.size() &&
        std::memcmp(bytes.data(), kNpyMagic.data(), kNpyMagic.size()) == 0) {
        return decode_npy(bytes, std::move(method_id));
    }
    PngPixels px = decode_png(bytes);
    if (px.channels != 1 || px.bit_depth != 16) {
        throw RasterError("unsupported bit depth or channels for heatmap PNG (expected 16-bit gray)");
    }
    const std::size_t n = static_cast<std::size_t>(px.width) * px.height;
    std::vector<float> values(n);
    for (std::size_t i = 0; i < n; ++i) {
        const unsigned sample = (static_cast<unsigned>(px.bytes[2 * i]) << 8) | px.bytes[2 * i + 1];
        values[i] = static_cast<float>(static_cast<double>(sample) / 65535.0);
    }
    return Heatmap(px.width, px.height, std::move(values), std::move(method_id));
}

std::vector<std::uint8_t> encode_image_png(const ImageRaster& image) {
    return encode_png(image.width(), image.height(),
                      image.channels() == 3 ? PNG_COLOR_TYPE_RGB : PNG_COLOR_TYPE_GRAY, 8,
                      image.samples());
}

std::vector<std::uint8_t> encode_mask_png(const BinaryMask& mask) {
    std::vector<std::uint8_t> samples(mask.pixel_count());
    const auto bits = mask.bits();
    for (std::size_t i = 0; i < samples.size(); ++i) {
        samples[i] = bits[i] != 0 ? 255 : 0;
    }
    return encode_png(mask.width(), mask.height(), PNG_COLOR_TYPE_GRAY, 8, samples);
}

std::vector<std::uint8_t> encode_heatmap_png16(const Heatmap& heatmap) {
    const auto values = heatmap.values();
    std::vector<std::uint8_t> samples(values.size() * 2);
    for (std::size_t i = 0; i < values.size(); ++i) {
        const auto s = static_cast<unsigned>(std::lround(static_cast<double>(values[i]) * 65535.0));
        samples[2 * i] = static_cast<std::uint8_t>(s >> 8);
        samples[2 * i + 1] = static_cast<std::uint8_t>(s & 0xFF);
    }
    return encode_png(heatmap.width(), heatmap.height(), PNG_COLOR_TYPE_GRAY, 16, samples);
}

std::vector<std::uint8_t> encode_heatmap_npy(const Heatmap& heatmap) {
    std::string header = "{'descr': '<f4', 'fortran_order': False, 'shape': (" +
                         std::to_string(heatmap.height()) + ", " +
                         std::to_string(heatmap.width()) + "), }";
    // Pad so that magic + version + length + header is a multiple of 64.
    const std::size_t unpadded = kNpyMagic.size() + 2 + 2 + header.size() + 1;
    header.append((64 - unpadded % 64) % 64, ' ');
    header.push_back('\n');

    std::vector<std::uint8_t> out;
    out.reserve(10 + header.size() + heatmap.pixel_count() * sizeof(float));
    out.insert(out.end(), kNpyMagic.begin(), kNpyMagic.end());
    out.push_back(1);
    out.push_back(0);
    out.push_back(static_cast<std::uint8_t>(header.size() & 0xFF));
    out.push_back(static_cast<std::uint8_t>(header.size() >> 8));
    out.insert(out.end(), header.begin(), header.end());
    for (float v : heatmap.values()) {
        auto bits = std::bit_cast<std::uint32_t>(v);
        for (int k = 0; k < 4; ++k) {
            out.push_back(static_cast<std::uint8_t>(bits >> (8 * k)));
        }
    }
    return out;
}

ImageRaster load_image(const fs::path& path) {
    const auto bytes = read_file_bytes(path);
    try {
        return decode_image_png(bytes);
    } catch (const RasterError& e) {
        throw RasterError(path.string() + ": " + e.what());
    }
}

BinaryMask load_mask(const fs::path& path, MaskRole role) {
    const auto bytes = read_file_bytes(path);
    try {
        return decode_mask_png(bytes, role);
    } catch (const RasterError& e) {
        throw RasterError(path.string() + ": " + e.what());
    }
}

Heatmap load_heatmap(const fs::path& path, std::string method_id) {
    const auto bytes = read_file_bytes(path);
    try {
        return decode_heatmap(bytes, std::move(method_id));
    } catch (const RasterError& e) {
        throw RasterError(path.string() + ": " + e.what());
    }
}

void store_image(const ImageRaster& image, const fs::path& path) {
    write_file_bytes(path, encode_image_png(image));
}

void store_mask(const BinaryMask& mask, const fs::path& path) {
    write_file_bytes(path, encode_mask_png(mask));
}

void store_heatmap(const Heatmap& heatmap, const fs::path& path, HeatmapEncoding encoding) {
    write_file_bytes(path, encoding == HeatmapEncoding::Npy ? encode_heatmap_npy(heatmap)
                                                            : encode_heatmap_png16(heatmap));
}

}  // namespace xaieval
