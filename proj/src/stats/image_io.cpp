#include <png.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstring>

#include "fn/image.hpp"
#include "fn/simd/kernels.hpp"
#include "fn/stats.hpp"
#include "fn/util/log.hpp"

namespace fn::stats {

namespace {

std::optional<RgbImage> decode_png(std::string_view bytes) {
    png_image img;
    std::memset(&img, 0, sizeof img);
    img.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_memory(&img, bytes.data(), bytes.size())) return std::nullopt;
    img.format = PNG_FORMAT_RGB;
    std::vector<png_byte> buffer(PNG_IMAGE_SIZE(img));
    // alpha is composited onto black
    if (!png_image_finish_read(&img, nullptr, buffer.data(), 0, nullptr)) {
        png_image_free(&img);
        return std::nullopt;
    }
    RgbImage out;
    out.width = static_cast<int>(img.width);
    out.height = static_cast<int>(img.height);
    out.data.resize(buffer.size());
    for (std::size_t i = 0; i < buffer.size(); ++i) out.data[i] = static_cast<float>(buffer[i]) / 255.0f;
    return out;
}

class PnmReader {
public:
    explicit PnmReader(std::string_view s) : s_(s) {}

    std::optional<long> number() {
        skip();
        long v = 0;
        std::size_t start = pos_;
        while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) {
            v = v * 10 + (s_[pos_++] - '0');
            if (v > 1'000'000) return std::nullopt;
        }
        if (pos_ == start) return std::nullopt;
        return v;
    }
    // exactly one whitespace byte separates the header from binary samples
    bool raster_start() {
        if (pos_ >= s_.size() || !std::isspace(static_cast<unsigned char>(s_[pos_]))) return false;
        ++pos_;
        return true;
    }
    std::string_view rest() const { return s_.substr(pos_); }

private:
    void skip() {
        while (pos_ < s_.size()) {
            if (s_[pos_] == '#') {
                while (pos_ < s_.size() && s_[pos_] != '\n') ++pos_;
            } else if (std::isspace(static_cast<unsigned char>(s_[pos_]))) {
                ++pos_;
            } else {
                break;
            }
        }
    }
    std::string_view s_;
    std::size_t pos_ = 2;
};

std::optional<RgbImage> decode_ppm(std::string_view bytes) {
    const bool binary = bytes[1] == '6';
    PnmReader r(bytes);
    auto w = r.number(), h = r.number(), maxval = r.number();
    if (!w || !h || !maxval || *w <= 0 || *h <= 0 || *maxval <= 0 || *maxval > 65535) return std::nullopt;
    RgbImage out;
    out.width = static_cast<int>(*w);
    out.height = static_cast<int>(*h);
    const std::size_t n = static_cast<std::size_t>(*w) * static_cast<std::size_t>(*h) * 3;
    out.data.resize(n);
    const float scale = 1.0f / static_cast<float>(*maxval);
    if (binary) {
        if (!r.raster_start()) return std::nullopt;
        auto raster = r.rest();
        const std::size_t width = *maxval < 256 ? 1 : 2;
        if (raster.size() < n * width) return std::nullopt;
        for (std::size_t i = 0; i < n; ++i) {
            unsigned v = static_cast<unsigned char>(raster[i * width]);
            if (width == 2) v = (v << 8) | static_cast<unsigned char>(raster[i * 2 + 1]);
            if (v > static_cast<unsigned>(*maxval)) return std::nullopt;
            out.data[i] = static_cast<float>(v) * scale;
        }
    } else {
        for (std::size_t i = 0; i < n; ++i) {
            auto v = r.number();
            if (!v || *v > *maxval) return std::nullopt;
            out.data[i] = static_cast<float>(*v) * scale;
        }
    }
    return out;
}

}  // namespace

std::optional<RgbImage> decode_image(std::string_view bytes) {
    if (bytes.size() >= 8 && png_sig_cmp(reinterpret_cast<png_const_bytep>(bytes.data()), 0, 8) == 0) {
        return decode_png(bytes);
    }
    if (bytes.size() >= 3 && bytes[0] == 'P' && (bytes[1] == '6' || bytes[1] == '3')) return decode_ppm(bytes);
    return std::nullopt;
}

std::string encode_png(const RgbImage& image) {
    std::vector<png_byte> pixels(image.data.size());
    for (std::size_t i = 0; i < pixels.size(); ++i) {
        pixels[i] = static_cast<png_byte>(std::lround(std::clamp(image.data[i], 0.0f, 1.0f) * 255.0f));
    }
    png_image img;
    std::memset(&img, 0, sizeof img);
    img.version = PNG_IMAGE_VERSION;
    img.width = static_cast<png_uint_32>(image.width);
    img.height = static_cast<png_uint_32>(image.height);
    img.format = PNG_FORMAT_RGB;
    png_alloc_size_t size = 0;
    if (!png_image_write_to_memory(&img, nullptr, &size, 0, pixels.data(), 0, nullptr)) {
        throw std::runtime_error(std::string("png encode failed: ") + img.message);
    }
    std::string out(size, '\0');
    if (!png_image_write_to_memory(&img, out.data(), &size, 0, pixels.data(), 0, nullptr)) {
        throw std::runtime_error(std::string("png encode failed: ") + img.message);
    }
    out.resize(size);
    return out;
}

RgbImage resize_bilinear(const RgbImage& src, int width, int height) {
    if (src.width <= 0 || src.height <= 0 || width <= 0 || height <= 0) {
        throw StatsError(ErrorKind::invalid, "resize needs positive dimensions");
    }
    RgbImage out;
    out.width = width;
    out.height = height;
    out.data.resize(static_cast<std::size_t>(width) * height * 3);

    struct Tap {
        int i0, i1;
        double f;
    };
    auto taps = [](int dst, int n) {
        std::vector<Tap> t(static_cast<std::size_t>(dst));
        const double scale = static_cast<double>(n) / dst;
        for (int i = 0; i < dst; ++i) {
            const double s = std::clamp((i + 0.5) * scale - 0.5, 0.0, static_cast<double>(n - 1));
            const int i0 = static_cast<int>(std::floor(s));
            t[static_cast<std::size_t>(i)] = {i0, std::min(i0 + 1, n - 1), s - i0};
        }
        return t;
    };
    const auto tx = taps(width, src.width);
    const auto ty = taps(height, src.height);
    for (int y = 0; y < height; ++y) {
        const auto& v = ty[static_cast<std::size_t>(y)];
        for (int x = 0; x < width; ++x) {
            const auto& u = tx[static_cast<std::size_t>(x)];
            for (int c = 0; c < 3; ++c) {
                const double top = src.at(u.i0, v.i0, c) * (1 - u.f) + src.at(u.i1, v.i0, c) * u.f;
                const double bottom = src.at(u.i0, v.i1, c) * (1 - u.f) + src.at(u.i1, v.i1, c) * u.f;
                out.data[(static_cast<std::size_t>(y) * width + x) * 3 + c] =
                    static_cast<float>(top * (1 - v.f) + bottom * v.f);
            }
        }
    }
    return out;
}

RgbImage mean_of(const std::vector<RgbImage>& images) {
    if (images.empty()) throw StatsError(ErrorKind::no_decodable_images, "no images to average");
    RgbImage out;
    out.width = images[0].width;
    out.height = images[0].height;
    std::vector<double> acc(images[0].data.size(), 0.0);
    for (const auto& img : images) {
        if (img.width != out.width || img.height != out.height) {
            throw StatsError(ErrorKind::invalid, "images to average differ in size");
        }
        simd::accumulate(img.data, acc);
    }
    out.data.resize(acc.size());
    simd::divide(acc, static_cast<double>(images.size()), out.data);
    return out;
}

AverageImage average_image(PixelCache& cache, const std::vector<std::string>& urls, int width, int height) {
    AverageImage out;
    const auto bytes = cache.fetch_all(urls);
    std::vector<double> acc(static_cast<std::size_t>(width) * height * 3, 0.0);
    for (std::size_t i = 0; i < urls.size(); ++i) {
        std::optional<RgbImage> img;
        if (bytes[i]) img = decode_image(*bytes[i]);
        if (!img) {
            log::warn("skipping undecodable image " + urls[i]);
            out.skipped.push_back(urls[i]);
            continue;
        }
        simd::accumulate(resize_bilinear(*img, width, height).data, acc);
        ++out.count;
    }
    if (out.count == 0) throw StatsError(ErrorKind::no_decodable_images, "none of the images could be decoded");
    out.mean.width = width;
    out.mean.height = height;
    out.mean.data.resize(acc.size());
    simd::divide(acc, static_cast<double>(out.count), out.mean.data);
    return out;
}

}  // namespace fn::stats
