#pragma once

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <semaphore>
#include <string>
#include <string_view>
#include <vector>

namespace fn::stats {

/// Interleaved RGB, channel values in [0, 1].
struct RgbImage {
    int width = 0;
    int height = 0;
    std::vector<float> data;

    float at(int x, int y, int c) const { return data[(static_cast<std::size_t>(y) * width + x) * 3 + c]; }
};

/// PNG (any bit depth or color type, composited to RGB) or binary/ASCII PPM.
/// Returns nullopt for anything else or a corrupt file.
std::optional<RgbImage> decode_image(std::string_view bytes);

/// 8-bit RGB PNG.
std::string encode_png(const RgbImage& image);

/// Bilinear with half-pixel centers and edge clamping.
RgbImage resize_bilinear(const RgbImage& image, int width, int height);

struct AverageImage {
    RgbImage mean;
    std::size_t count = 0;
    std::vector<std::string> skipped;  // sources that failed to fetch or decode
};

/// Pixelwise mean of already-resized images. All must share one size.
RgbImage mean_of(const std::vector<RgbImage>& images);

/// Fetches image bytes by URL with an on-disk cache. http:// URLs go over the
/// network; file:// URLs and bare paths are read locally. At most
/// `max_concurrent` fetches run at once.
class PixelCache {
public:
    explicit PixelCache(std::filesystem::path cache_dir, std::ptrdiff_t max_concurrent = 4);

    std::optional<std::string> fetch(const std::string& url);
    std::vector<std::optional<std::string>> fetch_all(const std::vector<std::string>& urls);

    std::size_t network_fetches() const { return network_fetches_; }

private:
    std::optional<std::string> fetch_uncached(const std::string& url);

    std::filesystem::path dir_;
    std::counting_semaphore<64> slots_;
    std::ptrdiff_t max_concurrent_;
    std::atomic<std::size_t> network_fetches_{0};
};

/// Fetch, decode, resize to width×height and average. Undecodable sources are
/// skipped and listed; throws StatsError{no_decodable_images} when none remain.
AverageImage average_image(PixelCache& cache, const std::vector<std::string>& urls, int width = 128,
                           int height = 128);

}  // namespace fn::stats
