#include "fn/catalog_types.hpp"

#include <cmath>

#include "fn/util/strings.hpp"
#include "fn/util/time.hpp"

namespace fn::catalog {

std::string_view verification_name(Verification v) {
    switch (v) {
        case Verification::unverified: return "unverified";
        case Verification::verified: return "verified";
        case Verification::rejected: return "rejected";
    }
    return "unverified";
}

std::optional<Verification> parse_verification(std::string_view s) {
    const auto lower = util::to_lower(util::trim(s));
    if (lower == "unverified") return Verification::unverified;
    if (lower == "verified") return Verification::verified;
    if (lower == "rejected") return Verification::rejected;
    return std::nullopt;
}

bool transition_allowed(Verification from, Verification to) {
    using V = Verification;
    return (from == V::unverified && (to == V::verified || to == V::rejected)) ||
           (from == V::verified && to == V::rejected) || (from == V::rejected && to == V::verified);
}

std::string_view error_kind_name(ErrorKind k) {
    switch (k) {
        case ErrorKind::validation: return "validation";
        case ErrorKind::not_found: return "not_found";
        case ErrorKind::unresolvable_concept: return "unresolvable_concept";
        case ErrorKind::illegal_transition: return "illegal_transition";
        case ErrorKind::conflict: return "conflict";
        case ErrorKind::storage: return "storage";
    }
    return "unknown";
}

std::vector<FieldError> validate_collection(const Collection& c) {
    std::vector<FieldError> errors;
    for (const auto& f : kRequiredCollectionFields) {
        if (util::trim(c.*f.member).empty()) {
            errors.push_back({std::string(f.key), "missing required field: " + std::string(f.label)});
        }
    }
    if (!util::trim(c.record_type).empty() && !util::iequals(util::trim(c.record_type), "images")) {
        errors.push_back({"record_type", "record type must be 'images'"});
    }
    if (!util::trim(c.modified).empty() && !util::parse_iso8601(util::trim(c.modified))) {
        errors.push_back({"modified", "modified must be an ISO8601 date or timestamp"});
    }
    return errors;
}

std::vector<FieldError> validate_image(const ImageRecord& img) {
    std::vector<FieldError> errors;
    if (util::trim(img.image_url).empty()) errors.push_back({"image_url", "image URL must be nonempty"});
    if (img.latitude && !(*img.latitude >= -90.0 && *img.latitude <= 90.0)) {
        errors.push_back({"latitude", "latitude must lie in [-90, 90]"});
    }
    if (img.longitude && !(*img.longitude >= -180.0 && *img.longitude <= 180.0)) {
        errors.push_back({"longitude", "longitude must lie in [-180, 180]"});
    }
    if (img.depth_m && !(*img.depth_m >= 0.0)) errors.push_back({"depth_m", "depth must be >= 0"});
    if (img.width_px && *img.width_px <= 0) errors.push_back({"width_px", "image width must be positive"});
    if (img.height_px && *img.height_px <= 0) errors.push_back({"height_px", "image height must be positive"});
    if (img.timestamp && !util::parse_iso8601(*img.timestamp)) {
        errors.push_back({"timestamp", "timestamp must be ISO8601"});
    }
    return errors;
}

std::vector<FieldError> validate_bbox(const BoundingBox& box, std::optional<std::int64_t> width_px,
                                      std::optional<std::int64_t> height_px) {
    std::vector<FieldError> errors;
    if (!std::isfinite(box.x) || box.x < 0) errors.push_back({"x", "x must be >= 0"});
    if (!std::isfinite(box.y) || box.y < 0) errors.push_back({"y", "y must be >= 0"});
    if (!std::isfinite(box.width) || box.width <= 0) errors.push_back({"width", "width must be > 0"});
    if (!std::isfinite(box.height) || box.height <= 0) errors.push_back({"height", "height must be > 0"});
    if (errors.empty()) {
        if (width_px && box.x + box.width > static_cast<double>(*width_px)) {
            errors.push_back({"width", "box extends past the right edge of the image"});
        }
        if (height_px && box.y + box.height > static_cast<double>(*height_px)) {
            errors.push_back({"height", "box extends past the bottom edge of the image"});
        }
    }
    return errors;
}

std::vector<FieldError> validate_filter(const QueryFilter& f) {
    std::vector<FieldError> errors;
    if (f.page_size < 1 || f.page_size > kMaxPageSize) {
        errors.push_back({"page_size", "page_size must lie in [1, 1000]"});
    }
    if (f.page < 1) errors.push_back({"page", "page must be >= 1"});
    if (f.geo) {
        if (f.geo->min_lat > f.geo->max_lat) errors.push_back({"minlat", "minlat exceeds maxlat"});
        if (f.geo->min_lon > f.geo->max_lon) errors.push_back({"minlon", "minlon exceeds maxlon"});
    }
    if (f.depth && f.depth->min_m > f.depth->max_m) errors.push_back({"mindepth", "mindepth exceeds maxdepth"});
    return errors;
}

}  // namespace fn::catalog
