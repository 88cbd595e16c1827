#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace fn::util {

/// Random (version 4) UUID in canonical lowercase form.
std::string make_uuid();

bool is_uuid(std::string_view s);

/// 64-bit FNV-1a, chained through `seed`.
std::uint64_t fnv1a(std::string_view data, std::uint64_t seed = 0xcbf29ce484222325ULL);

}  // namespace fn::util
