#pragma once

#include <cstdint>

#include <json.hpp>

namespace cmv::corpus {

/// Accepts integer, float or numeric-string epoch seconds.
std::int64_t parse_timestamp(const nlohmann::json& value, const char* what);

}  // namespace cmv::corpus
