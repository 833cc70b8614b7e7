#ifndef WGM_FORMAT_HPP
#define WGM_FORMAT_HPP

#include <string>
#include <string_view>

#include <json.hpp>

namespace wgm
{

inline constexpr int kOutputSignificantDigits = 12;

// Numbers in every exported table and report use 12 significant digits.
std::string format_number(double value);

// Pretty-printed JSON with every floating-point value rounded to the output
// precision.
std::string dump_json(const nlohmann::json &document);

std::string sha256_hex(std::string_view data);

} // namespace wgm

#endif
