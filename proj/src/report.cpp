#include "wgm/format.hpp"

#include <array>
#include <cmath>
#include <cstdio>
#include <cstdlib>

#include <openssl/evp.h>

namespace wgm
{

std::string format_number(double value)
{
    if (value == 0.0)
    {
        return "0"; // folds -0
    }
    std::array<char, 40> buffer{};
    std::snprintf(buffer.data(), buffer.size(), "%.*g", kOutputSignificantDigits, value);
    return buffer.data();
}

namespace
{

nlohmann::json rounded(const nlohmann::json &node)
{
    if (node.is_number_float())
    {
        const double value = node.get<double>();
        if (!std::isfinite(value))
        {
            return nullptr;
        }
        return std::strtod(format_number(value).c_str(), nullptr);
    }
    if (node.is_structured())
    {
        nlohmann::json out = node;
        for (auto &item : out.items())
        {
            item.value() = rounded(item.value());
        }
        return out;
    }
    return node;
}

} // namespace

std::string dump_json(const nlohmann::json &document) { return rounded(document).dump(2) + "\n"; }

std::string sha256_hex(std::string_view data)
{
    std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
    unsigned int length = 0;
    EVP_Digest(data.data(), data.size(), digest.data(), &length, EVP_sha256(), nullptr);
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    out.reserve(2 * length);
    for (unsigned int i = 0; i < length; ++i)
    {
        out.push_back(hex[digest[i] >> 4]);
        out.push_back(hex[digest[i] & 0xF]);
    }
    return out;
}

} // namespace wgm
