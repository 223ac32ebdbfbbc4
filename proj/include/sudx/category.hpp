#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace sudx {

/// The 11 substance-use-disorder diagnosis categories handled by the pipeline.
enum class SUDCategory : std::uint8_t {
    Alcohol = 0,
    Opioid,
    Cannabis,
    SedativeHypnoticAnxiolytic,
    Cocaine,
    Amphetamine,
    Caffeine,
    Hallucinogen,
    Nicotine,
    Inhalant,
    OtherPsychoactive,
};

inline constexpr std::size_t kCategoryCount = 11;

constexpr std::array<SUDCategory, kCategoryCount> all_categories() {
    return {SUDCategory::Alcohol,
            SUDCategory::Opioid,
            SUDCategory::Cannabis,
            SUDCategory::SedativeHypnoticAnxiolytic,
            SUDCategory::Cocaine,
            SUDCategory::Amphetamine,
            SUDCategory::Caffeine,
            SUDCategory::Hallucinogen,
            SUDCategory::Nicotine,
            SUDCategory::Inhalant,
            SUDCategory::OtherPsychoactive};
}

/// Stable identifier used in files and on the wire, e.g. "sedative_hypnotic_anxiolytic".
std::string_view category_id(SUDCategory c);

/// Human-readable phrase used inside prompts, e.g. "sedative, hypnotic or anxiolytic".
std::string_view category_phrase(SUDCategory c);

/// Inverse of category_id. Empty optional for unknown ids.
std::optional<SUDCategory> category_from_id(std::string_view id);

}  // namespace sudx
