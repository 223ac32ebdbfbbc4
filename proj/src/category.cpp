#include "sudx/category.hpp"

namespace sudx {

namespace {

struct CategoryNames {
    std::string_view id;
    std::string_view phrase;
};

constexpr std::array<CategoryNames, kCategoryCount> kNames = {{
    {"alcohol", "alcohol"},
    {"opioid", "opioid"},
    {"cannabis", "cannabis"},
    {"sedative_hypnotic_anxiolytic", "sedative, hypnotic or anxiolytic"},
    {"cocaine", "cocaine"},
    {"amphetamine", "amphetamine"},
    {"caffeine", "caffeine"},
    {"hallucinogen", "hallucinogen"},
    {"nicotine", "nicotine"},
    {"inhalant", "inhalant"},
    {"other_psychoactive", "other psychoactive substance"},
}};

}  // namespace

std::string_view category_id(SUDCategory c) {
    return kNames[static_cast<std::size_t>(c)].id;
}

std::string_view category_phrase(SUDCategory c) {
    return kNames[static_cast<std::size_t>(c)].phrase;
}

std::optional<SUDCategory> category_from_id(std::string_view id) {
    for (std::size_t i = 0; i < kNames.size(); ++i) {
        if (kNames[i].id == id) return static_cast<SUDCategory>(i);
    }
    return std::nullopt;
}

}  // namespace sudx
