#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>

#include "sudx/category.hpp"
#include "sudx/chunk.hpp"
#include "sudx/text.hpp"

namespace sudx {

/// Extraction prompt for one category. The template must contain
/// {category_phrase} and {note_chunk} exactly once each, and the rendered
/// prompt must mention the sentinel so the backend knows how to decline.
struct PromptTemplate {
    SUDCategory category = SUDCategory::Alcohol;
    std::string template_text;
    std::string category_phrase;
};

inline constexpr std::string_view kDefaultPromptTemplate =
    "Extract the reference to {category_phrase} use disorder diagnosis with surrounding "
    "information relevant to it from the diagnoses section in the following note. If you "
    "can't find the answer, please respond \"unanswerable\". Note: {note_chunk}";

/// Throws ValidationError when a placeholder is missing or repeated, or when
/// the rendered prompt would not contain the sentinel instruction.
void validate_template(const PromptTemplate& tpl);

std::string render_prompt(const PromptTemplate& tpl, const Chunk& chunk);

/// Token count of the template rendered with an empty chunk; this is the
/// prompt_tokens input to chunk_note.
std::size_t prompt_token_budget(const PromptTemplate& tpl, const Tokenizer& tok);

/// The per-category templates in effect for a run: shared default plus
/// optional per-category overrides loaded from a JSON file.
class PromptRegistry {
public:
    /// All 11 categories on the default template.
    PromptRegistry();

    /// Applies overrides from a JSON object {category_id: template string}.
    void apply_overrides_file(const std::string& path);

    const PromptTemplate& for_category(SUDCategory c) const {
        return templates_[static_cast<std::size_t>(c)];
    }

    /// Recovers (category, chunk text) from a rendered prompt, used by the
    /// oracle backend. Returns nullopt when the prompt matches no template.
    struct Parsed {
        SUDCategory category;
        std::string chunk_text;
    };
    std::optional<Parsed> parse_prompt(std::string_view prompt) const;

private:
    std::array<PromptTemplate, kCategoryCount> templates_;
};

}  // namespace sudx
