#include "sudx/prompt.hpp"

#include <fstream>

#include <json.hpp>

#include "sudx/errors.hpp"

namespace sudx {

namespace {

constexpr std::string_view kPhraseSlot = "{category_phrase}";
constexpr std::string_view kChunkSlot = "{note_chunk}";

std::size_t count_occurrences(std::string_view hay, std::string_view needle) {
    std::size_t n = 0;
    std::size_t pos = 0;
    while ((pos = hay.find(needle, pos)) != std::string_view::npos) {
        ++n;
        pos += needle.size();
    }
    return n;
}

std::string substitute(std::string_view tpl, std::string_view slot, std::string_view value) {
    std::string out(tpl);
    const std::size_t pos = out.find(slot);
    if (pos != std::string::npos) out.replace(pos, slot.size(), value);
    return out;
}

}  // namespace

void validate_template(const PromptTemplate& tpl) {
    const std::string id(category_id(tpl.category));
    if (count_occurrences(tpl.template_text, kPhraseSlot) != 1) {
        throw ValidationError("prompt template for " + id +
                              " must contain {category_phrase} exactly once");
    }
    if (count_occurrences(tpl.template_text, kChunkSlot) != 1) {
        throw ValidationError("prompt template for " + id +
                              " must contain {note_chunk} exactly once");
    }
    const std::string rendered =
        substitute(substitute(tpl.template_text, kPhraseSlot, tpl.category_phrase), kChunkSlot, "");
    if (!contains_sentinel(rendered)) {
        throw ValidationError("prompt template for " + id +
                              " must instruct the backend to answer \"unanswerable\"");
    }
}

std::string render_prompt(const PromptTemplate& tpl, const Chunk& chunk) {
    validate_template(tpl);
    if (chunk.text.empty()) {
        throw ValidationError("render_prompt: empty chunk text for note " + chunk.note_id);
    }
    return substitute(substitute(tpl.template_text, kPhraseSlot, tpl.category_phrase), kChunkSlot,
                      chunk.text);
}

std::size_t prompt_token_budget(const PromptTemplate& tpl, const Tokenizer& tok) {
    validate_template(tpl);
    const std::string rendered =
        substitute(substitute(tpl.template_text, kPhraseSlot, tpl.category_phrase), kChunkSlot, "");
    return tok.count(rendered);
}

PromptRegistry::PromptRegistry() {
    for (SUDCategory c : all_categories()) {
        PromptTemplate& t = templates_[static_cast<std::size_t>(c)];
        t.category = c;
        t.template_text = std::string(kDefaultPromptTemplate);
        t.category_phrase = std::string(category_phrase(c));
        validate_template(t);
    }
}

void PromptRegistry::apply_overrides_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open prompt override file: " + path);
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError("prompt override file " + path + ": " + e.what());
    }
    if (!doc.is_object()) {
        throw ValidationError("prompt override file " + path + ": expected an object");
    }
    for (const auto& [key, value] : doc.items()) {
        auto c = category_from_id(key);
        if (!c) throw ValidationError("prompt override file " + path + ": unknown category " + key);
        PromptTemplate& t = templates_[static_cast<std::size_t>(*c)];
        t.template_text = value.get<std::string>();
        validate_template(t);
    }
}

std::optional<PromptRegistry::Parsed> PromptRegistry::parse_prompt(std::string_view prompt) const {
    for (const PromptTemplate& t : templates_) {
        const std::size_t slot = t.template_text.find(kChunkSlot);
        std::string prefix = substitute(t.template_text.substr(0, slot), kPhraseSlot, t.category_phrase);
        std::string suffix =
            substitute(t.template_text.substr(slot + kChunkSlot.size()), kPhraseSlot, t.category_phrase);
        if (prompt.size() < prefix.size() + suffix.size()) continue;
        if (prompt.substr(0, prefix.size()) != prefix) continue;
        if (!suffix.empty() && prompt.substr(prompt.size() - suffix.size()) != suffix) continue;
        Parsed p{t.category,
                 std::string(prompt.substr(prefix.size(),
                                           prompt.size() - prefix.size() - suffix.size()))};
        return p;
    }
    return std::nullopt;
}

}  // namespace sudx
