#include "sudx/chunk.hpp"

#include "sudx/errors.hpp"

namespace sudx {

void validate_chunking_config(const ChunkingConfig& config) {
    if (config.doc_stride == 0 || config.doc_stride >= config.max_seq_len) {
        throw ValidationError("chunking config requires 0 < doc_stride < max_seq_len");
    }
}

std::vector<Chunk> chunk_note(const ClinicalNote& note, std::size_t prompt_tokens,
                              const ChunkingConfig& config, const Tokenizer& tok) {
    validate_chunking_config(config);
    if (prompt_tokens >= config.max_seq_len) {
        throw ValidationError("prompt of " + std::to_string(prompt_tokens) +
                              " tokens leaves no room for note content (max_seq_len " +
                              std::to_string(config.max_seq_len) + ")");
    }
    const std::size_t window = config.max_seq_len - prompt_tokens;

    const std::vector<TokenSpan> spans = tok.token_spans(note.text);
    const std::size_t length = spans.size();

    auto slice = [&](std::size_t tb, std::size_t te) -> std::string {
        if (tb >= te) return std::string();
        const std::size_t cb = spans[tb].begin;
        const std::size_t ce = spans[te - 1].end;
        return note.text.substr(cb, ce - cb);
    };

    std::vector<Chunk> chunks;
    if (length <= window) {
        chunks.push_back({note.note_id, 0, 0, length, slice(0, length)});
        return chunks;
    }
    if (window <= config.doc_stride) {
        throw ValidationError("note " + note.note_id + " needs multiple chunks but window (" +
                              std::to_string(window) + ") does not exceed doc_stride (" +
                              std::to_string(config.doc_stride) + "); chunks would not cover it");
    }

    std::size_t start = 0;
    std::size_t index = 0;
    while (true) {
        const std::size_t end = std::min(start + window, length);
        chunks.push_back({note.note_id, index, start, end, slice(start, end)});
        if (end >= length) break;
        start += config.doc_stride;
        ++index;
    }
    return chunks;
}

}  // namespace sudx
