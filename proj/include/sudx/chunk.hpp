#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "sudx/corpus.hpp"
#include "sudx/text.hpp"

namespace sudx {

struct ChunkingConfig {
    std::size_t max_seq_len = 512;
    std::size_t doc_stride = 128;
};

/// One sliding-window slice of a note. Token range is half-open; text is the
/// slice of the original note from the first to the last token of the range.
struct Chunk {
    std::string note_id;
    std::size_t index = 0;
    std::size_t token_start = 0;
    std::size_t token_end = 0;
    std::string text;
};

/// Splits a note so that prompt + chunk stays within config.max_seq_len
/// tokens. With window W = max_seq_len - prompt_tokens:
///   - notes of at most W tokens yield a single chunk,
///   - longer notes yield chunks starting at 0, stride, 2*stride, ...,
///     stopping at the first chunk whose end reaches the note length (that
///     chunk is clipped to the note end).
/// Throws ValidationError when the prompt leaves no room for content or when
/// a multi-chunk note would need a window no larger than the stride.
std::vector<Chunk> chunk_note(const ClinicalNote& note, std::size_t prompt_tokens,
                              const ChunkingConfig& config, const Tokenizer& tok);

void validate_chunking_config(const ChunkingConfig& config);

}  // namespace sudx
