#pragma once
// Deterministic rule-based extraction of PropositionSets from free text or
// structured document entries.

#include "veriprop/kb.hpp"
#include "veriprop/propmodel.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace veriprop {

struct ExtractError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct EmptyDocument : ExtractError {
    explicit EmptyDocument(const std::string& doc_id)
        : ExtractError("document '" + doc_id + "' has neither text nor structured entries") {}
};

// ---------------------------------------------------------------- document

struct StructuredEntry {
    std::string entity;
    std::string attribute;                    // one of the AttributeKind names
    std::optional<std::string> value_text;    // parsed with the value grammar
    std::optional<Rational> value_number;
    std::string unit;                         // applies to value_number
    std::string time;                         // parsed with the time grammar
    bool negated = false;
};

struct Document {
    std::string doc_id;
    DocKind kind = DocKind::Summary;
    std::optional<std::string> text;
    std::vector<StructuredEntry> structured;
    std::optional<std::string> admission;   // ISO date yyyy-mm-dd
    std::optional<std::string> discharge;

    static Document from_json(const Json& j);
    Json to_json() const;
};

// Admission-relative context; discharge_offset is set when both dates parse.
struct DocContext {
    std::optional<Rational> discharge_offset;

    static DocContext from(const Document& doc);
};

// -------------------------------------------------------------- operations

struct SentenceSpan {
    std::string text;
    size_t begin = 0;  // offsets into the original document text
    size_t end = 0;
};

// Splits on '.', ';' and newlines, keeping decimal numbers and a small
// abbreviation list intact. Spans index the original text.
std::vector<SentenceSpan> segment_sentences(std::string_view text);

using CharSpan = std::pair<size_t, size_t>;  // [begin, end) within a sentence

// True when a negation cue sits within the five tokens before the entity or
// a trailing "was/were not ..." construction governs it.
bool detect_negation(std::string_view sentence, CharSpan entity_span, const KnowledgeBase& kb);

// All value expressions assigned to the entity, in sentence order.
std::vector<Value> parse_values(std::string_view sentence, CharSpan entity_span,
                                const KnowledgeBase& kb);

// Highest-precedence assigned expression (QuantityPair > Quantity >
// Frequency > Qualitative), or Present(true) when none is found.
Value parse_value(std::string_view sentence, CharSpan entity_span, const KnowledgeBase& kb);

// Parses an explicit time phrase ("on day 2", "before discharge", ...).
TimeRef normalize_time(std::string_view sentence, const DocContext& ctx);

// Full pipeline; structured entries map 1:1 onto propositions ahead of any
// free-text extraction, preserving entry order.
PropositionSet extract_propositions(const Document& doc, const KnowledgeBase& kb);

} // namespace veriprop
