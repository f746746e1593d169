#pragma once
// Immutable knowledge base: synonym lexicon, concept class hierarchy,
// implication rules, exclusivity pairs, unit table and cue lists.
// Loaded once from a directory of TSV files and shared read-only.

#include "veriprop/propmodel.hpp"

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace veriprop {

// ----------------------------------------------------------------- errors

struct KbError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ParseError : KbError {
    ParseError(const std::string& file, int line, const std::string& reason)
        : KbError(file + ":" + std::to_string(line) + ": " + reason),
          file(file), line(line), reason(reason) {}
    std::string file;
    int line;
    std::string reason;
};

struct CycleError : KbError {
    explicit CycleError(const std::string& path)
        : KbError("class hierarchy cycle: " + path), path(path) {}
    std::string path;
};

struct DuplicateSurfaceForm : KbError {
    explicit DuplicateSurfaceForm(const std::string& form)
        : KbError("duplicate surface form: '" + form + "'"), form(form) {}
    std::string form;
};

struct UnknownUnit : KbError {
    explicit UnknownUnit(const std::string& unit)
        : KbError("unknown unit: '" + unit + "'"), unit(unit) {}
    std::string unit;
};

struct DimensionMismatch : KbError {
    DimensionMismatch(const std::string& from, const std::string& to)
        : KbError("dimension mismatch: '" + from + "' vs '" + to + "'") {}
};

// ---------------------------------------------------------------- entries

struct ImplicationRule {
    ConceptId antecedent;
    ConceptId consequent;  // a concept or a class, resolved through is-a edges
};

struct UnitInfo {
    std::string dimension;
    Rational factor;  // multiplier to the dimension's base unit
};

// ----------------------------------------------------- text canonical form

// Lowercase, punctuation stripped, whitespace collapsed; idempotent.
std::string canonical_token(std::string_view surface);      // words joined by '_'
std::vector<std::string> canonical_words(std::string_view surface);

// ------------------------------------------------------------------- KB

class KnowledgeBase {
public:
    // Reads synonyms.tsv, classes.tsv, implications.tsv, exclusivity.tsv and
    // units.tsv from `dir`; cues.tsv is merged over the built-in cue lists
    // when present. Throws ParseError / CycleError / DuplicateSurfaceForm.
    static KnowledgeBase load(const std::filesystem::path& dir);

    // Registered forms map through the lexicon; anything else maps to its
    // canonical token. Idempotent.
    ConceptId normalize_concept(std::string_view surface) const;

    // Reflexive-transitive is-a reachability.
    bool is_member(const ConceptId& concept, const ConceptId& cls) const;

    // Symmetric lookup of a registered exclusivity pair (exact concepts).
    bool are_exclusive(const ConceptId& a, const ConceptId& b) const;

    // Exclusivity after class resolution: some registered pair (x, y) has
    // a in x and b in y (or swapped).
    bool exclusive_with_classes(const ConceptId& a, const ConceptId& b) const;

    const std::vector<ImplicationRule>& implications() const { return implications_; }
    const std::vector<std::pair<ConceptId, ConceptId>>& exclusivity_pairs() const {
        return exclusivity_;
    }

    std::optional<UnitInfo> unit(const std::string& unit) const;
    bool has_unit(const std::string& unit) const { return units_.count(unit) > 0; }

    // Exact rational conversion between same-dimension units.
    Quantity convert_unit(const Quantity& q, const std::string& target_unit) const;

    // Units sharing a dimension with `unit`, sorted, including `unit` itself.
    std::vector<std::string> units_in_dimension_of(const std::string& unit) const;

    std::vector<std::string> all_unit_names() const;

    // surface (canonical '_' form) -> concept; includes identity rows for
    // every known concept
    const std::map<std::string, ConceptId>& surface_forms() const { return surfaces_; }
    bool known_concept(const ConceptId& c) const { return concepts_.count(c) > 0; }
    const std::set<ConceptId>& concepts() const { return concepts_; }

    // Direct and transitive members of a class, sorted; excludes the class.
    std::vector<ConceptId> members_of(const ConceptId& cls) const;

    // Longest registered surface form, in words.
    int max_surface_words() const { return max_surface_words_; }

    // Cue tables used by extraction. Keys are canonical word sequences.
    const std::vector<std::pair<std::vector<std::string>, AttributeKind>>& attribute_cues() const {
        return attribute_cues_;
    }
    const std::vector<std::vector<std::string>>& negation_cues() const { return negation_cues_; }
    const std::set<std::string>& qualitative_labels() const { return qualitative_labels_; }

private:
    KnowledgeBase() = default;

    void register_concept(const ConceptId& c);
    void add_surface(const std::string& file, int line, const std::string& surface,
                     const ConceptId& concept);
    void finalize(const std::string& classes_file);

    std::map<std::string, ConceptId> surfaces_;
    std::set<ConceptId> concepts_;
    std::map<ConceptId, std::vector<ConceptId>> parents_;
    std::vector<ImplicationRule> implications_;
    std::vector<std::pair<ConceptId, ConceptId>> exclusivity_;
    std::map<std::string, UnitInfo> units_;
    std::vector<std::pair<std::vector<std::string>, AttributeKind>> attribute_cues_;
    std::vector<std::vector<std::string>> negation_cues_;
    std::set<std::string> qualitative_labels_;
    int max_surface_words_ = 1;
};

} // namespace veriprop
