#pragma once
// Proposition data model: the atomic clinical claim
// (entity, attribute, value, time) plus negation flag and provenance.
// Everything here is an immutable value type shared by extraction,
// alignment, checks and reporting.

#include "veriprop/rational.hpp"

#include <compare>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

namespace veriprop {

using Json = nlohmann::ordered_json;

// ------------------------------------------------------------------ entity

// Canonical concept token: lowercase, '_'-joined, no whitespace.
struct ConceptId {
    std::string id;

    bool empty() const { return id.empty(); }
    auto operator<=>(const ConceptId&) const = default;
};

// ---------------------------------------------------------------- attribute

enum class AttributeKind {
    Diagnosis,
    Medication,
    Dosage,
    LabValue,
    Procedure,
    Treatment,
    Status,
    Event,
};

std::string_view to_string(AttributeKind kind);
std::optional<AttributeKind> attribute_kind_from(std::string_view name);

struct Attribute {
    AttributeKind kind = AttributeKind::Event;
    std::string raw_cue;  // source phrase when inferred from text; provenance only

    // raw_cue is provenance, not identity
    friend bool operator==(const Attribute& a, const Attribute& b) { return a.kind == b.kind; }
};

// ------------------------------------------------------------------- value

struct Quantity {
    Rational magnitude;
    std::string unit;  // "" when unitless
    friend bool operator==(const Quantity&, const Quantity&) = default;
};

// Composite reading such as blood pressure "120/80".
struct QuantityPair {
    Rational first;
    Rational second;
    std::string unit;
    friend bool operator==(const QuantityPair&, const QuantityPair&) = default;
};

struct Qualitative {
    std::string label;
    friend bool operator==(const Qualitative&, const Qualitative&) = default;
};

// Canonicalized rate: count occurrences per time unit.
struct Frequency {
    Rational count;
    std::string per = "day";
    friend bool operator==(const Frequency&, const Frequency&) = default;
};

struct Present {
    bool flag = true;
    friend bool operator==(const Present&, const Present&) = default;
};

using Value = std::variant<Quantity, QuantityPair, Qualitative, Frequency, Present>;

bool is_value_bearing(const Value& v);  // everything except Present

// -------------------------------------------------------------------- time

// Position on the patient timeline. Tier -1 precedes admission, tier 0 is a
// rational day offset from admission, tiers 1 and 2 are the discharge marker
// and anything after it when no discharge date is known.
struct TimePoint {
    int tier = 0;
    Rational days;

    friend bool operator==(const TimePoint& a, const TimePoint& b) {
        return a.tier == b.tier && (a.tier != 0 || a.days == b.days);
    }
    friend bool operator<(const TimePoint& a, const TimePoint& b) {
        if (a.tier != b.tier) return a.tier < b.tier;
        return a.tier == 0 && a.days < b.days;
    }
    friend bool operator<=(const TimePoint& a, const TimePoint& b) { return a < b || a == b; }
};

enum class TimeAnchor { PreAdmission, Admission, DayN, Discharge, PostDischarge };

struct TimeUnknown {
    friend bool operator==(const TimeUnknown&, const TimeUnknown&) { return true; }
};

struct TimeMarker {
    TimeAnchor anchor = TimeAnchor::Admission;
    std::int64_t day = 0;  // used when anchor == DayN, n >= 0
    friend bool operator==(const TimeMarker& a, const TimeMarker& b) {
        return a.anchor == b.anchor && (a.anchor != TimeAnchor::DayN || a.day == b.day);
    }
};

struct TimeOffset {
    Rational days;
    friend bool operator==(const TimeOffset&, const TimeOffset&) = default;
};

struct TimeInterval {
    TimePoint start;
    TimePoint end;
    bool end_exclusive = false;
    friend bool operator==(const TimeInterval&, const TimeInterval&) = default;
};

using TimeRef = std::variant<TimeUnknown, TimeMarker, TimeOffset, TimeInterval>;

std::optional<TimePoint> time_point(const TimeRef& t);  // Marker/Offset only

struct TimeRange {
    TimePoint start;
    TimePoint end;
    bool end_exclusive = false;
};
std::optional<TimeRange> time_range(const TimeRef& t);  // nullopt for Unknown

enum class TimeOrder { Before, Equal, After };

// Partial order: nullopt when either side is Unknown or the ranges overlap
// without being identical.
std::optional<TimeOrder> compare_time(const TimeRef& a, const TimeRef& b);

// True when both refs resolve to ranges with a nonempty intersection.
// Unknown never overlaps anything.
bool time_overlaps(const TimeRef& a, const TimeRef& b);

// ------------------------------------------------------------- proposition

struct PropositionId {
    std::string doc_id;
    int index = 0;
    auto operator<=>(const PropositionId&) const = default;
};

struct SourceSpan {
    int sentence = 0;
    int begin = 0;
    int end = 0;
    friend bool operator==(const SourceSpan&, const SourceSpan&) = default;
};

struct Proposition {
    PropositionId id;
    ConceptId entity;
    Attribute attribute;
    Value value = Present{};
    TimeRef time = TimeUnknown{};
    bool negated = false;
    SourceSpan span;

    friend bool operator==(const Proposition&, const Proposition&) = default;
};

enum class DocKind { Summary, Ehr };
std::string_view to_string(DocKind kind);
std::optional<DocKind> doc_kind_from(std::string_view name);

struct PropositionSet {
    std::string doc_id;
    DocKind kind = DocKind::Summary;
    std::vector<Proposition> items;

    friend bool operator==(const PropositionSet&, const PropositionSet&) = default;
};

// The (entity, attribute-kind) pair used by the negation and presence checks.
using PropositionKey = std::pair<ConceptId, AttributeKind>;
PropositionKey proposition_key(const Proposition& p);

// Invariant check. Empty result iff the proposition is well formed; each
// entry names the field and rule broken, e.g. "time.interval_order".
std::vector<std::string> validate(const Proposition& p);

// ----------------------------------------------------------------- verdict

enum class FailureCode {
    NegationFail,
    ImplicationFail,
    TemporalFail,
    ExclusivityFail,
    NumericalFail,
    NoEvidence,
    PresenceFail,  // document-level omissions only, never on a Verdict
};
std::string_view to_string(FailureCode code);
std::optional<FailureCode> failure_code_from(std::string_view name);

struct Verdict {
    PropositionId proposition_id;
    bool supported = false;
    std::set<FailureCode> failure_codes;
    std::optional<PropositionId> matched_ehr_id;
    double similarity = 0.0;
    double confidence = 0.0;
};

// ------------------------------------------------------------------- json

Json to_json(const Rational& r);
Rational rational_from_json(const Json& j);

Json to_json(const Value& v);
Value value_from_json(const Json& j);

Json to_json(const TimeRef& t);
TimeRef time_from_json(const Json& j);

Json to_json(const Proposition& p);
Proposition proposition_from_json(const Json& j);

Json to_json(const PropositionSet& ps);
PropositionSet proposition_set_from_json(const Json& j);

Json to_json(const Verdict& v);
Verdict verdict_from_json(const Json& j);

} // namespace veriprop
