#include "veriprop/propmodel.hpp"

#include <algorithm>
#include <array>
#include <stdexcept>

namespace veriprop {

namespace {

constexpr std::array<std::string_view, 8> kAttributeNames = {
    "diagnosis", "medication", "dosage", "lab_value",
    "procedure", "treatment", "status", "event",
};

constexpr std::array<std::string_view, 7> kFailureNames = {
    "NEGATION_FAIL", "IMPLICATION_FAIL", "TEMPORAL_FAIL", "EXCLUSIVITY_FAIL",
    "NUMERICAL_FAIL", "NO_EVIDENCE", "PRESENCE_FAIL",
};

} // namespace

std::string_view to_string(AttributeKind kind) {
    return kAttributeNames[static_cast<size_t>(kind)];
}

std::optional<AttributeKind> attribute_kind_from(std::string_view name) {
    for (size_t i = 0; i < kAttributeNames.size(); ++i)
        if (kAttributeNames[i] == name) return static_cast<AttributeKind>(i);
    return std::nullopt;
}

std::string_view to_string(DocKind kind) {
    return kind == DocKind::Summary ? "summary" : "ehr";
}

std::optional<DocKind> doc_kind_from(std::string_view name) {
    if (name == "summary") return DocKind::Summary;
    if (name == "ehr") return DocKind::Ehr;
    return std::nullopt;
}

std::string_view to_string(FailureCode code) {
    return kFailureNames[static_cast<size_t>(code)];
}

std::optional<FailureCode> failure_code_from(std::string_view name) {
    for (size_t i = 0; i < kFailureNames.size(); ++i)
        if (kFailureNames[i] == name) return static_cast<FailureCode>(i);
    return std::nullopt;
}

bool is_value_bearing(const Value& v) {
    return !std::holds_alternative<Present>(v);
}

// -------------------------------------------------------------------- time

std::optional<TimePoint> time_point(const TimeRef& t) {
    if (const auto* m = std::get_if<TimeMarker>(&t)) {
        switch (m->anchor) {
            case TimeAnchor::PreAdmission:  return TimePoint{-1, 0};
            case TimeAnchor::Admission:     return TimePoint{0, 0};
            case TimeAnchor::DayN:          return TimePoint{0, Rational(m->day)};
            case TimeAnchor::Discharge:     return TimePoint{1, 0};
            case TimeAnchor::PostDischarge: return TimePoint{2, 0};
        }
    }
    if (const auto* o = std::get_if<TimeOffset>(&t)) return TimePoint{0, o->days};
    return std::nullopt;
}

std::optional<TimeRange> time_range(const TimeRef& t) {
    if (const auto* iv = std::get_if<TimeInterval>(&t))
        return TimeRange{iv->start, iv->end, iv->end_exclusive};
    if (auto p = time_point(t)) return TimeRange{*p, *p, false};
    return std::nullopt;
}

std::optional<TimeOrder> compare_time(const TimeRef& a, const TimeRef& b) {
    auto ra = time_range(a);
    auto rb = time_range(b);
    if (!ra || !rb) return std::nullopt;
    if (ra->start == rb->start && ra->end == rb->end && ra->end_exclusive == rb->end_exclusive)
        return TimeOrder::Equal;
    // a strictly precedes b when a's range ends before b's begins; a closed
    // endpoint touching b's start counts as overlap.
    auto before = [](const TimeRange& x, const TimeRange& y) {
        if (x.end < y.start) return true;
        return x.end == y.start && x.end_exclusive;
    };
    if (before(*ra, *rb)) return TimeOrder::Before;
    if (before(*rb, *ra)) return TimeOrder::After;
    return std::nullopt;
}

bool time_overlaps(const TimeRef& a, const TimeRef& b) {
    auto ra = time_range(a);
    auto rb = time_range(b);
    if (!ra || !rb) return false;
    const TimePoint& lo = ra->start < rb->start ? rb->start : ra->start;
    // hi = min of the two ends; track whether hi is included in both ranges
    auto included = [](const TimeRange& r, const TimePoint& p) {
        return p < r.end || (p == r.end && !r.end_exclusive);
    };
    const TimePoint& hi = ra->end < rb->end ? ra->end : rb->end;
    if (hi < lo) return false;
    if (lo < hi) return true;
    return included(*ra, hi) && included(*rb, hi);
}

// ------------------------------------------------------------- proposition

PropositionKey proposition_key(const Proposition& p) {
    return {p.entity, p.attribute.kind};
}

std::vector<std::string> validate(const Proposition& p) {
    std::vector<std::string> out;
    if (p.entity.empty()) out.push_back("entity.nonempty");
    for (char c : p.entity.id)
        if (c == ' ' || c == '\t' || c == '\n' || (c >= 'A' && c <= 'Z')) {
            out.push_back("entity.canonical");
            break;
        }
    if (const auto* q = std::get_if<Quantity>(&p.value)) {
        (void)q;  // rational magnitudes are finite by construction
    }
    if (const auto* f = std::get_if<Frequency>(&p.value)) {
        if (f->per.empty()) out.push_back("value.frequency_unit");
    }
    if (const auto* m = std::get_if<TimeMarker>(&p.time)) {
        if (m->anchor == TimeAnchor::DayN && m->day < 0) out.push_back("time.day_nonnegative");
    }
    if (const auto* iv = std::get_if<TimeInterval>(&p.time)) {
        if (!(iv->start <= iv->end)) out.push_back("time.interval_order");
    }
    if (p.span.begin > p.span.end) out.push_back("span.order");
    return out;
}

// ------------------------------------------------------------------- json

namespace {

[[noreturn]] void bad(const std::string& what) {
    throw std::runtime_error("malformed JSON: " + what);
}

Json point_json(const TimePoint& p) {
    return Json{{"tier", p.tier}, {"days", to_json(p.days)}};
}

TimePoint point_from(const Json& j) {
    return TimePoint{j.at("tier").get<int>(), rational_from_json(j.at("days"))};
}

Json id_json(const PropositionId& id) {
    return Json::array({id.doc_id, id.index});
}

PropositionId id_from(const Json& j) {
    if (!j.is_array() || j.size() != 2) bad("proposition id");
    return PropositionId{j[0].get<std::string>(), j[1].get<int>()};
}

} // namespace

Json to_json(const Rational& r) {
    return Json::array({r.num(), r.den()});
}

Rational rational_from_json(const Json& j) {
    if (j.is_number_integer()) return Rational(j.get<std::int64_t>());
    if (!j.is_array() || j.size() != 2) bad("rational");
    return Rational(j[0].get<std::int64_t>(), j[1].get<std::int64_t>());
}

Json to_json(const Value& v) {
    Json j;
    if (const auto* q = std::get_if<Quantity>(&v)) {
        j["type"] = "quantity";
        j["magnitude"] = to_json(q->magnitude);
        j["unit"] = q->unit;
    } else if (const auto* qp = std::get_if<QuantityPair>(&v)) {
        j["type"] = "quantity_pair";
        j["first"] = to_json(qp->first);
        j["second"] = to_json(qp->second);
        j["unit"] = qp->unit;
    } else if (const auto* ql = std::get_if<Qualitative>(&v)) {
        j["type"] = "qualitative";
        j["label"] = ql->label;
    } else if (const auto* f = std::get_if<Frequency>(&v)) {
        j["type"] = "frequency";
        j["count"] = to_json(f->count);
        j["per"] = f->per;
    } else {
        j["type"] = "present";
        j["flag"] = std::get<Present>(v).flag;
    }
    return j;
}

Value value_from_json(const Json& j) {
    const std::string type = j.at("type").get<std::string>();
    if (type == "quantity")
        return Quantity{rational_from_json(j.at("magnitude")), j.at("unit").get<std::string>()};
    if (type == "quantity_pair")
        return QuantityPair{rational_from_json(j.at("first")), rational_from_json(j.at("second")),
                            j.at("unit").get<std::string>()};
    if (type == "qualitative") return Qualitative{j.at("label").get<std::string>()};
    if (type == "frequency")
        return Frequency{rational_from_json(j.at("count")), j.at("per").get<std::string>()};
    if (type == "present") return Present{j.at("flag").get<bool>()};
    bad("value type '" + type + "'");
}

Json to_json(const TimeRef& t) {
    Json j;
    if (std::holds_alternative<TimeUnknown>(t)) {
        j["type"] = "unknown";
    } else if (const auto* m = std::get_if<TimeMarker>(&t)) {
        j["type"] = "marker";
        switch (m->anchor) {
            case TimeAnchor::PreAdmission:  j["anchor"] = "pre_admission"; break;
            case TimeAnchor::Admission:     j["anchor"] = "admission"; break;
            case TimeAnchor::DayN:          j["anchor"] = "day"; j["n"] = m->day; break;
            case TimeAnchor::Discharge:     j["anchor"] = "discharge"; break;
            case TimeAnchor::PostDischarge: j["anchor"] = "post_discharge"; break;
        }
    } else if (const auto* o = std::get_if<TimeOffset>(&t)) {
        j["type"] = "offset";
        j["days"] = to_json(o->days);
    } else {
        const auto& iv = std::get<TimeInterval>(t);
        j["type"] = "interval";
        j["start"] = point_json(iv.start);
        j["end"] = point_json(iv.end);
        j["end_exclusive"] = iv.end_exclusive;
    }
    return j;
}

TimeRef time_from_json(const Json& j) {
    const std::string type = j.at("type").get<std::string>();
    if (type == "unknown") return TimeUnknown{};
    if (type == "marker") {
        const std::string anchor = j.at("anchor").get<std::string>();
        if (anchor == "pre_admission") return TimeMarker{TimeAnchor::PreAdmission};
        if (anchor == "admission") return TimeMarker{TimeAnchor::Admission};
        if (anchor == "day") return TimeMarker{TimeAnchor::DayN, j.at("n").get<std::int64_t>()};
        if (anchor == "discharge") return TimeMarker{TimeAnchor::Discharge};
        if (anchor == "post_discharge") return TimeMarker{TimeAnchor::PostDischarge};
        bad("time anchor '" + anchor + "'");
    }
    if (type == "offset") return TimeOffset{rational_from_json(j.at("days"))};
    if (type == "interval")
        return TimeInterval{point_from(j.at("start")), point_from(j.at("end")),
                            j.at("end_exclusive").get<bool>()};
    bad("time type '" + type + "'");
}

Json to_json(const Proposition& p) {
    Json j;
    j["id"] = id_json(p.id);
    j["entity"] = p.entity.id;
    j["attribute"] = std::string(to_string(p.attribute.kind));
    j["value"] = to_json(p.value);
    j["time"] = to_json(p.time);
    j["negated"] = p.negated;
    j["span"] = Json::array({p.span.sentence, p.span.begin, p.span.end});
    return j;
}

Proposition proposition_from_json(const Json& j) {
    Proposition p;
    p.id = id_from(j.at("id"));
    p.entity = ConceptId{j.at("entity").get<std::string>()};
    auto kind = attribute_kind_from(j.at("attribute").get<std::string>());
    if (!kind) bad("attribute kind");
    p.attribute.kind = *kind;
    p.value = value_from_json(j.at("value"));
    p.time = time_from_json(j.at("time"));
    p.negated = j.at("negated").get<bool>();
    const Json& s = j.at("span");
    if (!s.is_array() || s.size() != 3) bad("span");
    p.span = SourceSpan{s[0].get<int>(), s[1].get<int>(), s[2].get<int>()};
    return p;
}

Json to_json(const PropositionSet& ps) {
    Json j;
    j["doc_id"] = ps.doc_id;
    j["kind"] = std::string(to_string(ps.kind));
    Json items = Json::array();
    for (const auto& p : ps.items) items.push_back(to_json(p));
    j["items"] = std::move(items);
    return j;
}

PropositionSet proposition_set_from_json(const Json& j) {
    PropositionSet ps;
    ps.doc_id = j.at("doc_id").get<std::string>();
    auto kind = doc_kind_from(j.at("kind").get<std::string>());
    if (!kind) bad("doc kind");
    ps.kind = *kind;
    for (const Json& item : j.at("items")) ps.items.push_back(proposition_from_json(item));
    return ps;
}

Json to_json(const Verdict& v) {
    Json j;
    j["id"] = id_json(v.proposition_id);
    j["label"] = v.supported ? "Supported" : "NotSupported";
    Json codes = Json::array();
    for (FailureCode c : v.failure_codes) codes.push_back(std::string(to_string(c)));
    j["failure_codes"] = std::move(codes);
    j["matched_ehr_id"] = v.matched_ehr_id ? id_json(*v.matched_ehr_id) : Json(nullptr);
    j["similarity"] = v.similarity;
    j["confidence"] = v.confidence;
    return j;
}

Verdict verdict_from_json(const Json& j) {
    Verdict v;
    v.proposition_id = id_from(j.at("id"));
    v.supported = j.at("label").get<std::string>() == "Supported";
    for (const Json& c : j.at("failure_codes")) {
        auto code = failure_code_from(c.get<std::string>());
        if (!code) bad("failure code");
        v.failure_codes.insert(*code);
    }
    if (!j.at("matched_ehr_id").is_null()) v.matched_ehr_id = id_from(j.at("matched_ehr_id"));
    v.similarity = j.at("similarity").get<double>();
    v.confidence = j.at("confidence").get<double>();
    return v;
}

} // namespace veriprop
