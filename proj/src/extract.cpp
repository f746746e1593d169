#include "veriprop/extract.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <map>
#include <set>

namespace veriprop {

namespace {

// ---------------------------------------------------------------- tokens

struct Token {
    std::string raw;
    std::string canon;
    size_t begin = 0;
    size_t end = 0;
    bool numeric = false;   // 120 or 8.2
    bool pair = false;      // 120/80
};

bool is_alnum(unsigned char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9');
}

bool all_digits(std::string_view s) {
    if (s.empty()) return false;
    for (char c : s)
        if (c < '0' || c > '9') return false;
    return true;
}

bool numeric_text(std::string_view s) {
    size_t dot = s.find('.');
    if (dot == std::string_view::npos) return all_digits(s);
    return all_digits(s.substr(0, dot)) && all_digits(s.substr(dot + 1));
}

bool pair_text(std::string_view s) {
    size_t slash = s.find('/');
    if (slash == std::string_view::npos) return false;
    return numeric_text(s.substr(0, slash)) && numeric_text(s.substr(slash + 1));
}

std::vector<Token> tokenize(std::string_view text) {
    std::vector<Token> out;
    size_t i = 0, n = text.size();
    while (i < n) {
        unsigned char c = text[i];
        if (c == '%') {
            out.push_back(Token{"%", "%", i, i + 1, false, false});
            ++i;
            continue;
        }
        if (!is_alnum(c)) {
            ++i;
            continue;
        }
        size_t start = i;
        while (i < n) {
            if (is_alnum(text[i])) {
                ++i;
            } else if ((text[i] == '.' || text[i] == '/') && i + 1 < n && is_alnum(text[i + 1])) {
                ++i;  // internal connector: 8.2, mg/dL, 120/80
            } else {
                break;
            }
        }
        Token tok;
        tok.raw = std::string(text.substr(start, i - start));
        tok.canon = canonical_token(tok.raw);
        tok.begin = start;
        tok.end = i;
        tok.numeric = numeric_text(tok.raw);
        tok.pair = pair_text(tok.raw);
        out.push_back(std::move(tok));
    }
    return out;
}

const std::map<std::string, std::int64_t> kNumberWords = {
    {"one", 1}, {"two", 2}, {"three", 3}, {"four", 4},  {"five", 5},   {"six", 6},
    {"seven", 7}, {"eight", 8}, {"nine", 9}, {"ten", 10}, {"eleven", 11}, {"twelve", 12},
};

std::optional<Rational> token_number(const Token& t) {
    if (t.numeric) return Rational::parse(t.raw);
    auto it = kNumberWords.find(t.canon);
    if (it != kNumberWords.end()) return Rational(it->second);
    return std::nullopt;
}

// ------------------------------------------------------------- sentences

const std::set<std::string> kAbbreviations = {
    "dr", "mr", "mrs", "ms", "vs", "etc", "approx", "fig", "resp", "st",
};

} // namespace

std::vector<SentenceSpan> segment_sentences(std::string_view text) {
    std::vector<SentenceSpan> out;
    size_t n = text.size();
    size_t start = 0;
    auto flush = [&](size_t end) {
        size_t b = start, e = end;
        while (b < e && std::isspace(static_cast<unsigned char>(text[b]))) ++b;
        while (e > b && std::isspace(static_cast<unsigned char>(text[e - 1]))) --e;
        if (b < e) out.push_back(SentenceSpan{std::string(text.substr(b, e - b)), b, e});
    };
    for (size_t i = 0; i < n; ++i) {
        char c = text[i];
        if (c == ';' || c == '\n' || c == '\r') {
            flush(i);
            start = i + 1;
            continue;
        }
        if (c != '.') continue;
        bool digit_before = i > 0 && std::isdigit(static_cast<unsigned char>(text[i - 1]));
        bool digit_after = i + 1 < n && std::isdigit(static_cast<unsigned char>(text[i + 1]));
        if (digit_before && digit_after) continue;  // decimal number
        size_t w = i;
        while (w > 0 && std::isalpha(static_cast<unsigned char>(text[w - 1]))) --w;
        std::string word = canonical_token(text.substr(w, i - w));
        if (kAbbreviations.count(word)) continue;
        flush(i);
        start = i + 1;
    }
    flush(n);
    return out;
}

// ---------------------------------------------------------------- document

namespace {

[[noreturn]] void doc_error(const std::string& what) {
    throw ExtractError("malformed document: " + what);
}

// days since 1970-01-01 for a proleptic Gregorian date
std::int64_t days_from_civil(std::int64_t y, unsigned m, unsigned d) {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

std::int64_t parse_iso_date(const std::string& s) {
    int y = 0;
    unsigned m = 0, d = 0;
    if (std::sscanf(s.c_str(), "%d-%u-%u", &y, &m, &d) != 3 || m < 1 || m > 12 || d < 1 || d > 31)
        doc_error("bad ISO date '" + s + "'");
    return days_from_civil(y, m, d);
}

} // namespace

DocContext DocContext::from(const Document& doc) {
    DocContext ctx;
    if (doc.admission && doc.discharge)
        ctx.discharge_offset = Rational(parse_iso_date(*doc.discharge) - parse_iso_date(*doc.admission));
    return ctx;
}

Document Document::from_json(const Json& j) {
    Document doc;
    doc.doc_id = j.at("doc_id").get<std::string>();
    auto kind = doc_kind_from(j.at("kind").get<std::string>());
    if (!kind) doc_error("kind must be 'summary' or 'ehr'");
    doc.kind = *kind;
    if (j.contains("text") && !j["text"].is_null()) doc.text = j["text"].get<std::string>();
    if (j.contains("structured") && !j["structured"].is_null()) {
        for (const Json& e : j["structured"]) {
            StructuredEntry entry;
            entry.entity = e.at("entity").get<std::string>();
            entry.attribute = e.at("attribute").get<std::string>();
            if (e.contains("value") && !e["value"].is_null()) {
                if (e["value"].is_number()) {
                    entry.value_number = e["value"].is_number_integer()
                                             ? Rational(e["value"].get<std::int64_t>())
                                             : Rational::parse(e["value"].dump());
                } else if (e["value"].is_string()) {
                    entry.value_text = e["value"].get<std::string>();
                } else {
                    doc_error("structured value must be a number or string");
                }
            }
            if (e.contains("unit") && !e["unit"].is_null()) entry.unit = e["unit"].get<std::string>();
            if (e.contains("time") && !e["time"].is_null()) entry.time = e["time"].get<std::string>();
            if (e.contains("negated") && !e["negated"].is_null())
                entry.negated = e["negated"].get<bool>();
            doc.structured.push_back(std::move(entry));
        }
    }
    if (j.contains("admission") && !j["admission"].is_null())
        doc.admission = j["admission"].get<std::string>();
    if (j.contains("discharge") && !j["discharge"].is_null())
        doc.discharge = j["discharge"].get<std::string>();
    return doc;
}

Json Document::to_json() const {
    Json j;
    j["doc_id"] = doc_id;
    j["kind"] = std::string(to_string(kind));
    if (text) j["text"] = *text;
    if (!structured.empty()) {
        Json arr = Json::array();
        for (const StructuredEntry& e : structured) {
            Json je;
            je["entity"] = e.entity;
            je["attribute"] = e.attribute;
            if (e.value_number) {
                if (e.value_number->is_integer())
                    je["value"] = e.value_number->num();
                else
                    je["value"] = e.value_number->to_double();
            } else if (e.value_text) {
                je["value"] = *e.value_text;
            }
            if (!e.unit.empty()) je["unit"] = e.unit;
            if (!e.time.empty()) je["time"] = e.time;
            if (e.negated) je["negated"] = true;
            arr.push_back(std::move(je));
        }
        j["structured"] = std::move(arr);
    }
    if (admission) j["admission"] = *admission;
    if (discharge) j["discharge"] = *discharge;
    return j;
}

// -------------------------------------------------------------- sentence IR

namespace {

struct EntityMention {
    ConceptId concept;
    size_t tok_begin = 0;  // token index range [begin, end)
    size_t tok_end = 0;
    size_t char_begin = 0;
    size_t char_end = 0;
};

enum class ExprKind { Pair, Quantity, Frequency, Qualitative };

struct ValueExpr {
    ExprKind kind;
    Value value;
    size_t tok_begin = 0;
    size_t tok_end = 0;
};

std::optional<std::string> resolve_unit_token(const Token& tok, const KnowledgeBase& kb) {
    if (kb.has_unit(tok.raw)) return tok.raw;
    // case-insensitive fallback: mg/dl -> mg/dL
    auto lowered = [](const std::string& s) {
        std::string out;
        for (char c : s) out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
        return out;
    };
    std::string lower = lowered(tok.raw);
    std::optional<std::string> hit;
    for (const auto& name : kb.all_unit_names()) {
        if (lowered(name) == lower) {
            if (hit) return std::nullopt;  // ambiguous
            hit = name;
        }
    }
    return hit;
}

bool is_time_unit(const std::string& canon) {
    return canon == "day" || canon == "days" || canon == "hour" || canon == "hours" ||
           canon == "week" || canon == "weeks";
}

Rational time_unit_days(const std::string& canon) {
    if (canon == "hour" || canon == "hours") return Rational(1, 24);
    if (canon == "week" || canon == "weeks") return Rational(7);
    return Rational(1);
}

struct SentenceIR {
    std::vector<Token> tokens;
    std::vector<EntityMention> entities;
    std::vector<ValueExpr> exprs;
    std::vector<int> expr_entity;  // index into entities, or -1
    // nearest preceding attribute cue per token index
    std::vector<std::pair<int, AttributeKind>> cue_before;  // (cue end token, kind)
};

std::vector<EntityMention> scan_entities(const std::vector<Token>& tokens, const KnowledgeBase& kb) {
    std::vector<EntityMention> out;
    const auto& surfaces = kb.surface_forms();
    size_t i = 0;
    while (i < tokens.size()) {
        bool matched = false;
        size_t max_len = std::min<size_t>(kb.max_surface_words(), tokens.size() - i);
        for (size_t len = max_len; len >= 1; --len) {
            std::string key;
            bool bad = false;
            for (size_t k = i; k < i + len; ++k) {
                if (tokens[k].numeric || tokens[k].pair || tokens[k].canon.empty()) {
                    bad = true;
                    break;
                }
                if (!key.empty()) key.push_back('_');
                key += tokens[k].canon;
            }
            if (bad) continue;
            auto it = surfaces.find(key);
            if (it == surfaces.end()) continue;
            out.push_back(EntityMention{it->second, i, i + len, tokens[i].begin,
                                        tokens[i + len - 1].end});
            i += len;
            matched = true;
            break;
        }
        if (!matched) ++i;
    }
    return out;
}

std::optional<Value> parse_frequency(const std::vector<Token>& toks, size_t i, size_t& len) {
    auto canon = [&](size_t k) -> std::string {
        return k < toks.size() ? toks[k].canon : std::string();
    };
    // daily / nightly / weekly / bid / tid / qid
    static const std::map<std::string, Rational> kSimple = {
        {"daily", Rational(1)}, {"nightly", Rational(1)},   {"weekly", Rational(1, 7)},
        {"bid", Rational(2)},   {"tid", Rational(3)},       {"qid", Rational(4)},
    };
    auto simple = kSimple.find(canon(i));
    if (simple != kSimple.end()) {
        len = 1;
        return Value(Frequency{simple->second, "day"});
    }
    if (canon(i) == "once" || canon(i) == "twice") {
        Rational count = canon(i) == "once" ? Rational(1) : Rational(2);
        if (canon(i + 1) == "daily") {
            len = 2;
            return Value(Frequency{count, "day"});
        }
        if (canon(i + 1) == "weekly") {
            len = 2;
            return Value(Frequency{count / Rational(7), "day"});
        }
        if (canon(i + 1) == "a" && canon(i + 2) == "day") {
            len = 3;
            return Value(Frequency{count, "day"});
        }
    }
    // N times daily | N times a day | N times per day
    if (auto n = (i < toks.size() ? token_number(toks[i]) : std::nullopt)) {
        if (canon(i + 1) == "times") {
            if (canon(i + 2) == "daily") {
                len = 3;
                return Value(Frequency{*n, "day"});
            }
            if ((canon(i + 2) == "a" || canon(i + 2) == "per") && canon(i + 3) == "day") {
                len = 4;
                return Value(Frequency{*n, "day"});
            }
        }
    }
    // every N hours / every N days
    if (canon(i) == "every" && i + 2 < toks.size()) {
        if (auto n = token_number(toks[i + 1])) {
            const std::string& unit = canon(i + 2);
            if (is_time_unit(unit) && *n > Rational(0)) {
                len = 3;
                return Value(Frequency{Rational(1) / (*n * time_unit_days(unit)), "day"});
            }
        }
    }
    return std::nullopt;
}

SentenceIR analyze_sentence(std::string_view sentence, const KnowledgeBase& kb) {
    SentenceIR ir;
    ir.tokens = tokenize(sentence);
    ir.entities = scan_entities(ir.tokens, kb);

    std::vector<bool> in_entity(ir.tokens.size(), false);
    for (const EntityMention& e : ir.entities)
        for (size_t k = e.tok_begin; k < e.tok_end; ++k) in_entity[k] = true;

    // attribute cues: nearest preceding cue per token
    ir.cue_before.assign(ir.tokens.size() + 1, {-1, AttributeKind::Event});
    {
        std::pair<int, AttributeKind> last = {-1, AttributeKind::Event};
        for (size_t i = 0; i <= ir.tokens.size(); ++i) {
            ir.cue_before[i] = last;
            if (i == ir.tokens.size()) break;
            for (const auto& [words, kind] : kb.attribute_cues()) {
                if (i + words.size() > ir.tokens.size()) continue;
                bool ok = true;
                for (size_t k = 0; k < words.size(); ++k)
                    if (ir.tokens[i + k].canon != words[k]) {
                        ok = false;
                        break;
                    }
                if (ok) {
                    last = {static_cast<int>(i + words.size() - 1), kind};
                    break;
                }
            }
        }
    }

    // value expressions
    size_t i = 0;
    while (i < ir.tokens.size()) {
        if (in_entity[i]) {
            ++i;
            continue;
        }
        const Token& tok = ir.tokens[i];
        if (tok.pair) {
            size_t slash = tok.raw.find('/');
            Rational first = Rational::parse(tok.raw.substr(0, slash));
            Rational second = Rational::parse(tok.raw.substr(slash + 1));
            std::string unit = "mmHg";  // bare systolic/diastolic default
            size_t end = i + 1;
            if (end < ir.tokens.size() && !in_entity[end]) {
                if (auto u = resolve_unit_token(ir.tokens[end], kb)) {
                    unit = *u;
                    ++end;
                }
            }
            ir.exprs.push_back(ValueExpr{ExprKind::Pair, QuantityPair{first, second, unit}, i, end});
            i = end;
            continue;
        }
        size_t flen = 0;
        if (auto freq = parse_frequency(ir.tokens, i, flen)) {
            ir.exprs.push_back(ValueExpr{ExprKind::Frequency, *freq, i, i + flen});
            i += flen;
            continue;
        }
        if (tok.numeric) {
            Rational magnitude = Rational::parse(tok.raw);
            std::string unit;
            size_t end = i + 1;
            if (end < ir.tokens.size() && !in_entity[end]) {
                const Token& next = ir.tokens[end];
                if (next.raw == "%") {
                    unit = "%";
                    ++end;
                } else if (is_time_unit(next.canon)) {
                    // durations belong to the time phrase, not to values
                    i = end + 1;
                    continue;
                } else if (auto u = resolve_unit_token(next, kb)) {
                    unit = *u;
                    ++end;
                }
            }
            // bare "day 3"-style numbers are handled by the time parser
            if (unit.empty() && i > 0 && ir.tokens[i - 1].canon == "day") {
                ++i;
                continue;
            }
            ir.exprs.push_back(ValueExpr{ExprKind::Quantity, Quantity{magnitude, unit}, i, end});
            i = end;
            continue;
        }
        if (kb.qualitative_labels().count(tok.canon)) {
            ir.exprs.push_back(ValueExpr{ExprKind::Qualitative, Qualitative{tok.canon}, i, i + 1});
            ++i;
            continue;
        }
        ++i;
    }

    // assign each expression to the nearest entity (token distance, ties left)
    ir.expr_entity.assign(ir.exprs.size(), -1);
    for (size_t e = 0; e < ir.exprs.size(); ++e) {
        const ValueExpr& expr = ir.exprs[e];
        long best_dist = -1;
        int best_entity = -1;
        for (size_t ent = 0; ent < ir.entities.size(); ++ent) {
            const EntityMention& m = ir.entities[ent];
            long dist;
            if (expr.tok_end <= m.tok_begin)
                dist = static_cast<long>(m.tok_begin - expr.tok_end);
            else if (m.tok_end <= expr.tok_begin)
                dist = static_cast<long>(expr.tok_begin - m.tok_end);
            else
                dist = 0;
            if (best_entity < 0 || dist < best_dist) {
                best_dist = dist;
                best_entity = static_cast<int>(ent);
            }
        }
        ir.expr_entity[e] = best_entity;
    }
    return ir;
}

std::optional<size_t> entity_index_for_span(const SentenceIR& ir, CharSpan span) {
    for (size_t i = 0; i < ir.entities.size(); ++i) {
        const EntityMention& m = ir.entities[i];
        if (m.char_begin < span.second && span.first < m.char_end) return i;
    }
    return std::nullopt;
}

// token index range covering a char span
std::pair<size_t, size_t> token_range(const std::vector<Token>& toks, CharSpan span) {
    size_t first = toks.size(), last = 0;
    for (size_t i = 0; i < toks.size(); ++i) {
        if (toks[i].begin < span.second && span.first < toks[i].end) {
            first = std::min(first, i);
            last = std::max(last, i + 1);
        }
    }
    if (first >= last) {
        // span between tokens: anchor on the first token at or after it
        for (size_t i = 0; i < toks.size(); ++i)
            if (toks[i].begin >= span.first) return {i, i};
        return {toks.size(), toks.size()};
    }
    return {first, last};
}

} // namespace

// -------------------------------------------------------------- operations

bool detect_negation(std::string_view sentence, CharSpan entity_span, const KnowledgeBase& kb) {
    std::vector<Token> toks = tokenize(sentence);
    auto [ent_begin, ent_end] = token_range(toks, entity_span);
    size_t window_begin = ent_begin >= 5 ? ent_begin - 5 : 0;
    for (const auto& cue : kb.negation_cues()) {
        if (cue.empty()) continue;
        for (size_t i = window_begin; i + cue.size() <= ent_begin; ++i) {
            bool ok = true;
            for (size_t k = 0; k < cue.size(); ++k)
                if (toks[i + k].canon != cue[k]) {
                    ok = false;
                    break;
                }
            if (ok && i + cue.size() > window_begin) return true;
        }
    }
    // trailing construction: "<entity> was/were not ..."
    for (size_t i = ent_end; i < std::min(toks.size(), ent_end + 3); ++i)
        if (toks[i].canon == "not" || toks[i].canon == "never") return true;
    return false;
}

std::vector<Value> parse_values(std::string_view sentence, CharSpan entity_span,
                                const KnowledgeBase& kb) {
    SentenceIR ir = analyze_sentence(sentence, kb);
    std::vector<Value> out;
    auto ent = entity_index_for_span(ir, entity_span);
    if (!ent) {
        // unregistered entity: re-assign by raw token distance to the span
        auto [eb, ee] = token_range(ir.tokens, entity_span);
        for (size_t e = 0; e < ir.exprs.size(); ++e) {
            const ValueExpr& expr = ir.exprs[e];
            long dist_span = expr.tok_end <= eb ? static_cast<long>(eb - expr.tok_end)
                             : ee <= expr.tok_begin ? static_cast<long>(expr.tok_begin - ee)
                                                    : 0;
            long best = dist_span;
            bool mine = true;
            for (const EntityMention& m : ir.entities) {
                long d = expr.tok_end <= m.tok_begin ? static_cast<long>(m.tok_begin - expr.tok_end)
                         : m.tok_end <= expr.tok_begin
                             ? static_cast<long>(expr.tok_begin - m.tok_end)
                             : 0;
                if (d < best) {
                    mine = false;
                    break;
                }
            }
            if (mine) out.push_back(expr.value);
        }
        return out;
    }
    for (size_t e = 0; e < ir.exprs.size(); ++e)
        if (ir.expr_entity[e] == static_cast<int>(*ent)) out.push_back(ir.exprs[e].value);
    return out;
}

Value parse_value(std::string_view sentence, CharSpan entity_span, const KnowledgeBase& kb) {
    std::vector<Value> values = parse_values(sentence, entity_span, kb);
    if (values.empty()) return Present{true};
    auto rank = [](const Value& v) {
        if (std::holds_alternative<QuantityPair>(v)) return 0;
        if (std::holds_alternative<Quantity>(v)) return 1;
        if (std::holds_alternative<Frequency>(v)) return 2;
        if (std::holds_alternative<Qualitative>(v)) return 3;
        return 4;
    };
    return *std::min_element(values.begin(), values.end(),
                             [&](const Value& a, const Value& b) { return rank(a) < rank(b); });
}

TimeRef normalize_time(std::string_view sentence, const DocContext& ctx) {
    std::vector<Token> toks = tokenize(sentence);
    auto canon = [&](size_t i) -> std::string {
        return i < toks.size() ? toks[i].canon : std::string();
    };
    auto discharge_point = [&]() -> TimePoint {
        if (ctx.discharge_offset) return TimePoint{0, *ctx.discharge_offset};
        return TimePoint{1, 0};
    };
    auto discharge_ref = [&]() -> TimeRef {
        if (ctx.discharge_offset) return TimeOffset{*ctx.discharge_offset};
        return TimeMarker{TimeAnchor::Discharge};
    };

    std::optional<TimeRef> base;
    for (size_t i = 0; i < toks.size() && !base; ++i) {
        const std::string c = canon(i);
        if (c == "day") {
            if (i + 1 < toks.size()) {
                if (auto n = token_number(toks[i + 1]); n && n->is_integer() && n->num() >= 0) {
                    base = TimeMarker{TimeAnchor::DayN, n->num()};
                    continue;
                }
            }
        }
        bool before = c == "before" || (c == "prior" && canon(i + 1) == "to");
        size_t target = before && c == "prior" ? i + 2 : i + 1;
        if (before && canon(target) == "admission") {
            base = TimeMarker{TimeAnchor::PreAdmission};
            continue;
        }
        if (before && canon(target) == "discharge") {
            base = TimeInterval{TimePoint{0, 0}, discharge_point(), true};
            continue;
        }
        if ((c == "until" || c == "through") && canon(i + 1) == "discharge") {
            base = TimeInterval{TimePoint{0, 0}, discharge_point(), false};
            continue;
        }
        if (c == "after" && canon(i + 1) == "admission") {
            base = TimeInterval{TimePoint{0, 0}, TimePoint{2, 0}, false};
            continue;
        }
        if ((c == "after" && canon(i + 1) == "discharge") ||
            (c == "post" && canon(i + 1) == "discharge")) {
            base = TimeMarker{TimeAnchor::PostDischarge};
            continue;
        }
        if ((c == "on" || c == "at" || c == "upon") && canon(i + 1) == "admission") {
            base = TimeMarker{TimeAnchor::Admission};
            continue;
        }
        if ((c == "on" || c == "at" || c == "upon") && canon(i + 1) == "discharge") {
            base = discharge_ref();
            continue;
        }
    }

    // "for N days" attaches a duration when an anchored point exists
    for (size_t i = 0; i + 2 < toks.size(); ++i) {
        if (canon(i) != "for") continue;
        auto n = token_number(toks[i + 1]);
        if (!n || !is_time_unit(canon(i + 2))) continue;
        Rational duration = *n * time_unit_days(canon(i + 2));
        if (base) {
            if (auto p = time_point(*base); p && p->tier == 0)
                return TimeInterval{*p, TimePoint{0, p->days + duration}, false};
        }
        break;
    }

    return base ? *base : TimeRef(TimeUnknown{});
}

// ---------------------------------------------------------------- pipeline

namespace {

AttributeKind infer_attribute(const ConceptId& entity, const Value& value,
                              std::optional<AttributeKind> cue_kind, const KnowledgeBase& kb) {
    const ConceptId medication{"medication"};
    const ConceptId lab_test{"lab_test"};
    const ConceptId vital_sign{"vital_sign"};
    const ConceptId condition{"condition"};
    const ConceptId procedure{"procedure"};
    const ConceptId clinical_status{"clinical_status"};

    bool is_med = kb.is_member(entity, medication);
    bool is_lab = kb.is_member(entity, lab_test) || kb.is_member(entity, vital_sign);

    if (std::holds_alternative<Quantity>(value) && is_med) return AttributeKind::Dosage;
    if ((std::holds_alternative<Quantity>(value) || std::holds_alternative<QuantityPair>(value)) &&
        is_lab)
        return AttributeKind::LabValue;
    if (std::holds_alternative<Frequency>(value) && is_med) return AttributeKind::Medication;
    if (cue_kind) return *cue_kind;
    if (std::holds_alternative<Qualitative>(value) && kb.is_member(entity, condition))
        return AttributeKind::Status;
    if (kb.is_member(entity, condition)) return AttributeKind::Diagnosis;
    if (is_med) return AttributeKind::Medication;
    if (is_lab) return AttributeKind::LabValue;
    if (kb.is_member(entity, procedure)) return AttributeKind::Procedure;
    if (kb.is_member(entity, clinical_status)) return AttributeKind::Status;
    return AttributeKind::Event;
}

Value structured_value(const StructuredEntry& entry, const KnowledgeBase& kb) {
    if (entry.value_number) {
        std::string unit = entry.unit;
        if (!unit.empty() && !kb.has_unit(unit)) {
            Token t{unit, canonical_token(unit), 0, unit.size(), false, false};
            if (auto u = resolve_unit_token(t, kb)) unit = *u;
        }
        return Quantity{*entry.value_number, unit};
    }
    if (!entry.value_text) return Present{true};
    const std::string& text = *entry.value_text;
    std::string c = canonical_token(text);
    if (c == "present") return Present{true};
    if (c == "absent") return Present{false};

    std::vector<Token> toks = tokenize(text);
    if (!toks.empty() && toks[0].pair) {
        size_t slash = toks[0].raw.find('/');
        std::string unit = "mmHg";
        if (toks.size() > 1) {
            if (auto u = resolve_unit_token(toks[1], kb)) unit = *u;
        }
        return QuantityPair{Rational::parse(toks[0].raw.substr(0, slash)),
                            Rational::parse(toks[0].raw.substr(slash + 1)), unit};
    }
    size_t flen = 0;
    if (!toks.empty()) {
        if (auto freq = parse_frequency(toks, 0, flen)) return *freq;
    }
    if (!toks.empty() && toks[0].numeric) {
        std::string unit = entry.unit;
        if (toks.size() > 1) {
            if (auto u = resolve_unit_token(toks[1], kb))
                unit = *u;
            else if (toks[1].raw == "%")
                unit = "%";
        }
        return Quantity{Rational::parse(toks[0].raw), unit};
    }
    return Qualitative{c};
}

} // namespace

PropositionSet extract_propositions(const Document& doc, const KnowledgeBase& kb) {
    bool has_text = doc.text && !doc.text->empty();
    if (!has_text && doc.structured.empty()) throw EmptyDocument(doc.doc_id);

    DocContext ctx = DocContext::from(doc);
    PropositionSet out;
    out.doc_id = doc.doc_id;
    out.kind = doc.kind;
    int next_index = 0;

    for (const StructuredEntry& entry : doc.structured) {
        Proposition p;
        p.id = PropositionId{doc.doc_id, next_index++};
        p.entity = kb.normalize_concept(entry.entity);
        auto kind = attribute_kind_from(entry.attribute);
        if (!kind)
            throw ExtractError("document '" + doc.doc_id + "': unknown attribute kind '" +
                               entry.attribute + "'");
        p.attribute.kind = *kind;
        p.value = structured_value(entry, kb);
        p.time = entry.time.empty() ? TimeRef(TimeUnknown{}) : normalize_time(entry.time, ctx);
        p.negated = entry.negated;
        p.span = SourceSpan{-1, 0, 0};
        out.items.push_back(std::move(p));
    }

    if (has_text) {
        std::vector<SentenceSpan> sentences = segment_sentences(*doc.text);
        for (size_t s = 0; s < sentences.size(); ++s) {
            const SentenceSpan& sent = sentences[s];
            SentenceIR ir = analyze_sentence(sent.text, kb);
            TimeRef time = normalize_time(sent.text, ctx);
            for (size_t e = 0; e < ir.entities.size(); ++e) {
                const EntityMention& mention = ir.entities[e];
                std::optional<AttributeKind> cue_kind;
                std::string raw_cue;
                auto [cue_end, kind] = ir.cue_before[mention.tok_begin];
                if (cue_end >= 0) {
                    cue_kind = kind;
                    raw_cue = ir.tokens[cue_end].canon;
                }
                bool negated =
                    detect_negation(sent.text, {mention.char_begin, mention.char_end}, kb);

                std::vector<Value> values;
                for (size_t x = 0; x < ir.exprs.size(); ++x)
                    if (ir.expr_entity[x] == static_cast<int>(e))
                        values.push_back(ir.exprs[x].value);
                if (values.empty()) values.push_back(Present{true});

                for (const Value& value : values) {
                    Proposition p;
                    p.id = PropositionId{doc.doc_id, next_index++};
                    p.entity = mention.concept;
                    p.attribute.kind = infer_attribute(mention.concept, value, cue_kind, kb);
                    p.attribute.raw_cue = raw_cue;
                    p.value = value;
                    p.time = time;
                    p.negated = negated;
                    p.span = SourceSpan{static_cast<int>(s),
                                        static_cast<int>(sent.begin + mention.char_begin),
                                        static_cast<int>(sent.begin + mention.char_end)};
                    out.items.push_back(std::move(p));
                }
            }
        }
    }
    return out;
}

} // namespace veriprop
