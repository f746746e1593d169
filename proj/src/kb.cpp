#include "veriprop/kb.hpp"

#include <algorithm>
#include <cctype>
#include <deque>
#include <fstream>
#include <sstream>

namespace veriprop {

// ----------------------------------------------------- text canonical form

std::vector<std::string> canonical_words(std::string_view surface) {
    std::vector<std::string> words;
    std::string cur;
    for (unsigned char c : surface) {
        if (c >= 'A' && c <= 'Z') {
            cur.push_back(static_cast<char>(c - 'A' + 'a'));
        } else if ((c >= 'a' && c <= 'z') || (c >= '0' && c <= '9')) {
            cur.push_back(static_cast<char>(c));
        } else {
            if (!cur.empty()) words.push_back(std::move(cur));
            cur.clear();
        }
    }
    if (!cur.empty()) words.push_back(std::move(cur));
    return words;
}

std::string canonical_token(std::string_view surface) {
    std::string out;
    for (const std::string& w : canonical_words(surface)) {
        if (!out.empty()) out.push_back('_');
        out += w;
    }
    return out;
}

// -------------------------------------------------------------- TSV reader

namespace {

struct TsvRow {
    int line;
    std::vector<std::string> fields;
};

std::string trim(const std::string& s) {
    size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<TsvRow> read_tsv(const std::filesystem::path& path, size_t columns) {
    std::ifstream in(path);
    if (!in) throw KbError("cannot open KB file: " + path.string());
    std::vector<TsvRow> rows;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        TsvRow row{lineno, {}};
        std::stringstream ss(t);
        std::string field;
        while (std::getline(ss, field, '\t')) row.fields.push_back(trim(field));
        if (row.fields.size() != columns)
            throw ParseError(path.filename().string(), lineno,
                             "expected " + std::to_string(columns) + " tab-separated fields, got " +
                                 std::to_string(row.fields.size()));
        for (const auto& f : row.fields)
            if (f.empty())
                throw ParseError(path.filename().string(), lineno, "empty field");
        rows.push_back(std::move(row));
    }
    return rows;
}

} // namespace

// --------------------------------------------------------------- building

void KnowledgeBase::register_concept(const ConceptId& c) {
    concepts_.insert(c);
}

void KnowledgeBase::add_surface(const std::string& file, int line, const std::string& surface,
                                const ConceptId& concept) {
    std::string key = canonical_token(surface);
    if (key.empty()) throw ParseError(file, line, "surface form canonicalizes to nothing");
    auto [it, inserted] = surfaces_.emplace(key, concept);
    if (!inserted) throw DuplicateSurfaceForm(surface);
    register_concept(concept);
}

void KnowledgeBase::finalize(const std::string& classes_file) {
    // identity surfaces keep normalize_concept idempotent; an explicit row
    // that maps a concept's own token elsewhere would break that
    for (const ConceptId& c : concepts_) {
        auto it = surfaces_.find(c.id);
        if (it == surfaces_.end()) {
            surfaces_.emplace(c.id, c);
        } else if (it->second != c) {
            throw DuplicateSurfaceForm(c.id);
        }
    }
    for (const auto& [surface, concept] : surfaces_) {
        int words = 1 + static_cast<int>(std::count(surface.begin(), surface.end(), '_'));
        max_surface_words_ = std::max(max_surface_words_, words);
    }

    // cycle check over is-a edges
    std::map<ConceptId, int> color;  // 0 white, 1 grey, 2 black
    std::vector<ConceptId> stack;
    auto dfs = [&](auto&& self, const ConceptId& node) -> void {
        color[node] = 1;
        stack.push_back(node);
        auto it = parents_.find(node);
        if (it != parents_.end()) {
            for (const ConceptId& parent : it->second) {
                int c = color.count(parent) ? color[parent] : 0;
                if (c == 1) {
                    std::string path;
                    bool in_cycle = false;
                    for (const ConceptId& n : stack) {
                        if (n == parent) in_cycle = true;
                        if (in_cycle) path += n.id + " -> ";
                    }
                    path += parent.id;
                    throw CycleError(path);
                }
                if (c == 0) self(self, parent);
            }
        }
        color[node] = 2;
        stack.pop_back();
    };
    for (const auto& [node, _] : parents_)
        if (!color.count(node)) dfs(dfs, node);
    (void)classes_file;
}

KnowledgeBase KnowledgeBase::load(const std::filesystem::path& dir) {
    KnowledgeBase kb;

    for (const TsvRow& row : read_tsv(dir / "synonyms.tsv", 2)) {
        ConceptId target{canonical_token(row.fields[1])};
        if (target.empty()) throw ParseError("synonyms.tsv", row.line, "empty concept id");
        kb.add_surface("synonyms.tsv", row.line, row.fields[0], target);
    }

    for (const TsvRow& row : read_tsv(dir / "classes.tsv", 2)) {
        ConceptId member{canonical_token(row.fields[0])};
        ConceptId cls{canonical_token(row.fields[1])};
        if (member == cls) throw ParseError("classes.tsv", row.line, "self is-a edge");
        kb.register_concept(member);
        kb.register_concept(cls);
        auto& parents = kb.parents_[member];
        if (std::find(parents.begin(), parents.end(), cls) == parents.end())
            parents.push_back(cls);
    }
    for (auto& [_, parents] : kb.parents_) std::sort(parents.begin(), parents.end());

    for (const TsvRow& row : read_tsv(dir / "implications.tsv", 2)) {
        ImplicationRule rule{ConceptId{canonical_token(row.fields[0])},
                             ConceptId{canonical_token(row.fields[1])}};
        if (rule.antecedent == rule.consequent)
            throw ParseError("implications.tsv", row.line, "antecedent equals consequent");
        kb.register_concept(rule.antecedent);
        kb.register_concept(rule.consequent);
        kb.implications_.push_back(std::move(rule));
    }

    for (const TsvRow& row : read_tsv(dir / "exclusivity.tsv", 2)) {
        ConceptId a{canonical_token(row.fields[0])};
        ConceptId b{canonical_token(row.fields[1])};
        if (a == b) throw ParseError("exclusivity.tsv", row.line, "pair members must differ");
        kb.register_concept(a);
        kb.register_concept(b);
        if (b < a) std::swap(a, b);
        kb.exclusivity_.emplace_back(std::move(a), std::move(b));
    }

    for (const TsvRow& row : read_tsv(dir / "units.tsv", 3)) {
        Rational factor;
        try {
            factor = Rational::parse(row.fields[2]);
        } catch (const std::exception& e) {
            throw ParseError("units.tsv", row.line, e.what());
        }
        if (!(factor > Rational(0)))
            throw ParseError("units.tsv", row.line, "unit factor must be positive");
        auto [it, inserted] = kb.units_.emplace(row.fields[0], UnitInfo{row.fields[1], factor});
        if (!inserted) throw ParseError("units.tsv", row.line, "duplicate unit '" + row.fields[0] + "'");
    }
    {
        // exactly one base (factor 1) unit per dimension
        std::map<std::string, int> bases;
        for (const auto& [unit, info] : kb.units_)
            if (info.factor == Rational(1)) bases[info.dimension] += 1;
        for (const auto& [unit, info] : kb.units_) {
            auto it = bases.find(info.dimension);
            if (it == bases.end() || it->second != 1)
                throw KbError("dimension '" + info.dimension + "' must have exactly one base unit");
        }
    }

    // built-in cue lists, extensible through cues.tsv
    auto cue = [](const char* phrase, AttributeKind kind) {
        return std::make_pair(canonical_words(phrase), kind);
    };
    kb.attribute_cues_ = {
        cue("diagnosed with", AttributeKind::Diagnosis),
        cue("diagnosis of", AttributeKind::Diagnosis),
        cue("history of", AttributeKind::Diagnosis),
        cue("treated with", AttributeKind::Treatment),
        cue("treated for", AttributeKind::Treatment),
        cue("started on", AttributeKind::Treatment),
        cue("prescribed", AttributeKind::Treatment),
        cue("administered", AttributeKind::Treatment),
        cue("received", AttributeKind::Treatment),
        cue("underwent", AttributeKind::Procedure),
        cue("measured at", AttributeKind::LabValue),
    };
    kb.negation_cues_ = {
        canonical_words("no"), canonical_words("not"), canonical_words("denies"),
        canonical_words("denied"), canonical_words("without"), canonical_words("never"),
        canonical_words("ruled out"), canonical_words("no evidence of"),
    };
    kb.qualitative_labels_ = {
        "positive", "negative", "elevated", "low", "high", "normal", "abnormal",
        "stable", "resolved", "persisted", "improved", "worsened", "unremarkable",
    };

    if (std::filesystem::exists(dir / "cues.tsv")) {
        for (const TsvRow& row : read_tsv(dir / "cues.tsv", 2)) {
            const std::string& kind = row.fields[1];
            if (kind == "negation") {
                kb.negation_cues_.push_back(canonical_words(row.fields[0]));
            } else if (kind == "qualitative") {
                kb.qualitative_labels_.insert(canonical_token(row.fields[0]));
            } else if (auto ak = attribute_kind_from(kind)) {
                kb.attribute_cues_.emplace_back(canonical_words(row.fields[0]), *ak);
            } else {
                throw ParseError("cues.tsv", row.line, "unknown cue kind '" + kind + "'");
            }
        }
    }

    kb.finalize("classes.tsv");
    return kb;
}

// ----------------------------------------------------------------- queries

ConceptId KnowledgeBase::normalize_concept(std::string_view surface) const {
    std::string key = canonical_token(surface);
    auto it = surfaces_.find(key);
    if (it != surfaces_.end()) return it->second;
    return ConceptId{std::move(key)};
}

bool KnowledgeBase::is_member(const ConceptId& concept, const ConceptId& cls) const {
    if (concept == cls) return true;
    std::deque<ConceptId> queue{concept};
    std::set<ConceptId> seen{concept};
    while (!queue.empty()) {
        ConceptId cur = std::move(queue.front());
        queue.pop_front();
        auto it = parents_.find(cur);
        if (it == parents_.end()) continue;
        for (const ConceptId& parent : it->second) {
            if (parent == cls) return true;
            if (seen.insert(parent).second) queue.push_back(parent);
        }
    }
    return false;
}

bool KnowledgeBase::are_exclusive(const ConceptId& a, const ConceptId& b) const {
    const ConceptId& lo = a < b ? a : b;
    const ConceptId& hi = a < b ? b : a;
    for (const auto& [x, y] : exclusivity_)
        if (x == lo && y == hi) return true;
    return false;
}

bool KnowledgeBase::exclusive_with_classes(const ConceptId& a, const ConceptId& b) const {
    for (const auto& [x, y] : exclusivity_) {
        if (is_member(a, x) && is_member(b, y)) return true;
        if (is_member(b, x) && is_member(a, y)) return true;
    }
    return false;
}

std::optional<UnitInfo> KnowledgeBase::unit(const std::string& unit) const {
    auto it = units_.find(unit);
    if (it == units_.end()) return std::nullopt;
    return it->second;
}

Quantity KnowledgeBase::convert_unit(const Quantity& q, const std::string& target_unit) const {
    if (q.unit == target_unit) return q;
    auto from = units_.find(q.unit);
    if (from == units_.end()) throw UnknownUnit(q.unit);
    auto to = units_.find(target_unit);
    if (to == units_.end()) throw UnknownUnit(target_unit);
    if (from->second.dimension != to->second.dimension)
        throw DimensionMismatch(q.unit, target_unit);
    return Quantity{q.magnitude * from->second.factor / to->second.factor, target_unit};
}

std::vector<std::string> KnowledgeBase::units_in_dimension_of(const std::string& unit) const {
    std::vector<std::string> out;
    auto it = units_.find(unit);
    if (it == units_.end()) return out;
    for (const auto& [name, info] : units_)
        if (info.dimension == it->second.dimension) out.push_back(name);
    return out;
}

std::vector<std::string> KnowledgeBase::all_unit_names() const {
    std::vector<std::string> out;
    out.reserve(units_.size());
    for (const auto& [name, _] : units_) out.push_back(name);
    return out;
}

std::vector<ConceptId> KnowledgeBase::members_of(const ConceptId& cls) const {
    std::vector<ConceptId> out;
    for (const ConceptId& c : concepts_)
        if (c != cls && is_member(c, cls)) out.push_back(c);
    return out;
}

} // namespace veriprop
