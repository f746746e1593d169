#include "veriprop/checks.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace veriprop {

bool is_key_attribute(AttributeKind kind) {
    return kind == AttributeKind::Diagnosis || kind == AttributeKind::Treatment ||
           kind == AttributeKind::Procedure || kind == AttributeKind::Medication;
}

// ---------------------------------------------------------------- negation

std::optional<FailureCode> check_negation(const Proposition& summary, const Proposition& ehr) {
    if (proposition_key(summary) == proposition_key(ehr) && summary.negated != ehr.negated)
        return FailureCode::NegationFail;
    return std::nullopt;
}

// --------------------------------------------------------------- numerical

namespace {

bool quantities_match(const Quantity& s, const Quantity& e, const KnowledgeBase& kb,
                      double tau_num) {
    Quantity converted;
    try {
        converted = kb.convert_unit(s, e.unit);
    } catch (const KbError&) {
        return false;  // unconvertible units are a value mismatch
    }
    if (converted.magnitude == e.magnitude) return true;
    double a = converted.magnitude.to_double();
    double b = e.magnitude.to_double();
    double scale = std::max(std::abs(a), std::abs(b));
    return scale > 0.0 && std::abs(a - b) <= tau_num * scale;
}

} // namespace

std::optional<FailureCode> check_numerical(const Proposition& summary, const Proposition& ehr,
                                           const KnowledgeBase& kb, double tau_num) {
    if (!is_value_bearing(summary.value) || !is_value_bearing(ehr.value)) return std::nullopt;

    const Value& sv = summary.value;
    const Value& ev = ehr.value;
    bool ok = false;
    if (const auto* sq = std::get_if<Quantity>(&sv)) {
        const auto* eq = std::get_if<Quantity>(&ev);
        ok = eq && quantities_match(*sq, *eq, kb, tau_num);
    } else if (const auto* sp = std::get_if<QuantityPair>(&sv)) {
        const auto* ep = std::get_if<QuantityPair>(&ev);
        ok = ep &&
             quantities_match(Quantity{sp->first, sp->unit}, Quantity{ep->first, ep->unit}, kb,
                              tau_num) &&
             quantities_match(Quantity{sp->second, sp->unit}, Quantity{ep->second, ep->unit}, kb,
                              tau_num);
    } else if (const auto* sl = std::get_if<Qualitative>(&sv)) {
        const auto* el = std::get_if<Qualitative>(&ev);
        ok = el && kb.normalize_concept(sl->label) == kb.normalize_concept(el->label);
    } else if (const auto* sf = std::get_if<Frequency>(&sv)) {
        const auto* ef = std::get_if<Frequency>(&ev);
        ok = ef && sf->per == ef->per && sf->count == ef->count;
    }
    if (!ok) return FailureCode::NumericalFail;
    return std::nullopt;
}

// ------------------------------------------------------------- implication

std::vector<ImplicationFinding> check_implication(const PropositionSet& summary,
                                                  const PropositionSet& ehr,
                                                  const KnowledgeBase& kb,
                                                  std::vector<ImplicationWarning>* warnings) {
    std::vector<ImplicationFinding> out;
    for (const ImplicationRule& rule : kb.implications()) {
        // asserted (non-negated) antecedent in the summary
        const Proposition* antecedent = nullptr;
        for (const Proposition& p : summary.items) {
            if (!p.negated && kb.is_member(p.entity, rule.antecedent)) {
                antecedent = &p;
                break;
            }
        }
        if (!antecedent) continue;

        bool consequent_in_summary = false;
        for (const Proposition& p : summary.items) {
            if (!p.negated && kb.is_member(p.entity, rule.consequent)) {
                consequent_in_summary = true;
                break;
            }
        }
        if (consequent_in_summary) continue;

        bool consequent_in_ehr = false;
        for (const Proposition& p : ehr.items) {
            if (!p.negated && kb.is_member(p.entity, rule.consequent)) {
                consequent_in_ehr = true;
                break;
            }
        }
        if (consequent_in_ehr) {
            out.push_back(ImplicationFinding{antecedent->id, rule.antecedent, rule.consequent});
        } else if (warnings) {
            // implied but ungrounded: the record itself lacks the consequent
            warnings->push_back(ImplicationWarning{antecedent->id, rule.antecedent, rule.consequent});
        }
    }
    return out;
}

// ---------------------------------------------------------------- temporal

std::vector<TemporalFinding> check_temporal(const PropositionSet& summary,
                                            const PropositionSet& ehr,
                                            const std::vector<MatchResult>& matches) {
    std::map<PropositionId, const Proposition*> ehr_by_id;
    for (const Proposition& p : ehr.items) ehr_by_id[p.id] = &p;

    struct Pairing {
        const Proposition* s;
        const Proposition* e;
    };
    std::vector<Pairing> paired;
    for (size_t i = 0; i < summary.items.size() && i < matches.size(); ++i) {
        const MatchResult& m = matches[i];
        if (!m.matched || !m.ehr_id) continue;
        auto it = ehr_by_id.find(*m.ehr_id);
        if (it == ehr_by_id.end()) continue;
        paired.push_back(Pairing{&summary.items[i], it->second});
    }

    std::vector<TemporalFinding> out;
    for (size_t i = 0; i < paired.size(); ++i) {
        for (size_t j = i + 1; j < paired.size(); ++j) {
            auto s_order = compare_time(paired[i].s->time, paired[j].s->time);
            auto e_order = compare_time(paired[i].e->time, paired[j].e->time);
            if (!s_order || !e_order) continue;  // incomparable pairs are skipped
            if (*s_order != *e_order)
                out.push_back(TemporalFinding{paired[i].s->id, paired[j].s->id});
        }
    }
    return out;
}

// ------------------------------------------------------------- exclusivity

std::vector<ExclusivityFinding> check_exclusivity(const PropositionSet& summary,
                                                  const KnowledgeBase& kb) {
    std::vector<ExclusivityFinding> out;
    const auto& items = summary.items;
    for (size_t i = 0; i < items.size(); ++i) {
        if (items[i].negated) continue;
        for (size_t j = i + 1; j < items.size(); ++j) {
            if (items[j].negated) continue;
            if (!kb.exclusive_with_classes(items[i].entity, items[j].entity)) continue;
            if (!time_overlaps(items[i].time, items[j].time)) continue;
            out.push_back(ExclusivityFinding{items[i].id, items[j].id});
        }
    }
    return out;
}

// ---------------------------------------------------------------- presence

std::vector<Omission> check_presence(const PropositionSet& summary, const PropositionSet& ehr,
                                     const std::vector<MatchResult>& matches,
                                     const KnowledgeBase& kb) {
    (void)matches;  // omissions depend on keys, not on similarity
    std::vector<Omission> out;
    for (const Proposition& e : ehr.items) {
        if (!is_key_attribute(e.attribute.kind)) continue;
        bool covered = false;
        for (const Proposition& s : summary.items) {
            if (s.attribute.kind != e.attribute.kind) continue;
            if (s.entity == e.entity || kb.is_member(e.entity, s.entity) ||
                kb.is_member(s.entity, e.entity)) {
                covered = true;
                break;
            }
        }
        if (!covered)
            out.push_back(Omission{e.id, e.entity, e.attribute.kind, FailureCode::PresenceFail});
    }
    return out;
}

// ----------------------------------------------------------------- verdict

VerificationReport assign_verdicts(const CheckContext& ctx) {
    const PropositionSet& summary = ctx.summary;
    const PropositionSet& ehr = ctx.ehr;

    std::map<PropositionId, const Proposition*> ehr_by_id;
    for (const Proposition& p : ehr.items) ehr_by_id[p.id] = &p;
    std::map<PropositionId, std::set<FailureCode>> codes;

    for (size_t i = 0; i < summary.items.size(); ++i) {
        const Proposition& sp = summary.items[i];
        const MatchResult& m = ctx.matches.at(i);
        if (!m.matched) {
            codes[sp.id].insert(FailureCode::NoEvidence);
            continue;
        }
        const Proposition& ep = *ehr_by_id.at(*m.ehr_id);
        if (auto c = check_negation(sp, ep)) codes[sp.id].insert(*c);
        if (proposition_key(sp) == proposition_key(ep)) {
            if (auto c = check_numerical(sp, ep, ctx.kb, ctx.tau_num)) codes[sp.id].insert(*c);
        }
    }

    VerificationReport report;
    report.doc_id = summary.doc_id;
    report.tau_match = ctx.tau_match;
    report.tau_num = ctx.tau_num;

    for (const ImplicationFinding& f :
         check_implication(summary, ehr, ctx.kb, &report.warnings))
        codes[f.summary_id].insert(FailureCode::ImplicationFail);

    for (const TemporalFinding& f : check_temporal(summary, ehr, ctx.matches)) {
        codes[f.first].insert(FailureCode::TemporalFail);
        codes[f.second].insert(FailureCode::TemporalFail);
    }

    for (const ExclusivityFinding& f : check_exclusivity(summary, ctx.kb)) {
        codes[f.first].insert(FailureCode::ExclusivityFail);
        codes[f.second].insert(FailureCode::ExclusivityFail);
    }

    report.omissions = check_presence(summary, ehr, ctx.matches, ctx.kb);

    for (size_t i = 0; i < summary.items.size(); ++i) {
        const Proposition& sp = summary.items[i];
        const MatchResult& m = ctx.matches.at(i);
        Verdict v;
        v.proposition_id = sp.id;
        v.failure_codes = codes.count(sp.id) ? codes[sp.id] : std::set<FailureCode>{};
        v.matched_ehr_id = m.ehr_id;
        v.similarity = m.score;
        v.supported = v.failure_codes.empty() && v.matched_ehr_id.has_value() && m.matched;
        double conf = v.supported
                          ? m.score
                          : m.score * std::pow(0.5, static_cast<double>(v.failure_codes.size()));
        v.confidence = std::min(0.99, std::max(0.01, conf));
        report.verdicts.push_back(std::move(v));
    }
    return report;
}

VerificationReport verify_documents(const PropositionSet& summary, const PropositionSet& ehr,
                                    const KnowledgeBase& kb, const VerifyParams& params) {
    std::vector<MatchResult> matches;
    if (params.embedder)
        matches = match(summary, ehr, *params.embedder, params.tau_match);
    else
        matches = match(summary, ehr, kb, params.tau_match);
    CheckContext ctx{summary, ehr, matches, kb, params.tau_match, params.tau_num};
    return assign_verdicts(ctx);
}

// ------------------------------------------------------------------- json

Json VerificationReport::to_json() const {
    Json j;
    j["doc_id"] = doc_id;
    Json vs = Json::array();
    for (const Verdict& v : verdicts) vs.push_back(veriprop::to_json(v));
    j["verdicts"] = std::move(vs);
    Json os = Json::array();
    for (const Omission& o : omissions) {
        Json jo;
        jo["ehr_id"] = Json::array({o.ehr_id.doc_id, o.ehr_id.index});
        jo["entity"] = o.entity.id;
        jo["attribute"] = std::string(to_string(o.attribute));
        jo["code"] = std::string(to_string(o.code));
        os.push_back(std::move(jo));
    }
    j["omissions"] = std::move(os);
    Json ws = Json::array();
    for (const ImplicationWarning& w : warnings) {
        Json jw;
        jw["summary_id"] = Json::array({w.summary_id.doc_id, w.summary_id.index});
        jw["antecedent"] = w.antecedent.id;
        jw["consequent"] = w.consequent.id;
        ws.push_back(std::move(jw));
    }
    j["warnings"] = std::move(ws);
    j["params"] = Json{{"tau_match", tau_match}, {"tau_num", tau_num}};
    return j;
}

VerificationReport VerificationReport::from_json(const Json& j) {
    VerificationReport r;
    r.doc_id = j.at("doc_id").get<std::string>();
    for (const Json& v : j.at("verdicts")) r.verdicts.push_back(verdict_from_json(v));
    for (const Json& o : j.at("omissions")) {
        Omission om;
        om.ehr_id = PropositionId{o.at("ehr_id")[0].get<std::string>(),
                                  o.at("ehr_id")[1].get<int>()};
        om.entity = ConceptId{o.at("entity").get<std::string>()};
        if (auto k = attribute_kind_from(o.at("attribute").get<std::string>())) om.attribute = *k;
        om.code = FailureCode::PresenceFail;
        r.omissions.push_back(std::move(om));
    }
    if (j.contains("warnings")) {
        for (const Json& w : j["warnings"]) {
            ImplicationWarning iw;
            iw.summary_id = PropositionId{w.at("summary_id")[0].get<std::string>(),
                                          w.at("summary_id")[1].get<int>()};
            iw.antecedent = ConceptId{w.at("antecedent").get<std::string>()};
            iw.consequent = ConceptId{w.at("consequent").get<std::string>()};
            r.warnings.push_back(std::move(iw));
        }
    }
    r.tau_match = j.at("params").at("tau_match").get<double>();
    r.tau_num = j.at("params").at("tau_num").get<double>();
    return r;
}

} // namespace veriprop
