#include "veriprop/simcorpus.hpp"

#include <algorithm>
#include <array>
#include <map>
#include <random>
#include <set>

namespace veriprop {

namespace {

constexpr std::array<std::string_view, 8> kFaultNames = {
    "value_perturb",  "unit_swap",  "negation_flip", "temporal_swap",
    "exclusivity_insert", "fabrication", "omission",  "implication_break",
};

// std::uniform_* distributions are implementation-defined; modulo draws on a
// fully specified engine keep corpora byte-identical across platforms.
struct Rng {
    std::mt19937_64 eng;
    explicit Rng(std::uint64_t seed) : eng(seed) {}
    std::uint64_t u64() { return eng(); }
    std::size_t pick(std::size_t n) { return n ? static_cast<std::size_t>(u64() % n) : 0; }
    double u01() { return static_cast<double>(u64() >> 11) * 0x1.0p-53; }
};

std::uint64_t fnv64(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

} // namespace

std::string_view to_string(FaultKind kind) {
    return kFaultNames[static_cast<size_t>(kind)];
}

std::optional<FaultKind> fault_kind_from(std::string_view name) {
    for (size_t i = 0; i < kFaultNames.size(); ++i)
        if (kFaultNames[i] == name) return static_cast<FaultKind>(i);
    return std::nullopt;
}

Json to_json(const std::vector<FaultSpec>& specs) {
    Json arr = Json::array();
    for (const FaultSpec& s : specs) {
        Json j;
        j["kind"] = std::string(to_string(s.kind));
        j["rate"] = s.rate;
        j["seed"] = s.seed;
        arr.push_back(std::move(j));
    }
    return arr;
}

std::vector<FaultSpec> fault_specs_from_json(const Json& j) {
    std::vector<FaultSpec> out;
    for (const Json& e : j) {
        FaultSpec s;
        auto kind = fault_kind_from(e.at("kind").get<std::string>());
        if (!kind) throw SimError("unknown fault kind '" + e.at("kind").get<std::string>() + "'");
        s.kind = *kind;
        s.rate = e.at("rate").get<double>();
        if (s.rate < 0.0 || s.rate > 1.0) throw SimError("fault rate outside [0,1]");
        s.seed = e.at("seed").get<std::uint64_t>();
        out.push_back(s);
    }
    return out;
}

// ---------------------------------------------------------------- generate

namespace {

struct Vocab {
    std::vector<ConceptId> antecedents;       // implication antecedents (conditions)
    std::vector<ConceptId> plain_conditions;  // conditions outside any rule/pair
    std::vector<ConceptId> meds;              // leaf medications, not rule witnesses
    std::vector<ConceptId> labs;
    std::vector<ConceptId> procedures;
    std::vector<ConceptId> statuses;          // exclusivity pair members (one per doc)
};

bool is_leaf(const KnowledgeBase& kb, const ConceptId& c) {
    return kb.members_of(c).empty();
}

Vocab build_vocab(const KnowledgeBase& kb) {
    Vocab v;
    const ConceptId condition{"condition"};
    const ConceptId medication{"medication"};
    const ConceptId lab_test{"lab_test"};
    const ConceptId procedure{"procedure"};

    std::set<ConceptId> rule_concepts;
    std::set<ConceptId> witness_concepts;
    for (const ImplicationRule& r : kb.implications()) {
        rule_concepts.insert(r.antecedent);
        for (const ConceptId& m : kb.members_of(r.consequent)) witness_concepts.insert(m);
        witness_concepts.insert(r.consequent);
    }
    std::set<ConceptId> pair_members;
    for (const auto& [a, b] : kb.exclusivity_pairs()) {
        pair_members.insert(a);
        pair_members.insert(b);
    }

    for (const ImplicationRule& r : kb.implications())
        if (kb.is_member(r.antecedent, condition) && is_leaf(kb, r.antecedent) &&
            !pair_members.count(r.antecedent))
            v.antecedents.push_back(r.antecedent);

    for (const ConceptId& c : kb.members_of(condition))
        if (is_leaf(kb, c) && !rule_concepts.count(c) && !pair_members.count(c))
            v.plain_conditions.push_back(c);

    for (const ConceptId& c : kb.members_of(medication))
        if (is_leaf(kb, c) && !witness_concepts.count(c) && !pair_members.count(c))
            v.meds.push_back(c);

    for (const ConceptId& c : kb.members_of(lab_test))
        if (is_leaf(kb, c)) v.labs.push_back(c);

    for (const ConceptId& c : kb.members_of(procedure))
        if (is_leaf(kb, c) && !witness_concepts.count(c)) v.procedures.push_back(c);

    for (const ConceptId& c : pair_members)
        if (is_leaf(kb, c)) v.statuses.push_back(c);

    auto dedup = [](std::vector<ConceptId>& xs) {
        std::sort(xs.begin(), xs.end());
        xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
    };
    dedup(v.antecedents);
    dedup(v.plain_conditions);
    dedup(v.meds);
    dedup(v.labs);
    dedup(v.procedures);
    dedup(v.statuses);
    return v;
}

// a seeded synonym surface for the concept; falls back to the id itself
std::string paraphrase(const ConceptId& c, const KnowledgeBase& kb, Rng& rng) {
    std::vector<std::string> surfaces;
    for (const auto& [surface, concept] : kb.surface_forms())
        if (concept == c) surfaces.push_back(surface);
    if (surfaces.empty()) return c.id;
    return surfaces[rng.pick(surfaces.size())];
}

StructuredEntry entry(const ConceptId& c, const char* attribute, int day) {
    StructuredEntry e;
    e.entity = c.id;
    e.attribute = attribute;
    e.time = "day " + std::to_string(day);
    return e;
}

} // namespace

PatientPair generate_patient(std::uint64_t seed, const KnowledgeBase& kb,
                             const SizeParams& size) {
    if (size.min_props < 1 || size.max_props < size.min_props)
        throw SimError("bad size params");
    Vocab vocab = build_vocab(kb);
    if (vocab.antecedents.empty()) throw KBTooSmall("no implication antecedents");
    if (vocab.plain_conditions.empty()) throw KBTooSmall("no plain conditions");
    if (vocab.meds.empty()) throw KBTooSmall("no medications");
    if (vocab.labs.size() < 2) throw KBTooSmall("need at least two lab tests");
    if (vocab.statuses.empty()) throw KBTooSmall("no exclusivity pair members");

    Rng rng(seed);
    std::vector<StructuredEntry> ehr;
    int day = 0;

    // one implication instance per record: antecedent plus a single witness
    ConceptId antecedent = vocab.antecedents[rng.pick(vocab.antecedents.size())];
    const ImplicationRule* rule = nullptr;
    for (const ImplicationRule& r : kb.implications())
        if (r.antecedent == antecedent) {
            rule = &r;
            break;
        }
    std::vector<ConceptId> witnesses = kb.members_of(rule->consequent);
    std::vector<ConceptId> leaf_witnesses;
    for (const ConceptId& w : witnesses)
        if (is_leaf(kb, w)) leaf_witnesses.push_back(w);
    if (leaf_witnesses.empty()) throw KBTooSmall("rule consequent has no leaf members");
    ConceptId witness = leaf_witnesses[rng.pick(leaf_witnesses.size())];

    ehr.push_back(entry(antecedent, "diagnosis", day++));
    ehr.push_back(entry(witness, "treatment", day++));
    ehr.push_back(entry(vocab.plain_conditions[rng.pick(vocab.plain_conditions.size())],
                        "diagnosis", day++));
    ehr.push_back(entry(vocab.statuses[rng.pick(vocab.statuses.size())], "status", day++));

    size_t n_meds = 1 + rng.pick(3);
    std::vector<ConceptId> meds = vocab.meds;
    for (size_t i = 0; i < n_meds && i < meds.size(); ++i) {
        size_t j = i + rng.pick(meds.size() - i);
        std::swap(meds[i], meds[j]);
        static const std::array<int, 8> kDoses = {5, 10, 20, 25, 40, 50, 100, 250};
        StructuredEntry dose = entry(meds[i], "dosage", day++);
        dose.value_number = Rational(kDoses[rng.pick(kDoses.size())]);
        dose.unit = "mg";
        ehr.push_back(std::move(dose));
        StructuredEntry freq = entry(meds[i], "medication", day++);
        static const std::array<const char*, 3> kFreqs = {"daily", "twice daily",
                                                          "3 times daily"};
        freq.value_text = kFreqs[rng.pick(kFreqs.size())];
        ehr.push_back(std::move(freq));
    }

    if (!vocab.procedures.empty() && rng.pick(2) == 0)
        ehr.push_back(entry(vocab.procedures[rng.pick(vocab.procedures.size())], "procedure",
                            day++));

    // one composite vital reading
    {
        StructuredEntry bp = entry(kb.normalize_concept("blood pressure"), "lab_value", day++);
        int systolic = 100 + static_cast<int>(rng.pick(60));
        int diastolic = 60 + static_cast<int>(rng.pick(30));
        bp.value_text = std::to_string(systolic) + "/" + std::to_string(diastolic);
        ehr.push_back(std::move(bp));
    }

    int base = static_cast<int>(ehr.size());
    int target = std::max(size.min_props, base + 2);
    if (target < size.max_props)
        target += static_cast<int>(rng.pick(static_cast<size_t>(size.max_props - target + 1)));
    int n_labs = std::max(2, target - base);
    for (int i = 0; i < n_labs; ++i) {
        const ConceptId& lab = vocab.labs[rng.pick(vocab.labs.size())];
        StructuredEntry e = entry(lab, "lab_value", day++);
        std::int64_t tenths = 5 + static_cast<std::int64_t>(rng.pick(1800));
        e.value_number = Rational(tenths, 10);
        e.unit = rng.pick(4) == 0 ? "g/dL" : "mg/dL";
        ehr.push_back(std::move(e));
    }

    std::string doc_id = "p" + std::to_string(seed);
    PatientPair pair;
    pair.ehr.doc_id = doc_id;
    pair.ehr.kind = DocKind::Ehr;
    pair.ehr.structured = ehr;

    pair.summary.doc_id = doc_id;
    pair.summary.kind = DocKind::Summary;
    for (const StructuredEntry& e : ehr) {
        bool is_lab = e.attribute == "lab_value";
        if (is_lab && rng.pick(4) == 0) continue;  // summaries subset non-key facts
        StructuredEntry copy = e;
        copy.entity = paraphrase(kb.normalize_concept(e.entity), kb, rng);
        pair.summary.structured.push_back(std::move(copy));
    }
    return pair;
}

// ------------------------------------------------------------------ faults

namespace {

struct EntryMeta {
    ConceptId concept;
    AttributeKind kind = AttributeKind::Event;
    int day = -1;
    bool negated = false;
};

int parse_day(const std::string& time) {
    std::vector<std::string> words = canonical_words(time);
    if (words.size() == 2 && words[0] == "day") {
        try {
            return std::stoi(words[1]);
        } catch (...) {
        }
    }
    return -1;
}

EntryMeta meta_of(const StructuredEntry& e, const KnowledgeBase& kb) {
    EntryMeta m;
    m.concept = kb.normalize_concept(e.entity);
    if (auto k = attribute_kind_from(e.attribute)) m.kind = *k;
    m.day = parse_day(e.time);
    m.negated = e.negated;
    return m;
}

struct Plan {
    std::vector<StructuredEntry> entries;          // working copy of the summary
    std::vector<EntryMeta> meta;
    std::set<size_t> reserved;                     // footprint of applied faults
    std::set<size_t> deleted;
    std::vector<std::pair<StructuredEntry, FailureCode>> inserted;
    // surviving entry index -> expected code
    std::map<size_t, FailureCode> flagged;
    std::vector<InjectedFault> records;            // sites filled in later
    struct PendingRecord {
        FaultKind kind;
        std::vector<long> orig_sites;   // >=0: original index; <0: -(insert pos)-1
        FailureCode code;
        std::optional<PropositionId> omission;
    };
    std::vector<PendingRecord> pending;
};

// indices of sole witnesses of active implication rules; removing or negating
// one would fire the implication check on an unfaulted antecedent
std::set<size_t> protected_witnesses(const Plan& plan, const KnowledgeBase& kb) {
    std::set<size_t> out;
    for (const ImplicationRule& rule : kb.implications()) {
        bool antecedent_present = false;
        for (size_t i = 0; i < plan.entries.size(); ++i) {
            if (plan.deleted.count(i) || plan.meta[i].negated) continue;
            if (kb.is_member(plan.meta[i].concept, rule.antecedent)) {
                antecedent_present = true;
                break;
            }
        }
        if (!antecedent_present) continue;
        std::vector<size_t> witnesses;
        for (size_t i = 0; i < plan.entries.size(); ++i) {
            if (plan.deleted.count(i) || plan.meta[i].negated) continue;
            if (kb.is_member(plan.meta[i].concept, rule.consequent)) witnesses.push_back(i);
        }
        if (witnesses.size() == 1) out.insert(witnesses[0]);
    }
    return out;
}

bool has_quantity(const StructuredEntry& e) {
    if (e.value_number) return true;
    if (!e.value_text) return false;
    // composite readings like "120/80"
    const std::string& t = *e.value_text;
    size_t slash = t.find('/');
    if (slash == std::string::npos || slash == 0 || slash + 1 >= t.size()) return false;
    for (size_t i = 0; i < t.size(); ++i)
        if (i != slash && !(std::isdigit(static_cast<unsigned char>(t[i])) || t[i] == '.'))
            return false;
    return true;
}

} // namespace

FaultedPair inject_faults(const PatientPair& pair, const std::vector<FaultSpec>& faults,
                          const KnowledgeBase& kb) {
    double total_rate = 0.0;
    for (const FaultSpec& s : faults) total_rate += s.rate;
    if (total_rate > 1.0 + 1e-12) throw SimError("fault rates sum above 1");

    Plan plan;
    plan.entries = pair.summary.structured;
    for (const StructuredEntry& e : plan.entries) plan.meta.push_back(meta_of(e, kb));

    // EHR proposition id per (concept, kind, day), for omission bookkeeping
    std::map<std::tuple<std::string, std::string, int>, int> ehr_index;
    std::set<ConceptId> ehr_concepts;
    int max_day = 0;
    for (size_t i = 0; i < pair.ehr.structured.size(); ++i) {
        const StructuredEntry& e = pair.ehr.structured[i];
        EntryMeta m = meta_of(e, kb);
        ehr_index[{m.concept.id, e.attribute, m.day}] = static_cast<int>(i);
        ehr_concepts.insert(m.concept);
        max_day = std::max(max_day, m.day);
    }
    for (const EntryMeta& m : plan.meta) max_day = std::max(max_day, m.day);

    auto ehr_id_of = [&](size_t i) -> std::optional<PropositionId> {
        auto it = ehr_index.find({plan.meta[i].concept.id, plan.entries[i].attribute,
                                  plan.meta[i].day});
        if (it == ehr_index.end()) return std::nullopt;
        return PropositionId{pair.ehr.doc_id, it->second};
    };

    int fresh_day = max_day + 1;

    for (const FaultSpec& spec : faults) {
        Rng rng(spec.seed ^ fnv64(pair.summary.doc_id));
        if (rng.u01() >= spec.rate) continue;

        std::set<size_t> witnesses = protected_witnesses(plan, kb);
        auto usable = [&](size_t i) { return !plan.reserved.count(i) && !plan.deleted.count(i); };

        switch (spec.kind) {
            case FaultKind::ValuePerturb: {
                std::vector<size_t> sites;
                for (size_t i = 0; i < plan.entries.size(); ++i)
                    if (usable(i) && has_quantity(plan.entries[i])) sites.push_back(i);
                if (sites.empty()) throw NoEligibleSite(spec.kind);
                size_t site = sites[rng.pick(sites.size())];
                static const std::array<Rational, 4> kFactors = {Rational(1, 4), Rational(1, 2),
                                                                 Rational(2), Rational(4)};
                Rational f = kFactors[rng.pick(kFactors.size())];
                StructuredEntry& e = plan.entries[site];
                if (e.value_number) {
                    e.value_number = *e.value_number * f;
                } else {
                    const std::string& t = *e.value_text;
                    size_t slash = t.find('/');
                    Rational a = Rational::parse(t.substr(0, slash)) * f;
                    Rational b = Rational::parse(t.substr(slash + 1)) * f;
                    auto render = [](const Rational& r) {
                        return r.is_integer() ? std::to_string(r.num())
                                              : std::to_string(r.to_double());
                    };
                    e.value_text = render(a) + "/" + render(b);
                }
                plan.reserved.insert(site);
                plan.flagged[site] = FailureCode::NumericalFail;
                plan.pending.push_back({spec.kind, {static_cast<long>(site)},
                                        FailureCode::NumericalFail, std::nullopt});
                break;
            }
            case FaultKind::UnitSwap: {
                std::vector<size_t> sites;
                for (size_t i = 0; i < plan.entries.size(); ++i) {
                    if (!usable(i) || !plan.entries[i].value_number) continue;
                    if (kb.units_in_dimension_of(plan.entries[i].unit).size() >= 2)
                        sites.push_back(i);
                }
                if (sites.empty()) throw NoEligibleSite(spec.kind);
                size_t site = sites[rng.pick(sites.size())];
                StructuredEntry& e = plan.entries[site];
                std::vector<std::string> alternatives;
                for (const std::string& u : kb.units_in_dimension_of(e.unit))
                    if (u != e.unit) alternatives.push_back(u);
                e.unit = alternatives[rng.pick(alternatives.size())];
                plan.reserved.insert(site);
                plan.flagged[site] = FailureCode::NumericalFail;
                plan.pending.push_back({spec.kind, {static_cast<long>(site)},
                                        FailureCode::NumericalFail, std::nullopt});
                break;
            }
            case FaultKind::NegationFlip: {
                std::vector<size_t> sites;
                for (size_t i = 0; i < plan.entries.size(); ++i)
                    if (usable(i) && !witnesses.count(i)) sites.push_back(i);
                if (sites.empty()) throw NoEligibleSite(spec.kind);
                size_t site = sites[rng.pick(sites.size())];
                plan.entries[site].negated = !plan.entries[site].negated;
                plan.meta[site].negated = plan.entries[site].negated;
                plan.reserved.insert(site);
                plan.flagged[site] = FailureCode::NegationFail;
                plan.pending.push_back({spec.kind, {static_cast<long>(site)},
                                        FailureCode::NegationFail, std::nullopt});
                break;
            }
            case FaultKind::TemporalSwap: {
                // adjacent pair in day order so only the swapped ordering flips
                std::vector<size_t> by_day;
                for (size_t i = 0; i < plan.entries.size(); ++i)
                    if (plan.meta[i].day >= 0 && !plan.deleted.count(i)) by_day.push_back(i);
                std::sort(by_day.begin(), by_day.end(), [&](size_t a, size_t b) {
                    return plan.meta[a].day < plan.meta[b].day;
                });
                std::vector<std::pair<size_t, size_t>> pairs;
                for (size_t k = 0; k + 1 < by_day.size(); ++k) {
                    size_t a = by_day[k], b = by_day[k + 1];
                    if (usable(a) && usable(b) && plan.meta[a].day != plan.meta[b].day)
                        pairs.emplace_back(a, b);
                }
                if (pairs.empty()) throw NoEligibleSite(spec.kind);
                auto [a, b] = pairs[rng.pick(pairs.size())];
                std::swap(plan.entries[a].time, plan.entries[b].time);
                std::swap(plan.meta[a].day, plan.meta[b].day);
                plan.reserved.insert(a);
                plan.reserved.insert(b);
                plan.flagged[a] = FailureCode::TemporalFail;
                plan.flagged[b] = FailureCode::TemporalFail;
                plan.pending.push_back({spec.kind,
                                        {static_cast<long>(a), static_cast<long>(b)},
                                        FailureCode::TemporalFail, std::nullopt});
                break;
            }
            case FaultKind::ExclusivityInsert: {
                std::vector<std::pair<size_t, ConceptId>> candidates;
                for (size_t i = 0; i < plan.entries.size(); ++i) {
                    if (!usable(i) || plan.meta[i].negated) continue;
                    for (const auto& [x, y] : kb.exclusivity_pairs()) {
                        ConceptId partner;
                        if (plan.meta[i].concept == x) partner = y;
                        else if (plan.meta[i].concept == y) partner = x;
                        else continue;
                        bool in_doc = ehr_concepts.count(partner) > 0;
                        for (const EntryMeta& m : plan.meta)
                            if (m.concept == partner) in_doc = true;
                        bool is_antecedent = false;
                        for (const ImplicationRule& r : kb.implications())
                            if (kb.is_member(partner, r.antecedent)) is_antecedent = true;
                        if (!in_doc && !is_antecedent) candidates.emplace_back(i, partner);
                    }
                }
                if (candidates.empty()) throw NoEligibleSite(spec.kind);
                auto [site, partner] = candidates[rng.pick(candidates.size())];
                StructuredEntry ins;
                ins.entity = partner.id;
                ins.attribute = "status";
                ins.time = plan.entries[site].time;  // same marker: guaranteed overlap
                plan.reserved.insert(site);
                plan.flagged[site] = FailureCode::ExclusivityFail;
                long ins_ref = -static_cast<long>(plan.inserted.size()) - 1;
                plan.inserted.emplace_back(std::move(ins), FailureCode::ExclusivityFail);
                plan.pending.push_back({spec.kind, {static_cast<long>(site), ins_ref},
                                        FailureCode::ExclusivityFail, std::nullopt});
                break;
            }
            case FaultKind::Fabrication: {
                std::vector<ConceptId> candidates;
                for (const ConceptId& c : kb.concepts()) {
                    if (!kb.members_of(c).empty()) continue;  // classes are not facts
                    if (ehr_concepts.count(c)) continue;
                    bool clash = false;
                    for (const ConceptId& e : ehr_concepts)
                        if (kb.is_member(c, e) || kb.is_member(e, c)) clash = true;
                    for (const EntryMeta& m : plan.meta)
                        if (m.concept == c || kb.exclusive_with_classes(m.concept, c)) clash = true;
                    for (const ImplicationRule& r : kb.implications())
                        if (kb.is_member(c, r.antecedent)) clash = true;
                    // only concepts with a natural fact kind
                    bool typed = kb.is_member(c, ConceptId{"condition"}) ||
                                 kb.is_member(c, ConceptId{"medication"}) ||
                                 kb.is_member(c, ConceptId{"procedure"});
                    if (!clash && typed) candidates.push_back(c);
                }
                if (candidates.empty()) throw NoEligibleSite(spec.kind);
                ConceptId concept = candidates[rng.pick(candidates.size())];
                StructuredEntry ins;
                ins.entity = concept.id;
                ins.attribute = kb.is_member(concept, ConceptId{"condition"}) ? "diagnosis"
                                : kb.is_member(concept, ConceptId{"medication"}) ? "medication"
                                                                                 : "procedure";
                ins.time = "day " + std::to_string(fresh_day++);
                long ins_ref = -static_cast<long>(plan.inserted.size()) - 1;
                plan.inserted.emplace_back(std::move(ins), FailureCode::NoEvidence);
                plan.pending.push_back({spec.kind, {ins_ref}, FailureCode::NoEvidence,
                                        std::nullopt});
                break;
            }
            case FaultKind::Omission: {
                std::vector<size_t> sites;
                for (size_t i = 0; i < plan.entries.size(); ++i) {
                    if (!usable(i) || witnesses.count(i)) continue;
                    if (auto k = attribute_kind_from(plan.entries[i].attribute);
                        !k || !is_key_attribute(*k))
                        continue;
                    if (!ehr_id_of(i)) continue;
                    sites.push_back(i);
                }
                if (sites.empty()) throw NoEligibleSite(spec.kind);
                size_t site = sites[rng.pick(sites.size())];
                auto omitted = ehr_id_of(site);
                plan.reserved.insert(site);
                plan.deleted.insert(site);
                plan.pending.push_back({spec.kind, {}, FailureCode::PresenceFail, omitted});
                break;
            }
            case FaultKind::ImplicationBreak: {
                // remove the sole witness; the untouched antecedent then fails
                struct Instance {
                    size_t antecedent;
                    size_t witness;
                };
                std::vector<Instance> instances;
                for (const ImplicationRule& rule : kb.implications()) {
                    std::vector<size_t> ants, wits;
                    for (size_t i = 0; i < plan.entries.size(); ++i) {
                        if (plan.deleted.count(i) || plan.meta[i].negated) continue;
                        if (kb.is_member(plan.meta[i].concept, rule.antecedent)) ants.push_back(i);
                        if (kb.is_member(plan.meta[i].concept, rule.consequent)) wits.push_back(i);
                    }
                    if (ants.size() == 1 && wits.size() == 1 && usable(ants[0]) &&
                        usable(wits[0]) && ehr_id_of(wits[0]))
                        instances.push_back({ants[0], wits[0]});
                }
                if (instances.empty()) throw NoEligibleSite(spec.kind);
                Instance inst = instances[rng.pick(instances.size())];
                auto omitted = ehr_id_of(inst.witness);
                plan.reserved.insert(inst.antecedent);
                plan.reserved.insert(inst.witness);
                plan.deleted.insert(inst.witness);
                plan.flagged[inst.antecedent] = FailureCode::ImplicationFail;
                plan.pending.push_back({spec.kind, {static_cast<long>(inst.antecedent)},
                                        FailureCode::ImplicationFail, omitted});
                break;
            }
        }
    }

    // materialize the final summary and remap indices
    FaultedPair out;
    out.ehr = pair.ehr;
    out.summary.doc_id = pair.summary.doc_id;
    out.summary.kind = pair.summary.kind;
    out.summary.admission = pair.summary.admission;
    out.summary.discharge = pair.summary.discharge;

    std::map<size_t, int> final_index;
    for (size_t i = 0; i < plan.entries.size(); ++i) {
        if (plan.deleted.count(i)) continue;
        final_index[i] = static_cast<int>(out.summary.structured.size());
        out.summary.structured.push_back(plan.entries[i]);
    }
    std::vector<int> inserted_index;
    std::map<int, FailureCode> flagged_final;
    for (auto& [e, code] : plan.inserted) {
        int idx = static_cast<int>(out.summary.structured.size());
        inserted_index.push_back(idx);
        flagged_final[idx] = code;
        out.summary.structured.push_back(e);
    }
    for (const auto& [orig, code] : plan.flagged)
        if (final_index.count(orig)) flagged_final[final_index[orig]] = code;

    const std::string& doc = out.summary.doc_id;
    for (int i = 0; i < static_cast<int>(out.summary.structured.size()); ++i)
        out.gold.push_back(GoldLabel{PropositionId{doc, i}, flagged_final.count(i) == 0});

    for (const Plan::PendingRecord& rec : plan.pending) {
        InjectedFault f;
        f.kind = rec.kind;
        f.expected_code = rec.code;
        f.expected_omission = rec.omission;
        for (long site : rec.orig_sites) {
            int idx = site >= 0 ? final_index.at(static_cast<size_t>(site))
                                : inserted_index.at(static_cast<size_t>(-site - 1));
            f.sites.push_back(PropositionId{doc, idx});
        }
        out.faults.push_back(std::move(f));
    }
    return out;
}

} // namespace veriprop
