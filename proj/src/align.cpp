#include "veriprop/align.hpp"

#include <cmath>
#include <fstream>

namespace veriprop {

double cosine(const Embedding& u, const Embedding& v) {
    if (u.dim != v.dim)
        throw AlignError("embedding dimension mismatch: " + std::to_string(u.dim) + " vs " +
                         std::to_string(v.dim));
    double dot = 0.0, nu = 0.0, nv = 0.0;
    for (int i = 0; i < u.dim; ++i) {
        dot += u.values[i] * v.values[i];
        nu += u.values[i] * u.values[i];
        nv += v.values[i] * v.values[i];
    }
    if (nu == 0.0 || nv == 0.0) throw ZeroVector();
    return dot / (std::sqrt(nu) * std::sqrt(nv));
}

namespace {

// FNV-1a, 64-bit; the offset basis doubles as the documented hash seed.
constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ULL;
constexpr std::uint64_t kFnvPrime = 0x100000001b3ULL;

std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = kFnvOffset;
    for (unsigned char c : s) {
        h ^= c;
        h *= kFnvPrime;
    }
    return h;
}

void add_feature(std::vector<double>& buckets, std::string_view feature, double weight) {
    buckets[fnv1a(feature) % buckets.size()] += weight;
}

// token plus its character 3-grams, all under a field prefix
void add_token(std::vector<double>& buckets, std::string_view prefix, std::string_view token,
               double weight) {
    std::string feature = std::string(prefix) + ":" + std::string(token);
    add_feature(buckets, feature, weight);
    if (token.size() >= 3) {
        for (size_t i = 0; i + 3 <= token.size(); ++i) {
            std::string gram = std::string(prefix) + "3:" + std::string(token.substr(i, 3));
            add_feature(buckets, gram, weight);
        }
    }
}

std::string time_token(const TimeRef& t) {
    if (std::holds_alternative<TimeUnknown>(t)) return "";
    if (const auto* m = std::get_if<TimeMarker>(&t)) {
        switch (m->anchor) {
            case TimeAnchor::PreAdmission:  return "pre_admission";
            case TimeAnchor::Admission:     return "admission";
            case TimeAnchor::DayN:          return "day_" + std::to_string(m->day);
            case TimeAnchor::Discharge:     return "discharge";
            case TimeAnchor::PostDischarge: return "post_discharge";
        }
    }
    if (const auto* o = std::get_if<TimeOffset>(&t)) return "offset_" + o->days.str();
    const auto& iv = std::get<TimeInterval>(t);
    return "interval_" + std::to_string(iv.start.tier) + "_" + iv.start.days.str() + "_" +
           std::to_string(iv.end.tier) + "_" + iv.end.days.str() + (iv.end_exclusive ? "x" : "");
}

} // namespace

Embedding HashedConceptEmbedder::embed(const Proposition& p) const {
    Embedding e;
    e.dim = kDim;
    e.values.assign(kDim, 0.0);

    // entity: synonym-normalized, heavily weighted
    ConceptId entity = kb_->normalize_concept(p.entity.id);
    add_token(e.values, "e", entity.id, kEntityWeight);

    add_token(e.values, "a", to_string(p.attribute.kind), 1.0);

    if (const auto* q = std::get_if<Quantity>(&p.value)) {
        add_token(e.values, "vq", q->magnitude.str(), 1.0);
        if (!q->unit.empty()) add_token(e.values, "vu", q->unit, 1.0);
    } else if (const auto* qp = std::get_if<QuantityPair>(&p.value)) {
        add_token(e.values, "vp", qp->first.str() + "_" + qp->second.str(), 1.0);
        if (!qp->unit.empty()) add_token(e.values, "vu", qp->unit, 1.0);
    } else if (const auto* ql = std::get_if<Qualitative>(&p.value)) {
        add_token(e.values, "vl", kb_->normalize_concept(ql->label).id, 1.0);
    } else if (const auto* f = std::get_if<Frequency>(&p.value)) {
        add_token(e.values, "vf", f->count.str() + "_per_" + f->per, 1.0);
    } else {
        add_token(e.values, "vb", std::get<Present>(p.value).flag ? "present" : "absent", 1.0);
    }

    std::string tt = time_token(p.time);
    if (!tt.empty()) add_token(e.values, "t", tt, 1.0);
    add_feature(e.values, p.negated ? "neg:1" : "neg:0", 1.0);

    // L2 normalize
    double norm = 0.0;
    for (double v : e.values) norm += v * v;
    if (norm > 0.0) {
        norm = std::sqrt(norm);
        for (double& v : e.values) v /= norm;
    }
    return e;
}

PrecomputedEmbedder PrecomputedEmbedder::load(const std::filesystem::path& path,
                                              const std::vector<PropositionId>& required) {
    std::ifstream in(path);
    if (!in) throw AlignError("cannot open embeddings file: " + path.string());
    PrecomputedEmbedder out;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        Json j;
        try {
            j = Json::parse(line);
        } catch (const std::exception& e) {
            throw AlignError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
        }
        const Json& idj = j.at("prop_id");
        PropositionId id{idj.at(0).get<std::string>(), idj.at(1).get<int>()};
        Embedding emb;
        for (const Json& v : j.at("vector")) {
            double x = v.get<double>();
            if (x < 0.0)
                throw AlignError(path.string() + ":" + std::to_string(lineno) +
                                 ": negative embedding component");
            emb.values.push_back(x);
        }
        emb.dim = static_cast<int>(emb.values.size());
        if (out.dim_ == 0) out.dim_ = emb.dim;
        if (emb.dim != out.dim_)
            throw AlignError(path.string() + ":" + std::to_string(lineno) +
                             ": inconsistent embedding dimension");
        out.vectors_[id] = std::move(emb);
    }
    for (const PropositionId& id : required) {
        if (!out.vectors_.count(id))
            throw AlignError("embeddings file missing proposition " + id.doc_id + "#" +
                             std::to_string(id.index));
    }
    return out;
}

Embedding PrecomputedEmbedder::embed(const Proposition& p) const {
    auto it = vectors_.find(p.id);
    if (it == vectors_.end())
        throw AlignError("no precomputed embedding for " + p.id.doc_id + "#" +
                         std::to_string(p.id.index));
    return it->second;
}

std::vector<MatchResult> match(const PropositionSet& summary, const PropositionSet& ehr,
                               const Embedder& embedder, double tau_match) {
    std::vector<Embedding> ehr_vecs;
    ehr_vecs.reserve(ehr.items.size());
    for (const Proposition& p : ehr.items) ehr_vecs.push_back(embedder.embed(p));

    std::vector<MatchResult> out;
    out.reserve(summary.items.size());
    for (const Proposition& sp : summary.items) {
        Embedding sv = embedder.embed(sp);
        MatchResult r;
        r.summary_id = sp.id;
        double best = -1.0;
        for (size_t j = 0; j < ehr.items.size(); ++j) {
            double sim;
            if (sv.is_zero() || ehr_vecs[j].is_zero())
                sim = 0.0;
            else
                sim = cosine(sv, ehr_vecs[j]);
            if (sim > best) {
                best = sim;
                r.ehr_id = ehr.items[j].id;
            }
        }
        r.score = ehr.items.empty() ? 0.0 : best;
        r.matched = r.ehr_id.has_value() && r.score >= tau_match;
        out.push_back(std::move(r));
    }
    return out;
}

std::vector<MatchResult> match(const PropositionSet& summary, const PropositionSet& ehr,
                               const KnowledgeBase& kb, double tau_match) {
    HashedConceptEmbedder embedder(kb);
    return match(summary, ehr, embedder, tau_match);
}

} // namespace veriprop
