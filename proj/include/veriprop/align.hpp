#pragma once
// Proposition embeddings, cosine similarity and best-counterpart matching.
// The embedder is deterministic: concept-normalized field tokens plus their
// character 3-grams, feature-hashed into a fixed non-negative count vector.

#include "veriprop/kb.hpp"
#include "veriprop/propmodel.hpp"

#include <filesystem>
#include <map>
#include <memory>
#include <stdexcept>
#include <vector>

namespace veriprop {

struct AlignError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ZeroVector : AlignError {
    ZeroVector() : AlignError("cosine of a zero vector") {}
};

struct Embedding {
    int dim = 0;
    std::vector<double> values;  // non-negative components

    bool is_zero() const {
        for (double v : values)
            if (v != 0.0) return false;
        return true;
    }
};

// cosine(u, v) = u.v / (|u||v|); in [0, 1] for non-negative components.
// Throws ZeroVector when either vector has zero norm.
double cosine(const Embedding& u, const Embedding& v);

class Embedder {
public:
    virtual ~Embedder() = default;
    virtual Embedding embed(const Proposition& p) const = 0;
    virtual int dim() const = 0;
};

// Built-in embedder: 4096 buckets, FNV-1a hashing, entity features weighted
// so that propositions about different concepts stay below the match
// threshold even when attribute/value/time fields coincide.
class HashedConceptEmbedder : public Embedder {
public:
    static constexpr int kDim = 4096;
    static constexpr double kEntityWeight = 3.0;

    explicit HashedConceptEmbedder(const KnowledgeBase& kb) : kb_(&kb) {}

    Embedding embed(const Proposition& p) const override;
    int dim() const override { return kDim; }

private:
    const KnowledgeBase* kb_;
};

// Embeddings loaded from a JSON-lines file: {"prop_id":[doc,idx],"vector":[...]}.
// Loading fails unless every required proposition id is covered.
class PrecomputedEmbedder : public Embedder {
public:
    static PrecomputedEmbedder load(const std::filesystem::path& path,
                                    const std::vector<PropositionId>& required);

    Embedding embed(const Proposition& p) const override;
    int dim() const override { return dim_; }

private:
    std::map<PropositionId, Embedding> vectors_;
    int dim_ = 0;
};

struct MatchResult {
    PropositionId summary_id;
    std::optional<PropositionId> ehr_id;  // argmax counterpart; absent iff P_E empty
    double score = 0.0;
    bool matched = false;  // score >= tau_match
};

constexpr double kDefaultTauMatch = 0.5;

// Exhaustive argmax over all EHR propositions; ties break to the lowest EHR
// index. An EHR proposition may back any number of summary propositions.
std::vector<MatchResult> match(const PropositionSet& summary, const PropositionSet& ehr,
                               const Embedder& embedder, double tau_match = kDefaultTauMatch);

std::vector<MatchResult> match(const PropositionSet& summary, const PropositionSet& ehr,
                               const KnowledgeBase& kb, double tau_match = kDefaultTauMatch);

} // namespace veriprop
