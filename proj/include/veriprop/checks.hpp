#pragma once
// The six discrete consistency checks and the verdict rule. All checks are
// pure over an immutable context; failure codes accumulate per proposition.

#include "veriprop/align.hpp"
#include "veriprop/kb.hpp"
#include "veriprop/propmodel.hpp"

#include <optional>
#include <vector>

namespace veriprop {

constexpr double kDefaultTauNum = 1e-9;

// attribute kinds whose EHR propositions must be mirrored in the summary
bool is_key_attribute(AttributeKind kind);

struct CheckContext {
    const PropositionSet& summary;
    const PropositionSet& ehr;
    const std::vector<MatchResult>& matches;  // one per summary proposition, in order
    const KnowledgeBase& kb;
    double tau_match = kDefaultTauMatch;
    double tau_num = kDefaultTauNum;
};

// A key EHR fact with no summary counterpart; reported at document level.
struct Omission {
    PropositionId ehr_id;
    ConceptId entity;
    AttributeKind attribute = AttributeKind::Event;
    FailureCode code = FailureCode::PresenceFail;
};

// Implication whose consequent is missing from the summary but also absent
// from the EHR: not a verdict, surfaced as a warning.
struct ImplicationWarning {
    PropositionId summary_id;
    ConceptId antecedent;
    ConceptId consequent;
};

struct ImplicationFinding {
    PropositionId summary_id;  // the antecedent proposition
    ConceptId antecedent;
    ConceptId consequent;
};

struct TemporalFinding {
    PropositionId first;
    PropositionId second;
};

struct ExclusivityFinding {
    PropositionId first;
    PropositionId second;
};

// Matched-pair checks. Preconditions: the pair was matched by alignment.
std::optional<FailureCode> check_negation(const Proposition& summary, const Proposition& ehr);
std::optional<FailureCode> check_numerical(const Proposition& summary, const Proposition& ehr,
                                           const KnowledgeBase& kb, double tau_num = kDefaultTauNum);

// Set-level checks.
std::vector<ImplicationFinding> check_implication(const PropositionSet& summary,
                                                  const PropositionSet& ehr,
                                                  const KnowledgeBase& kb,
                                                  std::vector<ImplicationWarning>* warnings = nullptr);
std::vector<TemporalFinding> check_temporal(const PropositionSet& summary,
                                            const PropositionSet& ehr,
                                            const std::vector<MatchResult>& matches);
std::vector<ExclusivityFinding> check_exclusivity(const PropositionSet& summary,
                                                  const KnowledgeBase& kb);
std::vector<Omission> check_presence(const PropositionSet& summary, const PropositionSet& ehr,
                                     const std::vector<MatchResult>& matches,
                                     const KnowledgeBase& kb);

struct VerificationReport {
    std::string doc_id;
    std::vector<Verdict> verdicts;
    std::vector<Omission> omissions;
    std::vector<ImplicationWarning> warnings;
    double tau_match = kDefaultTauMatch;
    double tau_num = kDefaultTauNum;

    Json to_json() const;
    static VerificationReport from_json(const Json& j);
};

// Runs every check and assigns Supported / NotSupported per Eq.-style rule:
// a summary proposition is Supported iff matched and free of failure codes.
VerificationReport assign_verdicts(const CheckContext& ctx);

// Convenience end-to-end pipeline for one document pair.
struct VerifyParams {
    double tau_match = kDefaultTauMatch;
    double tau_num = kDefaultTauNum;
    const Embedder* embedder = nullptr;  // defaults to HashedConceptEmbedder
};

struct Document;  // extract.hpp
VerificationReport verify_documents(const PropositionSet& summary, const PropositionSet& ehr,
                                    const KnowledgeBase& kb, const VerifyParams& params = {});

} // namespace veriprop
