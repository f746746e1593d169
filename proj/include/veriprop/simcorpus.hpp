#pragma once
// Synthetic EHR/summary corpus generator with controlled fault injection.
// Documents are structured, seed-deterministic, respect the KB's implication
// and exclusivity rules, and carry per-proposition gold labels after faults.

#include "veriprop/extract.hpp"
#include "veriprop/kb.hpp"
#include "veriprop/metrics.hpp"

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace veriprop {

struct SimError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct KBTooSmall : SimError {
    explicit KBTooSmall(const std::string& what) : SimError("KB too small: " + what) {}
};

enum class FaultKind {
    ValuePerturb,
    UnitSwap,
    NegationFlip,
    TemporalSwap,
    ExclusivityInsert,
    Fabrication,
    Omission,
    ImplicationBreak,
};
std::string_view to_string(FaultKind kind);
std::optional<FaultKind> fault_kind_from(std::string_view name);

struct NoEligibleSite : SimError {
    explicit NoEligibleSite(FaultKind kind)
        : SimError("no eligible site for fault '" + std::string(to_string(kind)) + "'"),
          kind(kind) {}
    FaultKind kind;
};

struct FaultSpec {
    FaultKind kind = FaultKind::ValuePerturb;
    double rate = 0.0;  // per-document probability
    std::uint64_t seed = 0;
};

Json to_json(const std::vector<FaultSpec>& specs);
std::vector<FaultSpec> fault_specs_from_json(const Json& j);

struct SizeParams {
    int min_props = 10;
    int max_props = 40;
};

struct PatientPair {
    Document ehr;
    Document summary;  // value-preserving paraphrase containing all key facts
};

PatientPair generate_patient(std::uint64_t seed, const KnowledgeBase& kb,
                             const SizeParams& size = {});

struct InjectedFault {
    FaultKind kind = FaultKind::ValuePerturb;
    std::vector<PropositionId> sites;  // summary propositions expected NotSupported
    FailureCode expected_code = FailureCode::NumericalFail;
    std::optional<PropositionId> expected_omission;  // EHR proposition, when applicable
};

struct FaultedPair {
    Document ehr;
    Document summary;
    std::vector<GoldLabel> gold;  // one label per final summary proposition
    std::vector<InjectedFault> faults;
};

// Applies each firing fault to a distinct, influence-disjoint site. The gold
// labels refer to post-edit proposition indices.
FaultedPair inject_faults(const PatientPair& pair, const std::vector<FaultSpec>& faults,
                          const KnowledgeBase& kb);

} // namespace veriprop
