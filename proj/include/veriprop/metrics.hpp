#pragma once
// Confusion matrix and the evaluation metric suite over Supported /
// NotSupported verdicts. Ratio metrics are computed in exact rational
// arithmetic and rendered to floats at the output boundary.

#include "veriprop/propmodel.hpp"

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace veriprop {

struct IdMismatch : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ConfusionMatrix {
    std::int64_t tp = 0;
    std::int64_t fp = 0;
    std::int64_t fn = 0;
    std::int64_t tn = 0;

    std::int64_t total() const { return tp + fp + fn + tn; }
};

struct GoldLabel {
    PropositionId id;
    bool supported = false;
};

struct GoldFile {
    std::string doc_id;
    std::vector<GoldLabel> labels;

    Json to_json() const;
    static GoldFile from_json(const Json& j);
};

// Positive class = Supported. Lists must align id-by-id.
ConfusionMatrix confusion(const std::vector<Verdict>& predicted,
                          const std::vector<GoldLabel>& gold);

struct LabeledConfidence {
    double prob_supported = 0.5;  // clipped to [0.01, 0.99] before the log
    bool gold_supported = false;
};

struct MetricReport {
    Rational precision{0};
    Rational recall{0};
    Rational f1{0};
    Rational accuracy{0};
    Rational specificity{0};
    Rational balanced_accuracy{0};
    Rational fdr{0};
    double mcc = 0.0;
    std::optional<double> log_loss;
    std::vector<std::string> degenerate;  // metrics that hit a zero denominator

    Json to_json() const;
    std::string to_table() const;
};

MetricReport compute_metrics(const ConfusionMatrix& cm,
                             const std::optional<std::vector<LabeledConfidence>>& confidences =
                                 std::nullopt);

} // namespace veriprop
