#include "veriprop/metrics.hpp"

#include <cmath>
#include <cstdio>

namespace veriprop {

ConfusionMatrix confusion(const std::vector<Verdict>& predicted,
                          const std::vector<GoldLabel>& gold) {
    if (predicted.size() != gold.size())
        throw IdMismatch("prediction/gold length mismatch: " + std::to_string(predicted.size()) +
                         " vs " + std::to_string(gold.size()));
    ConfusionMatrix cm;
    for (size_t i = 0; i < predicted.size(); ++i) {
        if (predicted[i].proposition_id != gold[i].id)
            throw IdMismatch("prediction/gold id mismatch at position " + std::to_string(i));
        bool pred = predicted[i].supported;
        bool truth = gold[i].supported;
        if (pred && truth) ++cm.tp;
        else if (pred && !truth) ++cm.fp;
        else if (!pred && truth) ++cm.fn;
        else ++cm.tn;
    }
    return cm;
}

MetricReport compute_metrics(const ConfusionMatrix& cm,
                             const std::optional<std::vector<LabeledConfidence>>& confidences) {
    MetricReport r;
    auto ratio = [&](std::int64_t num, std::int64_t den, const char* name) -> Rational {
        if (den == 0) {
            r.degenerate.push_back(name);
            return Rational(0);
        }
        return Rational(num, den);
    };
    r.precision = ratio(cm.tp, cm.tp + cm.fp, "precision");
    r.recall = ratio(cm.tp, cm.tp + cm.fn, "recall");
    r.accuracy = ratio(cm.tp + cm.tn, cm.total(), "accuracy");
    r.specificity = ratio(cm.tn, cm.tn + cm.fp, "specificity");
    r.f1 = ratio(2 * cm.tp, 2 * cm.tp + cm.fp + cm.fn, "f1");
    r.fdr = cm.tp + cm.fp == 0 ? Rational(0) : Rational(cm.fp, cm.tp + cm.fp);
    r.balanced_accuracy = (r.recall + r.specificity) / Rational(2);

    double denom = std::sqrt(static_cast<double>(cm.tp + cm.fp)) *
                   std::sqrt(static_cast<double>(cm.tp + cm.fn)) *
                   std::sqrt(static_cast<double>(cm.tn + cm.fp)) *
                   std::sqrt(static_cast<double>(cm.tn + cm.fn));
    if (denom == 0.0) {
        r.mcc = 0.0;
        r.degenerate.push_back("mcc");
    } else {
        double num = static_cast<double>(cm.tp) * static_cast<double>(cm.tn) -
                     static_cast<double>(cm.fp) * static_cast<double>(cm.fn);
        r.mcc = num / denom;
    }

    if (confidences && !confidences->empty()) {
        double sum = 0.0;
        for (const LabeledConfidence& c : *confidences) {
            double p = std::min(0.99, std::max(0.01, c.prob_supported));
            sum += c.gold_supported ? -std::log(p) : -std::log(1.0 - p);
        }
        r.log_loss = sum / static_cast<double>(confidences->size());
    }
    return r;
}

Json MetricReport::to_json() const {
    Json j;
    j["precision"] = precision.to_double();
    j["recall"] = recall.to_double();
    j["f1"] = f1.to_double();
    j["accuracy"] = accuracy.to_double();
    j["specificity"] = specificity.to_double();
    j["mcc"] = mcc;
    j["balanced_accuracy"] = balanced_accuracy.to_double();
    j["log_loss"] = log_loss ? Json(*log_loss) : Json(nullptr);
    j["fdr"] = fdr.to_double();
    if (!degenerate.empty()) j["degenerate"] = degenerate;
    return j;
}

std::string MetricReport::to_table() const {
    char buf[64];
    std::string out;
    auto row = [&](const char* name, double value) {
        std::snprintf(buf, sizeof(buf), "%-18s %8.4f\n", name, value);
        out += buf;
    };
    row("precision", precision.to_double());
    row("recall", recall.to_double());
    row("f1", f1.to_double());
    row("accuracy", accuracy.to_double());
    row("specificity", specificity.to_double());
    row("mcc", mcc);
    row("balanced_accuracy", balanced_accuracy.to_double());
    if (log_loss) row("log_loss", *log_loss);
    row("fdr", fdr.to_double());
    return out;
}

Json GoldFile::to_json() const {
    Json j;
    j["doc_id"] = doc_id;
    Json arr = Json::array();
    for (const GoldLabel& g : labels) {
        Json e;
        e["id"] = Json::array({g.id.doc_id, g.id.index});
        e["gold"] = g.supported ? "Supported" : "NotSupported";
        arr.push_back(std::move(e));
    }
    j["labels"] = std::move(arr);
    return j;
}

GoldFile GoldFile::from_json(const Json& j) {
    GoldFile g;
    g.doc_id = j.at("doc_id").get<std::string>();
    for (const Json& e : j.at("labels")) {
        GoldLabel l;
        l.id = PropositionId{e.at("id")[0].get<std::string>(), e.at("id")[1].get<int>()};
        l.supported = e.at("gold").get<std::string>() == "Supported";
        g.labels.push_back(std::move(l));
    }
    return g;
}

} // namespace veriprop
