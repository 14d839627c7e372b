#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "incdisf/corpus.hpp"
#include "incdisf/tag_codec.hpp"

namespace incdisf {

struct F1Counts {
    long long tp = 0, fp = 0, fn = 0;

    double precision() const { return tp + fp == 0 ? 0.0 : static_cast<double>(tp) / (tp + fp); }
    double recall() const { return tp + fn == 0 ? 0.0 : static_cast<double>(tp) / (tp + fn); }
    // Vacuous case (nothing predicted, nothing gold) scores 1.
    double f1() const {
        if (tp + fp + fn == 0) return 1.0;
        double p = precision(), r = recall();
        return p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r);
    }
    F1Counts& operator+=(const F1Counts& o) {
        tp += o.tp;
        fp += o.fp;
        fn += o.fn;
        return *this;
    }
};

// Word-level F1 over repair-onset words (any rpS variant; position match).
F1Counts f1_rps_counts(const std::vector<DisfTag>& pred, const std::vector<DisfTag>& gold);
double f1_rps(const std::vector<DisfTag>& pred, const std::vector<DisfTag>& gold);

// Word-level F1 over e-tagged words (edit terms, including interregna).
F1Counts f1_edit_counts(const std::vector<DisfTag>& pred, const std::vector<DisfTag>& gold);
double f1_edit(const std::vector<DisfTag>& pred, const std::vector<DisfTag>& gold);

// Word-level F1 over end-of-utterance words.
F1Counts f1_uttseg_counts(const std::vector<UttTag>& pred, const std::vector<UttTag>& gold);
double f1_uttseg(const std::vector<UttTag>& pred, const std::vector<UttTag>& gold);

double pos_accuracy(const std::vector<std::string>& pred, const std::vector<std::string>& gold);

// exp(mean -log p) over per-token log probabilities.
double perplexity(const std::vector<double>& log_probs);

// Predicted repair onsets with reparandum length and, where recoverable from
// the end tag, a repair type. Tolerant of ill-formed predicted sequences.
struct PredictedOnset {
    int position = 0;
    int reparandum_len = 0;
    std::optional<RepairKind> kind;
};
std::vector<PredictedOnset> extract_onsets(const std::vector<DisfTag>& tags);

// Per-kind onset F1; a prediction is a true positive for a bucket only when
// position, exact N, and type all match gold.
std::map<RepairKind, F1Counts> breakdown_by_type(const std::vector<DisfTag>& pred,
                                                 const std::vector<DisfTag>& gold,
                                                 const std::vector<std::string>& tokens);

// Onset F1 bucketed by gold reparandum length: keys "1".."4" and "5+".
std::map<std::string, F1Counts> breakdown_by_length(const std::vector<DisfTag>& pred,
                                                    const std::vector<DisfTag>& gold);

struct EvalReport {
    std::optional<double> f1_rps, f1_edit, f1_uttseg;  // active tasks only
    std::optional<double> f1_rps_strict;               // position + exact N
    std::optional<double> pos_accuracy;
    std::optional<double> perplexity;
    std::optional<double> eo;   // incremental run only
    std::optional<double> ftd;  // incremental run only
    int ftd_detected = 0, ftd_missed = 0;
    std::map<std::string, double> by_type;    // rep / sub / del
    std::map<std::string, double> by_length;  // 1..4, 5+
    long long tokens = 0;
    long long dialogues = 0;
    std::uint64_t seed = 0;

    // Stable machine-readable key-value lines.
    std::string to_kv() const;
    // Human-readable table.
    std::string to_table() const;
};

}  // namespace incdisf
