#include "incdisf/eval.hpp"

#include <cmath>
#include <sstream>

namespace incdisf {

namespace {

template <typename Tag, typename Pred>
F1Counts positional_counts(const std::vector<Tag>& pred, const std::vector<Tag>& gold,
                           Pred is_positive) {
    if (pred.size() != gold.size()) throw UsageError("sequence length mismatch in F1");
    F1Counts c;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        bool p = is_positive(pred[i]);
        bool g = is_positive(gold[i]);
        if (p && g) ++c.tp;
        else if (p) ++c.fp;
        else if (g) ++c.fn;
    }
    return c;
}

}  // namespace

F1Counts f1_rps_counts(const std::vector<DisfTag>& pred, const std::vector<DisfTag>& gold) {
    return positional_counts(pred, gold, [](const DisfTag& t) { return t.is_onset(); });
}
double f1_rps(const std::vector<DisfTag>& pred, const std::vector<DisfTag>& gold) {
    return f1_rps_counts(pred, gold).f1();
}

F1Counts f1_edit_counts(const std::vector<DisfTag>& pred, const std::vector<DisfTag>& gold) {
    return positional_counts(pred, gold, [](const DisfTag& t) { return t.is_edit(); });
}
double f1_edit(const std::vector<DisfTag>& pred, const std::vector<DisfTag>& gold) {
    return f1_edit_counts(pred, gold).f1();
}

F1Counts f1_uttseg_counts(const std::vector<UttTag>& pred, const std::vector<UttTag>& gold) {
    return positional_counts(pred, gold, [](const UttTag& t) { return t.ends; });
}
double f1_uttseg(const std::vector<UttTag>& pred, const std::vector<UttTag>& gold) {
    return f1_uttseg_counts(pred, gold).f1();
}

double pos_accuracy(const std::vector<std::string>& pred, const std::vector<std::string>& gold) {
    if (pred.size() != gold.size()) throw UsageError("sequence length mismatch in accuracy");
    if (pred.empty()) return 1.0;
    long long hit = 0;
    for (std::size_t i = 0; i < pred.size(); ++i)
        if (pred[i] == gold[i]) ++hit;
    return static_cast<double>(hit) / static_cast<double>(pred.size());
}

double perplexity(const std::vector<double>& log_probs) {
    if (log_probs.empty()) throw UsageError("perplexity of empty sequence");
    double s = 0.0;
    for (double lp : log_probs) s -= lp;
    return std::exp(s / static_cast<double>(log_probs.size()));
}

std::vector<PredictedOnset> extract_onsets(const std::vector<DisfTag>& tags) {
    std::vector<PredictedOnset> out;
    for (std::size_t i = 0; i < tags.size(); ++i) {
        const DisfTag& t = tags[i];
        if (t.kind == DisfTag::Kind::OnsetEnd) {
            out.push_back({static_cast<int>(i), t.reparandum_len, t.repair});
        } else if (t.kind == DisfTag::Kind::Onset) {
            PredictedOnset o{static_cast<int>(i), t.reparandum_len, std::nullopt};
            for (std::size_t k = i + 1; k < tags.size(); ++k) {
                if (tags[k].is_onset()) break;
                if (tags[k].kind == DisfTag::Kind::End) {
                    o.kind = tags[k].repair;
                    break;
                }
            }
            out.push_back(o);
        }
    }
    return out;
}

std::map<RepairKind, F1Counts> breakdown_by_type(const std::vector<DisfTag>& pred,
                                                 const std::vector<DisfTag>& gold,
                                                 const std::vector<std::string>& tokens) {
    std::map<RepairKind, F1Counts> out;
    DisfAnnotation gold_ann = decode_disfluency(gold);
    std::map<int, std::pair<int, RepairKind>> gold_by_pos;  // onset -> (N, kind)
    for (const RepairSpan& r : gold_ann.repairs) {
        RepairKind k = classify_repair(r, tokens);
        int n = std::min(r.reparandum_raw_len(), kMaxReparandumLen);
        gold_by_pos[r.onset_word()] = {n, k};
        out[k];  // materialize the bucket
        ++out[k].fn;
    }
    for (const PredictedOnset& p : extract_onsets(pred)) {
        if (!p.kind) continue;  // type not recoverable: counted in no bucket
        auto it = gold_by_pos.find(p.position);
        bool match = it != gold_by_pos.end() && it->second.first == p.reparandum_len &&
                     it->second.second == *p.kind;
        if (match) {
            ++out[*p.kind].tp;
            --out[*p.kind].fn;
        } else {
            ++out[*p.kind].fp;
        }
    }
    return out;
}

std::map<std::string, F1Counts> breakdown_by_length(const std::vector<DisfTag>& pred,
                                                    const std::vector<DisfTag>& gold) {
    auto bucket = [](int n) { return n >= 5 ? std::string("5+") : std::to_string(n); };
    std::map<std::string, F1Counts> out;
    std::map<int, int> gold_by_pos;  // onset -> N
    for (std::size_t i = 0; i < gold.size(); ++i)
        if (gold[i].is_onset()) {
            gold_by_pos[static_cast<int>(i)] = gold[i].reparandum_len;
            ++out[bucket(gold[i].reparandum_len)].fn;
        }
    for (const PredictedOnset& p : extract_onsets(pred)) {
        auto it = gold_by_pos.find(p.position);
        if (it != gold_by_pos.end() && it->second == p.reparandum_len) {
            ++out[bucket(p.reparandum_len)].tp;
            --out[bucket(p.reparandum_len)].fn;
        } else {
            ++out[bucket(p.reparandum_len)].fp;
        }
    }
    return out;
}

namespace {

std::string fmt(double v) {
    std::ostringstream ss;
    ss.precision(6);
    ss << std::fixed << v;
    return ss.str();
}

}  // namespace

std::string EvalReport::to_kv() const {
    std::ostringstream ss;
    ss << "seed\t" << seed << "\n";
    ss << "dialogues\t" << dialogues << "\n";
    ss << "tokens\t" << tokens << "\n";
    if (f1_rps) ss << "f1_rps\t" << fmt(*f1_rps) << "\n";
    if (f1_rps_strict) ss << "f1_rps_strict\t" << fmt(*f1_rps_strict) << "\n";
    if (f1_edit) ss << "f1_e\t" << fmt(*f1_edit) << "\n";
    if (f1_uttseg) ss << "f1_uttseg\t" << fmt(*f1_uttseg) << "\n";
    if (pos_accuracy) ss << "acc_pos\t" << fmt(*pos_accuracy) << "\n";
    if (perplexity) ss << "ppl\t" << fmt(*perplexity) << "\n";
    if (eo) ss << "eo\t" << fmt(*eo) << "\n";
    if (ftd) {
        ss << "ftd\t" << fmt(*ftd) << "\n";
        ss << "ftd_detected\t" << ftd_detected << "\n";
        ss << "ftd_missed\t" << ftd_missed << "\n";
    }
    for (const auto& [k, v] : by_type) ss << "by_type." << k << "\t" << fmt(v) << "\n";
    for (const auto& [k, v] : by_length) ss << "by_length." << k << "\t" << fmt(v) << "\n";
    return ss.str();
}

std::string EvalReport::to_table() const {
    std::ostringstream ss;
    ss << "evaluation over " << dialogues << " dialogues, " << tokens << " tokens (seed " << seed
       << ")\n";
    auto row = [&](const char* name, const std::optional<double>& v) {
        if (v) ss << "  " << name << ": " << fmt(*v) << "\n";
    };
    row("F_rpS", f1_rps);
    row("F_rpS (exact N)", f1_rps_strict);
    row("F_e", f1_edit);
    row("F_uttSeg", f1_uttseg);
    row("ACC_POS", pos_accuracy);
    row("Perplexity (UNK scored as a class)", perplexity);
    row("Edit overhead", eo);
    if (ftd)
        ss << "  FTD: " << fmt(*ftd) << " (" << ftd_detected << " detected, " << ftd_missed
           << " missed)\n";
    if (!by_type.empty()) {
        ss << "  F1 by repair type:";
        for (const auto& [k, v] : by_type) ss << " " << k << "=" << fmt(v);
        ss << "\n";
    }
    if (!by_length.empty()) {
        ss << "  F1 by reparandum length:";
        for (const auto& [k, v] : by_length) ss << " " << k << "=" << fmt(v);
        ss << "\n";
    }
    return ss.str();
}

}  // namespace incdisf
