#include "incdisf/pipeline.hpp"

#include <cctype>
#include <cmath>

namespace incdisf {

EvalReport evaluate_model(const TaggerModel& model, const std::vector<Dialogue>& dialogues,
                          bool incremental) {
    if (dialogues.empty()) throw UsageError("evaluation corpus is empty");
    EvalReport rep;
    rep.seed = model.config.seed;
    rep.dialogues = static_cast<long long>(dialogues.size());

    F1Counts rps, rps_strict, edit, uttseg;
    long long pos_hits = 0, pos_total = 0;
    std::vector<double> lm_log_probs;
    std::map<RepairKind, F1Counts> by_type;
    std::map<std::string, F1Counts> by_length;
    long long eo_necessary = 0, eo_unnecessary = 0;
    double ftd_sum = 0.0;
    int ftd_detected = 0, ftd_missed = 0;

    for (const Dialogue& d : dialogues) {
        rep.tokens += static_cast<long long>(d.tokens.size());
        FinalPrediction pred = predict_final(model, d);

        if (model.tasks.disf) {
            std::vector<DisfTag> p, g = d.disf_tags();
            for (const std::string& s : pred.labels.at(Task::Disf))
                p.push_back(parse_disf_tag(s));
            rps += f1_rps_counts(p, g);
            edit += f1_edit_counts(p, g);
            // Strict onsets require the exact reparandum length too.
            for (std::size_t i = 0; i < p.size(); ++i) {
                bool pp = p[i].is_onset(), gg = g[i].is_onset();
                bool exact = pp && gg && p[i].reparandum_len == g[i].reparandum_len;
                if (exact) ++rps_strict.tp;
                else if (pp) ++rps_strict.fp;
                if (gg && !exact) ++rps_strict.fn;
            }
            for (const auto& [k, c] : breakdown_by_type(p, g, d.words())) by_type[k] += c;
            for (const auto& [k, c] : breakdown_by_length(p, g)) by_length[k] += c;
        }
        if (model.tasks.uttseg) {
            std::vector<UttTag> p, g = d.utt_tags();
            for (const std::string& s : pred.labels.at(Task::UttSeg))
                p.push_back(parse_utt_tag(s));
            uttseg += f1_uttseg_counts(p, g);
        }
        if (model.tasks.pos) {
            const auto& p = pred.labels.at(Task::Pos);
            for (std::size_t i = 0; i < p.size(); ++i) {
                if (p[i] == d.tokens[i].pos_tag) ++pos_hits;
                ++pos_total;
            }
        }
        if (model.tasks.lm)
            lm_log_probs.insert(lm_log_probs.end(), pred.lm_log_probs.begin(),
                                pred.lm_log_probs.end());

        if (incremental && model.tasks.any_tagging()) {
            HypothesisLog log = replay_dialogue(model, d);
            Task eo_task = model.tasks.disf     ? Task::Disf
                           : model.tasks.uttseg ? Task::UttSeg
                                                : Task::Pos;
            const TaskLog& tl = log.at(eo_task);
            std::vector<std::string> prev;
            for (const auto& cur : tl) {
                eo_necessary += 1;
                for (std::size_t i = 0; i + 1 < cur.size() && i < prev.size(); ++i)
                    if (cur[i] != prev[i]) eo_unnecessary += 2;
                prev = cur;
            }
            if (model.tasks.disf) {
                FtdResult f = first_time_to_detection(log.at(Task::Disf),
                                                      gold_onset_positions(d.disf_tags()));
                ftd_sum += f.mean_ftd * f.detected;
                ftd_detected += f.detected;
                ftd_missed += f.missed;
            }
        }
    }

    if (model.tasks.disf) {
        rep.f1_rps = rps.f1();
        rep.f1_rps_strict = rps_strict.f1();
        rep.f1_edit = edit.f1();
        for (const auto& [k, c] : by_type) {
            std::string key = repair_kind_name(k);
            for (char& ch : key) ch = static_cast<char>(std::tolower(ch));
            rep.by_type[key] = c.f1();
        }
        for (const auto& [k, c] : by_length) rep.by_length[k] = c.f1();
    }
    if (model.tasks.uttseg) rep.f1_uttseg = uttseg.f1();
    if (model.tasks.pos)
        rep.pos_accuracy =
            pos_total == 0 ? 1.0 : static_cast<double>(pos_hits) / static_cast<double>(pos_total);
    if (model.tasks.lm && !lm_log_probs.empty()) rep.perplexity = perplexity(lm_log_probs);
    if (incremental && model.tasks.any_tagging()) {
        rep.eo = eo_necessary + eo_unnecessary == 0
                     ? 0.0
                     : static_cast<double>(eo_unnecessary) /
                           static_cast<double>(eo_necessary + eo_unnecessary);
        if (model.tasks.disf) {
            rep.ftd = ftd_detected > 0 ? ftd_sum / ftd_detected : 0.0;
            rep.ftd_detected = ftd_detected;
            rep.ftd_missed = ftd_missed;
        }
    }
    return rep;
}

double unigram_perplexity(const std::vector<Dialogue>& train_set,
                          const std::vector<Dialogue>& eval_set, const Vocabulary& vocab) {
    std::vector<long long> counts(vocab.size(), 0);
    long long total = 0;
    for (const Dialogue& d : train_set)
        for (const AnnotatedToken& t : d.tokens) {
            ++counts[vocab.id_of(t.token)];
            ++total;
        }
    double denom = static_cast<double>(total + vocab.size());  // add-one smoothing
    double nll = 0.0;
    long long n = 0;
    for (const Dialogue& d : eval_set)
        for (const AnnotatedToken& t : d.tokens) {
            double p = (static_cast<double>(counts[vocab.id_of(t.token)]) + 1.0) / denom;
            nll -= std::log(p);
            ++n;
        }
    if (n == 0) throw UsageError("unigram_perplexity: empty evaluation set");
    return std::exp(nll / static_cast<double>(n));
}

}  // namespace incdisf
