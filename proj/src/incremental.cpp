#include "incdisf/incremental.hpp"

namespace incdisf {

IncrementalTagger::IncrementalTagger(const TaggerModel& model)
    : model_(model),
      state_{Tensor::zeros({model.config.hidden}), Tensor::zeros({model.config.hidden})} {
    if (model_.tasks.lm) m_prev_ = model_.lm_head->m0.value;
    for (Task t : model_.tasks.active())
        if (t != Task::Lm) {
            emission_rows_[t] = {};
            log_[t] = {};
        }
}

std::map<Task, std::vector<std::string>> IncrementalTagger::consume_word(
    const std::string& token, std::optional<int> duration_ms) {
    if (ended_) throw UsageError("consume_word after end of stream");

    std::vector<double> x = model_.input_features(token, duration_ms);
    state_ = lstm_step_infer(x, state_, model_.lstm);
    ++consumed_;

    std::map<Task, std::vector<std::string>> out;
    for (auto& [task, rows] : emission_rows_) {
        const TaggingHead& head = model_.head(task);
        rows.push_back(head.emissions_row(state_.h));

        Tensor em = Tensor::zeros({consumed_, head.num_labels});
        for (int t = 0; t < consumed_; ++t)
            for (int j = 0; j < head.num_labels; ++j) em.at(t, j) = rows[t].data[j];
        auto [path, score] = crf_viterbi(em, head);

        std::vector<std::string> labels;
        labels.reserve(path.size());
        for (int id : path) labels.push_back(model_.alphabet(task).labels[id]);
        log_[task].push_back(labels);
        out[task] = std::move(labels);
    }
    if (model_.tasks.lm) m_prev_ = ff_tanh_infer(model_.lm_head->wm, state_.h);
    return out;
}

Tensor IncrementalTagger::next_word_distribution() const {
    if (!model_.tasks.lm) throw UsageError("model has no language-model head");
    return lm_step_infer(m_prev_, *model_.lm_head);
}

HypothesisLog replay_dialogue(const TaggerModel& model, const Dialogue& d) {
    IncrementalTagger tagger(model);
    for (const AnnotatedToken& t : d.tokens) tagger.consume_word(t.token, t.duration_ms);
    return tagger.log();
}

double edit_overhead(const TaskLog& log) {
    if (log.empty()) throw UsageError("edit_overhead: empty hypothesis log");
    long long necessary = 0, unnecessary = 0;
    std::vector<std::string> prev;
    for (const auto& cur : log) {
        necessary += 1;  // the newly appended label
        for (std::size_t i = 0; i + 1 < cur.size() && i < prev.size(); ++i)
            if (cur[i] != prev[i]) unnecessary += 2;  // deletion + insertion
        prev = cur;
    }
    return static_cast<double>(unnecessary) / static_cast<double>(unnecessary + necessary);
}

bool is_onset_label(const std::string& label) {
    return label.rfind("rpS", 0) == 0;  // rpS-N and rpSn{Rep,Sub,Del}-N
}

std::vector<int> gold_onset_positions(const std::vector<DisfTag>& tags) {
    std::vector<int> out;
    for (std::size_t i = 0; i < tags.size(); ++i)
        if (tags[i].is_onset()) out.push_back(static_cast<int>(i));
    return out;
}

FtdResult first_time_to_detection(const TaskLog& disf_log, const std::vector<int>& gold_onsets) {
    FtdResult res;
    double sum = 0.0;
    for (int onset : gold_onsets) {
        bool found = false;
        for (std::size_t t = static_cast<std::size_t>(onset); t < disf_log.size(); ++t) {
            if (is_onset_label(disf_log[t][onset])) {
                sum += static_cast<double>(t) - static_cast<double>(onset);
                found = true;
                break;
            }
        }
        if (found) ++res.detected;
        else ++res.missed;
    }
    if (res.detected > 0) res.mean_ftd = sum / static_cast<double>(res.detected);
    return res;
}

}  // namespace incdisf
