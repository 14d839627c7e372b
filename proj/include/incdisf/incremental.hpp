#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "incdisf/model.hpp"

namespace incdisf {

// Per-task sequence of full prefix outputs: entry t holds the labels emitted
// after consuming word t+1 (so entry t has length t+1).
using TaskLog = std::vector<std::vector<std::string>>;
using HypothesisLog = std::map<Task, TaskLog>;

// Strictly left-to-right decoder over a frozen model. One stream per
// instance; many instances may share a model concurrently.
class IncrementalTagger {
public:
    explicit IncrementalTagger(const TaggerModel& model);

    // Runs one LSTM step and re-decodes every active tagging task over the
    // prefix (stop scores applied provisionally at the current last word).
    // Returns the per-task label sequences for the consumed prefix.
    std::map<Task, std::vector<std::string>> consume_word(
        const std::string& token, std::optional<int> duration_ms = std::nullopt);

    // Next-word distribution given the consumed prefix (LM task only).
    Tensor next_word_distribution() const;

    void end_stream() { ended_ = true; }
    int consumed() const { return consumed_; }
    const HypothesisLog& log() const { return log_; }

private:
    const TaggerModel& model_;
    LstmState state_;
    Tensor m_prev_;
    std::map<Task, std::vector<Tensor>> emission_rows_;
    HypothesisLog log_;
    int consumed_ = 0;
    bool ended_ = false;
};

// Replays a dialogue through the engine and returns the full hypothesis log.
HypothesisLog replay_dialogue(const TaggerModel& model, const Dialogue& d);

// Proportion of unnecessary edits: each newly appended label costs 1
// necessary edit, each changed earlier label costs 2 (a deletion plus an
// insertion). Zero iff the log is revision-free.
double edit_overhead(const TaskLog& log);

struct FtdResult {
    double mean_ftd = 0.0;
    int detected = 0;
    int missed = 0;
};

// For each gold onset position, the number of words consumed past it before
// the engine first labels that position with any rpS tag (0 when detected on
// the onset word itself). Never-detected onsets are counted as missed.
FtdResult first_time_to_detection(const TaskLog& disf_log, const std::vector<int>& gold_onsets);

// Gold onset positions (any rpS variant) of a disfluency tag sequence.
std::vector<int> gold_onset_positions(const std::vector<DisfTag>& tags);

bool is_onset_label(const std::string& label);

}  // namespace incdisf
