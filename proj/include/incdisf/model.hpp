#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "incdisf/corpus.hpp"
#include "incdisf/layers.hpp"

namespace incdisf {

enum class Task { Disf = 0, UttSeg = 1, Pos = 2, Lm = 3 };

std::string task_name(Task t);
Task parse_task(const std::string& name);

struct TaskSet {
    bool disf = false;
    bool uttseg = false;
    bool pos = false;
    bool lm = false;

    bool has(Task t) const;
    bool any() const { return disf || uttseg || pos || lm; }
    bool any_tagging() const { return disf || uttseg || pos; }
    std::vector<Task> active() const;
    std::string to_string() const;
    static TaskSet parse(const std::string& csv);
};

struct LossMode {
    enum class Kind { Naive, Uncertainty };
    Kind kind = Kind::Naive;
    double alpha = 1.0;  // LM weight in the naive sum

    static LossMode naive(double alpha = 1.0);
    static LossMode uncertainty();
};

struct TrainConfig {
    int max_epochs = 50;
    int patience = 7;
    std::uint64_t seed = 0;
    double learning_rate = 1e-3;
    double grad_clip = 5.0;
    int tbptt_window = 100;
    bool use_timing = false;
    int hidden = 200;
    int embed_dim = 50;
    int ff_dim = 50;
    int lm_dim = 50;
    int vocab_cap = 7000;
};

struct LabelAlphabet {
    std::vector<std::string> labels;
    std::map<std::string, int> index;

    int size() const { return static_cast<int>(labels.size()); }
    // Unseen labels fall back to 0 (scored as errors downstream, never fatal).
    int id(const std::string& s) const {
        auto it = index.find(s);
        return it == index.end() ? 0 : it->second;
    }
    static LabelAlphabet from(std::vector<std::string> labels);
};

struct TaggerModel {
    TrainConfig config;
    TaskSet tasks;
    LossMode mode;
    Vocabulary vocab;
    LabelAlphabet disf_labels, utt_labels, pos_labels;
    DurationStats dur_stats;

    Parameter embedding;  // [V x embed_dim]
    LstmParams lstm;
    std::optional<TaggingHead> disf_head, utt_head, pos_head;
    std::optional<LmHead> lm_head;
    Parameter eta;  // [4], log sigma per task, uncertainty weighting

    std::vector<Parameter*> parameters();
    std::vector<const Parameter*> parameters() const;
    int input_dim() const { return config.embed_dim + (config.use_timing ? 1 : 0); }

    const LabelAlphabet& alphabet(Task t) const;
    TaggingHead& head(Task t);
    const TaggingHead& head(Task t) const;

    std::vector<double> input_features(const std::string& token,
                                       std::optional<int> duration_ms) const;
};

// Initializes a model from the training corpus: vocabulary, observed tag
// alphabets, duration statistics, and seeded parameters. `embeddings`, when
// given, pre-fills the embedding rows.
TaggerModel build_model(const std::vector<Dialogue>& train, TaskSet tasks, LossMode mode,
                        const TrainConfig& config,
                        const EmbeddingTable* embeddings = nullptr);

// Naive: sum of tagging losses + alpha * E_LM.
// Uncertainty: sum_i E_i * exp(-2 eta_i) + sum_i eta_i.
double combined_loss_value(const std::map<Task, double>& losses, const LossMode& mode,
                           const std::vector<double>& etas);
Var combined_loss(Tape& t, const std::vector<std::pair<Task, Var>>& losses,
                  const LossMode& mode, Var eta);

struct EpochRecord {
    int epoch = 0;
    double train_loss = 0.0;
    double dev_monitor = 0.0;
    std::map<std::string, double> dev_task_losses;
    std::vector<double> etas;
    bool is_best = false;
};

struct TrainResult {
    TaggerModel model;
    std::vector<EpochRecord> history;
    int best_epoch = 0;
};

TrainResult train(const std::vector<Dialogue>& train_set, const std::vector<Dialogue>& dev_set,
                  TaskSet tasks, LossMode mode, const TrainConfig& config,
                  const EmbeddingTable* embeddings = nullptr);

// Per-task mean negative log-likelihood over one dialogue, inference only.
std::map<Task, double> dialogue_losses(const TaggerModel& model, const Dialogue& d);

struct FinalPrediction {
    std::map<Task, std::vector<std::string>> labels;  // tagging tasks
    std::vector<double> lm_log_probs;                 // per token, empty without LM
};

FinalPrediction predict_final(const TaggerModel& model, const Dialogue& d);

// Checkpoint round-trips bit-exactly (JSON header + raw little-endian doubles).
void save_checkpoint(const std::string& path, const TaggerModel& model);
TaggerModel load_checkpoint(const std::string& path);

}  // namespace incdisf
