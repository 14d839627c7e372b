#include "incdisf/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "json.hpp"

namespace incdisf {

using nlohmann::json;

std::string task_name(Task t) {
    switch (t) {
        case Task::Disf: return "disf";
        case Task::UttSeg: return "uttseg";
        case Task::Pos: return "pos";
        case Task::Lm: return "lm";
    }
    return "?";
}

Task parse_task(const std::string& name) {
    if (name == "disf") return Task::Disf;
    if (name == "uttseg") return Task::UttSeg;
    if (name == "pos") return Task::Pos;
    if (name == "lm") return Task::Lm;
    throw UsageError("unknown task '" + name + "' (expected disf, uttseg, pos or lm)");
}

bool TaskSet::has(Task t) const {
    switch (t) {
        case Task::Disf: return disf;
        case Task::UttSeg: return uttseg;
        case Task::Pos: return pos;
        case Task::Lm: return lm;
    }
    return false;
}

std::vector<Task> TaskSet::active() const {
    std::vector<Task> out;
    for (Task t : {Task::Disf, Task::UttSeg, Task::Pos, Task::Lm})
        if (has(t)) out.push_back(t);
    return out;
}

std::string TaskSet::to_string() const {
    std::string out;
    for (Task t : active()) {
        if (!out.empty()) out += ",";
        out += task_name(t);
    }
    return out;
}

TaskSet TaskSet::parse(const std::string& csv) {
    TaskSet s;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        switch (parse_task(item)) {
            case Task::Disf: s.disf = true; break;
            case Task::UttSeg: s.uttseg = true; break;
            case Task::Pos: s.pos = true; break;
            case Task::Lm: s.lm = true; break;
        }
    }
    if (!s.any()) throw UsageError("task set must be non-empty");
    return s;
}

LossMode LossMode::naive(double alpha) {
    if (!(alpha > 0.0)) throw ConfigError("naive loss alpha must be positive");
    return LossMode{Kind::Naive, alpha};
}

LossMode LossMode::uncertainty() { return LossMode{Kind::Uncertainty, 1.0}; }

LabelAlphabet LabelAlphabet::from(std::vector<std::string> labels) {
    LabelAlphabet a;
    a.labels = std::move(labels);
    for (std::size_t i = 0; i < a.labels.size(); ++i)
        a.index[a.labels[i]] = static_cast<int>(i);
    return a;
}

std::vector<Parameter*> TaggerModel::parameters() {
    std::vector<Parameter*> out = {&embedding};
    for (Parameter* p : lstm.params()) out.push_back(p);
    for (auto* h : {&disf_head, &utt_head, &pos_head})
        if (h->has_value())
            for (Parameter* p : h->value().params()) out.push_back(p);
    if (lm_head)
        for (Parameter* p : lm_head->params()) out.push_back(p);
    out.push_back(&eta);
    return out;
}

std::vector<const Parameter*> TaggerModel::parameters() const {
    auto mutable_list = const_cast<TaggerModel*>(this)->parameters();
    return {mutable_list.begin(), mutable_list.end()};
}

const LabelAlphabet& TaggerModel::alphabet(Task t) const {
    switch (t) {
        case Task::Disf: return disf_labels;
        case Task::UttSeg: return utt_labels;
        case Task::Pos: return pos_labels;
        default: throw UsageError("no label alphabet for task " + task_name(t));
    }
}

TaggingHead& TaggerModel::head(Task t) {
    std::optional<TaggingHead>* h = nullptr;
    switch (t) {
        case Task::Disf: h = &disf_head; break;
        case Task::UttSeg: h = &utt_head; break;
        case Task::Pos: h = &pos_head; break;
        default: throw UsageError("no tagging head for task " + task_name(t));
    }
    if (!h->has_value()) throw UsageError("task " + task_name(t) + " not active in this model");
    return h->value();
}

const TaggingHead& TaggerModel::head(Task t) const {
    return const_cast<TaggerModel*>(this)->head(t);
}

std::vector<double> TaggerModel::input_features(const std::string& token,
                                                std::optional<int> duration_ms) const {
    int id = vocab.id_of(token);
    std::vector<double> out(config.embed_dim);
    for (int j = 0; j < config.embed_dim; ++j) out[j] = embedding.value.at(id, j);
    if (config.use_timing) {
        double z = 0.0;
        if (duration_ms)
            z = (static_cast<double>(*duration_ms) - dur_stats.mean) / dur_stats.stddev;
        out.push_back(z);
    }
    return out;
}

namespace {

LabelAlphabet observed_alphabet(const std::vector<Dialogue>& train, Task task) {
    std::set<std::string> seen;
    for (const Dialogue& d : train)
        for (const AnnotatedToken& t : d.tokens) {
            if (task == Task::Disf) seen.insert(to_string(t.disf_tag));
            else if (task == Task::UttSeg) seen.insert(to_string(t.utt_tag));
            else seen.insert(t.pos_tag);
        }
    std::vector<std::string> labels;
    if (task == Task::Pos) {
        labels.assign(seen.begin(), seen.end());
    } else {
        // Keep the canonical alphabet order, restricted to observed tags.
        auto full = (task == Task::Disf) ? full_disf_alphabet() : full_utt_alphabet();
        for (const std::string& s : full)
            if (seen.count(s)) labels.push_back(s);
    }
    return LabelAlphabet::from(std::move(labels));
}

}  // namespace

TaggerModel build_model(const std::vector<Dialogue>& train, TaskSet tasks, LossMode mode,
                        const TrainConfig& config, const EmbeddingTable* embeddings) {
    if (!tasks.any()) throw UsageError("task set must be non-empty");
    TaggerModel m;
    m.config = config;
    m.tasks = tasks;
    m.mode = mode;
    m.vocab = build_vocab(train, config.vocab_cap);
    m.disf_labels = observed_alphabet(train, Task::Disf);
    m.utt_labels = observed_alphabet(train, Task::UttSeg);
    m.pos_labels = observed_alphabet(train, Task::Pos);
    m.dur_stats = duration_stats(train);

    Rng rng = Rng::substream(config.seed, 0x6d6f64656cULL);
    if (embeddings) {
        if (embeddings->dim != config.embed_dim)
            throw ConfigError("embedding table dim does not match config");
        m.embedding = Parameter("embedding", embeddings->matrix);
    } else {
        m.embedding = Parameter("embedding",
                                random_embeddings(m.vocab, config.embed_dim, config.seed).matrix);
    }
    m.lstm = LstmParams(m.input_dim(), config.hidden, rng);
    if (tasks.disf)
        m.disf_head.emplace("disf", config.hidden, config.ff_dim, m.disf_labels.size(), rng);
    if (tasks.uttseg)
        m.utt_head.emplace("uttseg", config.hidden, config.ff_dim, m.utt_labels.size(), rng);
    if (tasks.pos)
        m.pos_head.emplace("pos", config.hidden, config.ff_dim, m.pos_labels.size(), rng);
    if (tasks.lm) m.lm_head.emplace(config.hidden, config.lm_dim, m.vocab.size(), rng);
    m.eta = Parameter("eta", Tensor::zeros({4}));
    return m;
}

double combined_loss_value(const std::map<Task, double>& losses, const LossMode& mode,
                           const std::vector<double>& etas) {
    for (const auto& [t, v] : losses)
        if (!std::isfinite(v))
            throw NumericalError("non-finite loss for task " + task_name(t));
    double out = 0.0;
    if (mode.kind == LossMode::Kind::Naive) {
        for (const auto& [t, v] : losses)
            out += (t == Task::Lm) ? mode.alpha * v : v;
    } else {
        for (const auto& [t, v] : losses) {
            double eta = etas[static_cast<int>(t)];
            out += v * std::exp(-2.0 * eta) + eta;
        }
    }
    return out;
}

Var combined_loss(Tape& t, const std::vector<std::pair<Task, Var>>& losses,
                  const LossMode& mode, Var eta) {
    if (losses.empty()) throw UsageError("combined_loss: no task losses");
    Var total;
    auto accumulate = [&](Var v) { total = total.valid() ? t.add(total, v) : v; };
    if (mode.kind == LossMode::Kind::Naive) {
        for (const auto& [task, v] : losses)
            accumulate(task == Task::Lm ? t.scale(v, mode.alpha) : v);
    } else {
        if (!eta.valid()) throw UsageError("combined_loss: uncertainty mode needs eta");
        for (const auto& [task, v] : losses) {
            Var e = t.slice(eta, static_cast<int>(task), 1);
            Var weighted = t.mul(v, t.exp(t.scale(e, -2.0)));
            accumulate(t.add(weighted, e));
        }
    }
    return total;
}

namespace {

struct Adam {
    double lr, beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
    long long step = 0;
    std::vector<Tensor> m, v;

    explicit Adam(const std::vector<Parameter*>& params, double lr_) : lr(lr_) {
        for (Parameter* p : params) {
            m.push_back(Tensor::zeros(p->value.shape));
            v.push_back(Tensor::zeros(p->value.shape));
        }
    }

    void apply(const std::vector<Parameter*>& params, double clip) {
        double sq = 0.0;
        for (Parameter* p : params)
            for (double g : p->grad.data) sq += g * g;
        double norm = std::sqrt(sq);
        double scale = (clip > 0.0 && norm > clip) ? clip / norm : 1.0;

        ++step;
        double bc1 = 1.0 - std::pow(beta1, static_cast<double>(step));
        double bc2 = 1.0 - std::pow(beta2, static_cast<double>(step));
        for (std::size_t i = 0; i < params.size(); ++i) {
            Parameter& p = *params[i];
            for (std::size_t j = 0; j < p.value.size(); ++j) {
                double g = p.grad.data[j] * scale;
                m[i].data[j] = beta1 * m[i].data[j] + (1.0 - beta1) * g;
                v[i].data[j] = beta2 * v[i].data[j] + (1.0 - beta2) * g * g;
                double mh = m[i].data[j] / bc1;
                double vh = v[i].data[j] / bc2;
                p.value.data[j] -= lr * mh / (std::sqrt(vh) + eps);
            }
            if (!p.value.all_finite())
                throw NumericalError("parameter '" + p.name + "' became non-finite");
        }
    }
};

struct GoldIds {
    std::vector<int> word;                 // vocab ids, LM targets
    std::map<Task, std::vector<int>> tag;  // per tagging task
};

GoldIds gold_ids(const TaggerModel& m, const Dialogue& d) {
    GoldIds g;
    for (const AnnotatedToken& t : d.tokens) g.word.push_back(m.vocab.id_of(t.token));
    for (Task task : m.tasks.active()) {
        if (task == Task::Lm) continue;
        std::vector<int> ids;
        for (const AnnotatedToken& t : d.tokens) {
            if (task == Task::Disf) ids.push_back(m.disf_labels.id(to_string(t.disf_tag)));
            else if (task == Task::UttSeg) ids.push_back(m.utt_labels.id(to_string(t.utt_tag)));
            else ids.push_back(m.pos_labels.id(t.pos_tag));
        }
        g.tag[task] = std::move(ids);
    }
    return g;
}

struct Carried {
    Tensor h, c, m;
    bool fresh = true;  // dialogue start: LM conditions on the learned m0
};

struct HeadVars {
    Var ff_w, emit_w, emit_b, trans, start, stop;
};

// One TBPTT window: builds the tape, returns the combined loss node, and
// updates the carried state with post-window values.
Var window_loss(Tape& t, TaggerModel& m, const Dialogue& d, const GoldIds& gold, int begin,
                int end, Carried& carried) {
    Var emb = t.param(m.embedding);
    Var wx = t.param(m.lstm.wx), wh = t.param(m.lstm.wh), b = t.param(m.lstm.b);
    std::map<Task, HeadVars> heads;
    for (Task task : m.tasks.active()) {
        if (task == Task::Lm) continue;
        TaggingHead& h = m.head(task);
        heads[task] = HeadVars{t.param(h.ff_w),  t.param(h.emit_w), t.param(h.emit_b),
                               t.param(h.trans), t.param(h.start),  t.param(h.stop)};
    }
    Var wm, wq, m_prev;
    if (m.tasks.lm) {
        wm = t.param(m.lm_head->wm);
        wq = t.param(m.lm_head->wq);
        m_prev = carried.fresh ? t.param(m.lm_head->m0) : t.constant(carried.m);
    }

    LstmVarState state{t.constant(carried.h), t.constant(carried.c)};
    std::map<Task, std::vector<Var>> rows;
    Var lm_sum;
    for (int i = begin; i < end; ++i) {
        const AnnotatedToken& tok = d.tokens[i];
        Var x = t.lookup(emb, gold.word[i]);
        if (m.config.use_timing) {
            double z = 0.0;
            if (tok.duration_ms)
                z = (static_cast<double>(*tok.duration_ms) - m.dur_stats.mean) /
                    m.dur_stats.stddev;
            x = t.concat(x, t.constant(Tensor::vec({z})));
        }
        if (m.tasks.lm) {
            Var term = t.nll_softmax(t.matmul(wq, m_prev), gold.word[i]);
            lm_sum = lm_sum.valid() ? t.add(lm_sum, term) : term;
        }
        state = lstm_step(t, x, state, m.lstm, wx, wh, b);
        for (auto& [task, hv] : heads) {
            Var dfeat = ff_tanh(t, hv.ff_w, state.h);
            rows[task].push_back(t.add(t.matmul(hv.emit_w, dfeat), hv.emit_b));
        }
        if (m.tasks.lm) m_prev = t.tanh(t.matmul(wm, state.h));
    }

    double inv_t = 1.0 / static_cast<double>(end - begin);
    std::vector<std::pair<Task, Var>> losses;
    for (auto& [task, hv] : heads) {
        std::vector<int> sub(gold.tag.at(task).begin() + begin, gold.tag.at(task).begin() + end);
        Var nll = t.crf_nll(t.stack_rows(rows[task]), hv.trans, hv.start, hv.stop, sub);
        losses.emplace_back(task, t.scale(nll, inv_t));
    }
    if (m.tasks.lm) losses.emplace_back(Task::Lm, t.scale(lm_sum, inv_t));

    Var eta = (m.mode.kind == LossMode::Kind::Uncertainty) ? t.param(m.eta) : Var{};
    Var loss = combined_loss(t, losses, m.mode, eta);

    carried.h = t.value(state.h);
    carried.c = t.value(state.c);
    if (m.tasks.lm) carried.m = t.value(m_prev);
    carried.fresh = false;
    return loss;
}

std::vector<Tensor> snapshot(const std::vector<Parameter*>& params) {
    std::vector<Tensor> out;
    out.reserve(params.size());
    for (Parameter* p : params) out.push_back(p->value);
    return out;
}

void restore(const std::vector<Parameter*>& params, const std::vector<Tensor>& snap) {
    for (std::size_t i = 0; i < params.size(); ++i) params[i]->value = snap[i];
}

}  // namespace

std::map<Task, double> dialogue_losses(const TaggerModel& model, const Dialogue& d) {
    if (d.tokens.empty()) throw UsageError("dialogue_losses: empty dialogue");
    GoldIds gold = gold_ids(model, d);
    int T = static_cast<int>(d.tokens.size());

    LstmState state{Tensor::zeros({model.config.hidden}), Tensor::zeros({model.config.hidden})};
    std::map<Task, Tensor> emissions;
    for (Task task : model.tasks.active())
        if (task != Task::Lm)
            emissions[task] = Tensor::zeros({T, model.head(task).num_labels});
    Tensor m_prev = model.tasks.lm ? model.lm_head->m0.value : Tensor{};
    double lm_sum = 0.0;

    for (int i = 0; i < T; ++i) {
        if (model.tasks.lm) {
            Tensor p = lm_step_infer(m_prev, *model.lm_head);
            double pw = p.data[gold.word[i]];
            if (!(pw > 0.0)) throw NumericalError("zero LM probability");
            lm_sum -= std::log(pw);
        }
        std::vector<double> x =
            model.input_features(d.tokens[i].token, d.tokens[i].duration_ms);
        state = lstm_step_infer(x, state, model.lstm);
        for (auto& [task, em] : emissions) {
            Tensor row = model.head(task).emissions_row(state.h);
            for (int j = 0; j < row.rows(); ++j) em.at(i, j) = row.data[j];
        }
        if (model.tasks.lm) m_prev = ff_tanh_infer(model.lm_head->wm, state.h);
    }

    std::map<Task, double> out;
    for (auto& [task, em] : emissions) {
        const TaggingHead& h = model.head(task);
        out[task] = crf_nll_value(em, h.trans.value, h.start.value, h.stop.value,
                                  gold.tag.at(task)) /
                    static_cast<double>(T);
    }
    if (model.tasks.lm) out[Task::Lm] = lm_sum / static_cast<double>(T);
    return out;
}

TrainResult train(const std::vector<Dialogue>& train_set, const std::vector<Dialogue>& dev_set,
                  TaskSet tasks, LossMode mode, const TrainConfig& config,
                  const EmbeddingTable* embeddings) {
    if (train_set.empty()) throw UsageError("train: empty training corpus");
    TrainResult result{build_model(train_set, tasks, mode, config, embeddings), {}, 0};
    TaggerModel& m = result.model;
    if (config.max_epochs <= 0) return result;

    std::vector<Parameter*> params = m.parameters();
    Adam opt(params, config.learning_rate);

    std::vector<GoldIds> gold;
    gold.reserve(train_set.size());
    for (const Dialogue& d : train_set) gold.push_back(gold_ids(m, d));

    auto eta_values = [&] {
        return std::vector<double>(m.eta.value.data.begin(), m.eta.value.data.end());
    };
    auto dev_monitor = [&]() -> std::pair<double, std::map<std::string, double>> {
        const std::vector<Dialogue>& set = dev_set.empty() ? train_set : dev_set;
        double total = 0.0;
        std::map<std::string, double> per_task;
        for (const Dialogue& d : set) {
            auto losses = dialogue_losses(m, d);
            total += combined_loss_value(losses, m.mode, eta_values());
            for (const auto& [t, v] : losses) per_task[task_name(t)] += v;
        }
        double n = static_cast<double>(set.size());
        for (auto& [k, v] : per_task) v /= n;
        return {total / n, per_task};
    };

    double best = std::numeric_limits<double>::infinity();
    std::vector<Tensor> best_snap = snapshot(params);
    int best_epoch = 0, since_best = 0;

    for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
        double total = 0.0;
        long long windows = 0;
        for (std::size_t di = 0; di < train_set.size(); ++di) {
            const Dialogue& d = train_set[di];
            if (d.tokens.empty()) continue;
            Carried carried{Tensor::zeros({config.hidden}), Tensor::zeros({config.hidden}),
                            Tensor{}, true};
            int T = static_cast<int>(d.tokens.size());
            for (int begin = 0; begin < T; begin += config.tbptt_window) {
                int end = std::min(T, begin + config.tbptt_window);
                try {
                    Tape tape;
                    for (Parameter* p : params) p->zero_grad();
                    Var loss = window_loss(tape, m, d, gold[di], begin, end, carried);
                    total += tape.value(loss).data[0];
                    ++windows;
                    tape.backward(loss);
                    opt.apply(params, config.grad_clip);
                } catch (const NumericalError& e) {
                    throw NumericalError("epoch " + std::to_string(epoch) + ", dialogue '" +
                                         d.id + "', window at token " + std::to_string(begin) +
                                         ": " + e.what());
                }
            }
        }

        EpochRecord rec;
        rec.epoch = epoch;
        rec.train_loss = windows > 0 ? total / static_cast<double>(windows) : 0.0;
        auto [monitor, per_task] = dev_monitor();
        rec.dev_monitor = monitor;
        rec.dev_task_losses = std::move(per_task);
        rec.etas = eta_values();
        if (monitor < best) {
            best = monitor;
            best_snap = snapshot(params);
            best_epoch = epoch;
            since_best = 0;
            rec.is_best = true;
        } else {
            ++since_best;
        }
        result.history.push_back(std::move(rec));
        if (since_best >= config.patience) break;
    }

    restore(params, best_snap);
    result.best_epoch = best_epoch;
    return result;
}

FinalPrediction predict_final(const TaggerModel& model, const Dialogue& d) {
    if (d.tokens.empty()) throw UsageError("predict_final: empty dialogue");
    int T = static_cast<int>(d.tokens.size());
    LstmState state{Tensor::zeros({model.config.hidden}), Tensor::zeros({model.config.hidden})};
    std::map<Task, Tensor> emissions;
    for (Task task : model.tasks.active())
        if (task != Task::Lm)
            emissions[task] = Tensor::zeros({T, model.head(task).num_labels});
    Tensor m_prev = model.tasks.lm ? model.lm_head->m0.value : Tensor{};

    FinalPrediction out;
    for (int i = 0; i < T; ++i) {
        if (model.tasks.lm) {
            Tensor p = lm_step_infer(m_prev, *model.lm_head);
            out.lm_log_probs.push_back(std::log(p.data[model.vocab.id_of(d.tokens[i].token)]));
        }
        std::vector<double> x = model.input_features(d.tokens[i].token, d.tokens[i].duration_ms);
        state = lstm_step_infer(x, state, model.lstm);
        for (auto& [task, em] : emissions) {
            Tensor row = model.head(task).emissions_row(state.h);
            for (int j = 0; j < row.rows(); ++j) em.at(i, j) = row.data[j];
        }
        if (model.tasks.lm) m_prev = ff_tanh_infer(model.lm_head->wm, state.h);
    }
    for (auto& [task, em] : emissions) {
        auto [path, score] = crf_viterbi(em, model.head(task));
        std::vector<std::string> labels;
        labels.reserve(path.size());
        for (int id : path) labels.push_back(model.alphabet(task).labels[id]);
        out.labels[task] = std::move(labels);
    }
    return out;
}

// ---- checkpoint I/O ----

namespace {

constexpr const char* kCkptMagic = "INCDISF-CKPT v1";

json config_to_json(const TrainConfig& c) {
    return json{{"max_epochs", c.max_epochs},
                {"patience", c.patience},
                {"seed", c.seed},
                {"learning_rate", c.learning_rate},
                {"grad_clip", c.grad_clip},
                {"tbptt_window", c.tbptt_window},
                {"use_timing", c.use_timing},
                {"hidden", c.hidden},
                {"embed_dim", c.embed_dim},
                {"ff_dim", c.ff_dim},
                {"lm_dim", c.lm_dim},
                {"vocab_cap", c.vocab_cap}};
}

TrainConfig config_from_json(const json& j) {
    TrainConfig c;
    c.max_epochs = j.at("max_epochs");
    c.patience = j.at("patience");
    c.seed = j.at("seed");
    c.learning_rate = j.at("learning_rate");
    c.grad_clip = j.at("grad_clip");
    c.tbptt_window = j.at("tbptt_window");
    c.use_timing = j.at("use_timing");
    c.hidden = j.at("hidden");
    c.embed_dim = j.at("embed_dim");
    c.ff_dim = j.at("ff_dim");
    c.lm_dim = j.at("lm_dim");
    c.vocab_cap = j.at("vocab_cap");
    return c;
}

}  // namespace

void save_checkpoint(const std::string& path, const TaggerModel& model) {
    json header;
    header["config"] = config_to_json(model.config);
    header["tasks"] = model.tasks.to_string();
    header["loss"] = {{"kind", model.mode.kind == LossMode::Kind::Naive ? "naive" : "uncertainty"},
                      {"alpha", model.mode.alpha}};
    header["vocab"] = model.vocab.id_to_word;
    header["alphabets"] = {{"disf", model.disf_labels.labels},
                           {"uttseg", model.utt_labels.labels},
                           {"pos", model.pos_labels.labels}};
    header["duration_stats"] = {{"mean", model.dur_stats.mean},
                                {"stddev", model.dur_stats.stddev}};
    json tensors = json::array();
    auto params = model.parameters();
    for (const Parameter* p : params)
        tensors.push_back({{"name", p->name}, {"shape", p->value.shape}});
    header["tensors"] = tensors;

    std::ofstream out(path, std::ios::binary);
    if (!out) throw FormatError("cannot open checkpoint for writing: " + path);
    out << kCkptMagic << "\n" << header.dump() << "\n";
    for (const Parameter* p : params)
        out.write(reinterpret_cast<const char*>(p->value.data.data()),
                  static_cast<std::streamsize>(p->value.size() * sizeof(double)));
    if (!out) throw FormatError("failed writing checkpoint: " + path);
}

TaggerModel load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open checkpoint: " + path);
    std::string magic, header_line;
    if (!std::getline(in, magic) || magic != kCkptMagic)
        throw FormatError("not an incdisf checkpoint (bad magic): " + path);
    if (!std::getline(in, header_line)) throw FormatError("truncated checkpoint header");
    json header;
    try {
        header = json::parse(header_line);
    } catch (const json::exception& e) {
        throw FormatError(std::string("bad checkpoint header: ") + e.what());
    }

    TaggerModel m;
    m.config = config_from_json(header.at("config"));
    m.tasks = TaskSet::parse(header.at("tasks"));
    std::string kind = header.at("loss").at("kind");
    m.mode = kind == "naive" ? LossMode::naive(header.at("loss").at("alpha").get<double>())
                             : LossMode::uncertainty();
    m.vocab.id_to_word = header.at("vocab").get<std::vector<std::string>>();
    for (std::size_t i = 1; i < m.vocab.id_to_word.size(); ++i)
        m.vocab.word_to_id[m.vocab.id_to_word[i]] = static_cast<int>(i);
    m.disf_labels = LabelAlphabet::from(header.at("alphabets").at("disf"));
    m.utt_labels = LabelAlphabet::from(header.at("alphabets").at("uttseg"));
    m.pos_labels = LabelAlphabet::from(header.at("alphabets").at("pos"));
    m.dur_stats.mean = header.at("duration_stats").at("mean");
    m.dur_stats.stddev = header.at("duration_stats").at("stddev");

    Rng rng(0);  // shapes are overwritten below
    m.embedding = Parameter("embedding", Tensor::zeros({m.vocab.size(), m.config.embed_dim}));
    m.lstm = LstmParams(m.input_dim(), m.config.hidden, rng);
    if (m.tasks.disf)
        m.disf_head.emplace("disf", m.config.hidden, m.config.ff_dim, m.disf_labels.size(), rng);
    if (m.tasks.uttseg)
        m.utt_head.emplace("uttseg", m.config.hidden, m.config.ff_dim, m.utt_labels.size(), rng);
    if (m.tasks.pos)
        m.pos_head.emplace("pos", m.config.hidden, m.config.ff_dim, m.pos_labels.size(), rng);
    if (m.tasks.lm) m.lm_head.emplace(m.config.hidden, m.config.lm_dim, m.vocab.size(), rng);
    m.eta = Parameter("eta", Tensor::zeros({4}));

    auto params = m.parameters();
    const json& tensors = header.at("tensors");
    if (tensors.size() != params.size())
        throw FormatError("checkpoint tensor manifest does not match model layout");
    for (std::size_t i = 0; i < params.size(); ++i) {
        std::vector<int> shape = tensors[i].at("shape").get<std::vector<int>>();
        if (shape != params[i]->value.shape || tensors[i].at("name") != params[i]->name)
            throw FormatError("checkpoint tensor mismatch at '" + params[i]->name + "'");
        in.read(reinterpret_cast<char*>(params[i]->value.data.data()),
                static_cast<std::streamsize>(params[i]->value.size() * sizeof(double)));
        if (!in) throw FormatError("truncated checkpoint payload at '" + params[i]->name + "'");
    }
    char extra;
    if (in.read(&extra, 1)) throw FormatError("trailing bytes after checkpoint payload");
    return m;
}

}  // namespace incdisf
