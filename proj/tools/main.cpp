// Command-line surface: gen | train | eval | tag | inspect.
// Exit codes: 0 success, 1 usage, 2 data/format, 3 numerical failure.

#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "incdisf/errors.hpp"
#include "incdisf/incremental.hpp"
#include "incdisf/model.hpp"
#include "incdisf/pipeline.hpp"
#include "incdisf/synth.hpp"

using namespace incdisf;

namespace {

int run_gen(const std::string& config_path, const std::string& out_path,
            std::optional<std::uint64_t> seed, std::optional<int> num_dialogues) {
    GenConfig cfg = parse_gen_config_file(config_path);
    if (seed) cfg.seed = *seed;
    if (num_dialogues) cfg.num_dialogues = *num_dialogues;
    cfg.validate();
    std::vector<Dialogue> dialogues = generate(cfg);
    write_corpus_file(out_path, dialogues);
    std::cerr << "seed " << cfg.seed << ": wrote " << dialogues.size() << " dialogues to "
              << out_path << "\n";
    return 0;
}

int run_train(const std::string& corpus_path, const std::string& dev_path,
              const std::string& tasks_csv, const std::string& loss_name, double alpha,
              const TrainConfig& cfg, const std::string& emb_path, const std::string& out_path) {
    TaskSet tasks = TaskSet::parse(tasks_csv);
    LossMode mode;
    if (loss_name == "naive")
        mode = LossMode::naive(alpha);
    else if (loss_name == "uncertainty")
        mode = LossMode::uncertainty();
    else
        throw UsageError("unknown loss mode: " + loss_name);

    std::vector<Dialogue> train_set = load_corpus_file(corpus_path);
    std::vector<Dialogue> dev_set;
    if (!dev_path.empty()) dev_set = load_corpus_file(dev_path);

    std::optional<EmbeddingTable> emb;
    if (!emb_path.empty()) {
        std::ifstream in(emb_path);
        if (!in) throw UsageError("cannot open embeddings file: " + emb_path);
        Vocabulary vocab = build_vocab(train_set, cfg.vocab_cap);
        emb = load_embeddings(in, vocab, cfg.embed_dim, cfg.seed);
    }

    TrainResult result = train(train_set, dev_set, tasks, mode, cfg, emb ? &*emb : nullptr);
    save_checkpoint(out_path, result.model);

    std::cout << "seed\t" << cfg.seed << "\n";
    std::cout << "tasks\t" << tasks.to_string() << "\n";
    std::cout << "loss\t" << loss_name << "\n";
    std::cout << "best_epoch\t" << result.best_epoch << "\n";
    for (const EpochRecord& r : result.history) {
        std::cout << "epoch\t" << r.epoch << "\ttrain_loss\t" << r.train_loss << "\tdev_monitor\t"
                  << r.dev_monitor << (r.is_best ? "\tbest" : "") << "\n";
    }
    std::cout << "checkpoint\t" << out_path << "\n";
    return 0;
}

int run_eval(const std::string& model_path, const std::string& corpus_path, bool incremental) {
    TaggerModel model = load_checkpoint(model_path);
    std::vector<Dialogue> dialogues = load_corpus_file(corpus_path);
    EvalReport report = evaluate_model(model, dialogues, incremental);
    std::cerr << report.to_table();
    std::cout << report.to_kv();
    return 0;
}

int run_tag(const std::string& model_path, bool timing) {
    TaggerModel model = load_checkpoint(model_path);
    IncrementalTagger tagger(model);
    std::string line;
    while (std::getline(std::cin, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::string token = line;
        std::optional<int> duration;
        auto tab = line.find('\t');
        if (tab != std::string::npos) {
            token = line.substr(0, tab);
            std::string dur = line.substr(tab + 1);
            try {
                duration = std::stoi(dur);
            } catch (const std::exception&) {
                std::cerr << "malformed duration, skipping line: " << line << "\n";
                continue;
            }
        }
        if (token.empty()) {
            std::cerr << "malformed line (empty token), skipping\n";
            continue;
        }
        auto labels = tagger.consume_word(token, timing ? duration : std::nullopt);
        for (const auto& [task, seq] : labels) {
            std::cout << tagger.consumed() << "\t" << task_name(task) << "\t";
            for (std::size_t i = 0; i < seq.size(); ++i) {
                if (i) std::cout << ' ';
                std::cout << seq[i];
            }
            std::cout << "\n";
        }
        std::cout.flush();
    }
    return 0;
}

int run_inspect(const std::string& model_path) {
    TaggerModel model = load_checkpoint(model_path);
    std::cout << "tasks\t" << model.tasks.to_string() << "\n";
    std::cout << "loss\t"
              << (model.mode.kind == LossMode::Kind::Uncertainty ? "uncertainty" : "naive") << "\n";
    if (model.mode.kind == LossMode::Kind::Naive) std::cout << "alpha\t" << model.mode.alpha << "\n";
    std::cout << "seed\t" << model.config.seed << "\n";
    std::cout << "hidden\t" << model.config.hidden << "\n";
    std::cout << "embed_dim\t" << model.config.embed_dim << "\n";
    std::cout << "ff_dim\t" << model.config.ff_dim << "\n";
    std::cout << "lm_dim\t" << model.config.lm_dim << "\n";
    std::cout << "timing\t" << (model.config.use_timing ? "yes" : "no") << "\n";
    std::cout << "vocab_size\t" << model.vocab.size() << "\n";
    long long n_params = 0;
    for (const Parameter* p : model.parameters()) n_params += static_cast<long long>(p->value.size());
    std::cout << "parameters\t" << n_params << "\n";
    const auto& eta = model.eta.value.data;
    const char* names[4] = {"disf", "uttseg", "pos", "lm"};
    for (int i = 0; i < 4; ++i) {
        std::cout << "eta." << names[i] << "\t" << eta[i] << "\tsigma." << names[i] << "\t"
                  << std::exp(eta[i]) << "\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"incremental multi-task disfluency tagger"};
    app.require_subcommand(1);

    // gen
    auto* gen = app.add_subcommand("gen", "generate a synthetic annotated corpus");
    std::string gen_config, gen_out;
    std::optional<std::uint64_t> gen_seed;
    std::optional<int> gen_n;
    gen->add_option("config", gen_config, "generator config file")->required();
    gen->add_option("out", gen_out, "output corpus path")->required();
    gen->add_option("--seed", gen_seed, "override config seed");
    gen->add_option("--num-dialogues", gen_n, "override dialogue count");

    // train
    auto* tr = app.add_subcommand("train", "train a model");
    std::string tr_corpus, tr_dev, tr_tasks = "disf,uttseg,pos,lm", tr_loss = "naive";
    std::string tr_emb, tr_out = "model.ckpt";
    double tr_alpha = 1.0;
    TrainConfig cfg;
    tr->add_option("corpus", tr_corpus, "training corpus")->required();
    tr->add_option("--dev", tr_dev, "development corpus (early stopping)");
    tr->add_option("--tasks", tr_tasks, "comma-separated task subset");
    tr->add_option("--loss", tr_loss, "naive | uncertainty");
    tr->add_option("--alpha", tr_alpha, "LM weight in the naive loss");
    tr->add_flag("--timing", cfg.use_timing, "append normalized duration to the input");
    tr->add_option("--seed", cfg.seed, "random seed");
    tr->add_option("--epochs", cfg.max_epochs, "max training epochs");
    tr->add_option("--patience", cfg.patience, "early-stopping patience");
    tr->add_option("--lr", cfg.learning_rate, "Adam learning rate");
    tr->add_option("--hidden", cfg.hidden, "LSTM hidden size");
    tr->add_option("--embed-dim", cfg.embed_dim, "word embedding dimension");
    tr->add_option("--ff-dim", cfg.ff_dim, "feed-forward layer size");
    tr->add_option("--lm-dim", cfg.lm_dim, "LM projection size");
    tr->add_option("--vocab-cap", cfg.vocab_cap, "vocabulary size cap");
    tr->add_option("--tbptt", cfg.tbptt_window, "truncated BPTT window");
    tr->add_option("--embeddings", tr_emb, "pretrained embedding file");
    tr->add_option("--out", tr_out, "checkpoint output path");

    // eval
    auto* ev = app.add_subcommand("eval", "evaluate a model on an annotated corpus");
    std::string ev_model, ev_corpus;
    bool ev_inc = false;
    ev->add_option("model", ev_model, "checkpoint path")->required();
    ev->add_option("corpus", ev_corpus, "evaluation corpus")->required();
    ev->add_flag("--incremental", ev_inc, "replay incrementally; adds EO and FTD");

    // tag
    auto* tg = app.add_subcommand("tag", "tag a token stream from standard input");
    std::string tg_model;
    bool tg_timing = false;
    tg->add_option("model", tg_model, "checkpoint path")->required();
    tg->add_flag("--timing", tg_timing, "read token<TAB>durationMs lines");

    // inspect
    auto* in = app.add_subcommand("inspect", "print checkpoint configuration");
    std::string in_model;
    in->add_option("model", in_model, "checkpoint path")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    try {
        if (gen->parsed()) return run_gen(gen_config, gen_out, gen_seed, gen_n);
        if (tr->parsed()) return run_train(tr_corpus, tr_dev, tr_tasks, tr_loss, tr_alpha, cfg,
                                           tr_emb, tr_out);
        if (ev->parsed()) return run_eval(ev_model, ev_corpus, ev_inc);
        if (tg->parsed()) return run_tag(tg_model, tg_timing);
        if (in->parsed()) return run_inspect(in_model);
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}
