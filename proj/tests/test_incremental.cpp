#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sstream>

#include "incdisf/incremental.hpp"
#include "incdisf/synth.hpp"

using namespace incdisf;

namespace {

std::vector<Dialogue> small_synth(std::uint64_t seed, int n) {
    GenConfig g;
    g.seed = seed;
    g.num_dialogues = n;
    g.min_utterances = 2;
    g.max_utterances = 4;
    g.repeat_rate = 0.15;
    return generate(g);
}

TaggerModel small_model(const std::vector<Dialogue>& corpus, const char* tasks, int epochs) {
    TrainConfig cfg;
    cfg.seed = 3;
    cfg.hidden = 16;
    cfg.embed_dim = 10;
    cfg.ff_dim = 10;
    cfg.lm_dim = 10;
    cfg.max_epochs = epochs;
    cfg.patience = epochs;
    return train(corpus, corpus, TaskSet::parse(tasks), LossMode::naive(), cfg).model;
}

}  // namespace

TEST_CASE("edit overhead on hand-constructed logs") {
    SUBCASE("revision-free log scores 0") {
        TaskLog log = {{"f"}, {"f", "f"}, {"f", "f", "e"}};
        CHECK(edit_overhead(log) == 0.0);
    }
    SUBCASE("single-word log scores 0") {
        TaskLog log = {{"f"}};
        CHECK(edit_overhead(log) == 0.0);
    }
    SUBCASE("3 words, one earlier label changed once: 2 / (2 + 3) = 0.4") {
        TaskLog log = {{"f"}, {"e", "f"}, {"e", "f", "f"}};
        CHECK(edit_overhead(log) == doctest::Approx(0.4).epsilon(1e-12));
    }
    SUBCASE("two revisions at one step") {
        // prefix 3 rewrites both earlier labels: necessary 3, unnecessary 4.
        TaskLog log = {{"a"}, {"a", "a"}, {"b", "b", "a"}};
        CHECK(edit_overhead(log) == doctest::Approx(4.0 / 7.0).epsilon(1e-12));
    }
    SUBCASE("empty log rejected") {
        CHECK_THROWS_AS(edit_overhead(TaskLog{}), UsageError);
    }
}

TEST_CASE("first time to detection on hand-constructed logs") {
    SUBCASE("detected on the onset word itself scores 0") {
        TaskLog log = {{"f"}, {"f", "rpS-1"}, {"f", "rpS-1", "f"}};
        FtdResult r = first_time_to_detection(log, {1});
        CHECK(r.detected == 1);
        CHECK(r.missed == 0);
        CHECK(r.mean_ftd == 0.0);
    }
    SUBCASE("first labeled two words later scores 2") {
        TaskLog log = {{"f"}, {"f", "f"}, {"f", "f", "f"}, {"f", "rpS-1", "f", "f"}};
        FtdResult r = first_time_to_detection(log, {1});
        CHECK(r.detected == 1);
        CHECK(r.mean_ftd == doctest::Approx(2.0));
    }
    SUBCASE("never detected counts as missed") {
        TaskLog log = {{"f"}, {"f", "f"}, {"f", "f", "f"}};
        FtdResult r = first_time_to_detection(log, {1});
        CHECK(r.detected == 0);
        CHECK(r.missed == 1);
        CHECK(r.mean_ftd == 0.0);
    }
    SUBCASE("no gold onsets: 0 detected, 0 missed") {
        TaskLog log = {{"f"}, {"f", "f"}};
        FtdResult r = first_time_to_detection(log, {});
        CHECK(r.detected == 0);
        CHECK(r.missed == 0);
    }
    SUBCASE("mean over mixed detections") {
        TaskLog log = {{"rpSnRep-1"},
                       {"rpSnRep-1", "f"},
                       {"rpSnRep-1", "f", "f"},
                       {"rpSnRep-1", "f", "rpS-2", "f"}};
        FtdResult r = first_time_to_detection(log, {0, 2});
        CHECK(r.detected == 2);
        CHECK(r.mean_ftd == doctest::Approx(0.5));  // 0 and 1
    }
    SUBCASE("combined onset tags count as detections") {
        CHECK(is_onset_label("rpS-3"));
        CHECK(is_onset_label("rpSnDel-2"));
        CHECK_FALSE(is_onset_label("rpnRep"));
        CHECK_FALSE(is_onset_label("f"));
    }
}

TEST_CASE("gold onset positions") {
    std::vector<DisfTag> tags = {DisfTag::fluent(), DisfTag::onset(1),
                                 DisfTag::end(RepairKind::Rep),
                                 DisfTag::onset_end(RepairKind::Sub, 2)};
    CHECK(gold_onset_positions(tags) == std::vector<int>{1, 3});
}

TEST_CASE("engine basics: per-step growth, end_stream, lm distribution") {
    auto corpus = small_synth(21, 3);
    TaggerModel model = small_model(corpus, "disf,uttseg,lm", 1);
    IncrementalTagger tagger(model);

    auto out1 = tagger.consume_word("the");
    CHECK(out1.at(Task::Disf).size() == 1);
    CHECK(out1.at(Task::UttSeg).size() == 1);
    auto out2 = tagger.consume_word("market");
    CHECK(out2.at(Task::Disf).size() == 2);
    CHECK(tagger.consumed() == 2);

    Tensor dist = tagger.next_word_distribution();
    CHECK(static_cast<int>(dist.size()) == model.vocab.size());
    double s = 0.0;
    for (double v : dist.data) s += v;
    CHECK(s == doctest::Approx(1.0).epsilon(1e-9));

    tagger.end_stream();
    CHECK_THROWS_AS(tagger.consume_word("more"), UsageError);
}

TEST_CASE("causality: shared prefixes under different futures agree") {
    auto corpus = small_synth(22, 3);
    TaggerModel model = small_model(corpus, "disf,pos", 1);
    Rng rng(2024);
    auto words = grammar_word_list();
    for (int pair = 0; pair < 100; ++pair) {
        int plen = 1 + static_cast<int>(rng.uniform_int(6));
        std::vector<std::string> prefix;
        for (int i = 0; i < plen; ++i)
            prefix.push_back(words[rng.uniform_int(words.size())]);

        IncrementalTagger a(model), b(model);
        std::map<Task, std::vector<std::string>> la, lb;
        for (const auto& w : prefix) {
            la = a.consume_word(w);
            lb = b.consume_word(w);
        }
        CHECK(la == lb);
        // Diverge the futures; the logged prefix outputs must be untouched.
        a.consume_word(words[rng.uniform_int(words.size())]);
        b.consume_word(words[rng.uniform_int(words.size())]);
        for (const auto& [task, log] : a.log()) {
            const TaskLog& other = b.log().at(task);
            for (int t = 0; t < plen; ++t) CHECK(log[t] == other[t]);
        }
    }
}

TEST_CASE("final prefix output equals predict_final exactly") {
    auto corpus = small_synth(23, 4);
    TaggerModel model = small_model(corpus, "disf,uttseg,pos", 2);
    for (const auto& d : corpus) {
        HypothesisLog log = replay_dialogue(model, d);
        FinalPrediction fin = predict_final(model, d);
        for (const auto& [task, tl] : log) {
            REQUIRE(tl.size() == d.tokens.size());
            CHECK(tl.back() == fin.labels.at(task));
        }
    }
}

TEST_CASE("hypothesis log entry t has length t+1 for every task") {
    auto corpus = small_synth(24, 1);
    TaggerModel model = small_model(corpus, "disf,uttseg", 1);
    HypothesisLog log = replay_dialogue(model, corpus[0]);
    for (const auto& [task, tl] : log)
        for (std::size_t t = 0; t < tl.size(); ++t) CHECK(tl[t].size() == t + 1);
}

TEST_CASE("timing feature flows through the engine deterministically") {
    auto corpus = small_synth(25, 2);
    TrainConfig cfg;
    cfg.seed = 3;
    cfg.hidden = 12;
    cfg.embed_dim = 8;
    cfg.ff_dim = 8;
    cfg.max_epochs = 1;
    cfg.use_timing = true;
    TaggerModel model =
        train(corpus, corpus, TaskSet::parse("disf"), LossMode::naive(), cfg).model;
    IncrementalTagger a(model), b(model);
    auto la = a.consume_word("the", 120);
    auto lb = b.consume_word("the", 120);
    CHECK(la == lb);
    // Replays match predict_final with durations used.
    HypothesisLog log = replay_dialogue(model, corpus[0]);
    CHECK(log.at(Task::Disf).back() == predict_final(model, corpus[0]).labels.at(Task::Disf));
}
