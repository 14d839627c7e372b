#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sstream>

#include "incdisf/corpus.hpp"

using namespace incdisf;

namespace {

const char* kSample =
    "# a comment\n"
    "# dialogue: d1\n"
    "the\t120\tf\t.w-\tDT\n"
    "the\t-\trpSnRep-1\t-w-\tDT\n"
    "cat\t90\tf\t-w.\tNN\n"
    "\n"
    "# dialogue: d2\n"
    "hi\t-\tf\t.w.\tUH\n"
    "\n";

}  // namespace

TEST_CASE("load_corpus parses dialogues, durations, and tags") {
    std::istringstream in(kSample);
    auto ds = load_corpus(in);
    REQUIRE(ds.size() == 2);
    CHECK(ds[0].id == "d1");
    REQUIRE(ds[0].tokens.size() == 3);
    CHECK(ds[0].tokens[0].token == "the");
    CHECK(ds[0].tokens[0].duration_ms == 120);
    CHECK_FALSE(ds[0].tokens[1].duration_ms.has_value());
    CHECK(ds[0].tokens[1].disf_tag == DisfTag::onset_end(RepairKind::Rep, 1));
    CHECK(ds[0].tokens[2].utt_tag == UttTag{false, true});
    CHECK(ds[0].tokens[2].pos_tag == "NN");
    CHECK(ds[1].id == "d2");
    CHECK(ds[1].tokens.size() == 1);
}

TEST_CASE("write then load is the identity; bytes are canonical") {
    std::istringstream in(kSample);
    auto ds = load_corpus(in);
    std::ostringstream out1;
    write_corpus(out1, ds);
    std::istringstream in2(out1.str());
    auto ds2 = load_corpus(in2);
    REQUIRE(ds2.size() == ds.size());
    std::ostringstream out2;
    write_corpus(out2, ds2);
    CHECK(out1.str() == out2.str());  // byte-identical after a round trip
    for (std::size_t i = 0; i < ds.size(); ++i) {
        CHECK(ds2[i].id == ds[i].id);
        REQUIRE(ds2[i].tokens.size() == ds[i].tokens.size());
        for (std::size_t j = 0; j < ds[i].tokens.size(); ++j) {
            CHECK(ds2[i].tokens[j].token == ds[i].tokens[j].token);
            CHECK(ds2[i].tokens[j].duration_ms == ds[i].tokens[j].duration_ms);
            CHECK(ds2[i].tokens[j].disf_tag == ds[i].tokens[j].disf_tag);
            CHECK(ds2[i].tokens[j].utt_tag == ds[i].tokens[j].utt_tag);
            CHECK(ds2[i].tokens[j].pos_tag == ds[i].tokens[j].pos_tag);
        }
    }
}

TEST_CASE("parse errors carry line numbers") {
    SUBCASE("wrong column count") {
        std::istringstream in("# dialogue: d\nthe\t1\tf\t.w.\n\n");
        try {
            load_corpus(in);
            FAIL("expected ParseError");
        } catch (const ParseError& e) {
            CHECK(std::string(e.what()).find("line 2") != std::string::npos);
        }
    }
    SUBCASE("token line outside a dialogue") {
        std::istringstream in("the\t1\tf\t.w.\tDT\n");
        CHECK_THROWS_AS(load_corpus(in), ParseError);
    }
    SUBCASE("bad duration") {
        std::istringstream in("# dialogue: d\nthe\tabc\tf\t.w.\tDT\n\n");
        CHECK_THROWS_AS(load_corpus(in), ParseError);
    }
    SUBCASE("bad tag") {
        std::istringstream in("# dialogue: d\nthe\t-\tq\t.w.\tDT\n\n");
        CHECK_THROWS_AS(load_corpus(in), ParseError);
    }
    SUBCASE("malformed tag sequence fails validation") {
        std::istringstream in("# dialogue: d\nthe\t-\trpS-1\t.w.\tDT\n\n");
        CHECK_THROWS_AS(load_corpus(in), ParseError);
    }
}

TEST_CASE("vocabulary: frequency order, lexicographic ties, UNK at 0") {
    std::istringstream in(
        "# dialogue: d\n"
        "b\t-\tf\t.w-\tX\n"
        "a\t-\tf\t-w-\tX\n"
        "c\t-\tf\t-w-\tX\n"
        "c\t-\tf\t-w-\tX\n"
        "a\t-\tf\t-w.\tX\n"
        "\n");
    auto ds = load_corpus(in);
    auto v = build_vocab(ds, 7000);
    REQUIRE(v.size() == 4);
    CHECK(v.id_to_word[0] == kUnkToken);
    CHECK(v.id_to_word[1] == "a");  // count 2, ties with c, "a" < "c"
    CHECK(v.id_to_word[2] == "c");
    CHECK(v.id_to_word[3] == "b");
    CHECK(v.id_of("a") == 1);
    CHECK(v.id_of("zzz") == v.unk_id);

    auto capped = build_vocab(ds, 2);
    CHECK(capped.size() == 3);  // UNK + 2 kept words
    CHECK(capped.id_of("b") == capped.unk_id);
}

TEST_CASE("embeddings: stream rows kept, missing rows seeded, dim enforced") {
    std::istringstream cin(
        "# dialogue: d\n"
        "a\t-\tf\t.w-\tX\n"
        "b\t-\tf\t-w.\tX\n"
        "\n");
    auto ds = load_corpus(cin);
    auto v = build_vocab(ds, 10);

    std::istringstream ein("a 1.0 2.0 3.0\nzz 9 9 9\n");
    auto emb = load_embeddings(ein, v, 3, 5);
    CHECK(emb.dim == 3);
    CHECK(emb.matrix.rows() == v.size());
    int a = v.id_of("a");
    CHECK(emb.matrix.at(a, 0) == 1.0);
    CHECK(emb.matrix.at(a, 2) == 3.0);
    CHECK(emb.random_rows == 2);  // UNK and "b"
    int b = v.id_of("b");
    for (int j = 0; j < 3; ++j) {
        CHECK(emb.matrix.at(b, j) >= -0.05);
        CHECK(emb.matrix.at(b, j) <= 0.05);
    }

    std::istringstream bad("a 1.0 2.0\n");
    CHECK_THROWS_AS(load_embeddings(bad, v, 3, 5), FormatError);

    // Random init is seed-deterministic.
    auto r1 = random_embeddings(v, 4, 99);
    auto r2 = random_embeddings(v, 4, 99);
    CHECK(r1.matrix.data == r2.matrix.data);
    auto r3 = random_embeddings(v, 4, 100);
    CHECK(r1.matrix.data != r3.matrix.data);
}

TEST_CASE("featurize appends z-normalized duration only with timing on") {
    std::istringstream cin(
        "# dialogue: d\n"
        "a\t100\tf\t.w-\tX\n"
        "b\t300\tf\t-w.\tX\n"
        "\n");
    auto ds = load_corpus(cin);
    auto v = build_vocab(ds, 10);
    auto emb = random_embeddings(v, 3, 1);
    auto st = duration_stats(ds);
    CHECK(st.mean == doctest::Approx(200.0));

    auto plain = featurize(emb, v.id_of("a"), 100, false, st);
    CHECK(plain.size() == 3);
    auto timed = featurize(emb, v.id_of("a"), 100, true, st);
    REQUIRE(timed.size() == 4);
    CHECK(timed[3] == doctest::Approx((100.0 - st.mean) / st.stddev));
    auto missing = featurize(emb, v.id_of("a"), std::nullopt, true, st);
    CHECK(missing[3] == 0.0);
}
