#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "incdisf/rng.hpp"
#include "incdisf/tag_codec.hpp"

using namespace incdisf;

namespace {

std::vector<std::string> tag_strings(const std::vector<DisfTag>& tags) {
    std::vector<std::string> out;
    for (const auto& t : tags) out.push_back(to_string(t));
    return out;
}

}  // namespace

TEST_CASE("tag string codec is a bijection on the full alphabets") {
    auto disf = full_disf_alphabet();
    CHECK(disf.size() == 45);  // f, e, 10 onsets, 3 ends, 30 combined
    for (const auto& s : disf) CHECK(to_string(parse_disf_tag(s)) == s);

    auto utt = full_utt_alphabet();
    CHECK(utt.size() == 4);
    for (const auto& s : utt) CHECK(to_string(parse_utt_tag(s)) == s);
}

TEST_CASE("specific tag string forms") {
    CHECK(to_string(DisfTag::fluent()) == "f");
    CHECK(to_string(DisfTag::edit()) == "e");
    CHECK(to_string(DisfTag::onset(5)) == "rpS-5");
    CHECK(to_string(DisfTag::end(RepairKind::Rep)) == "rpnRep");
    CHECK(to_string(DisfTag::end(RepairKind::Sub)) == "rpnSub");
    CHECK(to_string(DisfTag::end(RepairKind::Del)) == "rpnDel");
    CHECK(to_string(DisfTag::onset_end(RepairKind::Rep, 1)) == "rpSnRep-1");
    CHECK(to_string(DisfTag::onset_end(RepairKind::Del, 3)) == "rpSnDel-3");
    CHECK(to_string(UttTag{true, true}) == ".w.");
    CHECK(to_string(UttTag{true, false}) == ".w-");
    CHECK(to_string(UttTag{false, true}) == "-w.");
    CHECK(to_string(UttTag{false, false}) == "-w-");
}

TEST_CASE("malformed tag strings are rejected") {
    for (const char* s : {"", "g", "rpS", "rpS-", "rpS-0", "rpS-11", "rpS--1", "rpnFoo",
                          "rpSnRep", "rpSnRep-0", "rpSnRep-11", "F", " f", "f "})
        CHECK_THROWS_AS(parse_disf_tag(s), ParseError);
    for (const char* s : {"", "w", ".w", "w.", "-w", ".-w.", "ww"})
        CHECK_THROWS_AS(parse_utt_tag(s), ParseError);
}

TEST_CASE("flight-to-Boston example encodes to the published tag rows") {
    // "A uh flight to Boston uh I mean to Denver on Friday" + "Thank you":
    // substitution with reparandum "to Boston" (3..4), interregnum
    // "uh I mean" (5..7), repair "to Denver" (8..9); isolated edit "uh" at 1.
    DisfAnnotation ann;
    ann.edits.push_back({1, 1});
    ann.repairs.push_back({3, 4, 7, 9, RepairKind::Sub});

    auto enc = encode_disfluency(ann, 14);
    CHECK_FALSE(enc.clipped);
    CHECK(tag_strings(enc.tags) ==
          std::vector<std::string>{"f", "e", "f", "f", "f", "e", "e", "e", "rpS-5", "rpnSub",
                                   "f", "f", "f", "f"});

    auto utt = encode_uttseg({11, 13}, 14);
    std::vector<std::string> utt_strs;
    for (const auto& t : utt) utt_strs.push_back(to_string(t));
    CHECK(utt_strs == std::vector<std::string>{".w-", "-w-", "-w-", "-w-", "-w-", "-w-", "-w-",
                                               "-w-", "-w-", "-w-", "-w-", "-w.", ".w-", "-w."});

    // Both schemes round-trip to the same structure.
    CHECK(decode_disfluency(enc.tags) == ann);
    CHECK(decode_uttseg(utt) == std::vector<int>{11, 13});
}

TEST_CASE("onset distance counts raw words including edit words") {
    // Reparandum length 2 plus a 3-word interregnum: the onset sits 5 back.
    DisfAnnotation ann;
    ann.repairs.push_back({3, 4, 7, 9, RepairKind::Sub});
    auto enc = encode_disfluency(ann, 14);
    CHECK(enc.tags[8] == DisfTag::onset(5));
}

TEST_CASE("one-word repeat uses the combined tag") {
    // "the the": reparandum {0}, no interregnum, repair {1}.
    DisfAnnotation ann;
    ann.repairs.push_back({0, 0, 0, 1, RepairKind::Rep});
    auto enc = encode_disfluency(ann, 3);
    CHECK(tag_strings(enc.tags) == std::vector<std::string>{"f", "rpSnRep-1", "f"});
    CHECK(decode_disfluency(enc.tags) == ann);
}

TEST_CASE("delete tag lands on the first word after reparandum and interregnum") {
    // Reparandum {1,2}, interregnum {3}, empty repair phase: tag site is 4.
    DisfAnnotation ann;
    ann.repairs.push_back({1, 2, 3, 3, RepairKind::Del});
    auto enc = encode_disfluency(ann, 6);
    CHECK(tag_strings(enc.tags) ==
          std::vector<std::string>{"f", "f", "f", "e", "rpSnDel-3", "f"});
    CHECK(decode_disfluency(enc.tags) == ann);
}

TEST_CASE("multi-word repair with interregnum round-trips") {
    DisfAnnotation ann;
    ann.repairs.push_back({2, 3, 4, 6, RepairKind::Rep});
    auto enc = encode_disfluency(ann, 8);
    CHECK(tag_strings(enc.tags) ==
          std::vector<std::string>{"f", "f", "f", "f", "e", "rpS-3", "rpnRep", "f"});
    CHECK(decode_disfluency(enc.tags) == ann);
}

TEST_CASE("reparandum lengths above the cap clip to 10 and set the flag") {
    DisfAnnotation ann;
    ann.repairs.push_back({0, 11, 11, 13, RepairKind::Sub});  // raw distance 12
    auto enc = encode_disfluency(ann, 15);
    CHECK(enc.clipped);
    CHECK(enc.tags[12] == DisfTag::onset(10));
}

TEST_CASE("encode rejects malformed annotations") {
    SUBCASE("overlapping spans") {
        DisfAnnotation ann;
        ann.repairs.push_back({0, 1, 1, 3, RepairKind::Rep});
        ann.edits.push_back({2, 2});
        CHECK_THROWS_AS(encode_disfluency(ann, 6), MalformedAnnotation);
    }
    SUBCASE("span out of range") {
        DisfAnnotation ann;
        ann.repairs.push_back({0, 1, 1, 5, RepairKind::Rep});
        CHECK_THROWS_AS(encode_disfluency(ann, 4), MalformedAnnotation);
    }
    SUBCASE("delete with a non-empty repair phase") {
        DisfAnnotation ann;
        ann.repairs.push_back({0, 0, 0, 1, RepairKind::Del});
        CHECK_THROWS_AS(encode_disfluency(ann, 3), MalformedAnnotation);
    }
    SUBCASE("non-delete without a repair phase") {
        DisfAnnotation ann;
        ann.repairs.push_back({0, 1, 1, 1, RepairKind::Rep});
        CHECK_THROWS_AS(encode_disfluency(ann, 3), MalformedAnnotation);
    }
    SUBCASE("edit tag colliding with a delete tag site") {
        DisfAnnotation ann;
        ann.repairs.push_back({0, 0, 0, 0, RepairKind::Del});
        ann.edits.push_back({1, 1});
        CHECK_THROWS_AS(encode_disfluency(ann, 3), MalformedAnnotation);
    }
}

TEST_CASE("decode rejects malformed tag sequences") {
    auto seq = [](std::initializer_list<const char*> ss) {
        std::vector<DisfTag> out;
        for (const char* s : ss) out.push_back(parse_disf_tag(s));
        return out;
    };
    // Onset reaching before the sequence start.
    CHECK_THROWS_AS(decode_disfluency(seq({"f", "rpS-3", "rpnRep"})), MalformedTags);
    // End without a preceding onset.
    CHECK_THROWS_AS(decode_disfluency(seq({"f", "rpnRep", "f"})), MalformedTags);
    // Onset never closed.
    CHECK_THROWS_AS(decode_disfluency(seq({"f", "rpS-1", "f"})), MalformedTags);
    // Nested onset before the open repair ends.
    CHECK_THROWS_AS(decode_disfluency(seq({"f", "rpS-1", "rpS-1", "rpnRep"})), MalformedTags);
    // Well-formed control.
    CHECK_NOTHROW(decode_disfluency(seq({"f", "rpS-1", "rpnRep", "f"})));
}

TEST_CASE("utterance codec basics") {
    CHECK(decode_uttseg(encode_uttseg({0}, 1)) == std::vector<int>{0});
    CHECK(decode_uttseg(encode_uttseg({2, 5}, 6)) == std::vector<int>{2, 5});
    CHECK(encode_uttseg({}, 0).empty());
    CHECK_THROWS_AS(encode_uttseg({1, 3}, 5), MalformedAnnotation);  // must close sequence
    CHECK_THROWS_AS(encode_uttseg({3, 1, 4}, 5), MalformedAnnotation);
    auto bad = encode_uttseg({2, 4}, 5);
    bad[4].ends = false;
    CHECK_THROWS_AS(validate_utt_sequence(bad), MalformedTags);
}

TEST_CASE("classify_repair distinguishes repeat, substitution, delete") {
    std::vector<std::string> toks = {"the", "the", "cat", "a", "uh", "dog", "x"};
    CHECK(classify_repair({0, 0, 0, 1, RepairKind::Rep}, toks) == RepairKind::Rep);
    CHECK(classify_repair({3, 3, 4, 5, RepairKind::Sub}, toks) == RepairKind::Sub);
    CHECK(classify_repair({3, 3, 4, 4, RepairKind::Del}, toks) == RepairKind::Del);
}

TEST_CASE("encoding a prefix of an annotation matches the prefix of the encoding") {
    // Tags at positions before any structure that ends later are stable.
    DisfAnnotation ann;
    ann.edits.push_back({1, 1});
    ann.repairs.push_back({3, 4, 7, 9, RepairKind::Sub});
    auto full = encode_disfluency(ann, 14).tags;
    // Prefix of length 3 contains only the edit.
    DisfAnnotation pre;
    pre.edits.push_back({1, 1});
    auto short_enc = encode_disfluency(pre, 3).tags;
    for (int i = 0; i < 3; ++i) CHECK(short_enc[i] == full[i]);
}

TEST_CASE("random annotations round-trip") {
    Rng rng(20240817);
    for (int trial = 0; trial < 2000; ++trial) {
        int len = 8 + static_cast<int>(rng.uniform_int(20));
        DisfAnnotation ann;
        int cursor = 1 + static_cast<int>(rng.uniform_int(3));
        while (cursor + 4 < len) {
            double kind = rng.uniform();
            if (kind < 0.3) {  // edit run
                int e = 1 + static_cast<int>(rng.uniform_int(2));
                if (cursor + e >= len) break;
                ann.edits.push_back({cursor, cursor + e - 1});
                cursor += e + 1;
            } else if (kind < 0.6) {  // repeat/sub with repair phase
                int rep = 1 + static_cast<int>(rng.uniform_int(3));
                int inter = static_cast<int>(rng.uniform_int(2));
                int repair = 1 + static_cast<int>(rng.uniform_int(3));
                int end = cursor + rep + inter + repair - 1;
                if (end + 1 >= len) break;
                RepairSpan r;
                r.reparandum_start = cursor;
                r.reparandum_end = cursor + rep - 1;
                r.interregnum_end = r.reparandum_end + inter;
                r.repair_end = end;
                r.kind = rng.uniform() < 0.5 ? RepairKind::Rep : RepairKind::Sub;
                ann.repairs.push_back(r);
                cursor = end + 2;
            } else if (kind < 0.7) {  // delete
                int rep = 1 + static_cast<int>(rng.uniform_int(2));
                int inter = static_cast<int>(rng.uniform_int(2));
                int site = cursor + rep + inter;
                if (site + 1 >= len) break;
                RepairSpan r;
                r.reparandum_start = cursor;
                r.reparandum_end = cursor + rep - 1;
                r.interregnum_end = r.reparandum_end + inter;
                r.repair_end = r.interregnum_end;
                r.kind = RepairKind::Del;
                ann.repairs.push_back(r);
                cursor = site + 2;  // skip the tag site plus a fluent gap
            } else {
                cursor += 1 + static_cast<int>(rng.uniform_int(3));
            }
        }
        auto enc = encode_disfluency(ann, len);
        if (enc.clipped) continue;
        CHECK(decode_disfluency(enc.tags) == ann);

        // Utterance tags too.
        std::vector<int> bounds;
        int b = static_cast<int>(rng.uniform_int(4));
        while (b < len - 1) {
            bounds.push_back(b);
            b += 1 + static_cast<int>(rng.uniform_int(5));
        }
        bounds.push_back(len - 1);
        CHECK(decode_uttseg(encode_uttseg(bounds, len)) == bounds);
    }
}
