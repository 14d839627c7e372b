#pragma once

#include <string>
#include <vector>

#include "incdisf/errors.hpp"

namespace incdisf {

enum class RepairKind { Rep, Sub, Del };

std::string repair_kind_name(RepairKind k);

// Incremental disfluency tag. The onset tag rpS-N marks a repair whose
// reparandum starts N raw words back (edit words included in the count);
// the end tag carries the repair type. One-word repairs combine both into
// rpSn{Rep,Sub,Del}-N, and delete repairs place the combined tag on the
// first word after the reparandum+interregnum.
struct DisfTag {
    enum class Kind { Fluent, Edit, Onset, End, OnsetEnd };

    Kind kind = Kind::Fluent;
    RepairKind repair = RepairKind::Rep;  // End, OnsetEnd
    int reparandum_len = 0;               // Onset, OnsetEnd; in [1, 10]

    static DisfTag fluent() { return {}; }
    static DisfTag edit() { return {Kind::Edit, RepairKind::Rep, 0}; }
    static DisfTag onset(int n) { return {Kind::Onset, RepairKind::Rep, n}; }
    static DisfTag end(RepairKind k) { return {Kind::End, k, 0}; }
    static DisfTag onset_end(RepairKind k, int n) { return {Kind::OnsetEnd, k, n}; }

    bool is_onset() const { return kind == Kind::Onset || kind == Kind::OnsetEnd; }
    bool is_edit() const { return kind == Kind::Edit; }

    bool operator==(const DisfTag&) const = default;
};

// Four-way BIES-style utterance tag: .w. / .w- / -w. / -w-
struct UttTag {
    bool starts = false;  // '.' prefix: begins a new utterance
    bool ends = false;    // '.' suffix: current word completes the utterance

    bool operator==(const UttTag&) const = default;
};

// Reparandum-interregnum-repair annotation over dialogue token indices.
// The interregnum occupies (reparandum_end, interregnum_end]; when empty,
// interregnum_end == reparandum_end. The repair phase occupies
// (interregnum_end, repair_end]; deletes have repair_end == interregnum_end.
struct RepairSpan {
    int reparandum_start = 0;
    int reparandum_end = 0;
    int interregnum_end = 0;
    int repair_end = 0;
    RepairKind kind = RepairKind::Rep;

    int repair_start() const { return interregnum_end + 1; }
    bool has_repair_phase() const { return repair_end > interregnum_end; }
    int onset_word() const { return interregnum_end + 1; }  // tag site for all kinds
    int reparandum_raw_len() const { return onset_word() - reparandum_start; }

    bool operator==(const RepairSpan&) const = default;
};

struct EditSpan {
    int start = 0;
    int end = 0;

    bool operator==(const EditSpan&) const = default;
};

struct DisfAnnotation {
    std::vector<RepairSpan> repairs;
    std::vector<EditSpan> edits;

    bool operator==(const DisfAnnotation&) const = default;
};

inline constexpr int kMaxReparandumLen = 10;

// String codec, bijective on the finite alphabet.
std::string to_string(const DisfTag& t);
std::string to_string(const UttTag& t);
DisfTag parse_disf_tag(const std::string& s);
UttTag parse_utt_tag(const std::string& s);

// All valid disfluency tag strings (f, e, onsets, ends, combined), in a
// fixed canonical order; the four utterance tags likewise.
std::vector<std::string> full_disf_alphabet();
std::vector<std::string> full_utt_alphabet();

struct EncodeResult {
    std::vector<DisfTag> tags;
    bool clipped = false;  // some reparandum length exceeded the cap
};

EncodeResult encode_disfluency(const DisfAnnotation& ann, int length);
DisfAnnotation decode_disfluency(const std::vector<DisfTag>& tags);

std::vector<UttTag> encode_uttseg(const std::vector<int>& boundaries, int length);
std::vector<int> decode_uttseg(const std::vector<UttTag>& tags);

// Repeat if the repair phase verbatim-matches the reparandum, delete if the
// repair phase is empty, substitution otherwise.
RepairKind classify_repair(const RepairSpan& span, const std::vector<std::string>& tokens);

// Throws MalformedTags on ill-formed sequences.
void validate_disf_sequence(const std::vector<DisfTag>& tags);
void validate_utt_sequence(const std::vector<UttTag>& tags);

}  // namespace incdisf
