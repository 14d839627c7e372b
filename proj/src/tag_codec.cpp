#include "incdisf/tag_codec.hpp"

#include <algorithm>

namespace incdisf {

std::string repair_kind_name(RepairKind k) {
    switch (k) {
        case RepairKind::Rep: return "Rep";
        case RepairKind::Sub: return "Sub";
        case RepairKind::Del: return "Del";
    }
    return "?";
}

std::string to_string(const DisfTag& t) {
    switch (t.kind) {
        case DisfTag::Kind::Fluent: return "f";
        case DisfTag::Kind::Edit: return "e";
        case DisfTag::Kind::Onset: return "rpS-" + std::to_string(t.reparandum_len);
        case DisfTag::Kind::End: return "rpn" + repair_kind_name(t.repair);
        case DisfTag::Kind::OnsetEnd:
            return "rpSn" + repair_kind_name(t.repair) + "-" + std::to_string(t.reparandum_len);
    }
    return "?";
}

std::string to_string(const UttTag& t) {
    std::string s;
    s += t.starts ? '.' : '-';
    s += 'w';
    s += t.ends ? '.' : '-';
    return s;
}

namespace {

bool parse_kind(const std::string& s, RepairKind& out) {
    if (s == "Rep") out = RepairKind::Rep;
    else if (s == "Sub") out = RepairKind::Sub;
    else if (s == "Del") out = RepairKind::Del;
    else return false;
    return true;
}

bool parse_len(const std::string& s, int& out) {
    if (s.empty() || s.size() > 2) return false;
    for (char c : s)
        if (c < '0' || c > '9') return false;
    out = std::stoi(s);
    return out >= 1 && out <= kMaxReparandumLen;
}

}  // namespace

DisfTag parse_disf_tag(const std::string& s) {
    if (s == "f") return DisfTag::fluent();
    if (s == "e") return DisfTag::edit();
    if (s.rfind("rpS-", 0) == 0) {
        int n;
        if (parse_len(s.substr(4), n)) return DisfTag::onset(n);
    } else if (s.rfind("rpSn", 0) == 0) {
        auto dash = s.find('-', 4);
        if (dash != std::string::npos) {
            RepairKind k;
            int n;
            if (parse_kind(s.substr(4, dash - 4), k) && parse_len(s.substr(dash + 1), n))
                return DisfTag::onset_end(k, n);
        }
    } else if (s.rfind("rpn", 0) == 0) {
        RepairKind k;
        if (parse_kind(s.substr(3), k)) return DisfTag::end(k);
    }
    throw ParseError("unknown disfluency tag: '" + s + "'");
}

UttTag parse_utt_tag(const std::string& s) {
    if (s.size() == 3 && s[1] == 'w' && (s[0] == '.' || s[0] == '-') &&
        (s[2] == '.' || s[2] == '-'))
        return UttTag{s[0] == '.', s[2] == '.'};
    throw ParseError("unknown utterance tag: '" + s + "'");
}

std::vector<std::string> full_disf_alphabet() {
    std::vector<std::string> out = {"f", "e"};
    for (int n = 1; n <= kMaxReparandumLen; ++n) out.push_back("rpS-" + std::to_string(n));
    for (const char* k : {"Rep", "Sub", "Del"}) out.push_back(std::string("rpn") + k);
    for (const char* k : {"Rep", "Sub", "Del"})
        for (int n = 1; n <= kMaxReparandumLen; ++n)
            out.push_back(std::string("rpSn") + k + "-" + std::to_string(n));
    return out;
}

std::vector<std::string> full_utt_alphabet() { return {".w.", ".w-", "-w.", "-w-"}; }

namespace {

// Extent of dialogue positions a repair claims, including the delete tag
// site on the first post-reparandum word.
std::pair<int, int> repair_extent(const RepairSpan& r) {
    return {r.reparandum_start, std::max(r.repair_end, r.onset_word())};
}

void check_span(const RepairSpan& r, int length) {
    if (r.reparandum_start < 0 || r.reparandum_start > r.reparandum_end ||
        r.reparandum_end > r.interregnum_end || r.interregnum_end > r.repair_end)
        throw MalformedAnnotation("repair span indices out of order");
    if (r.kind == RepairKind::Del) {
        if (r.has_repair_phase())
            throw MalformedAnnotation("delete repair must have an empty repair phase");
        if (r.onset_word() >= length)
            throw MalformedAnnotation("delete repair has no following word to carry its tag");
    } else {
        if (!r.has_repair_phase())
            throw MalformedAnnotation(repair_kind_name(r.kind) + " repair needs a repair phase");
    }
    if (repair_extent(r).second >= length)
        throw MalformedAnnotation("repair span exceeds sequence length");
}

}  // namespace

EncodeResult encode_disfluency(const DisfAnnotation& ann, int length) {
    EncodeResult res;
    res.tags.assign(length, DisfTag::fluent());

    std::vector<std::pair<int, int>> extents;
    for (const RepairSpan& r : ann.repairs) {
        check_span(r, length);
        extents.push_back(repair_extent(r));
    }
    for (const EditSpan& e : ann.edits) {
        if (e.start < 0 || e.start > e.end || e.end >= length)
            throw MalformedAnnotation("edit span out of range");
        extents.push_back({e.start, e.end});
    }
    std::sort(extents.begin(), extents.end());
    for (std::size_t i = 1; i < extents.size(); ++i)
        if (extents[i].first <= extents[i - 1].second)
            throw MalformedAnnotation("overlapping disfluency spans");

    for (const EditSpan& e : ann.edits)
        for (int i = e.start; i <= e.end; ++i) res.tags[i] = DisfTag::edit();

    for (const RepairSpan& r : ann.repairs) {
        for (int i = r.reparandum_end + 1; i <= r.interregnum_end; ++i)
            res.tags[i] = DisfTag::edit();
        int onset = r.onset_word();
        int n = r.reparandum_raw_len();
        if (n > kMaxReparandumLen) {
            n = kMaxReparandumLen;
            res.clipped = true;
        }
        if (r.kind == RepairKind::Del || r.repair_start() == r.repair_end) {
            res.tags[onset] = DisfTag::onset_end(r.kind, n);
        } else {
            res.tags[onset] = DisfTag::onset(n);
            res.tags[r.repair_end] = DisfTag::end(r.kind);
        }
    }
    return res;
}

DisfAnnotation decode_disfluency(const std::vector<DisfTag>& tags) {
    DisfAnnotation ann;
    int length = static_cast<int>(tags.size());
    // Edit positions consumed as interregna are excluded from isolated spans.
    std::vector<bool> interregnum(tags.size(), false);

    int i = 0;
    while (i < length) {
        const DisfTag& t = tags[i];
        if (t.kind == DisfTag::Kind::End)
            throw MalformedTags("repair end without preceding onset at position " +
                                std::to_string(i));
        if (t.is_onset()) {
            RepairSpan r;
            r.reparandum_start = i - t.reparandum_len;
            if (r.reparandum_start < 0)
                throw MalformedTags("rpS-" + std::to_string(t.reparandum_len) +
                                    " points before sequence start at position " +
                                    std::to_string(i));
            // Maximal edit run directly before the onset is the interregnum.
            int j = i - 1;
            while (j >= 0 && tags[j].is_edit()) --j;
            if (j < r.reparandum_start)
                throw MalformedTags("empty reparandum for onset at position " + std::to_string(i));
            r.reparandum_end = j;
            r.interregnum_end = i - 1;
            for (int k = j + 1; k < i; ++k) interregnum[k] = true;

            if (t.kind == DisfTag::Kind::OnsetEnd) {
                r.kind = t.repair;
                r.repair_end = (t.repair == RepairKind::Del) ? r.interregnum_end : i;
                ++i;
            } else {
                // Scan for the matching end tag.
                int end = -1;
                for (int k = i + 1; k < length; ++k) {
                    if (tags[k].is_onset())
                        throw MalformedTags("nested onset before repair end at position " +
                                            std::to_string(k));
                    if (tags[k].kind == DisfTag::Kind::End) {
                        end = k;
                        r.kind = tags[k].repair;
                        break;
                    }
                }
                if (end < 0)
                    throw MalformedTags("onset at position " + std::to_string(i) +
                                        " has no repair end");
                r.repair_end = end;
                i = end + 1;
            }
            ann.repairs.push_back(r);
        } else {
            ++i;
        }
    }

    for (int k = 0; k < length; ++k) {
        if (tags[k].is_edit() && !interregnum[k]) {
            int start = k;
            while (k + 1 < length && tags[k + 1].is_edit() && !interregnum[k + 1]) ++k;
            ann.edits.push_back(EditSpan{start, k});
        }
    }
    return ann;
}

std::vector<UttTag> encode_uttseg(const std::vector<int>& boundaries, int length) {
    if (length == 0) {
        if (!boundaries.empty()) throw MalformedAnnotation("boundaries on empty sequence");
        return {};
    }
    if (boundaries.empty() || boundaries.back() != length - 1)
        throw MalformedAnnotation("last boundary must close the sequence");
    for (std::size_t i = 0; i < boundaries.size(); ++i) {
        if (boundaries[i] < 0 || boundaries[i] >= length)
            throw MalformedAnnotation("boundary index out of range");
        if (i > 0 && boundaries[i] <= boundaries[i - 1])
            throw MalformedAnnotation("boundaries must be strictly increasing");
    }
    std::vector<UttTag> tags(length);
    std::vector<bool> is_end(length, false);
    for (int b : boundaries) is_end[b] = true;
    for (int i = 0; i < length; ++i) {
        tags[i].starts = (i == 0) || is_end[i - 1];
        tags[i].ends = is_end[i];
    }
    return tags;
}

std::vector<int> decode_uttseg(const std::vector<UttTag>& tags) {
    validate_utt_sequence(tags);
    std::vector<int> out;
    for (std::size_t i = 0; i < tags.size(); ++i)
        if (tags[i].ends) out.push_back(static_cast<int>(i));
    return out;
}

RepairKind classify_repair(const RepairSpan& span, const std::vector<std::string>& tokens) {
    if (!span.has_repair_phase()) return RepairKind::Del;
    int rep_len = span.reparandum_end - span.reparandum_start + 1;
    int fix_len = span.repair_end - span.repair_start() + 1;
    if (rep_len == fix_len) {
        bool same = true;
        for (int i = 0; i < rep_len; ++i)
            if (tokens[span.reparandum_start + i] != tokens[span.repair_start() + i]) {
                same = false;
                break;
            }
        if (same) return RepairKind::Rep;
    }
    return RepairKind::Sub;
}

void validate_disf_sequence(const std::vector<DisfTag>& tags) {
    decode_disfluency(tags);  // throws on malformed input
}

void validate_utt_sequence(const std::vector<UttTag>& tags) {
    for (std::size_t i = 0; i < tags.size(); ++i) {
        bool should_start = (i == 0) || tags[i - 1].ends;
        if (tags[i].starts != should_start)
            throw MalformedTags("utterance tag prefix inconsistent at position " +
                                std::to_string(i));
    }
    if (!tags.empty() && !tags.back().ends)
        throw MalformedTags("last utterance tag must carry the end suffix");
}

}  // namespace incdisf
