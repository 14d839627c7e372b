#include "incdisf/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <sstream>

namespace incdisf {

namespace {

struct PosEntry {
    const char* tag;
    double duration_factor;
    std::vector<const char*> words;
};

// Small POS-tagged template grammar, ~200 word types over 12 tags.
const std::vector<PosEntry>& grammar() {
    static const std::vector<PosEntry> g = {
        {"DT", 0.5, {"the", "a", "this", "that", "each", "every"}},
        {"JJ",
         0.9,
         {"big", "small", "red", "blue", "early", "late", "cheap", "nice", "long", "short",
          "busy", "quiet", "new", "old", "fast", "slow"}},
        {"NN",
         1.0,
         {"flight", "ticket", "hotel", "meeting", "morning", "train", "car", "road", "house",
          "office", "plan", "price", "seat", "table", "phone", "report", "garden", "coffee",
          "letter", "market", "museum", "river", "school", "station", "window"}},
        {"NNS",
         1.1,
         {"flights", "tickets", "hotels", "meetings", "trains", "cars", "roads", "houses",
          "plans", "prices", "seats", "tables", "phones", "reports", "gardens", "letters",
          "markets", "schools", "stations", "windows"}},
        {"NNP",
         1.2,
         {"Boston", "Denver", "Austin", "Dallas", "Paris", "London", "Berlin", "Madrid",
          "Tokyo", "Oslo", "Monday", "Tuesday", "Wednesday", "Thursday", "Friday", "Anna",
          "Peter", "Maria", "John", "Alice"}},
        {"VBZ",
         1.0,
         {"likes", "wants", "needs", "books", "takes", "sees", "finds", "keeps", "makes",
          "gets", "leaves", "visits"}},
        {"VBP",
         0.9,
         {"like", "want", "need", "book", "take", "see", "find", "keep", "make", "get",
          "leave", "visit"}},
        {"VB", 0.8, {"go", "stay", "wait", "call", "stop", "start", "move", "look", "talk",
                     "walk"}},
        {"IN", 0.5, {"to", "from", "in", "on", "at", "near", "after", "before", "with", "by"}},
        {"PRP", 0.5, {"I", "you", "we", "they", "he", "she", "it"}},
        {"RB",
         0.9,
         {"now", "today", "soon", "later", "quickly", "often", "maybe", "really", "always",
          "here"}},
        {"CC", 0.5, {"and", "but", "or"}},
    };
    return g;
}

const std::vector<std::vector<int>>& templates() {
    // Indices into grammar(): DT=0 JJ=1 NN=2 NNS=3 NNP=4 VBZ=5 VBP=6 VB=7
    // IN=8 PRP=9 RB=10 CC=11
    static const std::vector<std::vector<int>> t = {
        {9, 6, 0, 2},           // PRP VBP DT NN
        {9, 6, 0, 1, 2},        // PRP VBP DT JJ NN
        {0, 2, 5, 0, 2},        // DT NN VBZ DT NN
        {0, 1, 2, 5, 10},       // DT JJ NN VBZ RB
        {9, 6, 3, 8, 4},        // PRP VBP NNS IN NNP
        {0, 2, 5, 8, 4},        // DT NN VBZ IN NNP
        {9, 6, 0, 2, 8, 4},     // PRP VBP DT NN IN NNP
        {4, 5, 0, 1, 2},        // NNP VBZ DT JJ NN
        {9, 6, 10},             // PRP VBP RB
        {0, 3, 6, 10},          // DT NNS VBP RB
        {9, 6, 0, 2, 11, 0, 2}, // PRP VBP DT NN CC DT NN
        {4, 5, 8, 4, 10},       // NNP VBZ IN NNP RB
        {9, 7, 10},             // PRP VB RB
        {0, 1, 3, 6, 8, 0, 2},  // DT JJ NNS VBP IN DT NN
    };
    return t;
}

struct FillerPhrase {
    std::vector<std::pair<const char*, const char*>> words;  // (token, pos)
};

const std::vector<FillerPhrase>& fillers() {
    static const std::vector<FillerPhrase> f = {
        {{{"uh", "UH"}}},
        {{{"um", "UH"}}},
        {{{"I", "PRP"}, {"mean", "VB"}}},
        {{{"you", "PRP"}, {"know", "VB"}}},
    };
    return f;
}

struct GenToken {
    std::string word;
    std::string pos;
    double duration_factor = 1.0;
    bool is_edit = false;
};

GenToken word_token(int pos_idx, Rng& rng) {
    const PosEntry& e = grammar()[pos_idx];
    const char* w = e.words[rng.uniform_int(e.words.size())];
    return {w, e.tag, e.duration_factor, false};
}

int draw_reparandum_len(const GenConfig& c, Rng& rng) {
    double u = rng.uniform();
    double acc = 0.0;
    double total = 0.0;
    for (double p : c.reparandum_length_dist) total += p;
    for (int k = 0; k < 8; ++k) {
        acc += c.reparandum_length_dist[k] / total;
        if (u < acc) return k + 1;
    }
    return 8;
}

}  // namespace

void GenConfig::validate() const {
    auto in01 = [](double p) { return p >= 0.0 && p <= 1.0; };
    if (!in01(filler_rate) || !in01(repeat_rate) || !in01(sub_rate) || !in01(del_rate))
        throw ConfigError("disfluency rates must be in [0,1]");
    if (filler_rate + repeat_rate + sub_rate + del_rate > 1.0)
        throw ConfigError("disfluency rates must sum to at most 1 per insertion point");
    if (num_dialogues < 0) throw ConfigError("numDialogues must be non-negative");
    if (min_utterances < 1 || max_utterances < min_utterances)
        throw ConfigError("bad utterance count range");
    double dist_total = 0.0;
    for (double p : reparandum_length_dist) {
        if (p < 0.0) throw ConfigError("reparandum length weights must be non-negative");
        dist_total += p;
    }
    if (dist_total <= 0.0) throw ConfigError("reparandum length distribution is empty");
    if (duration_median_ms <= 0.0 || duration_spread < 0.0)
        throw ConfigError("bad duration model");
}

std::vector<std::string> grammar_word_list() {
    std::vector<std::string> out;
    for (const PosEntry& e : grammar())
        for (const char* w : e.words) out.push_back(w);
    for (const FillerPhrase& f : fillers())
        for (const auto& [w, p] : f.words) out.push_back(w);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

namespace {

struct DialogueBuilder {
    const GenConfig& cfg;
    Rng& rng;
    std::vector<GenToken> tokens;
    DisfAnnotation ann;
    std::vector<int> boundaries;
    int last_extent_end = -1;   // global index of the last disfluent-region token
    int utt_start = 0;          // repairs never reach across utterance boundaries
    bool tag_next_as_extent = false;  // delete tag site is the next fluent word

    void emit(GenToken t) {
        tokens.push_back(std::move(t));
        if (tag_next_as_extent) {
            last_extent_end = static_cast<int>(tokens.size()) - 1;
            tag_next_as_extent = false;
        }
    }

    int emit_interregnum() {
        const FillerPhrase& f = fillers()[rng.uniform_int(fillers().size())];
        for (const auto& [w, p] : f.words) emit(GenToken{w, p, 1.0, true});
        return static_cast<int>(f.words.size());
    }

    void add_utterance() {
        const auto& tpl = templates()[rng.uniform_int(templates().size())];
        std::vector<GenToken> fluent;
        fluent.reserve(tpl.size());
        for (int pos_idx : tpl) fluent.push_back(word_token(pos_idx, rng));

        utt_start = static_cast<int>(tokens.size());
        emit(fluent[0]);
        for (std::size_t i = 1; i < fluent.size(); ++i) {
            double u = rng.uniform();
            if (u < cfg.filler_rate) {
                inject_filler();
            } else if (u < cfg.filler_rate + cfg.repeat_rate) {
                inject_repeat();
            } else if (u < cfg.filler_rate + cfg.repeat_rate + cfg.sub_rate) {
                i += inject_sub(fluent, i);
                if (i >= fluent.size()) break;
            } else if (u < cfg.filler_rate + cfg.repeat_rate + cfg.sub_rate + cfg.del_rate) {
                inject_del();
            }
            emit(fluent[i]);
        }
        boundaries.push_back(static_cast<int>(tokens.size()) - 1);
    }

    void inject_filler() {
        const FillerPhrase& f = fillers()[rng.uniform_int(fillers().size())];
        int start = static_cast<int>(tokens.size());
        for (const auto& [w, p] : f.words) emit(GenToken{w, p, 1.0, true});
        ann.edits.push_back(EditSpan{start, static_cast<int>(tokens.size()) - 1});
        last_extent_end = static_cast<int>(tokens.size()) - 1;
    }

    // Re-speak the last k emitted words verbatim.
    void inject_repeat() {
        int k = draw_reparandum_len(cfg, rng);
        int avail = std::min(static_cast<int>(tokens.size()) - 1 - last_extent_end,
                             static_cast<int>(tokens.size()) - utt_start);
        k = std::min(k, avail);
        if (k < 1) return;
        RepairSpan r;
        r.kind = RepairKind::Rep;
        r.reparandum_start = static_cast<int>(tokens.size()) - k;
        r.reparandum_end = static_cast<int>(tokens.size()) - 1;
        std::vector<GenToken> copy(tokens.end() - k, tokens.end());
        int inter = (rng.uniform() < 0.3) ? emit_interregnum() : 0;
        r.interregnum_end = r.reparandum_end + inter;
        for (GenToken& t : copy) emit(t);
        r.repair_end = static_cast<int>(tokens.size()) - 1;
        ann.repairs.push_back(r);
        last_extent_end = r.repair_end;
    }

    // Speak an altered copy of the upcoming k words, break off, and repair
    // with the real continuation fluent[i..i+k-1]. Returns how far the
    // caller's fluent cursor should advance (the repair emitted k words).
    std::size_t inject_sub(const std::vector<GenToken>& fluent, std::size_t i) {
        int k = draw_reparandum_len(cfg, rng);
        k = std::min<int>(k, static_cast<int>(fluent.size() - i));
        if (k < 1) return 0;
        RepairSpan r;
        r.kind = RepairKind::Sub;
        r.reparandum_start = static_cast<int>(tokens.size());
        for (int j = 0; j < k; ++j) {
            GenToken t = fluent[i + j];
            if (j == k - 1) {
                // Same-POS alternative for the last reparandum word.
                for (const PosEntry& e : grammar())
                    if (t.pos == e.tag) {
                        std::size_t wi = rng.uniform_int(e.words.size());
                        if (e.words[wi] == t.word && e.words.size() > 1)
                            wi = (wi + 1 + rng.uniform_int(e.words.size() - 1)) % e.words.size();
                        t.word = e.words[wi];
                        break;
                    }
            }
            emit(t);
        }
        r.reparandum_end = static_cast<int>(tokens.size()) - 1;
        int inter = (rng.uniform() < 0.7) ? emit_interregnum() : 0;
        r.interregnum_end = r.reparandum_end + inter;
        for (int j = 0; j < k; ++j) emit(fluent[i + j]);
        r.repair_end = static_cast<int>(tokens.size()) - 1;
        ann.repairs.push_back(r);
        last_extent_end = r.repair_end;
        return static_cast<std::size_t>(k);
    }

    // Abandon a freshly started phrase; the next fluent word carries the tag.
    void inject_del() {
        int k = draw_reparandum_len(cfg, rng);
        k = std::min(k, 3);  // abandoned starts are short
        const auto& tpl = templates()[rng.uniform_int(templates().size())];
        k = std::min<int>(k, static_cast<int>(tpl.size()));
        RepairSpan r;
        r.kind = RepairKind::Del;
        r.reparandum_start = static_cast<int>(tokens.size());
        for (int j = 0; j < k; ++j) emit(word_token(tpl[j], rng));
        r.reparandum_end = static_cast<int>(tokens.size()) - 1;
        int inter = (rng.uniform() < 0.5) ? emit_interregnum() : 0;
        r.interregnum_end = r.reparandum_end + inter;
        r.repair_end = r.interregnum_end;
        ann.repairs.push_back(r);
        tag_next_as_extent = true;  // extent closes at the tag site
    }
};

}  // namespace

std::vector<Dialogue> generate(const GenConfig& config) {
    config.validate();
    std::vector<Dialogue> out;
    out.reserve(config.num_dialogues);
    for (int di = 0; di < config.num_dialogues; ++di) {
        Rng rng = Rng::substream(config.seed, static_cast<std::uint64_t>(di));
        DialogueBuilder b{config, rng};
        int utts = config.min_utterances +
                   static_cast<int>(rng.uniform_int(
                       static_cast<std::uint64_t>(config.max_utterances - config.min_utterances + 1)));
        for (int u = 0; u < utts; ++u) b.add_utterance();

        int length = static_cast<int>(b.tokens.size());
        EncodeResult disf = encode_disfluency(b.ann, length);
        std::vector<UttTag> utt = encode_uttseg(b.boundaries, length);

        Dialogue d;
        {
            std::ostringstream id;
            id << "synth-" << config.seed << "-" << di;
            d.id = id.str();
        }
        d.tokens.reserve(length);
        for (int i = 0; i < length; ++i) {
            const GenToken& g = b.tokens[i];
            AnnotatedToken t;
            t.token = g.word;
            t.pos_tag = g.pos;
            t.disf_tag = disf.tags[i];
            t.utt_tag = utt[i];
            if (config.emit_durations) {
                double median = config.duration_median_ms * g.duration_factor;
                if (g.is_edit || t.disf_tag.is_edit()) median *= 1.5;
                double ms = rng.lognormal(median, config.duration_spread);
                t.duration_ms = std::max(1, static_cast<int>(std::lround(ms)));
            }
            d.tokens.push_back(std::move(t));
        }
        out.push_back(std::move(d));
    }
    return out;
}

GenConfig parse_gen_config(std::istream& in) {
    GenConfig c;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        std::size_t eq = line.find('=');
        if (eq == std::string::npos) {
            if (line.find_first_not_of(" \t\r") != std::string::npos)
                throw ConfigError("config line " + std::to_string(lineno) +
                                  ": expected 'key = value'");
            continue;
        }
        auto trim = [](std::string s) {
            std::size_t b = s.find_first_not_of(" \t\r");
            std::size_t e = s.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
        };
        std::string key = trim(line.substr(0, eq));
        std::string val = trim(line.substr(eq + 1));
        try {
            if (key == "seed") c.seed = std::stoull(val);
            else if (key == "numDialogues") c.num_dialogues = std::stoi(val);
            else if (key == "minUtterances") c.min_utterances = std::stoi(val);
            else if (key == "maxUtterances") c.max_utterances = std::stoi(val);
            else if (key == "fillerRate") c.filler_rate = std::stod(val);
            else if (key == "repeatRate") c.repeat_rate = std::stod(val);
            else if (key == "subRate") c.sub_rate = std::stod(val);
            else if (key == "delRate") c.del_rate = std::stod(val);
            else if (key == "durationMedianMs") c.duration_median_ms = std::stod(val);
            else if (key == "durationSpread") c.duration_spread = std::stod(val);
            else if (key == "emitDurations") c.emit_durations = (val == "true" || val == "1");
            else if (key == "reparandumLengthDist") {
                std::istringstream vs(val);
                for (int i = 0; i < 8; ++i)
                    if (!(vs >> c.reparandum_length_dist[i]))
                        throw ConfigError("reparandumLengthDist needs 8 weights");
            } else {
                throw ConfigError("unknown config key '" + key + "'");
            }
        } catch (const std::invalid_argument&) {
            throw ConfigError("config line " + std::to_string(lineno) + ": bad value for '" +
                              key + "'");
        }
    }
    c.validate();
    return c;
}

GenConfig parse_gen_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    return parse_gen_config(in);
}

}  // namespace incdisf
