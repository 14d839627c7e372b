#include "incdisf/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace incdisf {

std::vector<std::string> Dialogue::words() const {
    std::vector<std::string> out;
    out.reserve(tokens.size());
    for (const auto& t : tokens) out.push_back(t.token);
    return out;
}

std::vector<DisfTag> Dialogue::disf_tags() const {
    std::vector<DisfTag> out;
    out.reserve(tokens.size());
    for (const auto& t : tokens) out.push_back(t.disf_tag);
    return out;
}

std::vector<UttTag> Dialogue::utt_tags() const {
    std::vector<UttTag> out;
    out.reserve(tokens.size());
    for (const auto& t : tokens) out.push_back(t.utt_tag);
    return out;
}

namespace {

[[noreturn]] void fail(int line, const std::string& msg) {
    throw ParseError("line " + std::to_string(line) + ": " + msg);
}

void validate_dialogue(const Dialogue& d, int line) {
    try {
        validate_disf_sequence(d.disf_tags());
        validate_utt_sequence(d.utt_tags());
    } catch (const MalformedTags& e) {
        fail(line, "dialogue '" + d.id + "': " + e.what());
    }
}

}  // namespace

std::vector<Dialogue> load_corpus(std::istream& in) {
    std::vector<Dialogue> out;
    Dialogue current;
    bool open = false;
    std::string line;
    int lineno = 0;

    auto close = [&](int at) {
        if (open && !current.tokens.empty()) {
            validate_dialogue(current, at);
            out.push_back(std::move(current));
        }
        current = Dialogue{};
        open = false;
    };

    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) {
            close(lineno);
            continue;
        }
        if (line[0] == '#') {
            const std::string marker = "# dialogue:";
            if (line.rfind(marker, 0) == 0) {
                close(lineno);
                std::string id = line.substr(marker.size());
                std::size_t b = id.find_first_not_of(' ');
                current.id = (b == std::string::npos) ? "" : id.substr(b);
                open = true;
            }
            continue;
        }
        if (!open) fail(lineno, "token line outside a dialogue block");

        std::vector<std::string> cols;
        std::size_t pos = 0;
        while (true) {
            std::size_t tab = line.find('\t', pos);
            if (tab == std::string::npos) {
                cols.push_back(line.substr(pos));
                break;
            }
            cols.push_back(line.substr(pos, tab - pos));
            pos = tab + 1;
        }
        if (cols.size() != 5)
            fail(lineno, "expected 5 TAB-separated columns, got " + std::to_string(cols.size()));

        AnnotatedToken tok;
        tok.token = cols[0];
        if (tok.token.empty() || tok.token.find_first_of(" \t") != std::string::npos)
            fail(lineno, "token must be non-empty without whitespace");
        if (cols[1] != "-") {
            try {
                std::size_t used = 0;
                int d = std::stoi(cols[1], &used);
                if (used != cols[1].size() || d < 0) throw std::invalid_argument("");
                tok.duration_ms = d;
            } catch (const std::exception&) {
                fail(lineno, "bad duration '" + cols[1] + "'");
            }
        }
        try {
            tok.disf_tag = parse_disf_tag(cols[2]);
            tok.utt_tag = parse_utt_tag(cols[3]);
        } catch (const ParseError& e) {
            fail(lineno, e.what());
        }
        if (cols[4].empty()) fail(lineno, "empty POS tag");
        tok.pos_tag = cols[4];
        current.tokens.push_back(std::move(tok));
    }
    close(lineno + 1);
    return out;
}

std::vector<Dialogue> load_corpus_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open corpus file: " + path);
    return load_corpus(in);
}

void write_corpus(std::ostream& out, const std::vector<Dialogue>& dialogues) {
    for (const Dialogue& d : dialogues) {
        out << "# dialogue: " << d.id << "\n";
        for (const AnnotatedToken& t : d.tokens) {
            out << t.token << '\t';
            if (t.duration_ms) out << *t.duration_ms;
            else out << '-';
            out << '\t' << to_string(t.disf_tag) << '\t' << to_string(t.utt_tag) << '\t'
                << t.pos_tag << "\n";
        }
        out << "\n";
    }
}

void write_corpus_file(const std::string& path, const std::vector<Dialogue>& dialogues) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FormatError("cannot open output file: " + path);
    write_corpus(out, dialogues);
}

Vocabulary build_vocab(const std::vector<Dialogue>& dialogues, int cap) {
    if (cap < 1) throw ConfigError("vocabulary cap must be >= 1");
    std::map<std::string, long long> counts;
    for (const Dialogue& d : dialogues)
        for (const AnnotatedToken& t : d.tokens) ++counts[t.token];

    std::vector<std::pair<std::string, long long>> ranked(counts.begin(), counts.end());
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    if (static_cast<int>(ranked.size()) > cap) ranked.resize(cap);

    Vocabulary v;
    v.id_to_word.push_back(kUnkToken);
    v.unk_id = 0;
    for (const auto& [word, _] : ranked) {
        v.word_to_id[word] = static_cast<int>(v.id_to_word.size());
        v.id_to_word.push_back(word);
    }
    return v;
}

EmbeddingTable random_embeddings(const Vocabulary& vocab, int dim, std::uint64_t seed) {
    EmbeddingTable t;
    t.dim = dim;
    t.matrix = Tensor::zeros({vocab.size(), dim});
    Rng rng(Rng::splitmix64(seed ^ 0x656d626564ULL));
    for (std::size_t i = 0; i < t.matrix.size(); ++i)
        t.matrix.data[i] = rng.uniform(-0.05, 0.05);
    t.random_rows = vocab.size();
    return t;
}

EmbeddingTable load_embeddings(std::istream& in, const Vocabulary& vocab, int dim,
                               std::uint64_t seed) {
    EmbeddingTable t = random_embeddings(vocab, dim, seed);
    std::vector<bool> found(vocab.size(), false);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string word;
        ls >> word;
        std::vector<double> vals;
        double v;
        while (ls >> v) vals.push_back(v);
        if (static_cast<int>(vals.size()) != dim)
            throw FormatError("embedding line " + std::to_string(lineno) + ": expected " +
                              std::to_string(dim) + " values, got " +
                              std::to_string(vals.size()));
        auto it = vocab.word_to_id.find(word);
        if (it == vocab.word_to_id.end()) continue;
        for (int j = 0; j < dim; ++j) t.matrix.at(it->second, j) = vals[j];
        if (!found[it->second]) {
            found[it->second] = true;
            --t.random_rows;
        }
    }
    return t;
}

DurationStats duration_stats(const std::vector<Dialogue>& dialogues) {
    double sum = 0.0, sumsq = 0.0;
    long long n = 0;
    for (const Dialogue& d : dialogues)
        for (const AnnotatedToken& t : d.tokens)
            if (t.duration_ms) {
                double v = static_cast<double>(*t.duration_ms);
                sum += v;
                sumsq += v * v;
                ++n;
            }
    DurationStats s;
    if (n > 0) {
        s.mean = sum / static_cast<double>(n);
        double var = sumsq / static_cast<double>(n) - s.mean * s.mean;
        s.stddev = var > 0.0 ? std::sqrt(var) : 1.0;
    }
    return s;
}

std::vector<double> featurize(const EmbeddingTable& emb, int word_id,
                              std::optional<int> duration_ms, bool use_timing,
                              const DurationStats& stats) {
    std::vector<double> out(emb.dim);
    for (int j = 0; j < emb.dim; ++j) out[j] = emb.matrix.at(word_id, j);
    if (use_timing) {
        double z = 0.0;
        if (duration_ms)
            z = (static_cast<double>(*duration_ms) - stats.mean) / stats.stddev;
        out.push_back(z);
    }
    return out;
}

}  // namespace incdisf
