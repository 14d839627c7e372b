#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "incdisf/rng.hpp"
#include "incdisf/tag_codec.hpp"
#include "incdisf/tensor.hpp"

namespace incdisf {

struct AnnotatedToken {
    std::string token;
    std::optional<int> duration_ms;
    DisfTag disf_tag;
    UttTag utt_tag;
    std::string pos_tag;
};

struct Dialogue {
    std::string id;
    std::vector<AnnotatedToken> tokens;

    std::vector<std::string> words() const;
    std::vector<DisfTag> disf_tags() const;
    std::vector<UttTag> utt_tags() const;
};

// Corpus file format: UTF-8, LF endings, `#` comment lines,
// `# dialogue: <id>` opens a dialogue, one token per line with TAB-separated
// columns token / durationMs-or-"-" / disfTag / uttTag / posTag, blank line
// closes a dialogue.
std::vector<Dialogue> load_corpus(std::istream& in);
std::vector<Dialogue> load_corpus_file(const std::string& path);
void write_corpus(std::ostream& out, const std::vector<Dialogue>& dialogues);
void write_corpus_file(const std::string& path, const std::vector<Dialogue>& dialogues);

struct Vocabulary {
    std::map<std::string, int> word_to_id;
    std::vector<std::string> id_to_word;  // index 0 is UNK
    int unk_id = 0;

    int size() const { return static_cast<int>(id_to_word.size()); }
    int id_of(const std::string& w) const {
        auto it = word_to_id.find(w);
        return it == word_to_id.end() ? unk_id : it->second;
    }
};

inline constexpr const char* kUnkToken = "<unk>";

// The `cap` most frequent tokens (ties broken lexicographically ascending)
// plus UNK. Deterministic and invariant to dialogue order.
Vocabulary build_vocab(const std::vector<Dialogue>& dialogues, int cap = 7000);

struct EmbeddingTable {
    Tensor matrix;  // [vocab size x dim]
    int dim = 0;
    int random_rows = 0;  // rows missing from the stream, seeded-random init
};

// Plain-text `<word> <v1> ... <vdim>` per line. Vocabulary words absent from
// the stream (always including UNK) get seeded uniform init in [-0.05, 0.05].
EmbeddingTable load_embeddings(std::istream& in, const Vocabulary& vocab, int dim,
                               std::uint64_t seed);
EmbeddingTable random_embeddings(const Vocabulary& vocab, int dim, std::uint64_t seed);

struct DurationStats {
    double mean = 0.0;
    double stddev = 1.0;
};

DurationStats duration_stats(const std::vector<Dialogue>& dialogues);

// Embedding row, optionally extended with the z-normalized duration
// (0 when the duration is absent).
std::vector<double> featurize(const EmbeddingTable& emb, int word_id,
                              std::optional<int> duration_ms, bool use_timing,
                              const DurationStats& stats);

}  // namespace incdisf
