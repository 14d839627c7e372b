#pragma once

#include <array>
#include <iosfwd>
#include <string>
#include <vector>

#include "incdisf/corpus.hpp"

namespace incdisf {

// Seeded generator of annotated disfluent dialogues over a small POS-tagged
// template grammar. Gold tags are derived through the tag codec, so every
// generated dialogue round-trips by construction.
struct GenConfig {
    std::uint64_t seed = 0;
    int num_dialogues = 10;
    int min_utterances = 3;
    int max_utterances = 8;
    double filler_rate = 0.05;
    double repeat_rate = 0.05;
    double sub_rate = 0.03;
    double del_rate = 0.01;
    // Categorical distribution over reparandum lengths 1..8.
    std::array<double, 8> reparandum_length_dist = {0.5, 0.25, 0.12, 0.06, 0.04, 0.02, 0.007,
                                                    0.003};
    // Per-POS lognormal duration model, scaled from this base median; edit
    // terms draw 1.5x longer on median.
    double duration_median_ms = 250.0;
    double duration_spread = 0.3;
    bool emit_durations = true;

    void validate() const;  // throws ConfigError
};

// Plain-text `key = value` config, `#` comments.
GenConfig parse_gen_config(std::istream& in);
GenConfig parse_gen_config_file(const std::string& path);

std::vector<Dialogue> generate(const GenConfig& config);

// Vocabulary of the template grammar (for tests and pilot sizing).
std::vector<std::string> grammar_word_list();

}  // namespace incdisf
