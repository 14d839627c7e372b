#pragma once

#include "incdisf/eval.hpp"
#include "incdisf/incremental.hpp"
#include "incdisf/model.hpp"

namespace incdisf {

// Dialogue-final evaluation over a corpus; with `incremental` set, every
// dialogue is also replayed through the engine for EO and FTD (EO over the
// disfluency task, or the first active tagging task without one).
EvalReport evaluate_model(const TaggerModel& model, const std::vector<Dialogue>& dialogues,
                          bool incremental);

// Unigram dev perplexity oracle: add-one-smoothed training counts over the
// model vocabulary (UNK included as a class), evaluated on `eval_set`.
double unigram_perplexity(const std::vector<Dialogue>& train_set,
                          const std::vector<Dialogue>& eval_set, const Vocabulary& vocab);

}  // namespace incdisf
