// Python bindings over the main operations: corpus generation, tag codec,
// training, evaluation, and the incremental tagging engine.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "incdisf/incremental.hpp"
#include "incdisf/pipeline.hpp"
#include "incdisf/synth.hpp"

namespace py = pybind11;
using namespace incdisf;

namespace {

GenConfig gen_config_from_kwargs(std::uint64_t seed, int num_dialogues, double filler_rate,
                                 double repeat_rate, double sub_rate, double del_rate,
                                 int min_utterances, int max_utterances, bool emit_durations) {
    GenConfig g;
    g.seed = seed;
    g.num_dialogues = num_dialogues;
    g.filler_rate = filler_rate;
    g.repeat_rate = repeat_rate;
    g.sub_rate = sub_rate;
    g.del_rate = del_rate;
    g.min_utterances = min_utterances;
    g.max_utterances = max_utterances;
    g.emit_durations = emit_durations;
    g.validate();
    return g;
}

py::dict report_to_dict(const EvalReport& r) {
    py::dict d;
    d["seed"] = r.seed;
    d["dialogues"] = r.dialogues;
    d["tokens"] = r.tokens;
    if (r.f1_rps) d["f1_rps"] = *r.f1_rps;
    if (r.f1_rps_strict) d["f1_rps_strict"] = *r.f1_rps_strict;
    if (r.f1_edit) d["f1_e"] = *r.f1_edit;
    if (r.f1_uttseg) d["f1_uttseg"] = *r.f1_uttseg;
    if (r.pos_accuracy) d["acc_pos"] = *r.pos_accuracy;
    if (r.perplexity) d["ppl"] = *r.perplexity;
    if (r.eo) d["eo"] = *r.eo;
    if (r.ftd) {
        d["ftd"] = *r.ftd;
        d["ftd_detected"] = r.ftd_detected;
        d["ftd_missed"] = r.ftd_missed;
    }
    py::dict bt, bl;
    for (const auto& [k, v] : r.by_type) bt[py::str(k)] = v;
    for (const auto& [k, v] : r.by_length) bl[py::str(k)] = v;
    d["by_type"] = bt;
    d["by_length"] = bl;
    return d;
}

TrainConfig train_config_from_kwargs(std::uint64_t seed, int epochs, int patience, int hidden,
                                     int embed_dim, int ff_dim, int lm_dim, double lr,
                                     bool timing, int vocab_cap) {
    TrainConfig c;
    c.seed = seed;
    c.max_epochs = epochs;
    c.patience = patience;
    c.hidden = hidden;
    c.embed_dim = embed_dim;
    c.ff_dim = ff_dim;
    c.lm_dim = lm_dim;
    c.learning_rate = lr;
    c.use_timing = timing;
    c.vocab_cap = vocab_cap;
    return c;
}

}  // namespace

PYBIND11_MODULE(_incdisf, m) {
    m.doc() = "incremental multi-task disfluency tagger";

    py::register_exception<UsageError>(m, "UsageError", PyExc_ValueError);
    py::register_exception<ParseError>(m, "TagParseError", PyExc_ValueError);
    py::register_exception<MalformedTags>(m, "MalformedTagsError", PyExc_ValueError);
    py::register_exception<MalformedAnnotation>(m, "MalformedAnnotationError", PyExc_ValueError);

    m.def(
        "generate_corpus",
        [](const std::string& path, std::uint64_t seed, int num_dialogues, double filler_rate,
           double repeat_rate, double sub_rate, double del_rate, int min_utterances,
           int max_utterances, bool emit_durations) {
            GenConfig g = gen_config_from_kwargs(seed, num_dialogues, filler_rate, repeat_rate,
                                                 sub_rate, del_rate, min_utterances,
                                                 max_utterances, emit_durations);
            auto ds = generate(g);
            write_corpus_file(path, ds);
            return static_cast<int>(ds.size());
        },
        py::arg("path"), py::arg("seed") = 0, py::arg("num_dialogues") = 10,
        py::arg("filler_rate") = 0.05, py::arg("repeat_rate") = 0.05, py::arg("sub_rate") = 0.03,
        py::arg("del_rate") = 0.01, py::arg("min_utterances") = 3, py::arg("max_utterances") = 8,
        py::arg("emit_durations") = true,
        "Generate a synthetic annotated corpus file; returns the dialogue count.");

    m.def(
        "encode_disfluency",
        [](const std::vector<std::tuple<int, int, int, int, std::string>>& repairs,
           const std::vector<std::pair<int, int>>& edits, int length) {
            DisfAnnotation ann;
            for (const auto& [rs, re, ie, rpe, kind] : repairs) {
                RepairKind k = kind == "rep"   ? RepairKind::Rep
                               : kind == "sub" ? RepairKind::Sub
                               : kind == "del" ? RepairKind::Del
                                               : throw UsageError("unknown repair kind: " + kind);
                ann.repairs.push_back({rs, re, ie, rpe, k});
            }
            for (const auto& [s, e] : edits) ann.edits.push_back({s, e});
            auto enc = encode_disfluency(ann, length);
            std::vector<std::string> tags;
            for (const auto& t : enc.tags) tags.push_back(to_string(t));
            return py::make_tuple(tags, enc.clipped);
        },
        py::arg("repairs"), py::arg("edits"), py::arg("length"),
        "Encode repair spans (reparandum_start, reparandum_end, interregnum_end, repair_end, "
        "kind) and edit spans into word-level tags; returns (tags, clipped).");

    m.def(
        "decode_disfluency",
        [](const std::vector<std::string>& tags) {
            std::vector<DisfTag> parsed;
            for (const auto& s : tags) parsed.push_back(parse_disf_tag(s));
            DisfAnnotation ann = decode_disfluency(parsed);
            std::vector<std::tuple<int, int, int, int, std::string>> repairs;
            for (const auto& r : ann.repairs) {
                std::string k = r.kind == RepairKind::Rep   ? "rep"
                                : r.kind == RepairKind::Sub ? "sub"
                                                            : "del";
                repairs.emplace_back(r.reparandum_start, r.reparandum_end, r.interregnum_end,
                                     r.repair_end, k);
            }
            std::vector<std::pair<int, int>> edits;
            for (const auto& e : ann.edits) edits.emplace_back(e.start, e.end);
            return py::make_tuple(repairs, edits);
        },
        py::arg("tags"), "Decode word-level tags back into (repairs, edits).");

    m.def("full_disf_alphabet", &full_disf_alphabet);
    m.def("full_utt_alphabet", &full_utt_alphabet);

    m.def(
        "train_model",
        [](const std::string& corpus_path, const std::string& out_path, const std::string& tasks,
           const std::string& loss, double alpha, const std::string& dev_path, std::uint64_t seed,
           int epochs, int patience, int hidden, int embed_dim, int ff_dim, int lm_dim, double lr,
           bool timing, int vocab_cap) {
            auto train_set = load_corpus_file(corpus_path);
            std::vector<Dialogue> dev_set;
            if (!dev_path.empty()) dev_set = load_corpus_file(dev_path);
            LossMode mode;
            if (loss == "naive")
                mode = LossMode::naive(alpha);
            else if (loss == "uncertainty")
                mode = LossMode::uncertainty();
            else
                throw UsageError("unknown loss mode: " + loss);
            TrainConfig cfg = train_config_from_kwargs(seed, epochs, patience, hidden, embed_dim,
                                                       ff_dim, lm_dim, lr, timing, vocab_cap);
            TrainResult r = train(train_set, dev_set, TaskSet::parse(tasks), mode, cfg);
            save_checkpoint(out_path, r.model);
            return r.best_epoch;
        },
        py::arg("corpus_path"), py::arg("out_path"), py::arg("tasks") = "disf,uttseg,pos,lm",
        py::arg("loss") = "naive", py::arg("alpha") = 1.0, py::arg("dev_path") = "",
        py::arg("seed") = 0, py::arg("epochs") = 50, py::arg("patience") = 7,
        py::arg("hidden") = 200, py::arg("embed_dim") = 50, py::arg("ff_dim") = 50,
        py::arg("lm_dim") = 50, py::arg("lr") = 1e-3, py::arg("timing") = false,
        py::arg("vocab_cap") = 7000,
        "Train a model and write its checkpoint; returns the best epoch.");

    m.def(
        "evaluate",
        [](const std::string& model_path, const std::string& corpus_path, bool incremental) {
            TaggerModel model = load_checkpoint(model_path);
            return report_to_dict(evaluate_model(model, load_corpus_file(corpus_path),
                                                 incremental));
        },
        py::arg("model_path"), py::arg("corpus_path"), py::arg("incremental") = false,
        "Evaluate a checkpoint on an annotated corpus; returns the report as a dict.");

    py::class_<TaggerModel>(m, "Model")
        .def_static("load", &load_checkpoint, py::arg("path"))
        .def("save", [](const TaggerModel& m2, const std::string& p) { save_checkpoint(p, m2); })
        .def_property_readonly("tasks",
                               [](const TaggerModel& m2) { return m2.tasks.to_string(); })
        .def_property_readonly("vocab_size",
                               [](const TaggerModel& m2) { return m2.vocab.size(); })
        .def_property_readonly("seed", [](const TaggerModel& m2) { return m2.config.seed; });

    py::class_<IncrementalTagger>(m, "IncrementalTagger")
        .def(py::init<const TaggerModel&>(), py::arg("model"), py::keep_alive<1, 2>())
        .def(
            "consume_word",
            [](IncrementalTagger& t, const std::string& token, std::optional<int> duration_ms) {
                py::dict out;
                for (const auto& [task, labels] : t.consume_word(token, duration_ms))
                    out[py::str(task_name(task))] = labels;
                return out;
            },
            py::arg("token"), py::arg("duration_ms") = py::none(),
            "Consume one word; returns the per-task label sequences over the prefix.")
        .def("end_stream", &IncrementalTagger::end_stream)
        .def_property_readonly("consumed", &IncrementalTagger::consumed);
}
