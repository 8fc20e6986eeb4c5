// occlukg: generate corpora, build knowledge graphs, train ComplEx models,
// run experiments and explain single-frame predictions.

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "occlukg/occlukg.hpp"

namespace fs = std::filesystem;
using namespace occlukg;

namespace {

enum Exit : int { kOk = 0, kUsage = 2, kData = 3, kNumeric = 4 };

// Thrown for data-validation failures that should map to exit code 3.
struct DataError : Error {
    using Error::Error;
};

void write_effective_config(const fs::path& dir, const std::string& text) {
    if (!dir.empty()) fs::create_directories(dir);
    write_file(dir / "effective-config.txt", text);
}

fs::path parent_dir(const fs::path& file) {
    auto p = file.parent_path();
    return p.empty() ? fs::path(".") : p;
}

// Loads every scene and reports all broken files and invalid documents at once.
std::vector<RoadSceneDocument> load_checked_corpus(const fs::path& dir) {
    std::vector<RoadSceneDocument> corpus;
    std::vector<std::string> problems;
    std::set<std::string> ids;
    for (const auto& file : corpus_files(dir)) {
        try {
            auto doc = load_scene(file);
            auto violations = validate_document(doc);
            if (!violations.empty()) {
                problems.push_back(doc.context.scene_id + ": " + violations.front());
                continue;
            }
            if (!ids.insert(doc.context.scene_id).second) {
                problems.push_back(doc.context.scene_id + ": duplicate scene id (" + file.filename().string() + ")");
                continue;
            }
            corpus.push_back(std::move(doc));
        } catch (const ParseError& e) {
            problems.push_back(file.stem().string() + ": " + e.what());
        } catch (const ValidationError& e) {
            problems.push_back(file.stem().string() + ": " + e.what());
        }
    }
    if (!problems.empty()) {
        std::string msg = "invalid scenes:";
        for (const auto& p : problems) msg += "\n  " + p;
        throw DataError(msg);
    }
    return corpus;
}

// ---- gen ----

struct GenArgs {
    std::string out;
    std::string config;
    std::uint64_t seed = 0;
};

int cmd_gen(const GenArgs& a) {
    GeneratorConfig cfg = a.config.empty() ? default_config() : parse_generator_config(read_file(a.config));
    validate_config(cfg);
    const auto corpus = generate_corpus(cfg, a.seed);
    write_corpus(a.out, corpus);
    write_file(fs::path(a.out) / "manifest.tsv", corpus_manifest(corpus));
    write_effective_config(a.out, "seed = " + std::to_string(a.seed) + "\n" + format_generator_config(cfg));
    std::cout << "scenes\t" << corpus.size() << '\n';
    return kOk;
}

// ---- build-kg ----

struct BuildArgs {
    std::string corpus;
    std::string out;
    bool no_prototypes = false;
    double min_support = 0.0;
    double min_lift = 0.0;
};

int cmd_build_kg(const BuildArgs& a) {
    const auto corpus = load_checked_corpus(a.corpus);
    BuildOptions opts;
    opts.link_prototypes = !a.no_prototypes;
    opts.prototypes = {a.min_support, a.min_lift};
    KnowledgeGraph kg;
    try {
        kg = build_kg(corpus, opts);
    } catch (const GraphError& e) {
        throw DataError(e.what());
    }
    write_file(a.out, export_tsv(kg));
    std::ostringstream cfg;
    cfg << "corpus = " << a.corpus << "\nout = " << a.out << "\nprototypes = " << (a.no_prototypes ? "false" : "true")
        << "\nprototype.min_support = " << format_config_real(a.min_support)
        << "\nprototype.min_lift = " << format_config_real(a.min_lift) << '\n';
    write_effective_config(parent_dir(a.out), cfg.str());
    std::cout << format_stats(kg_stats(kg));
    return kOk;
}

// ---- train ----

struct TrainArgs {
    std::string kg;
    std::string out;
    std::string config;
    std::string validation;
    std::string calibration = "train";
    bool no_calibrate = false;
    std::optional<std::size_t> k, eta, batch, max_epochs, patience, check_interval;
    std::optional<double> lr, temperature, l2;
    std::optional<std::uint64_t> seed;
};

TrainingConfig training_config(const TrainArgs& a) {
    TrainingConfig t;
    if (!a.config.empty()) {
        for (const auto& e : parse_config_text(read_file(a.config)))
            if (!apply_training_key(t, e)) throw unknown_key(e);
    }
    if (a.k) t.k = *a.k;
    if (a.eta) t.eta = *a.eta;
    if (a.batch) t.batch_size = *a.batch;
    if (a.max_epochs) t.max_epochs = *a.max_epochs;
    if (a.patience) t.patience = *a.patience;
    if (a.check_interval) t.check_interval = *a.check_interval;
    if (a.lr) t.learning_rate = *a.lr;
    if (a.temperature) t.adversarial_temperature = *a.temperature;
    if (a.l2) t.l2 = *a.l2;
    if (a.seed) t.seed = *a.seed;
    t.validate();
    return t;
}

std::string format_training_config(const TrainingConfig& t) {
    ExperimentSpec s;
    s.training = t;
    // Reuse the spec renderer and keep only the training lines.
    std::istringstream in(format_spec(s));
    std::string line, out;
    bool training = false;
    while (std::getline(in, line)) {
        if (line.rfind("k = ", 0) == 0) training = true;
        if (training) out += line + '\n';
    }
    return out;
}

int cmd_train(const TrainArgs& a) {
    const auto config = training_config(a);
    const auto source = calibration_source_from_string(a.calibration);
    if (!source) throw ConfigError("--calibration must be train or validation");
    KnowledgeGraph kg;
    try {
        kg = import_tsv(read_file(a.kg));
    } catch (const GraphError& e) {
        throw DataError(e.what());
    }
    TripleSplit split;
    split.train = kg;
    if (!a.validation.empty()) {
        const auto extra = import_tsv(read_file(a.validation));
        for (const auto& t : extra.triples()) {
            auto idx = kg.index(t);
            if (!idx) throw DataError("validation triple mentions an entity unknown to the training graph: " + t.subject);
            split.validation.push_back(*idx);
        }
    }
    auto result = train(split, config);
    if (!a.no_calibrate) calibrate_on(result.model, split, config.seed ^ 0xca11b7a7eULL, *source);

    const fs::path out(a.out);
    save_model(result.model, out);
    fs::path history = out;
    history += ".history.tsv";
    write_file(history, format_history(result.history));
    write_effective_config(parent_dir(out), format_training_config(config) + "calibrate = " +
                                                (a.no_calibrate ? "false" : "true") + "\ncalibration_source = " +
                                                a.calibration + '\n');
    std::cout << "best_epoch\t" << result.history.best_epoch << "\nbest_mrr\t" << result.history.best_mrr
              << "\ncalibration\t" << result.model.calibration.a << '\t' << result.model.calibration.b << '\n';
    if (result.model.calibration.degenerate) std::cerr << "warning: degenerate calibration, using a=1, b=0\n";
    return kOk;
}

// ---- experiment ----

struct ExperimentArgs {
    std::string corpus;
    std::string spec;
    std::string out;
    std::optional<std::size_t> horizon;
    std::optional<std::uint64_t> seed;
    std::string denominator;
};

int cmd_experiment(const ExperimentArgs& a) {
    auto spec = parse_spec(read_file(a.spec));
    if (a.horizon) spec.horizon = *a.horizon;
    if (a.seed) spec.seed = *a.seed;
    if (!a.denominator.empty()) {
        auto d = denominator_from_string(a.denominator);
        if (!d) throw ConfigError("--denominator must be marginal or mixture");
        spec.denominator = *d;
    }
    const auto corpus = load_checked_corpus(a.corpus);
    const auto reports = spec.cross_environment ? run_cross_environment(corpus, spec) : run_experiment(corpus, spec);
    const auto rendered = render_report(reports);
    fs::create_directories(a.out);
    write_file(fs::path(a.out) / (spec.name + ".txt"), rendered.table);
    write_file(fs::path(a.out) / (spec.name + ".jsonl"), rendered.jsonl);
    write_effective_config(a.out, format_spec(spec));
    std::cout << rendered.table;
    return kOk;
}

// ---- predict ----

struct PredictArgs {
    std::string model;
    std::string scene;
    std::int64_t frame = 0;
    std::size_t horizon = 30;
    std::string denominator = "marginal";
};

int cmd_predict(const PredictArgs& a) {
    const auto denominator = denominator_from_string(a.denominator);
    if (!denominator) throw ConfigError("--denominator must be marginal or mixture");
    const auto model = load_model(a.model);
    const auto doc = load_scene(a.scene);
    const auto it = std::find_if(doc.frames.begin(), doc.frames.end(),
                                 [&](const FrameAnnotation& f) { return f.frame_number == a.frame; });
    if (it == doc.frames.end()) throw ConfigError("scene has no frame " + std::to_string(a.frame));
    const auto index = static_cast<std::size_t>(it - doc.frames.begin());
    const auto p = predict_frame(model, doc, index, a.horizon, *denominator);

    for (const auto& r : p.reports) {
        nlohmann::ordered_json j;
        j["scene"] = p.scene_id;
        j["frame"] = p.frame_number;
        j["horizon"] = p.horizon;
        j["target_frame"] = p.target_frame_number;
        j["truncated"] = p.truncated;
        j["hypothesis"] = std::string(to_string(r.hypothesis.label));
        j["prototype"] = r.hypothesis.prototype;
        j["prior"] = r.prior;
        auto& factors = j["factors"] = nlohmann::ordered_json::array();
        for (const auto& f : r.factors) {
            nlohmann::ordered_json fj;
            fj["relation"] = std::string(relation_name(f.item.relation));
            fj["object"] = f.item.object;
            fj["marginal"] = f.marginal;
            fj["conditional"] = f.conditional;
            fj["ratio"] = f.ratio;
            factors.push_back(std::move(fj));
        }
        j["raw"] = r.raw;
        j["posterior"] = r.posterior;
        j["clamped"] = r.clamped;
        j["denominator"] = std::string(to_string(p.denominator));
        auto& skipped = j["skipped"] = nlohmann::ordered_json::array();
        for (const auto& e : p.skipped) skipped.push_back(std::string(relation_name(e.relation)) + " " + e.object);
        j["predicted"] = std::string(to_string(p.predicted));
        j["truth"] = std::string(to_string(p.truth));
        std::cout << j.dump() << '\n';
    }
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Occluded-pedestrian prediction with knowledge-graph embeddings"};
    app.require_subcommand(1);

    GenArgs gen;
    auto* g = app.add_subcommand("gen", "Generate a synthetic annotation corpus");
    g->add_option("--out", gen.out, "Output directory")->required();
    g->add_option("--config", gen.config, "Generator config file")->check(CLI::ExistingFile);
    g->add_option("--seed", gen.seed, "Random seed");

    BuildArgs build;
    auto* b = app.add_subcommand("build-kg", "Compile a corpus into a triple file");
    b->add_option("--corpus", build.corpus, "Corpus directory")->required()->check(CLI::ExistingDirectory);
    b->add_option("--out", build.out, "Output triple file")->required();
    b->add_flag("--no-prototypes", build.no_prototypes, "Skip class prototypes and RoadScene");
    b->add_option("--min-support", build.min_support, "Prototype support threshold");
    b->add_option("--min-lift", build.min_lift, "Prototype lift threshold");

    TrainArgs tr;
    auto* t = app.add_subcommand("train", "Train a ComplEx model on a triple file");
    t->add_option("--kg", tr.kg, "Training triple file")->required()->check(CLI::ExistingFile);
    t->add_option("--out", tr.out, "Checkpoint path")->required();
    t->add_option("--config", tr.config, "Training config file")->check(CLI::ExistingFile);
    t->add_option("--validation", tr.validation, "Validation triple file")->check(CLI::ExistingFile);
    t->add_option("--k", tr.k, "Embedding dimension (150)");
    t->add_option("--eta", tr.eta, "Corruptions per positive (15)");
    t->add_option("--lr", tr.lr, "Learning rate (0.0005)");
    t->add_option("--batch", tr.batch, "Batch size (8000)");
    t->add_option("--temperature", tr.temperature, "Adversarial temperature (1.0)");
    t->add_option("--max-epochs", tr.max_epochs, "Epoch limit (500)");
    t->add_option("--patience", tr.patience, "Early-stopping patience in checks (5)");
    t->add_option("--check-interval", tr.check_interval, "Epochs between MRR checks (10)");
    t->add_option("--l2", tr.l2, "L2 coefficient (0)");
    t->add_option("--seed", tr.seed, "Random seed (0)");
    t->add_option("--calibration", tr.calibration, "Platt positives: train or validation");
    t->add_flag("--no-calibrate", tr.no_calibrate, "Keep the identity calibration");

    ExperimentArgs ex;
    auto* e = app.add_subcommand("experiment", "Run an experiment spec");
    e->add_option("--corpus", ex.corpus, "Corpus directory")->required()->check(CLI::ExistingDirectory);
    e->add_option("--spec", ex.spec, "Experiment spec file")->required()->check(CLI::ExistingFile);
    e->add_option("--out", ex.out, "Report directory")->required();
    e->add_option("--horizon", ex.horizon, "Prediction horizon in frames");
    e->add_option("--seed", ex.seed, "Split seed");
    e->add_option("--denominator", ex.denominator, "marginal or mixture");

    PredictArgs pr;
    auto* p = app.add_subcommand("predict", "Explain the prediction for one frame");
    p->add_option("--model", pr.model, "Checkpoint path")->required()->check(CLI::ExistingFile);
    p->add_option("--scene", pr.scene, "Scene annotation file")->required()->check(CLI::ExistingFile);
    p->add_option("--frame", pr.frame, "Frame number")->required();
    p->add_option("--horizon", pr.horizon, "Prediction horizon (30)");
    p->add_option("--denominator", pr.denominator, "marginal or mixture");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& err) {
        const int code = app.exit(err);
        return code == 0 ? kOk : kUsage;
    }

    try {
        if (*g) return cmd_gen(gen);
        if (*b) return cmd_build_kg(build);
        if (*t) return cmd_train(tr);
        if (*e) return cmd_experiment(ex);
        if (*p) return cmd_predict(pr);
    } catch (const DataError& err) {
        std::cerr << "error: " << err.what() << '\n';
        return kData;
    } catch (const ParseError& err) {
        std::cerr << "error: " << err.what() << '\n';
        return kData;
    } catch (const ValidationError& err) {
        std::cerr << "error: " << err.what() << '\n';
        return kData;
    } catch (const GraphError& err) {
        std::cerr << "error: " << err.what() << '\n';
        return kData;
    } catch (const TrainingError& err) {
        std::cerr << "error: " << err.what() << '\n';
        return kNumeric;
    } catch (const std::exception& err) {
        std::cerr << "error: " << err.what() << '\n';
        return kUsage;
    }
    return kUsage;
}
