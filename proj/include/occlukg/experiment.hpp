#pragma once

// Occluded-class metrics and the train/test experiment protocol.

#include <chrono>
#include <cstdint>
#include <iomanip>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "occlukg/bayes.hpp"
#include "occlukg/config_file.hpp"
#include "occlukg/error.hpp"
#include "occlukg/knowledge_graph.hpp"
#include "occlukg/scene.hpp"
#include "occlukg/split.hpp"
#include "occlukg/trainer.hpp"

namespace occlukg {

struct ConfusionMatrix {
    std::uint64_t tp = 0;
    std::uint64_t fp = 0;
    std::uint64_t fn = 0;
    std::uint64_t tn = 0;

    std::uint64_t total() const { return tp + fp + fn + tn; }
    void add(bool predicted_positive, bool actual_positive) {
        if (predicted_positive && actual_positive) ++tp;
        else if (predicted_positive) ++fp;
        else if (actual_positive) ++fn;
        else ++tn;
    }
    ConfusionMatrix& operator+=(const ConfusionMatrix& o) {
        tp += o.tp, fp += o.fp, fn += o.fn, tn += o.tn;
        return *this;
    }
    friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;
};

struct Metrics {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

// Zero denominators give 0. F1 = 2TP / (2TP + FP + FN), the harmonic mean of
// precision and recall written over counts.
inline Metrics compute_metrics(const ConfusionMatrix& cm) {
    Metrics m;
    if (cm.tp + cm.fp > 0) m.precision = static_cast<double>(cm.tp) / static_cast<double>(cm.tp + cm.fp);
    if (cm.tp + cm.fn > 0) m.recall = static_cast<double>(cm.tp) / static_cast<double>(cm.tp + cm.fn);
    if (cm.tp > 0) m.f1 = static_cast<double>(2 * cm.tp) / static_cast<double>(2 * cm.tp + cm.fp + cm.fn);
    return m;
}

// Which environments' train folds feed the knowledge graph.
enum class TrainData : std::uint8_t { Real, Virtual, Mixed };

inline std::string_view to_string(TrainData d) {
    switch (d) {
        case TrainData::Real: return "Real";
        case TrainData::Virtual: return "Virtual";
        case TrainData::Mixed: break;
    }
    return "Mixed";
}

inline std::optional<TrainData> train_data_from_string(std::string_view s) {
    if (s == "Real") return TrainData::Real;
    if (s == "Virtual") return TrainData::Virtual;
    if (s == "Mixed") return TrainData::Mixed;
    return std::nullopt;
}

inline std::vector<Environment> environments_of(TrainData d) {
    switch (d) {
        case TrainData::Real: return {Environment::Real};
        case TrainData::Virtual: return {Environment::Virtual};
        case TrainData::Mixed: break;
    }
    return {Environment::Real, Environment::Virtual};
}

struct ExperimentSpec {
    std::string name = "experiment";
    TrainData train = TrainData::Virtual;
    std::vector<Environment> test{Environment::Real, Environment::Virtual};
    std::map<Environment, SplitCounts> counts{{Environment::Real, {32, 8}}, {Environment::Virtual, {50, 9}}};
    double validation_ratio = 0.1;
    std::size_t horizon = 30;
    TrainingConfig training;
    std::uint64_t seed = 0;
    Denominator denominator = Denominator::Marginal;
    bool calibrate = true;
    CalibrationSource calibration = CalibrationSource::Train;
    PrototypeOptions prototypes{0.0, 1.0};
    bool cross_environment = false;
};

struct MetricsReport {
    std::string train;  // Real / Virtual / Mixed
    std::string test;   // an environment, or "All" for the pooled test folds
    ConfusionMatrix cm;
    Metrics metrics;
    std::size_t frames = 0;
    double clamp_rate = 0.0;       // fraction of posteriors clamped to [0,1]
    double truncation_rate = 0.0;  // fraction of targets cut at the scene end
    double skip_rate = 0.0;        // fraction of evidence items unknown to the model
    std::string denominator;
    bool calibrated = false;
    double best_validation_mrr = 0.0;
    std::size_t best_epoch = 0;
    std::string spec;  // echo of the spec that produced the report
};

// ---- spec text ----

inline std::string environment_key(Environment e) { return e == Environment::Real ? "real" : "virtual"; }

inline std::string format_spec(const ExperimentSpec& s) {
    std::ostringstream out;
    out << "name = " << s.name << '\n';
    out << "train = " << to_string(s.train) << '\n';
    out << "test =";
    for (auto e : s.test) out << ' ' << to_string(e);
    out << '\n';
    for (const auto& [env, c] : s.counts) {
        out << environment_key(env) << ".train = " << c.train << '\n';
        out << environment_key(env) << ".test = " << c.test << '\n';
    }
    out << "validation_ratio = " << format_config_real(s.validation_ratio) << '\n';
    out << "horizon = " << s.horizon << '\n';
    out << "seed = " << s.seed << '\n';
    out << "denominator = " << to_string(s.denominator) << '\n';
    out << "calibrate = " << (s.calibrate ? "true" : "false") << '\n';
    out << "calibration_source = " << to_string(s.calibration) << '\n';
    out << "cross_environment = " << (s.cross_environment ? "true" : "false") << '\n';
    out << "prototype.min_support = " << format_config_real(s.prototypes.min_support) << '\n';
    out << "prototype.min_lift = " << format_config_real(s.prototypes.min_lift) << '\n';
    const auto& t = s.training;
    out << "k = " << t.k << '\n';
    out << "eta = " << t.eta << '\n';
    out << "learning_rate = " << format_config_real(t.learning_rate) << '\n';
    out << "batch_size = " << t.batch_size << '\n';
    out << "adversarial_temperature = " << format_config_real(t.adversarial_temperature) << '\n';
    out << "max_epochs = " << t.max_epochs << '\n';
    out << "patience = " << t.patience << '\n';
    out << "check_interval = " << t.check_interval << '\n';
    out << "l2 = " << format_config_real(t.l2) << '\n';
    out << "training_seed = " << t.seed << '\n';
    return out.str();
}

// Applies one training key; returns false if `e.key` is not a training key.
inline bool apply_training_key(TrainingConfig& t, const ConfigEntry& e) {
    const auto& k = e.key;
    if (k == "k") t.k = parse_unsigned(e);
    else if (k == "eta") t.eta = parse_unsigned(e);
    else if (k == "learning_rate") t.learning_rate = parse_real(e);
    else if (k == "batch_size") t.batch_size = parse_unsigned(e);
    else if (k == "adversarial_temperature") t.adversarial_temperature = parse_real(e);
    else if (k == "max_epochs") t.max_epochs = parse_unsigned(e);
    else if (k == "patience") t.patience = parse_unsigned(e);
    else if (k == "check_interval") t.check_interval = parse_unsigned(e);
    else if (k == "l2") t.l2 = parse_real(e);
    else if (k == "training_seed") t.seed = parse_unsigned(e);
    else return false;
    return true;
}

inline ExperimentSpec parse_spec(std::string_view text) {
    ExperimentSpec s;
    for (const auto& e : parse_config_text(text)) {
        const auto& k = e.key;
        if (apply_training_key(s.training, e)) continue;
        if (k == "name") {
            if (!is_valid_identifier(e.value)) throw config_error(e, "name must use only [A-Za-z0-9_.-]");
            s.name = e.value;
        } else if (k == "train") {
            auto d = train_data_from_string(e.value);
            if (!d) throw config_error(e, "expected Real, Virtual or Mixed");
            s.train = *d;
        } else if (k == "test") {
            s.test.clear();
            for (const auto& w : parse_word_list(e)) {
                auto env = enum_from_string<Environment>(w);
                if (!env) throw config_error(e, "unknown environment '" + w + "'");
                if (std::find(s.test.begin(), s.test.end(), *env) == s.test.end()) s.test.push_back(*env);
            }
        } else if (k == "real.train") s.counts[Environment::Real].train = parse_unsigned(e);
        else if (k == "real.test") s.counts[Environment::Real].test = parse_unsigned(e);
        else if (k == "virtual.train") s.counts[Environment::Virtual].train = parse_unsigned(e);
        else if (k == "virtual.test") s.counts[Environment::Virtual].test = parse_unsigned(e);
        else if (k == "validation_ratio") s.validation_ratio = parse_real(e);
        else if (k == "horizon") s.horizon = parse_unsigned(e);
        else if (k == "seed") s.seed = parse_unsigned(e);
        else if (k == "denominator") {
            auto d = denominator_from_string(e.value);
            if (!d) throw config_error(e, "expected marginal or mixture");
            s.denominator = *d;
        } else if (k == "calibrate") s.calibrate = parse_bool(e);
        else if (k == "calibration_source") {
            auto c = calibration_source_from_string(e.value);
            if (!c) throw config_error(e, "expected train or validation");
            s.calibration = *c;
        }
        else if (k == "cross_environment") s.cross_environment = parse_bool(e);
        else if (k == "prototype.min_support") s.prototypes.min_support = parse_real(e);
        else if (k == "prototype.min_lift") s.prototypes.min_lift = parse_real(e);
        else throw unknown_key(e);
    }
    return s;
}

// Structural checks against a corpus; throws ConfigError.
inline void check_spec(const ExperimentSpec& s, const std::vector<RoadSceneDocument>& corpus) {
    s.training.validate();
    if (s.test.empty()) throw ConfigError("spec has no test environment");
    std::map<Environment, std::size_t> available;
    for (const auto& d : corpus) ++available[d.context.environment];
    auto need = [&](Environment env) {
        if (!available.count(env)) throw ConfigError("corpus has no " + std::string(to_string(env)) + " scenes");
        if (!s.counts.count(env)) throw ConfigError("spec has no split counts for " + std::string(to_string(env)));
    };
    for (auto env : environments_of(s.train)) {
        need(env);
        if (s.counts.at(env).train == 0) throw ConfigError(std::string(to_string(env)) + ".train must be > 0");
    }
    for (auto env : s.test) {
        need(env);
        if (s.counts.at(env).test == 0) throw ConfigError(std::string(to_string(env)) + ".test must be > 0");
    }
}

namespace detail {

struct Tally {
    ConfusionMatrix cm;
    std::size_t frames = 0;
    std::size_t posteriors = 0;
    std::size_t clamped = 0;
    std::size_t truncated = 0;
    std::size_t evidence = 0;
    std::size_t skipped = 0;

    void add(const FramePrediction& p) {
        cm.add(p.predicted == PedestriansScene::PedestrianOccluded, p.truth == PedestriansScene::PedestrianOccluded);
        ++frames;
        for (const auto& r : p.reports) {
            ++posteriors;
            clamped += r.clamped;
        }
        truncated += p.truncated;
        evidence += p.reports[0].factors.size() + p.skipped.size();
        skipped += p.skipped.size();
    }
    Tally& operator+=(const Tally& o) {
        cm += o.cm;
        frames += o.frames, posteriors += o.posteriors, clamped += o.clamped;
        truncated += o.truncated, evidence += o.evidence, skipped += o.skipped;
        return *this;
    }
};

inline double rate(std::size_t num, std::size_t den) {
    return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace detail

struct TrainedPipeline {
    TripleSplit split;
    TrainingResult training;
};

// Builds the training graph from the spec's train environments and trains it.
inline TrainedPipeline train_pipeline(const std::vector<RoadSceneDocument>& corpus, const ExperimentSpec& spec,
                                      const SceneFolds& all_folds) {
    std::set<std::string> train_ids, test_ids;
    std::map<std::string, Environment> env_of;
    for (const auto& d : corpus) env_of[d.context.scene_id] = d.context.environment;
    const auto envs = environments_of(spec.train);
    auto in_train_env = [&](const std::string& id) {
        return std::find(envs.begin(), envs.end(), env_of.at(id)) != envs.end();
    };
    SceneFolds folds;
    for (const auto& id : all_folds.train)
        if (in_train_env(id)) folds.train.push_back(id);
    for (const auto& id : all_folds.validation)
        if (in_train_env(id)) folds.validation.push_back(id);
    for (const auto& id : all_folds.test)
        if (std::find(spec.test.begin(), spec.test.end(), env_of.at(id)) != spec.test.end()) folds.test.push_back(id);

    BuildOptions build;
    build.prototypes = spec.prototypes;
    TrainedPipeline out;
    out.split = make_triple_split(corpus, folds, build);
    out.training = train(out.split, spec.training);
    if (spec.calibrate) calibrate_on(out.training.model, out.split, spec.seed ^ 0xca11b7a7eULL, spec.calibration);
    return out;
}

// Folds for every environment the spec touches. An environment's folds do not
// depend on which other environments are present.
inline SceneFolds experiment_folds(const std::vector<RoadSceneDocument>& corpus, const ExperimentSpec& spec) {
    std::map<Environment, SplitCounts> used;
    for (auto env : environments_of(spec.train)) used[env] = spec.counts.at(env);
    for (auto env : spec.test) used[env] = spec.counts.at(env);
    return assign_folds(corpus, used, spec.seed, spec.validation_ratio);
}

// Scores every frame of the test scenes; one report per test environment in
// `spec.test` order, then a pooled "All" report when more than one is tested.
inline std::vector<MetricsReport> evaluate_pipeline(const std::vector<RoadSceneDocument>& corpus,
                                                    const ExperimentSpec& spec, const TrainedPipeline& pipeline) {
    std::map<Environment, detail::Tally> per_env;
    std::set<std::string> test_ids(pipeline.split.scenes.test.begin(), pipeline.split.scenes.test.end());
    for (const auto& doc : corpus) {
        if (!test_ids.count(doc.context.scene_id)) continue;
        auto& tally = per_env[doc.context.environment];
        for (std::size_t t = 0; t < doc.frames.size(); ++t)
            tally.add(predict_frame(pipeline.training.model, doc, t, spec.horizon, spec.denominator));
    }
    const std::string echo = format_spec(spec);
    auto make = [&](std::string test, const detail::Tally& tally) {
        MetricsReport r;
        r.train = std::string(to_string(spec.train));
        r.test = std::move(test);
        r.cm = tally.cm;
        r.metrics = compute_metrics(tally.cm);
        r.frames = tally.frames;
        r.clamp_rate = detail::rate(tally.clamped, tally.posteriors);
        r.truncation_rate = detail::rate(tally.truncated, tally.frames);
        r.skip_rate = detail::rate(tally.skipped, tally.evidence);
        r.denominator = std::string(to_string(spec.denominator));
        r.calibrated = pipeline.training.model.calibration.fitted;
        r.best_validation_mrr = pipeline.training.history.best_mrr;
        r.best_epoch = pipeline.training.history.best_epoch;
        r.spec = echo;
        return r;
    };
    std::vector<MetricsReport> out;
    detail::Tally pooled;
    for (auto env : spec.test) {
        const auto it = per_env.find(env);
        const detail::Tally tally = it == per_env.end() ? detail::Tally{} : it->second;
        pooled += tally;
        out.push_back(make(std::string(to_string(env)), tally));
    }
    if (spec.test.size() > 1) out.push_back(make("All", pooled));
    return out;
}

inline std::vector<MetricsReport> run_experiment(const std::vector<RoadSceneDocument>& corpus,
                                                 const ExperimentSpec& spec) {
    check_spec(spec, corpus);
    const auto folds = experiment_folds(corpus, spec);
    const auto pipeline = train_pipeline(corpus, spec, folds);
    return evaluate_pipeline(corpus, spec, pipeline);
}

// Trains on Real, Virtual and Mixed data over one shared fold assignment and
// tests each model on every environment plus the pooled test folds.
inline std::vector<MetricsReport> run_cross_environment(const std::vector<RoadSceneDocument>& corpus,
                                                        const ExperimentSpec& base) {
    std::set<Environment> present;
    for (const auto& d : corpus) present.insert(d.context.environment);
    if (present.size() < 2) throw ConfigError("cross-environment runs need both Real and Virtual scenes");
    ExperimentSpec spec = base;
    spec.test = {Environment::Real, Environment::Virtual};
    spec.train = TrainData::Mixed;
    check_spec(spec, corpus);
    const auto folds = experiment_folds(corpus, spec);
    std::vector<MetricsReport> out;
    for (auto data : {TrainData::Real, TrainData::Virtual, TrainData::Mixed}) {
        spec.train = data;
        const auto pipeline = train_pipeline(corpus, spec, folds);
        auto reports = evaluate_pipeline(corpus, spec, pipeline);
        out.insert(out.end(), reports.begin(), reports.end());
    }
    return out;
}

// ---- rendering ----

inline nlohmann::ordered_json report_record(const MetricsReport& r) {
    nlohmann::ordered_json j;
    j["train"] = r.train;
    j["test"] = r.test;
    j["f1"] = r.metrics.f1;
    j["precision"] = r.metrics.precision;
    j["recall"] = r.metrics.recall;
    j["tp"] = r.cm.tp;
    j["fp"] = r.cm.fp;
    j["fn"] = r.cm.fn;
    j["tn"] = r.cm.tn;
    j["frames"] = r.frames;
    j["clamp_rate"] = r.clamp_rate;
    j["truncation_rate"] = r.truncation_rate;
    j["skip_rate"] = r.skip_rate;
    j["denominator"] = r.denominator;
    j["calibrated"] = r.calibrated;
    j["best_validation_mrr"] = r.best_validation_mrr;
    j["best_epoch"] = r.best_epoch;
    j["spec"] = r.spec;
    return j;
}

inline MetricsReport report_from_record(const nlohmann::json& j) {
    MetricsReport r;
    r.train = j.at("train").get<std::string>();
    r.test = j.at("test").get<std::string>();
    r.metrics.f1 = j.at("f1").get<double>();
    r.metrics.precision = j.at("precision").get<double>();
    r.metrics.recall = j.at("recall").get<double>();
    r.cm.tp = j.at("tp").get<std::uint64_t>();
    r.cm.fp = j.at("fp").get<std::uint64_t>();
    r.cm.fn = j.at("fn").get<std::uint64_t>();
    r.cm.tn = j.at("tn").get<std::uint64_t>();
    r.frames = j.at("frames").get<std::size_t>();
    r.clamp_rate = j.at("clamp_rate").get<double>();
    r.truncation_rate = j.at("truncation_rate").get<double>();
    r.skip_rate = j.at("skip_rate").get<double>();
    r.denominator = j.at("denominator").get<std::string>();
    r.calibrated = j.at("calibrated").get<bool>();
    r.best_validation_mrr = j.at("best_validation_mrr").get<double>();
    r.best_epoch = j.at("best_epoch").get<std::size_t>();
    r.spec = j.at("spec").get<std::string>();
    return r;
}

struct RenderedReport {
    std::string table;
    std::string jsonl;
};

// Text columns: Train | Test | F1 | Precision | Recall, values to 2 decimals.
inline RenderedReport render_report(const std::vector<MetricsReport>& reports) {
    RenderedReport out;
    std::ostringstream t;
    t << std::left << std::setw(8) << "Train" << ' ' << std::setw(8) << "Test" << ' ' << std::setw(4) << "F1" << ' '
      << std::setw(9) << "Precision" << ' ' << "Recall" << '\n';
    t << std::fixed << std::setprecision(2);
    for (const auto& r : reports) {
        t << std::left << std::setw(8) << r.train << ' ' << std::setw(8) << r.test << ' ' << std::setw(4)
          << r.metrics.f1 << ' ' << std::setw(9) << r.metrics.precision << ' ' << r.metrics.recall << '\n';
    }
    out.table = t.str();
    for (const auto& r : reports) out.jsonl += report_record(r).dump(-1, ' ', false) + '\n';
    return out;
}

inline std::vector<MetricsReport> parse_report_records(std::string_view jsonl) {
    std::vector<MetricsReport> out;
    std::istringstream in{std::string(jsonl)};
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        out.push_back(report_from_record(nlohmann::json::parse(line)));
    }
    return out;
}

}  // namespace occlukg
