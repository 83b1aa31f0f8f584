#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <string>
#include <utility>
#include <vector>

#include "lightloc/errors.hpp"
#include "lightloc/mlp.hpp"
#include "lightloc/monitoring.hpp"
#include "lightloc/rng.hpp"
#include "lightloc/rules.hpp"

namespace lightloc {

enum class Engine { Rules, Ann, Rinn };

inline const char* engine_name(Engine e) {
    switch (e) {
        case Engine::Rules: return "rules";
        case Engine::Ann: return "ann";
        case Engine::Rinn: return "rinn";
    }
    return "unknown";
}

inline Engine engine_from_name(const std::string& name) {
    if (name == "rules") return Engine::Rules;
    if (name == "ann") return Engine::Ann;
    if (name == "rinn") return Engine::Rinn;
    throw ConfigError("unknown engine '" + name + "' (expected rules, ann, or rinn)");
}

struct LocalizationResult {
    std::vector<int> predicted;  // ascending component ids
    Engine engine = Engine::Rules;
    double inference_seconds = 0.0;
};

inline std::vector<int> truth_set(const FailureScenario& scenario) {
    std::vector<int> out;
    out.reserve(scenario.failures.size());
    for (const auto& f : scenario.failures) out.push_back(f.component);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

// Rules conviction plus a binary classifier over the undecided remainder.
template <typename Scalar>
LocalizationResult rinn_localize(const ComponentGraph& g, const Dataset& data,
                                 const Sample& sample, const ThresholdTable& table,
                                 const Mlp<Scalar>& model) {
    SuspectPartition part = reason(g, data.lightpaths, sample.post, table);
    LocalizationResult out;
    out.engine = Engine::Rinn;
    out.predicted = part.faulty;
    for (int c : part.suspect) {
        auto f = extract_features(c, data.lightpaths, data.deployment, data.pre, sample.post,
                                  model.l_max);
        if (model.predicts_faulty(to_vec<Scalar>(f))) out.predicted.push_back(c);
    }
    std::sort(out.predicted.begin(), out.predicted.end());
    return out;
}

// Rules conviction plus an unbiased coin over each undecided component.
inline LocalizationResult rules_benchmark(const ComponentGraph& g, const Dataset& data,
                                          const Sample& sample, const ThresholdTable& table,
                                          Rng& rng, double include_probability = 0.5) {
    SuspectPartition part = reason(g, data.lightpaths, sample.post, table);
    LocalizationResult out;
    out.engine = Engine::Rules;
    out.predicted = part.faulty;
    for (int c : part.suspect) {
        if (rng.uniform() < include_probability) out.predicted.push_back(c);
    }
    std::sort(out.predicted.begin(), out.predicted.end());
    return out;
}

// Binary classifier over every traversed component, no rules stage.
template <typename Scalar>
LocalizationResult ann_benchmark(const ComponentGraph& g, const Dataset& data,
                                 const Sample& sample, const Mlp<Scalar>& model) {
    LocalizationResult out;
    out.engine = Engine::Ann;
    for (int c : traversed_components(data.lightpaths)) {
        auto f = extract_features(c, data.lightpaths, data.deployment, data.pre, sample.post,
                                  model.l_max);
        if (model.predicts_faulty(to_vec<Scalar>(f))) out.predicted.push_back(c);
    }
    return out;
}

// Suspects mode labels only the components the rules engine leaves undecided;
// AllComponents mode labels every traversed component.
enum class TrainMode { Suspects, AllComponents };

template <typename Scalar>
std::vector<TrainingPair<Scalar>> build_training_pairs(const ComponentGraph& g,
                                                       const Dataset& data,
                                                       const ThresholdTable* table,
                                                       TrainMode mode, int l_max) {
    if (mode == TrainMode::Suspects && table == nullptr) {
        throw ConfigError("suspect-mode training requires a threshold table");
    }
    std::vector<int> all = traversed_components(data.lightpaths);
    std::vector<TrainingPair<Scalar>> pairs;
    for (const Sample& s : data.samples) {
        std::vector<int> candidates;
        if (mode == TrainMode::Suspects) {
            candidates = reason(g, data.lightpaths, s.post, *table).suspect;
        } else {
            candidates = all;
        }
        for (int c : candidates) {
            TrainingPair<Scalar> p;
            p.features = to_vec<Scalar>(extract_features(c, data.lightpaths, data.deployment,
                                                         data.pre, s.post, l_max));
            p.label = s.scenario.find(c) != nullptr ? 1.0 : 0.0;
            pairs.push_back(std::move(p));
        }
    }
    return pairs;
}

struct AccuracyReport {
    std::string label;
    std::string engine;
    int samples = 0;
    double complete = 0.0;
    double partial = 0.0;
    double total = 0.0;
    double mean_inference_seconds = -1.0;  // negative means not measured
};

// Complete needs exact set equality; partial needs a strict nonempty overlap
// and is never awarded when the truth is a single component.
inline AccuracyReport score(const std::vector<LocalizationResult>& results,
                            const std::vector<std::vector<int>>& truths) {
    if (results.size() != truths.size()) {
        throw LengthMismatch("scored " + std::to_string(results.size()) + " results against " +
                             std::to_string(truths.size()) + " truth sets");
    }
    AccuracyReport r;
    r.samples = static_cast<int>(results.size());
    if (results.empty()) return r;
    int complete = 0, partial = 0;
    for (std::size_t i = 0; i < results.size(); ++i) {
        std::vector<int> truth = truths[i];
        std::sort(truth.begin(), truth.end());
        truth.erase(std::unique(truth.begin(), truth.end()), truth.end());
        const std::vector<int>& pred = results[i].predicted;
        if (pred == truth) {
            ++complete;
        } else if (truth.size() > 1) {
            bool overlap = std::find_first_of(pred.begin(), pred.end(), truth.begin(),
                                              truth.end()) != pred.end();
            if (overlap) ++partial;
        }
    }
    r.complete = static_cast<double>(complete) / static_cast<double>(r.samples);
    r.partial = static_cast<double>(partial) / static_cast<double>(r.samples);
    r.total = r.complete + r.partial;
    return r;
}

// Mean wall-clock seconds per sample; the caller is responsible for loading
// artifacts and warming the engine beforehand.
template <typename Fn>
double measure_inference(Fn&& engine, const std::vector<Sample>& samples) {
    if (samples.empty()) return 0.0;
    auto start = std::chrono::steady_clock::now();
    for (const Sample& s : samples) engine(s);
    auto stop = std::chrono::steady_clock::now();
    return std::chrono::duration<double>(stop - start).count() /
           static_cast<double>(samples.size());
}

struct EvalOptions {
    Engine engine = Engine::Rinn;
    double include_probability = 0.5;  // rules benchmark coin
    bool measure_time = false;
    std::uint64_t seed = 0;
    std::string label;
};

// Runs one engine over every sample of a dataset and scores the predictions.
// The rules benchmark draws from a per-sample seed so results do not depend
// on evaluation order.
template <typename Scalar>
AccuracyReport evaluate(const ComponentGraph& g, const Dataset& data, const ThresholdTable* table,
                        const Mlp<Scalar>* model, const EvalOptions& opt) {
    bool needs_table = opt.engine == Engine::Rules || opt.engine == Engine::Rinn;
    bool needs_model = opt.engine == Engine::Ann || opt.engine == Engine::Rinn;
    if (needs_table && table == nullptr) {
        throw ConfigError(std::string(engine_name(opt.engine)) +
                          " evaluation requires a threshold table");
    }
    if (needs_model && model == nullptr) {
        throw ConfigError(std::string(engine_name(opt.engine)) + " evaluation requires a model");
    }
    auto run = [&](const Sample& s, std::uint64_t draw_seed) {
        switch (opt.engine) {
            case Engine::Rules: {
                Rng rng(draw_seed);
                return rules_benchmark(g, data, s, *table, rng, opt.include_probability);
            }
            case Engine::Ann:
                return ann_benchmark(g, data, s, *model);
            case Engine::Rinn:
                return rinn_localize(g, data, s, *table, *model);
        }
        throw ConfigError("unknown engine");
    };
    if (opt.measure_time && !data.samples.empty()) {
        run(data.samples.front(), derive_seed(opt.seed, "warmup"));
    }
    std::vector<LocalizationResult> results;
    results.reserve(data.samples.size());
    auto start = std::chrono::steady_clock::now();
    for (std::size_t i = 0; i < data.samples.size(); ++i) {
        results.push_back(run(data.samples[i], derive_seed(opt.seed, "draw", i)));
    }
    auto stop = std::chrono::steady_clock::now();
    std::vector<std::vector<int>> truths;
    truths.reserve(data.samples.size());
    for (const Sample& s : data.samples) truths.push_back(truth_set(s.scenario));
    AccuracyReport report = score(results, truths);
    report.label = opt.label;
    report.engine = engine_name(opt.engine);
    if (opt.measure_time && !data.samples.empty()) {
        report.mean_inference_seconds = std::chrono::duration<double>(stop - start).count() /
                                        static_cast<double>(data.samples.size());
    }
    return report;
}

inline std::string report_header() {
    return "label\tengine\tsamples\tcomplete\tpartial\ttotal\tseconds_per_sample";
}

inline std::string format_report_row(const AccuracyReport& r) {
    char buf[64];
    std::string row = r.label.empty() ? "-" : r.label;
    row += '\t';
    row += r.engine.empty() ? "-" : r.engine;
    std::snprintf(buf, sizeof(buf), "\t%d\t%.4f\t%.4f\t%.4f\t", r.samples, r.complete, r.partial,
                  r.total);
    row += buf;
    if (r.mean_inference_seconds < 0.0) {
        row += "NA";
    } else {
        std::snprintf(buf, sizeof(buf), "%.6f", r.mean_inference_seconds);
        row += buf;
    }
    return row;
}

}  // namespace lightloc
