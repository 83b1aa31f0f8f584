#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "lightloc/pipeline.hpp"

namespace lightloc {
namespace {

std::string default_out_dir() {
    const char* env = std::getenv("LIGHTLOC_OUT");
    return env && *env ? env : ".";
}

std::vector<int> parse_failure_counts(const std::string& s) {
    std::vector<int> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t pos = 0;
            int v = std::stoi(item, &pos);
            if (pos != item.size() || v < 1) throw std::invalid_argument(item);
            out.push_back(v);
        } catch (const std::exception&) {
            throw ConfigError("--failures expects positive integers like \"1,2,3\", got '" + s +
                              "'");
        }
    }
    if (out.empty()) throw ConfigError("--failures must name at least one count");
    return out;
}

std::string join_counts(const std::vector<int>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) s += ',';
        s += std::to_string(v[i]);
    }
    return s;
}

struct GenerateOpts {
    std::string topology;
    std::string out = default_out_dir();
    std::uint64_t seed = 1;
    int lps = 100;
    int train_samples = 1000;
    int test_samples = 1000;
    std::string failures = "1";
    std::string failure_type = "any";
    double opm_fraction = 0.6;
    int opm_count = -1;
    int wavelengths = 32;
    double jitter = 0.1;
    int jobs = 1;
};

struct TrainOpts {
    std::string out = default_out_dir();
    std::string engine;
    std::uint64_t seed = 1;
    int hidden = 64;
    int epochs = 100;
    double learning_rate = 1e-4;
    int batch = 32;
};

struct EvalOpts {
    std::string out = default_out_dir();
    std::string engine;
    std::uint64_t seed = 1;
    std::string label;
    double include_probability = 0.5;
    bool measure_time = false;
};

void cmd_topo_stats(const std::string& path) {
    Topology t = load_topology(path);
    validate(t);
    auto comps = count_components(t);
    auto slots = count_opm_slots(t);
    std::cout << "nodes " << t.nodes.size() << " links " << t.links.size() << "\n";
    for (int i = 0; i < static_cast<int>(t.nodes.size()); ++i) {
        std::cout << "node " << t.nodes[i].name << " degree " << t.degree(i) << " local_wss "
                  << t.lambda(i) << "\n";
    }
    std::cout << "components node " << comps.node_side << " link " << comps.link_side << " total "
              << comps.total << "\n";
    std::cout << "opm_slots node " << slots.node_side << " link " << slots.link_side << " total "
              << slots.total << "\n";
}

// Both stages describe the same provisioned network; only the failure and
// jitter draws differ, so the stage salts the draw stream and not the seed.
void write_one_dataset(DatasetConfig cfg, int samples, const char* stage,
                       const std::filesystem::path& path, std::uint64_t root_seed) {
    cfg.sample_count = samples;
    cfg.seed = root_seed;
    cfg.draw_seed = derive_seed(root_seed, stage);
    Dataset ds = generate_dataset(cfg);
    write_dataset(ds, path.string());
    std::cout << "wrote " << path.string() << " (" << ds.samples.size() << " samples, "
              << ds.lightpaths.size() << " lightpaths, " << ds.deployment.deployed.size() << "/"
              << ds.deployment.psi.size() << " monitors)\n";
}

void cmd_generate(const GenerateOpts& o) {
    if (o.train_samples < 0 || o.test_samples < 0) {
        throw ConfigError("sample counts must be non-negative");
    }
    if (o.train_samples == 0 && o.test_samples == 0) {
        throw ConfigError("nothing to generate: both sample counts are zero");
    }
    DatasetConfig cfg;
    cfg.topology = load_topology(o.topology);
    cfg.lightpath_count = o.lps;
    cfg.n_f_set = parse_failure_counts(o.failures);
    cfg.filter = kind_filter_from_name(o.failure_type);
    cfg.opm_fraction = o.opm_fraction;
    cfg.opm_count = o.opm_count;
    cfg.wavelengths = o.wavelengths;
    cfg.power_model.jitter_sigma_db = o.jitter;
    cfg.jobs = o.jobs;
    std::filesystem::path dir(o.out);
    if (o.train_samples > 0) {
        write_one_dataset(cfg, o.train_samples, "train-data", dir / "train.json", o.seed);
    }
    if (o.test_samples > 0) {
        write_one_dataset(cfg, o.test_samples, "test-data", dir / "test.json", o.seed);
    }
}

void cmd_fit(const std::string& out, int window) {
    std::filesystem::path dir(out);
    Dataset ds = load_dataset((dir / "train.json").string());
    ComponentGraph g = dataset_graph(ds);
    ThresholdTable table = fit_thresholds(g, ds, window);
    std::filesystem::path path = dir / "thresholds.json";
    write_thresholds(table, path.string());
    std::cout << "wrote " << path.string() << " (" << table.rows.size() << " lightpath rows, window "
              << table.window << ")\n";
}

void cmd_train(const TrainOpts& o) {
    Engine eng = engine_from_name(o.engine);
    if (eng == Engine::Rules) throw ConfigError("the rules engine has no trainable model");
    std::filesystem::path dir(o.out);
    Dataset ds = load_dataset((dir / "train.json").string());
    ComponentGraph g = dataset_graph(ds);
    int l_max = max_traversal_count(g, ds.lightpaths);

    std::vector<TrainingPair<float>> pairs;
    std::string mode = "all-components";
    if (eng == Engine::Rinn) {
        ThresholdTable table = load_thresholds((dir / "thresholds.json").string());
        pairs = build_training_pairs<float>(g, ds, &table, TrainMode::Suspects, l_max);
        mode = "suspects";
        if (pairs.empty()) {
            // A saturated deployment leaves nothing undecided to learn from;
            // fall back to all-component labels so the pipeline stays usable.
            pairs = build_training_pairs<float>(g, ds, nullptr, TrainMode::AllComponents, l_max);
            mode = "all-components";
            std::cout << "note: no suspected components in train.json; training on all "
                         "traversed components instead\n";
        }
    } else {
        pairs = build_training_pairs<float>(g, ds, nullptr, TrainMode::AllComponents, l_max);
    }
    if (pairs.empty()) throw ConfigError("train.json yields no training pairs");

    std::uint64_t train_seed = derive_seed(o.seed, "train-" + o.engine);
    Mlp<float> model = Mlp<float>::initialized(kFeaturesPerLightpath * l_max, o.hidden,
                                               train_seed, l_max);
    model.config.epochs = o.epochs;
    model.config.learning_rate = o.learning_rate;
    model.config.batch_size = o.batch;
    TrainReport report = train(model, pairs, train_seed);

    std::filesystem::path model_path = dir / ("model-" + o.engine + ".json");
    write_model(model, mode, train_seed, model_path.string());
    std::string loss_rows = "epoch\tloss\n";
    for (std::size_t e = 0; e < report.epoch_loss.size(); ++e) {
        loss_rows += std::to_string(e + 1) + "\t" + format_weight(report.epoch_loss[e]) + "\n";
    }
    std::filesystem::path loss_path = dir / ("loss-" + o.engine + ".tsv");
    atomic_write_file(loss_path, loss_rows);
    std::cout << "wrote " << model_path.string() << " (" << pairs.size() << " pairs, mode " << mode
              << ", final loss " << format_weight(report.final_loss) << ")\n";
    std::cout << "wrote " << loss_path.string() << " (" << report.epoch_loss.size()
              << " epochs)\n";
}

std::string default_label(const Dataset& ds) {
    double frac = ds.deployment.psi.empty()
                      ? 0.0
                      : static_cast<double>(ds.deployment.deployed.size()) /
                            static_cast<double>(ds.deployment.psi.size());
    std::string s = "opm=" + std::to_string(static_cast<int>(frac * 100.0 + 0.5));
    s += " failures=" + join_counts(ds.n_f_set);
    s += " lps=" + std::to_string(ds.lightpaths.size());
    return s;
}

void cmd_eval(const EvalOpts& o) {
    Engine eng = engine_from_name(o.engine);
    std::filesystem::path dir(o.out);
    Dataset ds = load_dataset((dir / "test.json").string());
    ComponentGraph g = dataset_graph(ds);

    ThresholdTable table;
    Mlp<float> model;
    bool needs_table = eng == Engine::Rules || eng == Engine::Rinn;
    bool needs_model = eng == Engine::Ann || eng == Engine::Rinn;
    if (needs_table) table = load_thresholds((dir / "thresholds.json").string());
    if (needs_model) {
        model = model_from_json<float>(
            parse_json_file(dir / ("model-" + o.engine + ".json")));
    }

    EvalOptions opt;
    opt.engine = eng;
    opt.include_probability = o.include_probability;
    opt.measure_time = o.measure_time;
    opt.seed = derive_seed(o.seed, "eval");
    opt.label = o.label.empty() ? default_label(ds) : o.label;
    AccuracyReport rep = evaluate(g, ds, needs_table ? &table : nullptr,
                                  needs_model ? &model : nullptr, opt);

    std::string content = report_header() + "\n" + format_report_row(rep) + "\n";
    std::filesystem::path path = dir / ("eval-" + o.engine + ".tsv");
    atomic_write_file(path, content);
    std::cout << content;
    std::cout << "wrote " << path.string() << "\n";
}

void cmd_report(const std::string& out) {
    std::filesystem::path dir(out);
    std::vector<std::string> rows;
    std::vector<std::filesystem::path> inputs;
    if (std::filesystem::is_directory(dir)) {
        for (const auto& entry : std::filesystem::directory_iterator(dir)) {
            std::string name = entry.path().filename().string();
            if (name.rfind("eval-", 0) == 0 && name.size() > 9 &&
                name.compare(name.size() - 4, 4, ".tsv") == 0) {
                inputs.push_back(entry.path());
            }
        }
    }
    std::sort(inputs.begin(), inputs.end());
    for (const auto& path : inputs) {
        std::stringstream ss(read_file(path));
        std::string line;
        bool first = true;
        while (std::getline(ss, line)) {
            if (first) {
                first = false;
                continue;  // per-file header
            }
            if (!line.empty()) rows.push_back(line);
        }
    }
    if (rows.empty()) {
        throw MissingArtifactError("no eval-*.tsv rows under " + dir.string() +
                                   "; run eval first");
    }
    std::string content = report_header() + "\n";
    for (const auto& r : rows) content += r + "\n";
    std::filesystem::path path = dir / "report.tsv";
    atomic_write_file(path, content);
    std::cout << content;
    std::cout << "wrote " << path.string() << "\n";
}

int run(int argc, char** argv) {
    CLI::App app{"simulation and localization toolkit for ROADM optical networks"};
    app.require_subcommand(1);

    auto* topo = app.add_subcommand("topo-stats", "print component and monitor-slot counts");
    std::string topo_path;
    topo->add_option("--topology", topo_path, "topology json file")->required();
    topo->callback([&] { cmd_topo_stats(topo_path); });

    auto* gen = app.add_subcommand("generate", "generate train and test datasets");
    GenerateOpts go;
    gen->add_option("--topology", go.topology, "topology json file")->required();
    gen->add_option("--out", go.out, "output directory")->capture_default_str();
    gen->add_option("--seed", go.seed, "root seed")->capture_default_str();
    gen->add_option("--lps", go.lps, "lightpaths to provision")->capture_default_str();
    gen->add_option("--train-samples", go.train_samples, "training sample count")
        ->capture_default_str();
    gen->add_option("--test-samples", go.test_samples, "test sample count")
        ->capture_default_str();
    gen->add_option("--failures", go.failures, "candidate simultaneous failure counts")
        ->capture_default_str();
    gen->add_option("--failure-type", go.failure_type,
                    "failure kind filter (any, transponder, amplifier, wss, fiber)")
        ->capture_default_str();
    gen->add_option("--opm-fraction", go.opm_fraction, "fraction of monitor slots deployed")
        ->capture_default_str();
    gen->add_option("--opm-count", go.opm_count, "explicit monitor count (overrides fraction)");
    gen->add_option("--wavelengths", go.wavelengths, "wavelengths per fiber")
        ->capture_default_str();
    gen->add_option("--jitter", go.jitter, "reading jitter sigma in dB")->capture_default_str();
    gen->add_option("--jobs", go.jobs, "worker threads for sample generation")
        ->capture_default_str();
    gen->callback([&] { cmd_generate(go); });

    auto* fit = app.add_subcommand("fit", "fit conviction thresholds from train.json");
    std::string fit_out = default_out_dir();
    int fit_window = 50;
    fit->add_option("--out", fit_out, "artifact directory")->capture_default_str();
    fit->add_option("--window", fit_window, "moving-window size")->capture_default_str();
    fit->callback([&] { cmd_fit(fit_out, fit_window); });

    auto* tr = app.add_subcommand("train", "train a classifier from train.json");
    TrainOpts to;
    tr->add_option("--engine", to.engine, "rinn or ann")->required();
    tr->add_option("--out", to.out, "artifact directory")->capture_default_str();
    tr->add_option("--seed", to.seed, "root seed")->capture_default_str();
    tr->add_option("--hidden", to.hidden, "hidden layer width")->capture_default_str();
    tr->add_option("--epochs", to.epochs, "training epochs")->capture_default_str();
    tr->add_option("--lr", to.learning_rate, "learning rate")->capture_default_str();
    tr->add_option("--batch", to.batch, "minibatch size")->capture_default_str();
    tr->callback([&] { cmd_train(to); });

    auto* ev = app.add_subcommand("eval", "evaluate one engine on test.json");
    EvalOpts eo;
    ev->add_option("--engine", eo.engine, "rules, ann, or rinn")->required();
    ev->add_option("--out", eo.out, "artifact directory")->capture_default_str();
    ev->add_option("--seed", eo.seed, "root seed")->capture_default_str();
    ev->add_option("--label", eo.label, "grouping label for the report row");
    ev->add_option("--p-include", eo.include_probability,
                   "rules benchmark inclusion probability")
        ->capture_default_str();
    ev->add_flag("--measure-time", eo.measure_time, "record mean per-sample inference time");
    ev->callback([&] { cmd_eval(eo); });

    auto* rep = app.add_subcommand("report", "merge eval rows into report.tsv");
    std::string rep_out = default_out_dir();
    rep->add_option("--out", rep_out, "artifact directory")->capture_default_str();
    rep->callback([&] { cmd_report(rep_out); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "lightloc: config-error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}

}  // namespace
}  // namespace lightloc

int main(int argc, char** argv) {
    try {
        return lightloc::run(argc, argv);
    } catch (const lightloc::ConfigError& e) {
        std::cerr << "lightloc: config-error: " << e.what() << "\n";
        return 2;
    } catch (const lightloc::MissingArtifactError& e) {
        std::cerr << "lightloc: missing-artifact: " << e.what() << "\n";
        return 3;
    } catch (const lightloc::Error& e) {
        std::cerr << "lightloc: runtime-error: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "lightloc: runtime-error: " << e.what() << "\n";
        return 4;
    }
}
