#include "cli.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "eqn/corpus.hpp"
#include "eqn/csv.hpp"
#include "eqn/error.hpp"
#include "eqn/eval.hpp"
#include "eqn/hash.hpp"
#include "eqn/labelspace.hpp"
#include "eqn/log.hpp"
#include "eqn/pipeline.hpp"
#include "eqn/synth.hpp"

namespace eqn::cli {

namespace {

namespace fs = std::filesystem;

struct Paths {
    std::string train;
    std::string test;
    std::string validation;
    std::string vocab;
    std::string out;
};

struct CliConfig {
    PipelineConfig pipeline;
    Paths paths;
};

nlohmann::json read_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open " + path);
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(fmt::format("{}: invalid JSON: {}", path, e.what()));
    }
}

CliConfig load_config(const std::string& path) {
    CliConfig cfg;
    if (path.empty()) return cfg;
    auto j = read_json(path);
    if (!j.is_object()) throw ConfigError(path + ": config must be a JSON object");
    if (j.contains("paths")) {
        const auto& p = j["paths"];
        if (!p.is_object()) throw ConfigError("paths must be an object");
        for (const auto& [key, value] : p.items()) {
            auto v = value.get<std::string>();
            if (key == "train") {
                cfg.paths.train = v;
            } else if (key == "test") {
                cfg.paths.test = v;
            } else if (key == "validation") {
                cfg.paths.validation = v;
            } else if (key == "vocab") {
                cfg.paths.vocab = v;
            } else if (key == "out") {
                cfg.paths.out = v;
            } else {
                throw ConfigError("unknown paths key: " + key);
            }
        }
        j.erase("paths");
    }
    try {
        from_json(j, cfg.pipeline);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(fmt::format("{}: {}", path, e.what()));
    }
    return cfg;
}

// Flags shared by every subcommand.
struct Common {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<double> threshold;
    std::size_t threads = 1;

    void attach(CLI::App* app) {
        app->add_option("--config", config, "JSON configuration file");
        app->add_option("--seed", seed, "Override the random seed");
        app->add_option("--threshold", threshold, "Annotation threshold h in [0,10]");
        app->add_option("--threads", threads, "Worker thread cap")->check(CLI::PositiveNumber);
    }

    CliConfig resolve() const {
        CliConfig cfg = load_config(config);
        if (seed) cfg.pipeline.train.seed = *seed;
        if (threshold) cfg.pipeline.annotation.threshold = *threshold;
        cfg.pipeline.threads = threads;
        cfg.pipeline.validate();
        return cfg;
    }
};

std::string pick(const std::string& flag, const std::string& fallback, std::string_view what) {
    const auto& v = flag.empty() ? fallback : flag;
    if (v.empty()) throw ConfigError(fmt::format("missing {} path", what));
    return v;
}

std::optional<LabelVocabulary> maybe_vocab(const std::string& path) {
    if (path.empty()) return std::nullopt;
    return LabelVocabulary::load(path);
}

std::string command_fingerprint(std::string_view command, const PipelineConfig& pipeline,
                                nlohmann::json options) {
    options["command"] = command;
    options["pipeline"] = pipeline;
    return fingerprint_hex(options.dump());
}

void ensure_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw DataError(fmt::format("cannot create directory {}: {}", dir, ec.message()));
}

std::string join(const std::string& dir, std::string_view name) { return (fs::path(dir) / name).string(); }

// init ----------------------------------------------------------------------

struct InitCommand {
    Common common;
    std::string input;
    std::string vocab;
    std::string out;

    void attach(CLI::App* app) {
        common.attach(app);
        app->add_option("--input", input, "Compact CSV (text, labels[, id])")->required();
        app->add_option("--vocab", vocab, "Label names, one per line")->required();
        app->add_option("--out", out, "Full-label CSV to write")->required();
    }

    void execute() const {
        auto cfg = common.resolve();
        auto labels = LabelVocabulary::load(vocab);
        Dataset ds = load_compact(input, labels);
        for (auto& s : ds.samples) s.intensities = init_full_labels(s.gold, labels.size());
        emit_full(ds, out);
        auto fp = command_fingerprint("init", cfg.pipeline, {});
        write_sidecar(out, fp, cfg.pipeline.train.seed, {{"command", "init"}});
        log::info("wrote {} full-label rows to {}", ds.size(), out);
    }
};

// run -----------------------------------------------------------------------

struct RunCommand {
    Common common;
    std::string mode = "eqn";
    Paths paths;
    std::optional<double> regress_threshold;

    void attach(CLI::App* app) {
        common.attach(app);
        app->add_option("--mode", mode, "coeqn or eqn")->check(CLI::IsMember({"coeqn", "eqn"}));
        app->add_option("--train", paths.train, "Training CSV (compact or full layout)");
        app->add_option("--test", paths.test, "Test CSV to annotate");
        app->add_option("--validation", paths.validation, "Optional validation CSV");
        app->add_option("--vocab", paths.vocab, "Label names (needed for compact inputs)");
        app->add_option("--out", paths.out, "Run directory");
        app->add_option("--regress-threshold", regress_threshold,
                        "Threshold Model 1's training-set annotation before label regression");
    }

    void execute() const {
        auto cfg = common.resolve();
        if (regress_threshold) {
            cfg.pipeline.regress_threshold = *regress_threshold;
            cfg.pipeline.validate();
        }
        const auto train_path = pick(paths.train, cfg.paths.train, "training");
        const auto test_path = pick(paths.test, cfg.paths.test, "test");
        const auto out_dir = pick(paths.out, cfg.paths.out, "output");
        const auto vocab_path = paths.vocab.empty() ? cfg.paths.vocab : paths.vocab;
        const auto validation_path = paths.validation.empty() ? cfg.paths.validation : paths.validation;

        auto labels = maybe_vocab(vocab_path);
        const LabelVocabulary* vp = labels ? &*labels : nullptr;
        Dataset train = load_any(train_path, vp, Split::train);
        Dataset test = load_any(test_path, vp ? vp : &train.vocab, Split::test);
        std::optional<Dataset> validation;
        if (!validation_path.empty()) {
            validation = load_any(validation_path, vp ? vp : &train.vocab, Split::validation);
        }
        const Dataset* vptr = validation ? &*validation : nullptr;

        PipelineRun run = mode == "eqn" ? run_eqn(train, test, cfg.pipeline, vptr)
                                        : run_coeqn(train, test, cfg.pipeline, vptr);
        save_run(run, out_dir);
        log::info("{} run written to {}", mode, out_dir);
    }
};

// annotate ------------------------------------------------------------------

struct AnnotateCommand {
    Common common;
    std::string checkpoint;
    std::string input;
    std::string vocab;
    std::string out;

    void attach(CLI::App* app) {
        common.attach(app);
        app->add_option("--checkpoint", checkpoint, "Model checkpoint")->required();
        app->add_option("--input", input, "CSV to annotate (compact or full layout)")->required();
        app->add_option("--vocab", vocab, "Label names (needed for compact inputs)");
        app->add_option("--out", out, "Annotated full-label CSV")->required();
    }

    void execute() const {
        auto cfg = common.resolve();
        const FeaturizerConfig* expected = common.config.empty() ? nullptr : &cfg.pipeline.featurizer;
        Checkpoint ckpt = load_checkpoint(checkpoint, expected);
        auto labels = maybe_vocab(vocab.empty() ? cfg.paths.vocab : vocab);
        Dataset ds = load_any(input, labels ? &*labels : nullptr, Split::unlabeled);
        auto annotated = annotate_dataset(ckpt, ds, cfg.pipeline.annotation, expected, cfg.pipeline.threads);
        emit_full(annotated, out);
        auto fp = command_fingerprint("annotate", cfg.pipeline,
                                      {{"threshold", cfg.pipeline.annotation.threshold},
                                       {"model_config_fingerprint", ckpt.config_fingerprint}});
        write_sidecar(out, fp, ckpt.seed,
                      {{"command", "annotate"}, {"threshold", cfg.pipeline.annotation.threshold}});
    }
};

// eval ----------------------------------------------------------------------

struct EvalCommand {
    Common common;
    std::string input;
    std::string policy = "oracle-k";
    std::string out;
    bool labeled_only = false;

    void attach(CLI::App* app) {
        common.attach(app);
        app->add_option("--input", input, "Annotated full-label CSV")->required();
        app->add_option("--policy", policy, "oracle-k or threshold")
            ->check(CLI::IsMember({"oracle-k", "threshold"}));
        app->add_option("--out", out, "Report directory")->required();
        app->add_flag("--labeled-only", labeled_only, "Skip samples without gold labels");
    }

    void execute() const {
        auto cfg = common.resolve();
        Dataset ds = load_full(input, nullptr, Split::test);
        if (labeled_only) ds = labeled_subset(ds);
        if (ds.size() == 0) throw DataError(input + ": no samples to evaluate");
        const auto pol = parse_policy(policy);
        auto report = evaluate(ds, pol, cfg.pipeline.annotation);

        ensure_dir(out);
        const auto fp = command_fingerprint(
            "eval", cfg.pipeline, {{"policy", policy}, {"labeled_only", labeled_only}});
        const auto seed = cfg.pipeline.train.seed;
        nlohmann::json j = report;
        j["config_fingerprint"] = fp;
        j["seed"] = seed;
        if (pol == PredictionPolicy::oracle_k) j["hit_table"] = hit_table(ds);
        csv::write_file(join(out, "report.json"), j.dump(2) + "\n");

        csv::write_file(join(out, "per_label.csv"), format_per_label_csv(report));
        write_sidecar(join(out, "per_label.csv"), fp, seed, {{"policy", policy}, {"threshold", report.threshold}});
        if (pol == PredictionPolicy::oracle_k) {
            csv::write_file(join(out, "hit_table.csv"), format_hit_table_csv(hit_table(ds)));
            write_sidecar(join(out, "hit_table.csv"), fp, seed, {{"policy", policy}});
        }
    }
};

// pearson -------------------------------------------------------------------

struct PearsonCommand {
    Common common;
    std::string input;
    std::string out;

    void attach(CLI::App* app) {
        common.attach(app);
        app->add_option("--input", input, "Annotated full-label CSV")->required();
        app->add_option("--out", out, "Output directory")->required();
    }

    void execute() const {
        auto cfg = common.resolve();
        Dataset ds = load_full(input, nullptr, Split::test);
        if (ds.size() < 2) throw DataError(input + ": Pearson correlation needs at least two samples");
        auto pm = pearson_matrix(ds);
        ensure_dir(out);
        const auto csv_path = join(out, "pearson.csv");
        const auto svg_path = join(out, "pearson.svg");
        export_heatmap(pm, csv_path, svg_path);
        const auto fp = command_fingerprint("pearson", cfg.pipeline, {});
        write_sidecar(csv_path, fp, cfg.pipeline.train.seed);
        write_sidecar(svg_path, fp, cfg.pipeline.train.seed);
    }
};

// synth ---------------------------------------------------------------------

struct SynthCommand {
    std::string spec_path;
    std::optional<std::uint64_t> seed;
    std::string out;
    std::string latent;
    std::string vocab_out;
    std::string test_out;
    std::string test_latent;
    double test_fraction = 0.2;

    void attach(CLI::App* app) {
        app->add_option("--spec", spec_path, "Synthetic corpus spec (JSON)")->required();
        app->add_option("--seed", seed, "Override the spec seed");
        app->add_option("--out", out, "Compact CSV of the (training) corpus")->required();
        app->add_option("--latent", latent, "Latent intensity CSV")->required();
        app->add_option("--vocab-out", vocab_out, "Write label names here");
        app->add_option("--test-out", test_out, "Hold out the last samples into this CSV");
        app->add_option("--test-latent", test_latent, "Latent CSV for the held-out samples");
        app->add_option("--test-fraction", test_fraction, "Held-out fraction")->check(CLI::Range(0.0, 0.9));
    }

    void execute() const {
        SynthSpec spec;
        try {
            spec = read_json(spec_path).get<SynthSpec>();
        } catch (const nlohmann::json::exception& e) {
            throw ConfigError(fmt::format("{}: {}", spec_path, e.what()));
        }
        if (seed) spec.seed = *seed;
        auto corpus = generate(spec);
        const auto fp = fingerprint_hex(nlohmann::json(spec).dump());

        auto write_part = [&](std::size_t begin, std::size_t end, const std::string& csv_path,
                              const std::string& latent_path, Split split) {
            SynthCorpus part;
            part.dataset.vocab = corpus.dataset.vocab;
            part.dataset.split = split;
            part.dataset.samples.assign(corpus.dataset.samples.begin() + static_cast<std::ptrdiff_t>(begin),
                                        corpus.dataset.samples.begin() + static_cast<std::ptrdiff_t>(end));
            part.latent.assign(corpus.latent.begin() + static_cast<std::ptrdiff_t>(begin),
                               corpus.latent.begin() + static_cast<std::ptrdiff_t>(end));
            emit_compact(part.dataset, csv_path);
            write_sidecar(csv_path, fp, spec.seed, {{"command", "synth"}});
            if (!latent_path.empty()) {
                csv::write_file(latent_path, format_latent_csv(part));
                write_sidecar(latent_path, fp, spec.seed, {{"command", "synth"}});
            }
        };

        const std::size_t m = corpus.dataset.size();
        std::size_t held = test_out.empty() ? 0 : static_cast<std::size_t>(static_cast<double>(m) * test_fraction);
        write_part(0, m - held, out, latent, Split::train);
        if (!test_out.empty()) write_part(m - held, m, test_out, test_latent, Split::test);
        if (!vocab_out.empty()) emit_vocabulary(corpus.dataset.vocab, vocab_out);
    }
};

}  // namespace

int run(const std::vector<std::string>& args) {
    CLI::App app{"Expansion quantization: full-label emotion intensity annotation", "eqn"};
    app.require_subcommand(1);

    InitCommand init;
    RunCommand run_cmd;
    AnnotateCommand annotate;
    EvalCommand eval;
    PearsonCommand pearson_cmd;
    SynthCommand synth;
    init.attach(app.add_subcommand("init", "Full-label initialization of a compact CSV"));
    run_cmd.attach(app.add_subcommand("run", "Run the coeqn or eqn pipeline"));
    annotate.attach(app.add_subcommand("annotate", "Annotate a dataset with a trained checkpoint"));
    eval.attach(app.add_subcommand("eval", "Evaluate an annotated CSV"));
    pearson_cmd.attach(app.add_subcommand("pearson", "Pearson label-correlation matrix and heatmap"));
    synth.attach(app.add_subcommand("synth", "Generate a synthetic corpus with latent intensities"));

    std::vector<std::string> argv_rest(args.begin() + (args.empty() ? 0 : 1), args.end());
    std::reverse(argv_rest.begin(), argv_rest.end());
    try {
        app.parse(argv_rest);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kSuccess : kUsageError;
    }

    try {
        if (app.got_subcommand("init")) init.execute();
        if (app.got_subcommand("run")) run_cmd.execute();
        if (app.got_subcommand("annotate")) annotate.execute();
        if (app.got_subcommand("eval")) eval.execute();
        if (app.got_subcommand("pearson")) pearson_cmd.execute();
        if (app.got_subcommand("synth")) synth.execute();
    } catch (const ConfigError& e) {
        std::cerr << "eqn: configuration error: " << e.what() << '\n';
        return kUsageError;
    } catch (const NumericalError& e) {
        std::cerr << "eqn: numerical failure: " << e.what() << '\n';
        return kNumericalError;
    } catch (const std::exception& e) {
        std::cerr << "eqn: data error: " << e.what() << '\n';
        return kDataError;
    }
    return kSuccess;
}

}  // namespace eqn::cli
