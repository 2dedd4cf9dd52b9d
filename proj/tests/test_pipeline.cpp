#include <doctest.h>

#include <filesystem>
#include <set>

#include "eqn/error.hpp"
#include "eqn/eval.hpp"
#include "eqn/labelspace.hpp"
#include "eqn/pipeline.hpp"
#include "eqn/synth.hpp"
#include "test_support.hpp"

using namespace eqn;

namespace {

PipelineConfig small_config() {
    PipelineConfig cfg;
    cfg.featurizer.dim = 1 << 10;
    cfg.train.epochs = 8;
    return cfg;
}

std::pair<Dataset, Dataset> synth_split(std::size_t m, std::size_t labels, std::uint64_t seed) {
    SynthSpec spec;
    spec.samples = m;
    spec.labels = labels;
    spec.seed = seed;
    auto corpus = generate(spec);
    Dataset train{corpus.dataset.vocab, {}, Split::train};
    Dataset test{corpus.dataset.vocab, {}, Split::test};
    for (std::size_t i = 0; i < m; ++i) {
        (i < m * 4 / 5 ? train : test).samples.push_back(corpus.dataset.samples[i]);
    }
    return {train, test};
}

}  // namespace

TEST_CASE("split_validation partitions deterministically") {
    auto s = split_validation(100, 0.1, 7);
    CHECK(s.fit.size() == 90);
    CHECK(s.validation.size() == 10);
    std::set<std::size_t> all(s.fit.begin(), s.fit.end());
    all.insert(s.validation.begin(), s.validation.end());
    CHECK(all.size() == 100);
    CHECK(std::is_sorted(s.fit.begin(), s.fit.end()));
    CHECK(std::is_sorted(s.validation.begin(), s.validation.end()));
    auto again = split_validation(100, 0.1, 7);
    CHECK(again.validation == s.validation);
    CHECK(split_validation(100, 0.1, 8).validation != s.validation);
    CHECK(split_validation(5, 0.0, 1).validation.empty());
}

TEST_CASE("oversampling raises minority classes to the median") {
    Dataset ds{LabelVocabulary({"a", "b", "c"}), {}, Split::train};
    for (int i = 0; i < 6; ++i) ds.samples.push_back({"", "", {0}, std::nullopt});
    for (int i = 0; i < 3; ++i) ds.samples.push_back({"", "", {1}, std::nullopt});
    ds.samples.push_back({"", "", {2}, std::nullopt});
    std::vector<std::size_t> idx(ds.size());
    std::iota(idx.begin(), idx.end(), 0);
    CHECK(resample(ds, idx, Resampling::off, 0) == idx);
    auto over = resample(ds, idx, Resampling::oversample, 0);
    std::vector<std::size_t> counts(3, 0);
    for (auto i : over) counts[ds.samples[i].gold[0]]++;
    CHECK(counts == std::vector<std::size_t>{6, 3, 3});
    auto under = resample(ds, idx, Resampling::undersample, 0);
    counts.assign(3, 0);
    for (auto i : under) counts[ds.samples[i].gold[0]]++;
    CHECK(counts == std::vector<std::size_t>{3, 3, 1});
}

TEST_CASE("coeqn fits idf on the training data only") {
    auto [train, test] = synth_split(300, 4, 1);
    auto cfg = small_config();
    auto run = run_coeqn(train, test, cfg);
    CHECK(run.model1.idf.values == fit_idf(train, cfg.featurizer).values);
    CHECK(run.model1.idf.values != fit_idf(test, cfg.featurizer).values);
    CHECK_FALSE(run.is_eqn());
    REQUIRE(run.test_coeqn.size() == test.size());
    for (std::size_t i = 0; i < test.size(); ++i) {
        CHECK(run.test_coeqn.samples[i].gold == test.samples[i].gold);
        for (double v : *run.test_coeqn.samples[i].intensities) {
            CHECK(v >= 0.0);
            CHECK(v <= 10.0);
        }
    }
    CHECK(run.fit_samples + run.validation_samples == train.size());
}

TEST_CASE("eqn regressed labels are exact") {
    auto [train, test] = synth_split(300, 4, 2);
    auto cfg = small_config();
    auto run = run_eqn(train, test, cfg);
    REQUIRE(run.is_eqn());
    auto annotated = annotate_dataset(run.model1, train, AnnotationConfig{0.0});
    const auto& reg = *run.train_regressed;
    REQUIRE(reg.size() == train.size());
    for (std::size_t i = 0; i < train.size(); ++i) {
        const auto& gold = train.samples[i].gold;
        const auto& r = *reg.samples[i].intensities;
        const auto& a = *annotated.samples[i].intensities;
        for (std::size_t j = 0; j < r.size(); ++j) {
            bool is_gold = std::binary_search(gold.begin(), gold.end(), j);
            CHECK(r[j] == (is_gold ? 10.0 : a[j]));
        }
    }
    CHECK_NOTHROW(verify_regressed(reg, annotated));
    auto broken = reg;
    (*broken.samples[0].intensities)[train.samples[0].gold[0]] = 9.0;
    CHECK_THROWS_AS(verify_regressed(broken, annotated), Error);
}

TEST_CASE("a single sample is memorized") {
    Dataset train{LabelVocabulary({"joy", "anger", "fear"}), {}, Split::train};
    train.samples.push_back({"a", "what a wonderful happy day", {0, 2}, std::nullopt});
    PipelineConfig cfg = small_config();
    cfg.train.epochs = 400;
    cfg.train.l2 = 0.0;
    auto run = run_coeqn(train, train, cfg);
    const auto& v = *run.test_coeqn.samples[0].intensities;
    CHECK(v[0] == doctest::Approx(10.0).epsilon(0.01));
    CHECK(v[1] == doctest::Approx(0.0).epsilon(0.01));
    CHECK(v[2] == doctest::Approx(10.0).epsilon(0.01));
}

TEST_CASE("coeqn beats chance on a learnable corpus") {
    auto [train, test] = synth_split(1000, 5, 3);
    auto cfg = small_config();
    cfg.train.epochs = 15;
    auto run = run_coeqn(train, test, cfg);
    auto table = hit_table(run.test_coeqn);
    REQUIRE(!table.top.empty());
    CHECK(table.top[0].rate > 0.5);
}

TEST_CASE("thread count does not change annotations") {
    auto [train, test] = synth_split(200, 3, 4);
    auto cfg = small_config();
    auto one = run_coeqn(train, test, cfg);
    cfg.threads = 4;
    auto four = run_coeqn(train, test, cfg);
    for (std::size_t i = 0; i < test.size(); ++i) {
        CHECK(*one.test_coeqn.samples[i].intensities == *four.test_coeqn.samples[i].intensities);
    }
}

TEST_CASE("save_run writes a deterministic run directory") {
    auto [train, test] = synth_split(200, 3, 5);
    auto cfg = small_config();
    testing::TempDir dir("pipeline");
    auto a = dir.file("a");
    auto b = dir.file("b");
    save_run(run_eqn(train, test, cfg), a);
    save_run(run_eqn(train, test, cfg), b);
    for (const char* name : {"config.json", "model1.ckpt", "model2.ckpt", "train_regressed.csv",
                             "test_annotated_coeqn.csv", "test_annotated_eqn.csv", "report.json",
                             "test_annotated_eqn.csv.meta.json"}) {
        auto pa = (std::filesystem::path(a) / name).string();
        auto pb = (std::filesystem::path(b) / name).string();
        REQUIRE_MESSAGE(std::filesystem::exists(pa), name);
        CHECK_MESSAGE(testing::read_text(pa) == testing::read_text(pb), name);
    }
    auto report = nlohmann::json::parse(testing::read_text(a + "/report.json"));
    CHECK(report["mode"] == "eqn");
    CHECK(report["config_fingerprint"] == config_fingerprint(cfg));
    auto reloaded = load_full(a + "/test_annotated_eqn.csv");
    CHECK(reloaded.size() == test.size());
}

TEST_CASE("pipeline config json") {
    PipelineConfig cfg;
    cfg.regress_threshold = 2.0;
    cfg.backend = Backend::mlp;
    nlohmann::json j = cfg;
    auto back = j.get<PipelineConfig>();
    CHECK(config_fingerprint(back) == config_fingerprint(cfg));
    CHECK(back.regress_threshold == 2.0);
    j["featurizer"]["oops"] = 1;
    CHECK_THROWS_AS(j.get<PipelineConfig>(), ConfigError);
    PipelineConfig threads = cfg;
    threads.threads = 8;
    CHECK(config_fingerprint(threads) == config_fingerprint(cfg));
    cfg.validation_fraction = 1.0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("label vocabulary mismatch between train and test is rejected") {
    auto [train, test] = synth_split(100, 3, 6);
    test.vocab = LabelVocabulary({"x", "y", "z"});
    CHECK_THROWS_AS(run_coeqn(train, test, small_config()), DataError);
}
