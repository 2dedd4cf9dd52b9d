#include <doctest.h>

#include <random>

#include "eqn/error.hpp"
#include "eqn/synth.hpp"
#include "test_support.hpp"

using namespace eqn;

namespace {

std::size_t label_of_token(std::string_view token) {
    // em{j}_w{k}
    auto underscore = token.find('_');
    return std::stoul(std::string(token.substr(2, underscore - 2)));
}

std::vector<std::string> split_words(const std::string& text) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : text) {
        if (c == ' ') {
            if (!cur.empty()) out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

}  // namespace

TEST_CASE("generate is a pure function of the spec") {
    SynthSpec spec;
    spec.samples = 50;
    auto a = generate(spec);
    auto b = generate(spec);
    REQUIRE(a.dataset.size() == 50);
    CHECK(a.latent == b.latent);
    for (std::size_t i = 0; i < 50; ++i) CHECK(a.dataset.samples[i].text == b.dataset.samples[i].text);
    spec.seed = 1;
    CHECK(generate(spec).latent != a.latent);
}

TEST_CASE("latent law and gold rules") {
    SynthSpec spec;
    spec.samples = 400;
    auto corpus = generate(spec);
    for (std::size_t i = 0; i < corpus.latent.size(); ++i) {
        const auto& z = corpus.latent[i];
        const auto& s = corpus.dataset.samples[i];
        CHECK_FALSE(s.intensities.has_value());
        std::size_t dominant = std::max_element(z.begin(), z.end()) - z.begin();
        CHECK(s.gold == LabelSet{dominant});
        CHECK(z[dominant] >= 5.0);
        for (std::size_t j = 0; j < z.size(); ++j) {
            CHECK(z[j] >= 0.0);
            CHECK(z[j] <= 10.0);
            if (j != dominant) CHECK(z[j] < spec.micro);
        }
        CHECK(split_words(s.text).size() == spec.words_per_text);
    }

    spec.collapse = false;
    spec.mixing = paired_mixing(spec.labels, 0.6);
    auto multi = generate(spec);
    bool saw_two = false;
    for (std::size_t i = 0; i < multi.latent.size(); ++i) {
        LabelSet expected;
        for (std::size_t j = 0; j < spec.labels; ++j) {
            if (multi.latent[i][j] >= 5.0) expected.push_back(j);
        }
        CHECK(multi.dataset.samples[i].gold == expected);
        saw_two |= expected.size() >= 2;
    }
    CHECK(saw_two);
}

TEST_CASE("token shares follow the latent intensities") {
    SynthSpec spec;
    spec.samples = 500;
    auto corpus = generate(spec);
    double chi2 = 0.0;
    std::size_t dof = 0;
    for (std::size_t i = 0; i < corpus.latent.size(); ++i) {
        const auto& z = corpus.latent[i];
        double total = 0;
        for (double v : z) total += v;
        std::vector<double> counts(spec.labels, 0.0);
        for (const auto& w : split_words(corpus.dataset.samples[i].text)) counts[label_of_token(w)] += 1;
        for (std::size_t j = 0; j < spec.labels; ++j) {
            double expected = double(spec.words_per_text) * z[j] / total;
            if (expected > 0) chi2 += (counts[j] - expected) * (counts[j] - expected) / expected;
        }
        dof += spec.labels - 1;
    }
    CHECK(chi2 / double(dof) > 0.8);
    CHECK(chi2 / double(dof) < 1.25);
}

TEST_CASE("emitted corpus carries no latent values") {
    testing::TempDir dir("synth");
    SynthSpec spec;
    spec.samples = 20;
    auto corpus = generate(spec);
    emit_compact(corpus.dataset, dir.file("c.csv"));
    auto text = testing::read_text(dir.file("c.csv"));
    CHECK(text.rfind("text,labels,id\n", 0) == 0);
    CHECK(text.find('.') == std::string::npos);
    auto latent_csv = format_latent_csv(corpus);
    CHECK(latent_csv.rfind("id,em0,em1,em2,em3,em4\n", 0) == 0);
}

TEST_CASE("recovery score") {
    SynthSpec spec;
    spec.samples = 300;
    auto corpus = generate(spec);
    Dataset perfect = corpus.dataset;
    for (std::size_t i = 0; i < perfect.size(); ++i) perfect.samples[i].intensities = corpus.latent[i];
    CHECK(recovery_score(perfect, corpus.latent).mean == doctest::Approx(1.0));

    auto shuffled = corpus.latent;
    std::mt19937_64 rng(3);
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    auto r = recovery_score(perfect, shuffled);
    CHECK(std::abs(r.mean) < 0.15);
    REQUIRE(r.per_label.size() == spec.labels);

    auto short_latent = corpus.latent;
    short_latent.pop_back();
    CHECK_THROWS_AS(recovery_score(perfect, short_latent), DataError);
}

TEST_CASE("paired mixing is row stochastic") {
    auto m = paired_mixing(5, 0.7);
    REQUIRE(m.size() == 5);
    for (const auto& row : m) {
        double s = 0;
        for (double v : row) s += v;
        CHECK(s == doctest::Approx(1.0));
    }
    CHECK(m[0][1] == doctest::Approx(0.3));
    CHECK(m[4][4] == doctest::Approx(1.0));
}

TEST_CASE("spec validation and json") {
    SynthSpec spec;
    spec.labels = 1;
    CHECK_THROWS_AS(spec.validate(), ConfigError);
    spec = {};
    spec.mixing = {{1.0}};
    CHECK_THROWS_AS(spec.validate(), ConfigError);
    spec = {};
    nlohmann::json j = spec;
    CHECK(j.get<SynthSpec>().samples == spec.samples);
    j["unknown"] = 0;
    CHECK_THROWS_AS(j.get<SynthSpec>(), ConfigError);
}
