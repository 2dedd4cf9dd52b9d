#include <doctest.h>

#include <random>

#include "eqn/corpus.hpp"
#include "eqn/csv.hpp"
#include "eqn/error.hpp"
#include "test_support.hpp"

using namespace eqn;

namespace {

LabelVocabulary vocab_n(std::size_t n) {
    std::vector<std::string> names;
    for (std::size_t j = 0; j < n; ++j) names.push_back("label" + std::to_string(j));
    return LabelVocabulary(names);
}

}  // namespace

TEST_CASE("vocabulary invariants") {
    LabelVocabulary v({"admiration", "amusement", "anger"});
    CHECK(v.size() == 3);
    for (std::size_t j = 0; j < v.size(); ++j) CHECK(v.index(v.name(j)) == j);
    CHECK_FALSE(v.index("joy").has_value());
    CHECK_THROWS_AS(LabelVocabulary({"a"}), DataError);
    CHECK_THROWS_AS(LabelVocabulary({"a", "a"}), DataError);
    CHECK_THROWS_AS(LabelVocabulary({"a", ""}), DataError);
}

TEST_CASE("csv parser handles quoting, embedded newlines and CRLF") {
    auto recs = csv::parse("a,b\r\n\"x, \"\"y\"\"\",\"line1\nline2\"\n\n3,\n");
    REQUIRE(recs.size() == 3);
    CHECK(recs[1].fields == csv::Row{"x, \"y\"", "line1\nline2"});
    CHECK(recs[2].line == 5);
    CHECK(recs[2].fields == csv::Row{"3", ""});
    CHECK_THROWS_AS(csv::parse("\"open"), DataError);
}

TEST_CASE("load_compact parses the label column") {
    testing::TempDir dir("corpus");
    auto path = dir.file("compact.csv");
    testing::write_text(path,
                        "text,labels,id\n"
                        "\"WHY THE F\",\"2\",eebbqej\n"
                        "\"We need m\",\"8,20\",ed00q6i\n"
                        "\"hello\",\"\",x3\n");
    auto ds = load_compact(path, vocab_n(28));
    REQUIRE(ds.size() == 3);
    CHECK(ds.samples[0].gold == LabelSet{2});
    CHECK(ds.samples[0].id == "eebbqej");
    CHECK(ds.samples[1].gold == LabelSet{8, 20});
    CHECK(ds.samples[2].gold.empty());
    CHECK_FALSE(ds.samples[0].intensities.has_value());
}

TEST_CASE("load_compact errors name the row") {
    testing::TempDir dir("corpus");
    auto path = dir.file("bad.csv");

    testing::write_text(path, "text,labels\n\"ok\",\"1\"\n\"bad\",\"1\",\"extra\"\n");
    CHECK_THROWS_WITH_AS(load_compact(path, vocab_n(28)), doctest::Contains("data row 2"), DataError);

    testing::write_text(path, "text,labels\n\"ok\",\"1\"\n\"bad\",\"28\"\n");
    try {
        load_compact(path, vocab_n(28));
        FAIL("expected DataError");
    } catch (const DataError& e) {
        std::string what = e.what();
        CHECK(what.find("data row 2") != std::string::npos);
        CHECK(what.find("28") != std::string::npos);
    }

    CHECK_THROWS_AS(load_compact(dir.file("missing.csv"), vocab_n(3)), DataError);
}

TEST_CASE("load_full reads intensities and rebuilds the vocabulary") {
    testing::TempDir dir("corpus");
    auto path = dir.file("full.csv");
    testing::write_text(path,
                        "text,labels,admiration,amusement,anger\n"
                        "\"Damn yout\",\"0\",10,1.63,1.53\n"
                        "\"quiet\",\"\",0,0,0\n");
    auto ds = load_full(path);
    CHECK(ds.vocab.names() == std::vector<std::string>{"admiration", "amusement", "anger"});
    REQUIRE(ds.size() == 2);
    CHECK(ds.samples[0].gold == LabelSet{0});
    CHECK((*ds.samples[0].intensities)[0] == 10.0);
    CHECK((*ds.samples[0].intensities)[1] == doctest::Approx(1.63));
    CHECK(ds.samples[1].gold.empty());
    CHECK(*ds.samples[1].intensities == IntensityVector{0, 0, 0});
}

TEST_CASE("load_full rejects bad intensities and unknown columns") {
    testing::TempDir dir("corpus");
    auto path = dir.file("full.csv");
    testing::write_text(path, "text,labels,a,b\n\"t\",\"0\",10.5,0\n");
    CHECK_THROWS_WITH_AS(load_full(path), doctest::Contains("outside [0,10]"), DataError);
    testing::write_text(path, "text,labels,a,b\n\"t\",\"0\",high,0\n");
    CHECK_THROWS_WITH_AS(load_full(path), doctest::Contains("non-numeric"), DataError);
    testing::write_text(path, "text,labels,a,zzz\n\"t\",\"0\",1,0\n");
    LabelVocabulary expected({"a", "b"});
    CHECK_THROWS_WITH_AS(load_full(path, &expected), doctest::Contains("unknown label column"), DataError);
    testing::write_text(path, "text,labels\n\"t\",\"0\"\n");
    CHECK_THROWS_WITH_AS(load_full(path), doctest::Contains("no intensity columns"), DataError);
}

TEST_CASE("emit_full writes fixed 2-decimal rows") {
    Dataset ds{LabelVocabulary({"a", "b"}), {}, Split::train};
    ds.samples.push_back({"s1", "t", {0}, IntensityVector{10.0, 0.0}});
    ds.samples.push_back({"s2", "", {}, IntensityVector{0.004, 9.999}});
    auto text = format_full(ds);
    CHECK(text == "text,labels,a,b\n\"t\",\"0\",10.00,0.00\n\"\",\"\",0.00,10.00\n");

    ds.samples.push_back({"s3", "x", {}, std::nullopt});
    CHECK_THROWS_WITH_AS(format_full(ds), doctest::Contains("s3"), DataError);
}

TEST_CASE("emit_full then load_full round-trips within rounding") {
    testing::TempDir dir("corpus");
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> value(0.0, 10.0);
    std::bernoulli_distribution coin(0.3);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t C = 2 + trial % 7;
        Dataset ds{vocab_n(C), {}, Split::train};
        for (int i = 0; i < 15; ++i) {
            Sample s;
            s.id = "s" + std::to_string(i);
            s.text = (i % 4 == 0) ? std::string("comma, \"quote\"\nnewline") : "text " + std::to_string(i);
            IntensityVector v(C);
            for (std::size_t j = 0; j < C; ++j) {
                v[j] = value(rng);
                if (coin(rng)) s.gold.push_back(j);
            }
            s.intensities = v;
            ds.samples.push_back(s);
        }
        auto path = dir.file("rt.csv");
        emit_full(ds, path);
        auto back = load_full(path);
        CHECK(back.vocab == ds.vocab);
        REQUIRE(back.size() == ds.size());
        for (std::size_t i = 0; i < ds.size(); ++i) {
            CHECK(back.samples[i].text == ds.samples[i].text);
            CHECK(back.samples[i].gold == ds.samples[i].gold);
            for (std::size_t j = 0; j < C; ++j) {
                CHECK(std::abs((*back.samples[i].intensities)[j] - (*ds.samples[i].intensities)[j]) <= 0.005 + 1e-12);
            }
        }
        CHECK(format_full(ds) == testing::read_text(path));
    }
}

TEST_CASE("compact emit and reload preserve order, ids and gold") {
    testing::TempDir dir("corpus");
    Dataset ds{vocab_n(4), {}, Split::train};
    ds.samples.push_back({"a", "first", {1, 3}, std::nullopt});
    ds.samples.push_back({"b", "second", {}, std::nullopt});
    auto path = dir.file("c.csv");
    emit_compact(ds, path);
    auto back = load_compact(path, ds.vocab);
    REQUIRE(back.size() == 2);
    CHECK(back.samples[0].id == "a");
    CHECK(back.samples[0].gold == LabelSet{1, 3});
    CHECK(back.samples[1].text == "second");
    // load_any picks the layout from the header.
    CHECK(load_any(path, &ds.vocab).size() == 2);
    CHECK_THROWS_AS(load_any(path, nullptr), DataError);
}
