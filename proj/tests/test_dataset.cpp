#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "annocheck/dataset.hpp"
#include "annocheck/errors.hpp"
#include "annocheck/text.hpp"
#include "support/fixtures.hpp"

using namespace annocheck;
using annocheck::testing::TempDir;
using annocheck::testing::write_file;

namespace {
const CategorySet kCategories = CategorySet::default_contribution_types();
}

TEST_CASE("category set validates keys") {
    CHECK_THROWS_AS(CategorySet({{"A", "One", ""}}), ConfigError);
    CHECK_THROWS_AS(CategorySet({{"A", "One", ""}, {"A", "Two", ""}}), ConfigError);
    CHECK_THROWS_AS(CategorySet({{"A", "One", ""}, {"", "Two", ""}}), ConfigError);
    CHECK_THROWS_AS(CategorySet({{"A", "", ""}, {"B", "Two", ""}}), ConfigError);
    CHECK(kCategories.k() == 3);
    CHECK(kCategories.index_of("B") == 1);
    CHECK(kCategories.index_of("Z") == -1);
}

TEST_CASE("empty corpus file loads as empty list") {
    TempDir dir("dataset");
    write_file(dir / "empty.jsonl", "");
    CHECK(load_corpus(dir / "empty.jsonl", kCategories).empty());
}

TEST_CASE("unknown expert label is rejected") {
    TempDir dir("dataset");
    write_file(dir / "bad.jsonl",
               R"({"id": "x", "title": "t", "abstract": "a", "expert_label": "D"})"
               "\n");
    CHECK_THROWS_AS(load_corpus(dir / "bad.jsonl", kCategories), UnknownLabelError);
}

TEST_CASE("duplicate ids are rejected") {
    TempDir dir("dataset");
    std::string line = R"({"id": "x", "title": "t", "abstract": "a", "expert_label": "A"})";
    write_file(dir / "dup.jsonl", line + "\n" + line + "\n");
    CHECK_THROWS_AS(load_corpus(dir / "dup.jsonl", kCategories), DuplicateIdError);
}

TEST_CASE("missing required fields are rejected with the field name") {
    TempDir dir("dataset");
    write_file(dir / "missing.jsonl", R"({"id": "x", "title": "t", "expert_label": "A"})"
                                      "\n");
    try {
        load_corpus(dir / "missing.jsonl", kCategories);
        FAIL("expected MissingFieldError");
    } catch (const MissingFieldError& e) {
        CHECK(e.id() == "x");
        CHECK(e.field() == "abstract");
    }
}

TEST_CASE("malformed JSON reports the line number") {
    TempDir dir("dataset");
    write_file(dir / "broken.jsonl",
               R"({"id": "x", "title": "t", "abstract": "a", "expert_label": "A"})"
               "\nnot json\n");
    try {
        load_corpus(dir / "broken.jsonl", kCategories);
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line() == 2);
    }
}

TEST_CASE("value domain violations are parse errors") {
    TempDir dir("dataset");
    write_file(dir / "neg.jsonl",
               R"({"id": "x", "title": "t", "abstract": "a", "expert_label": "A", "citations_3yr": -1})"
               "\n");
    CHECK_THROWS_AS(load_corpus(dir / "neg.jsonl", kCategories), ParseError);
    write_file(dir / "team.jsonl",
               R"({"id": "x", "title": "t", "abstract": "a", "expert_label": "A", "team_size": 0})"
               "\n");
    CHECK_THROWS_AS(load_corpus(dir / "team.jsonl", kCategories), ParseError);
    write_file(dir / "blank.jsonl",
               R"({"id": "x", "title": "t", "abstract": "   ", "expert_label": "A"})"
               "\n");
    CHECK_THROWS_AS(load_corpus(dir / "blank.jsonl", kCategories), ParseError);
}

TEST_CASE("bundled 5-row sample fixture") {
    const auto corpus =
        load_corpus(std::filesystem::path(ANNOCHECK_SOURCE_DIR) / "data/sample_corpus.jsonl",
                    kCategories);
    REQUIRE(corpus.size() == 5);
    const CorpusSummary summary = summarize(corpus, kCategories);
    CHECK(summary.class_counts[0] == std::pair<std::string, std::size_t>{"A", 1});
    CHECK(summary.class_counts[1] == std::pair<std::string, std::size_t>{"B", 1});
    CHECK(summary.class_counts[2] == std::pair<std::string, std::size_t>{"C", 3});
    for (const auto& doc : corpus) CHECK(doc.has_covariates());
}

TEST_CASE("whitespace is normalized on load") {
    TempDir dir("dataset");
    write_file(dir / "ws.jsonl",
               "{\"id\": \"x\", \"title\": \"  a\\n b \", \"abstract\": \"one\\ttwo\\n three\", "
               "\"expert_label\": \"A\"}\n");
    const auto corpus = load_corpus(dir / "ws.jsonl", kCategories);
    REQUIRE(corpus.size() == 1);
    CHECK(corpus[0].title == "a b");
    CHECK(corpus[0].abstract_text == "one two three");
}

TEST_CASE("covariates may be absent") {
    TempDir dir("dataset");
    write_file(dir / "nocov.jsonl",
               R"({"id": "x", "title": "t", "abstract": "a", "expert_label": "A"})"
               "\n");
    const auto corpus = load_corpus(dir / "nocov.jsonl", kCategories);
    REQUIRE(corpus.size() == 1);
    CHECK_FALSE(corpus[0].has_covariates());
    CHECK_FALSE(corpus[0].citations_3yr.has_value());
}

TEST_CASE("CSV fallback parses the same documents as JSONL") {
    TempDir dir("dataset");
    std::vector<Document> docs = {testing::make_document("c1", "A", 0),
                                  testing::make_document("c2", "C", 1)};
    docs[1].abstract_text = "Contains, commas and \"quotes\" in one field.";
    write_corpus_jsonl(dir / "docs.jsonl", docs);

    std::ostringstream csv;
    csv << "id,title,abstract,expert_label,citations_3yr,year,team_size\n";
    for (const auto& d : docs) {
        csv << d.id << ',' << csv_escape(d.title) << ',' << csv_escape(d.abstract_text) << ','
            << d.expert_label << ',' << *d.citations_3yr << ',' << *d.year << ',' << *d.team_size
            << '\n';
    }
    write_file(dir / "docs.csv", csv.str());

    const auto from_jsonl = load_corpus(dir / "docs.jsonl", kCategories);
    const auto from_csv = load_corpus(dir / "docs.csv", kCategories);
    REQUIRE(from_csv.size() == from_jsonl.size());
    for (std::size_t i = 0; i < from_csv.size(); ++i) {
        CHECK(document_to_jsonl(from_csv[i]) == document_to_jsonl(from_jsonl[i]));
    }
}

TEST_CASE("summarize shares") {
    SUBCASE("816-document split") {
        std::vector<Document> docs;
        for (int i = 0; i < 62; ++i) docs.push_back(testing::make_document("a" + std::to_string(i), "A", i));
        for (int i = 0; i < 109; ++i) docs.push_back(testing::make_document("b" + std::to_string(i), "B", i));
        for (int i = 0; i < 645; ++i) docs.push_back(testing::make_document("c" + std::to_string(i), "C", i));
        const CorpusSummary summary = summarize(docs, kCategories);
        CHECK(summary.n == 816);
        CHECK(summary.class_shares[0].second == doctest::Approx(0.076).epsilon(0.01));
        CHECK(summary.class_shares[1].second == doctest::Approx(0.134).epsilon(0.01));
        CHECK(summary.class_shares[2].second == doctest::Approx(0.790).epsilon(0.01));
    }
    SUBCASE("single class") {
        std::vector<Document> docs;
        for (int i = 0; i < 4; ++i) docs.push_back(testing::make_document("d" + std::to_string(i), "C", i));
        const CorpusSummary summary = summarize(docs, kCategories);
        CHECK(summary.class_shares[2].second == 1.0);
        CHECK(summary.class_counts[0].second == 0);
    }
    SUBCASE("symmetric split") {
        std::vector<Document> docs;
        for (int i = 0; i < 5; ++i) docs.push_back(testing::make_document("a" + std::to_string(i), "A", i));
        for (int i = 0; i < 5; ++i) docs.push_back(testing::make_document("b" + std::to_string(i), "B", i));
        const CorpusSummary summary = summarize(docs, kCategories);
        CHECK(summary.class_shares[0].second == 0.5);
        CHECK(summary.class_shares[1].second == 0.5);
    }
    SUBCASE("empty corpus rejected") {
        CHECK_THROWS_AS(summarize({}, kCategories), EmptyCorpusError);
    }
}

TEST_CASE("counts sum to n for random corpora") {
    std::mt19937 rng(7);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<Document> docs;
        const int n = 1 + static_cast<int>(rng() % 50);
        for (int i = 0; i < n; ++i) {
            const char* labels[] = {"A", "B", "C"};
            docs.push_back(testing::make_document("d" + std::to_string(i), labels[rng() % 3], i));
        }
        const CorpusSummary summary = summarize(docs, kCategories);
        std::size_t total = 0;
        double share_total = 0.0;
        for (const auto& [key, count] : summary.class_counts) total += count;
        for (const auto& [key, share] : summary.class_shares) share_total += share;
        CHECK(total == summary.n);
        CHECK(share_total == doctest::Approx(1.0).epsilon(1e-9));
    }
}

TEST_CASE("documents round-trip byte-identically through the export format") {
    TempDir dir("dataset");
    std::vector<Document> docs = {testing::make_document("r1", "A", 0),
                                  testing::make_document("r2", "B", 3)};
    docs[0].citations_3yr.reset();  // absent covariate stays absent
    write_corpus_jsonl(dir / "one.jsonl", docs);

    const auto loaded = load_corpus(dir / "one.jsonl", kCategories);
    write_corpus_jsonl(dir / "two.jsonl", loaded);
    const auto reloaded = load_corpus(dir / "two.jsonl", kCategories);
    write_corpus_jsonl(dir / "three.jsonl", reloaded);

    std::ifstream two(dir / "two.jsonl", std::ios::binary), three(dir / "three.jsonl", std::ios::binary);
    std::stringstream b2, b3;
    b2 << two.rdbuf();
    b3 << three.rdbuf();
    CHECK(b2.str() == b3.str());
    CHECK_FALSE(reloaded[0].citations_3yr.has_value());
}

TEST_CASE("load then summarize is deterministic") {
    const auto path = std::filesystem::path(ANNOCHECK_SOURCE_DIR) / "data/sample_corpus.jsonl";
    const CorpusSummary a = summarize(load_corpus(path, kCategories), kCategories);
    const CorpusSummary b = summarize(load_corpus(path, kCategories), kCategories);
    CHECK(a.n == b.n);
    CHECK(a.class_counts == b.class_counts);
    CHECK(a.class_shares == b.class_shares);
}
