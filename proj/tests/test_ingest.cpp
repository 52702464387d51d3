#include <catch2/catch_amalgamated.hpp>

#include <fstream>
#include <set>

#include "helpers.hpp"
#include "revsent/ingest.hpp"

using namespace revsent;
using Catch::Approx;

namespace {

void write_file(const std::string& path, const std::string& body) {
    std::ofstream f(path);
    f << body;
}

AfinnLexicon tiny_lexicon() {
    AfinnLexicon lex;
    lex.set("good", 3);
    lex.set("great", 3);
    lex.set("bad", -3);
    lex.set("abhorrent", -5);
    lex.set("superb", 5);
    return lex;
}

}  // namespace

TEST_CASE("date parsing matches known epoch values") {
    CHECK(parse_date_unix("1970-01-01") == 0);
    CHECK(parse_date_unix("1970-01-02") == 86400);
    CHECK(parse_date_unix("2000-01-01") == 946684800);   // independent: date -d
    CHECK(parse_date_unix("2016-07-12 15:30:07") == 1468337407);
    CHECK(parse_date_unix("1969-12-31") == -86400);
    CHECK_THROWS_AS(parse_date_unix("July 12"), ParseError);
}

TEST_CASE("afinn score is the mean of matched tokens, clamped") {
    AfinnLexicon lex = tiny_lexicon();
    CHECK(lex.score("good") == Approx(3.0));
    CHECK(lex.score("Good GREAT bad") == Approx(1.0));           // (3+3-3)/3
    CHECK(lex.score("the soup arrived cold") == Approx(0.0));    // no matches
    CHECK(lex.score("good, great... bad!") == Approx(1.0));      // punctuation split
    CHECK(lex.score("superb superb superb") == Approx(5.0));
    CHECK(lex.score("abhorrent") == Approx(-5.0));
    CHECK(lex.score("") == Approx(0.0));
}

TEST_CASE("afinn lexicon file loads tab-separated entries") {
    write_file("afinn_tiny.txt", "good\t3\nbad\t-3\n");
    AfinnLexicon lex = AfinnLexicon::load("afinn_tiny.txt");
    CHECK(lex.size() == 2);
    CHECK(lex.score("good bad good") == Approx(1.0));
    write_file("afinn_bad.txt", "good 3\n");
    CHECK_THROWS_WITH(AfinnLexicon::load("afinn_bad.txt"),
                      Catch::Matchers::ContainsSubstring("afinn_bad.txt:1"));
}

TEST_CASE("jsonl loading captures fields and meta") {
    write_file("reviews.jsonl",
               R"({"review_id":"a","stars":5,"text":"great food","name":"blue plate",)"
               R"("sentiment_score":2.5,"date":"2016-07-12","price_level":2,"takeout":true,)"
               R"("categories":["Thai","Vegan"]})"
               "\n"
               R"({"stars":2,"text":"bad service","extra":null})"
               "\n");
    auto records = load_raw_reviews("reviews.jsonl", ReviewFormat::JsonLines);
    REQUIRE(records.size() == 2);
    const RawReview& r = records[0];
    CHECK(r.review_id == "a");
    CHECK(r.stars == 5);
    CHECK(r.restaurant_name == "blue plate");
    CHECK(r.sentiment_score.value() == Approx(2.5));
    CHECK(r.date_unix.value() == parse_date_unix("2016-07-12"));
    CHECK(std::get<double>(r.meta.at("price_level")) == Approx(2.0));
    CHECK(std::get<bool>(r.meta.at("takeout")) == true);
    CHECK(std::get<std::vector<std::string>>(r.meta.at("categories")) ==
          std::vector<std::string>{"Thai", "Vegan"});
    CHECK(records[1].meta.count("extra") == 0);  // nulls dropped
}

TEST_CASE("csv loading agrees with jsonl for the same records") {
    write_file("reviews.csv",
               "review_id,stars,text,name,price_level,categories\n"
               "a,5,\"great, truly great\",\"blue \"\"plate\"\"\",2,Thai; Vegan\n"
               "b,2,bad service,corner bistro,1,Diner\n");
    auto records = load_raw_reviews("reviews.csv", ReviewFormat::Csv);
    REQUIRE(records.size() == 2);
    CHECK(records[0].text == "great, truly great");        // quoted comma survives
    CHECK(records[0].restaurant_name == "blue \"plate\""); // escaped quotes
    CHECK(std::get<double>(records[0].meta.at("price_level")) == Approx(2.0));
    CHECK(std::get<std::vector<std::string>>(records[0].meta.at("categories")) ==
          std::vector<std::string>{"Thai", "Vegan"});
    CHECK(records[1].stars == 2);
}

TEST_CASE("malformed input reports the line number") {
    write_file("bad_stars.jsonl", R"({"stars":9,"text":"x"})" "\n");
    CHECK_THROWS_WITH(load_raw_reviews("bad_stars.jsonl", ReviewFormat::JsonLines),
                      Catch::Matchers::ContainsSubstring("bad_stars.jsonl:1") &&
                          Catch::Matchers::ContainsSubstring("stars"));
    write_file("bad_json.jsonl", "{\"stars\":5,\"text\":\"ok\"}\nnot json\n");
    CHECK_THROWS_WITH(load_raw_reviews("bad_json.jsonl", ReviewFormat::JsonLines),
                      Catch::Matchers::ContainsSubstring("bad_json.jsonl:2"));
    write_file("bad_width.csv", "stars,text\n5,ok\n4,too,many\n");
    CHECK_THROWS_WITH(load_raw_reviews("bad_width.csv", ReviewFormat::Csv),
                      Catch::Matchers::ContainsSubstring("bad_width.csv:3"));
    write_file("empty_text.jsonl", R"({"stars":3,"text":"   "})" "\n");
    CHECK_THROWS_AS(load_raw_reviews("empty_text.jsonl", ReviewFormat::JsonLines), ParseError);
    write_file("bad_sent.jsonl", R"({"stars":3,"text":"x","sentiment_score":7.0})" "\n");
    CHECK_THROWS_AS(load_raw_reviews("bad_sent.jsonl", ReviewFormat::JsonLines), ParseError);
    CHECK_THROWS_AS(load_raw_reviews("no_such_file.jsonl", ReviewFormat::JsonLines), RevsentError);
}

TEST_CASE("labels derive from stars; sentiment falls back to lexicon") {
    AfinnLexicon lex = tiny_lexicon();
    std::vector<RawReview> recs(3);
    recs[0].stars = 4; recs[0].text = "good";
    recs[1].stars = 3; recs[1].text = "bad";
    recs[2].stars = 1; recs[2].text = "meh"; recs[2].sentiment_score = -2.0;
    LabeledDataset ds = make_labeled(recs, &lex);
    CHECK(ds.labels_binary == std::vector<int>{1, 0, 0});
    CHECK(ds.labels_five == std::vector<int>{3, 2, 0});
    CHECK(ds.targets_sentiment[0] == Approx(3.0));
    CHECK(ds.targets_sentiment[1] == Approx(-3.0));
    CHECK(ds.targets_sentiment[2] == Approx(-2.0));  // explicit score wins
}

TEST_CASE("split produces 70/15/15 sizes, disjoint and exhaustive") {
    auto ds = testutil::make_synthetic_corpus({.n_reviews = 200, .seed = 3});
    SplitSpec spec;
    spec.seed = 42;
    DatasetSplits s = split_dataset(ds, spec);
    CHECK(s.val.size() == 30);
    CHECK(s.test.size() == 30);
    CHECK(s.train.size() == 140);
    std::multiset<std::string> ids;
    for (const auto* part : {&s.train, &s.val, &s.test})
        for (const auto& r : part->records) ids.insert(r.review_id);
    CHECK(ids.size() == 200);
    std::set<std::string> unique(ids.begin(), ids.end());
    CHECK(unique.size() == 200);  // no duplicates across partitions
}

TEST_CASE("split is deterministic in the seed") {
    auto ds = testutil::make_synthetic_corpus({.n_reviews = 100, .seed = 5});
    SplitSpec a; a.seed = 7;
    SplitSpec b; b.seed = 8;
    auto ids_of = [](const LabeledDataset& d) {
        std::vector<std::string> v;
        for (const auto& r : d.records) v.push_back(r.review_id);
        return v;
    };
    CHECK(ids_of(split_dataset(ds, a).train) == ids_of(split_dataset(ds, a).train));
    CHECK(ids_of(split_dataset(ds, a).train) != ids_of(split_dataset(ds, b).train));
}

TEST_CASE("stratified split preserves label proportions per partition") {
    auto ds = testutil::make_synthetic_corpus({.n_reviews = 400, .seed = 11});
    SplitSpec spec;
    spec.seed = 1;
    spec.stratify = true;
    DatasetSplits s = split_dataset(ds, spec);
    auto frac_pos = [](const LabeledDataset& d) {
        double p = 0;
        for (int y : d.labels_binary) p += y;
        return p / double(d.size());
    };
    const double overall = frac_pos(ds);
    for (const auto* part : {&s.train, &s.val, &s.test})
        CHECK(frac_pos(*part) == Approx(overall).margin(0.06));
    CHECK(s.train.size() + s.val.size() + s.test.size() == 400);
}

TEST_CASE("split rejects bad fractions and tiny datasets") {
    auto ds = testutil::make_synthetic_corpus({.n_reviews = 10, .seed = 1});
    SplitSpec bad;
    bad.train_frac = 0.8; bad.val_frac = 0.15; bad.test_frac = 0.15;
    CHECK_THROWS_AS(split_dataset(ds, bad), RevsentError);
    LabeledDataset two;
    two.records.resize(2);
    two.labels_binary = {0, 1};
    two.labels_five = {0, 4};
    two.targets_sentiment = {0, 0};
    CHECK_THROWS_AS(split_dataset(two, SplitSpec{}), RevsentError);
}

TEST_CASE("pearson correlation matches hand-computed values") {
    // x = [1,2,3,4], y = 2x -> r = 1; z = -x -> r = -1
    std::vector<std::vector<double>> cols = {{1, 2, 3, 4}, {2, 4, 6, 8}, {-1, -2, -3, -4}};
    CorrelationMatrix cm = correlation_matrix({"x", "y", "z"}, cols);
    CHECK(cm.values[0][0] == Approx(1.0));
    CHECK(cm.values[0][1] == Approx(1.0));
    CHECK(cm.values[0][2] == Approx(-1.0));
    CHECK(cm.values[1][2] == Approx(-1.0));
    CHECK(cm.values[2][0] == Approx(cm.values[0][2]));  // symmetric

    // hand value: x=[1,2,3], w=[1,3,2] -> cov=0.5*2=1... compute directly:
    // mean 2 both; cov = (−1·−1 + 0·1 + 1·0) = 1; sd = sqrt(2) both; r = 0.5
    CorrelationMatrix cm2 = correlation_matrix({"x", "w"}, {{1, 2, 3}, {1, 3, 2}});
    CHECK(cm2.values[0][1] == Approx(0.5));
}

TEST_CASE("constant columns yield zero correlation, not NaN") {
    CorrelationMatrix cm = correlation_matrix({"x", "c"}, {{1, 2, 3}, {7, 7, 7}});
    CHECK(cm.values[0][1] == 0.0);
    CHECK(cm.values[1][1] == 1.0);
}

TEST_CASE("correlation on the synthetic corpus finds the planted signal") {
    auto ds = testutil::make_synthetic_corpus({.n_reviews = 300, .seed = 13});
    std::vector<double> stars, price, sent;
    for (std::size_t i = 0; i < ds.size(); ++i) {
        stars.push_back(double(ds.records[i].stars));
        price.push_back(std::get<double>(ds.records[i].meta.at("price_level")));
        sent.push_back(ds.targets_sentiment[i]);
    }
    CorrelationMatrix cm = correlation_matrix({"stars", "price_level", "sentiment"},
                                              {stars, price, sent});
    CHECK(cm.values[0][1] > 0.8);   // price_level planted as 2*label + noise
    CHECK(cm.values[0][2] > 0.8);   // sentiment tracks the label
}
