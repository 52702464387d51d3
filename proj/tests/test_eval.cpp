#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <fstream>
#include <sstream>

#include "revsent/eval.hpp"

using namespace revsent;
using Catch::Approx;

TEST_CASE("evaluate counts a small confusion matrix by hand") {
    // truth:      0 0 1 1
    // prediction: 0 1 1 1
    EvalReport r = evaluate({0, 1, 1, 1}, {0, 0, 1, 1});
    CHECK(r.n == 4);
    CHECK(r.accuracy == Approx(0.75));
    REQUIRE(r.confusion.size() == 2);
    CHECK(r.confusion[0] == std::vector<std::size_t>{1, 1});
    CHECK(r.confusion[1] == std::vector<std::size_t>{0, 2});
    // class 0: precision 1, recall 0.5, f1 = 2/3
    CHECK(r.precision[0] == Approx(1.0));
    CHECK(r.recall[0] == Approx(0.5));
    CHECK(r.f1[0] == Approx(2.0 / 3));
    // class 1: precision 2/3, recall 1, f1 = 0.8
    CHECK(r.precision[1] == Approx(2.0 / 3));
    CHECK(r.recall[1] == Approx(1.0));
    CHECK(r.f1[1] == Approx(0.8));
    CHECK(r.macro_f1 == Approx((2.0 / 3 + 0.8) / 2));
}

TEST_CASE("evaluate handles perfect and absent classes") {
    EvalReport perfect = evaluate({0, 1, 2}, {0, 1, 2});
    CHECK(perfect.accuracy == Approx(1.0));
    CHECK(perfect.macro_f1 == Approx(1.0));
    // class 2 never appears in truth or prediction of the first two entries;
    // predicting into an unused class must not produce NaN
    EvalReport r = evaluate({2, 1}, {0, 1});
    CHECK(std::isfinite(r.macro_f1));
    CHECK(r.f1[2] == 0.0);
    CHECK_THROWS_AS(evaluate({}, {}), RevsentError);
    CHECK_THROWS_AS(evaluate({0}, {0, 1}), RevsentError);
}

TEST_CASE("per-restaurant buckets split on training frequency") {
    std::map<std::string, std::size_t> counts = {{"a", 3}, {"b", 10}, {"c", 50}, {"d", 200}};
    std::vector<std::string> names = {"a", "b", "c", "d", "unseen"};
    std::vector<int> labels = {1, 1, 1, 1, 1};
    std::vector<int> preds = {1, 0, 1, 1, 0};
    auto groups = per_restaurant_bias(preds, labels, names, counts);
    REQUIRE(groups.size() == 5);  // 0, 1-5, 6-20, 21-100, 101+
    CHECK(groups[0].bucket == "0");
    CHECK(groups[0].count == 1);          // "unseen"
    CHECK(groups[0].accuracy == Approx(0.0));
    CHECK(groups[1].bucket == "1-5");
    CHECK(groups[1].accuracy == Approx(1.0));
    CHECK(groups[2].bucket == "6-20");
    CHECK(groups[2].accuracy == Approx(0.0));
    CHECK(groups[3].bucket == "21-100");
    CHECK(groups[3].accuracy == Approx(1.0));
    CHECK(groups[4].bucket == "101+");
    CHECK(groups[4].accuracy == Approx(1.0));
}

TEST_CASE("empty buckets report NaN accuracy rather than zero") {
    auto groups = per_restaurant_bias({1}, {1}, {"x"}, {{"x", 2}});
    CHECK(std::isnan(groups[0].accuracy));   // nothing unseen
    CHECK(groups[0].count == 0);
    CHECK(groups[1].accuracy == Approx(1.0));
    CHECK_THROWS_AS(per_restaurant_bias({1}, {1, 0}, {"x"}, {}), RevsentError);
}

TEST_CASE("report serializes to json with null for empty buckets") {
    EvalReport r = evaluate({0, 1}, {0, 1});
    r.per_group = per_restaurant_bias({0, 1}, {0, 1}, {"x", "y"}, {{"x", 1}, {"y", 1}});
    nlohmann::json j = report_to_json(r);
    CHECK(j["accuracy"] == 1.0);
    CHECK(j["n"] == 2);
    CHECK(j["confusion"][0][0] == 1);
    bool saw_null = false;
    for (const auto& g : j["per_group"]) saw_null |= g["accuracy"].is_null();
    CHECK(saw_null);
}

TEST_CASE("confusion matrix exports as plain csv") {
    EvalReport r = evaluate({0, 1, 1, 1}, {0, 0, 1, 1});
    export_confusion_csv(r, "confusion_test.csv");
    std::ifstream f("confusion_test.csv");
    std::string l1, l2;
    std::getline(f, l1);
    std::getline(f, l2);
    CHECK(l1 == "1,1");
    CHECK(l2 == "0,2");
}

TEST_CASE("loss curves round-trip through csv") {
    TrainHistory h = {{1, 0.9, 0.8, 0.6}, {2, 0.5, 0.45, 0.7}, {3, 0.3, 0.42, 0.75}};
    export_curves(h, "curves_test.csv");
    std::ifstream f("curves_test.csv");
    std::string header;
    std::getline(f, header);
    CHECK(header == "epoch,train_loss,val_loss,val_accuracy");
    TrainHistory back = import_curves("curves_test.csv");
    REQUIRE(back.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(back[i].epoch == h[i].epoch);
        CHECK(back[i].train_loss == Approx(h[i].train_loss));
        CHECK(back[i].val_loss == Approx(h[i].val_loss));
        CHECK(back[i].val_accuracy == Approx(h[i].val_accuracy));
    }
    CHECK_THROWS_AS(export_curves({}, "nope.csv"), RevsentError);
}
