#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <string>
#include <vector>

#include "revsent/ingest.hpp"
#include "revsent/review.hpp"
#include "revsent/tensor.hpp"

namespace testutil {

using revsent::real;

// Central finite differences of f() with respect to the data of `param`,
// where f recomputes the scalar from current parameter values.
inline std::vector<double> finite_diff(const std::function<double()>& f, revsent::Tensor param,
                                       double eps) {
    std::vector<double> g(param.size());
    for (std::size_t i = 0; i < param.size(); ++i) {
        const real saved = param.data()[i];
        param.data()[i] = real(double(saved) + eps);
        const double fp = f();
        param.data()[i] = real(double(saved) - eps);
        const double fm = f();
        param.data()[i] = saved;
        g[i] = (fp - fm) / (2 * eps);
    }
    return g;
}

// max |analytic - numeric| / max(1e-8, |analytic| + |numeric|) over elements
inline double max_rel_err(const std::vector<real>& analytic, const std::vector<double>& numeric) {
    double worst = 0;
    for (std::size_t i = 0; i < analytic.size(); ++i) {
        const double a = double(analytic[i]);
        const double n = numeric[i];
        const double denom = std::max(1e-4, std::fabs(a) + std::fabs(n));
        worst = std::max(worst, std::fabs(a - n) / denom);
    }
    return worst;
}

// ---- synthetic planted-signal corpus -------------------------------------

struct SyntheticConfig {
    std::size_t n_reviews = 200;
    std::uint64_t seed = 7;
    double label_noise = 0.0;   // probability of flipping the star label
    bool with_negation = false; // "not <word>" flips that word's polarity
};

inline const std::vector<std::string>& positive_words() {
    static const std::vector<std::string> w = {"delicious", "amazing", "fantastic", "wonderful",
                                              "superb",    "tasty",   "friendly",  "excellent"};
    return w;
}

inline const std::vector<std::string>& negative_words() {
    static const std::vector<std::string> w = {"awful", "terrible", "bland",    "rude",
                                              "dirty", "stale",    "horrible", "mediocre"};
    return w;
}

inline const std::vector<std::string>& filler_words() {
    static const std::vector<std::string> w = {
        "food",  "service", "place",   "ordered", "table", "evening", "menu",   "dish",
        "staff", "dinner",  "lunch",   "plate",   "drink", "visit",   "corner", "kitchen",
        "came",  "tried",   "brought", "looked"};
    return w;
}

// Reviews whose star label is determined by planted sentiment words, with a
// correlated numeric meta feature and a noisy categorical attribute.
inline revsent::LabeledDataset make_synthetic_corpus(const SyntheticConfig& cfg) {
    revsent::Rng rng(revsent::make_rng(cfg.seed));
    std::uniform_int_distribution<int> coin(0, 1);
    std::uniform_int_distribution<std::size_t> pick_pos(0, positive_words().size() - 1);
    std::uniform_int_distribution<std::size_t> pick_neg(0, negative_words().size() - 1);
    std::uniform_int_distribution<std::size_t> pick_fill(0, filler_words().size() - 1);
    std::uniform_int_distribution<int> n_sent(2, 4);
    std::uniform_int_distribution<int> n_fill(2, 4);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_real_distribution<double> noise(-0.5, 0.5);
    static const std::vector<std::string> restaurants = {"golden fork", "blue plate", "corner bistro",
                                                         "sunset grill", "river cafe"};
    static const std::vector<std::string> cuisines = {"Italian", "Mexican", "Thai", "Diner"};

    std::vector<revsent::RawReview> records;
    for (std::size_t i = 0; i < cfg.n_reviews; ++i) {
        const int label = coin(rng);  // 1 positive, 0 negative
        int signal = 0;
        std::string text;
        const int sentences = n_sent(rng);
        for (int s = 0; s < sentences; ++s) {
            std::string sent;
            const int fillers = n_fill(rng);
            for (int k = 0; k < fillers; ++k) {
                if (!sent.empty()) sent += ' ';
                sent += filler_words()[pick_fill(rng)];
            }
            // plant one signal word per sentence
            bool negated = cfg.with_negation && unit(rng) < 0.35;
            bool pos_word = label == 1;
            if (negated) pos_word = !pos_word;  // "not good" reads negative
            std::string w = pos_word ? positive_words()[pick_pos(rng)]
                                     : negative_words()[pick_neg(rng)];
            sent += negated ? " not " + w : " " + w;
            signal += (pos_word ? 1 : -1) * (negated ? -1 : 1);
            text += sent + ". ";
        }
        revsent::RawReview r;
        r.review_id = "syn-" + std::to_string(i);
        int stars_label = label;
        if (cfg.label_noise > 0 && unit(rng) < cfg.label_noise) stars_label = 1 - stars_label;
        r.stars = stars_label == 1 ? (coin(rng) ? 5 : 4) : 1 + int(unit(rng) * 3);
        if (r.stars > 3 && stars_label == 0) r.stars = 3;
        r.text = text;
        r.sentiment_score = std::clamp(double(signal) * 1.5 + noise(rng), -5.0, 5.0);
        r.restaurant_name = restaurants[i % restaurants.size()];
        r.date_unix = 1'500'000'000 + std::int64_t(i) * 86'400;
        r.meta["price_level"] = double(label) * 2.0 + noise(rng);  // correlated with label
        r.meta["review_len"] = double(text.size());
        r.meta["takeout"] = bool(coin(rng));
        r.meta["categories"] = std::vector<std::string>{cuisines[i % cuisines.size()]};
        records.push_back(std::move(r));
    }
    return revsent::make_labeled(std::move(records));
}

inline void write_jsonl(const revsent::LabeledDataset& ds, const std::string& path) {
    std::ofstream f(path);
    for (const auto& r : ds.records) {
        nlohmann::json j;
        j["review_id"] = r.review_id;
        j["stars"] = r.stars;
        j["text"] = r.text;
        if (r.sentiment_score) j["sentiment_score"] = *r.sentiment_score;
        j["name"] = r.restaurant_name;
        for (const auto& [k, v] : r.meta) {
            if (std::holds_alternative<double>(v)) j[k] = std::get<double>(v);
            else if (std::holds_alternative<bool>(v)) j[k] = std::get<bool>(v);
            else if (std::holds_alternative<std::string>(v)) j[k] = std::get<std::string>(v);
            else j[k] = std::get<std::vector<std::string>>(v);
        }
        f << j.dump() << '\n';
    }
}

}  // namespace testutil
