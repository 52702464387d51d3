#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "revsent/common.hpp"

namespace revsent {

// Attribute values carried alongside the review text. Categories arrive as a
// string list; everything else is numeric, boolean, or free text.
using MetaValue = std::variant<double, bool, std::string, std::vector<std::string>>;

struct RawReview {
    std::string review_id;
    int stars = 0;  // 1..5
    std::string text;
    std::optional<double> sentiment_score;  // [-5, 5] when present
    std::string restaurant_name;
    std::optional<std::int64_t> date_unix;
    std::map<std::string, MetaValue> meta;
};

struct LabeledDataset {
    std::vector<RawReview> records;
    std::vector<int> labels_binary;       // 1 iff stars >= 4
    std::vector<int> labels_five;         // stars - 1
    std::vector<double> targets_sentiment;

    std::size_t size() const { return records.size(); }
    bool empty() const { return records.empty(); }
};

inline int binary_label(int stars) { return stars >= 4 ? 1 : 0; }

struct SplitSpec {
    double train_frac = 0.70;
    double val_frac = 0.15;
    double test_frac = 0.15;
    std::uint64_t seed = 0;
    bool stratify = false;
};

struct CorrelationMatrix {
    std::vector<std::string> names;
    std::vector<std::vector<double>> values;
};

}  // namespace revsent
