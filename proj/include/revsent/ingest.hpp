#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <numeric>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "revsent/review.hpp"

namespace revsent {

// ---- date handling -------------------------------------------------------

// Days since epoch for a civil date (Howard Hinnant's algorithm).
inline std::int64_t days_from_civil(int y, int m, int d) {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153u * (unsigned(m) + (m > 2 ? -3 : 9)) + 2) / 5 + unsigned(d) - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

// Accepts `YYYY-MM-DD` with an optional ` HH:MM:SS` suffix.
inline std::int64_t parse_date_unix(const std::string& s) {
    int y, mo, d, h = 0, mi = 0, se = 0;
    char dash1, dash2;
    std::istringstream is(s);
    if (!(is >> y >> dash1 >> mo >> dash2 >> d) || dash1 != '-' || dash2 != '-')
        throw ParseError("bad date `" + s + "` (expected YYYY-MM-DD[ HH:MM:SS])");
    std::string rest;
    std::getline(is, rest);
    if (!rest.empty()) {
        char c1, c2;
        std::istringstream ts(rest);
        if (!(ts >> h >> c1 >> mi >> c2 >> se) || c1 != ':' || c2 != ':')
            throw ParseError("bad time in date `" + s + "`");
    }
    return days_from_civil(y, mo, d) * 86400 + h * 3600 + mi * 60 + se;
}

// ---- AFINN ---------------------------------------------------------------

class AfinnLexicon {
public:
    AfinnLexicon() = default;

    static AfinnLexicon load(const std::string& path) {
        std::ifstream f(path);
        if (!f) throw RevsentError("cannot read lexicon file " + path);
        AfinnLexicon lex;
        std::string line;
        int lineno = 0;
        while (std::getline(f, line)) {
            ++lineno;
            if (line.empty()) continue;
            auto tab = line.find('\t');
            if (tab == std::string::npos)
                throw ParseError(path + ":" + std::to_string(lineno) + ": expected word<TAB>score");
            lex.scores_[line.substr(0, tab)] = std::stoi(line.substr(tab + 1));
        }
        return lex;
    }

    void set(const std::string& word, int score) { scores_[word] = score; }
    std::size_t size() const { return scores_.size(); }

    // Mean lexicon score over matched tokens, clamped to [-5, 5]; 0 when no
    // token matches.
    double score(const std::string& text) const {
        double sum = 0;
        int matched = 0;
        std::string tok;
        auto flush = [&] {
            if (!tok.empty()) {
                auto it = scores_.find(tok);
                if (it != scores_.end()) {
                    sum += it->second;
                    ++matched;
                }
                tok.clear();
            }
        };
        for (char ch : text) {
            unsigned char c = static_cast<unsigned char>(ch);
            if (std::isalnum(c) || c == '\'')
                tok.push_back(char(std::tolower(c)));
            else
                flush();
        }
        flush();
        if (matched == 0) return 0.0;
        return std::clamp(sum / matched, -5.0, 5.0);
    }

private:
    std::unordered_map<std::string, int> scores_;
};

// ---- loading -------------------------------------------------------------

enum class ReviewFormat { JsonLines, Csv };

inline ReviewFormat format_from_path(const std::string& path) {
    if (path.size() >= 4 && path.substr(path.size() - 4) == ".csv") return ReviewFormat::Csv;
    return ReviewFormat::JsonLines;
}

namespace detail {

inline void check_stars(int stars, const std::string& where) {
    if (stars < 1 || stars > 5)
        throw ParseError(where + ": stars value " + std::to_string(stars) + " outside 1..5");
}

inline bool looks_numeric(const std::string& s, double& out) {
    if (s.empty()) return false;
    char* end = nullptr;
    out = std::strtod(s.c_str(), &end);
    return end == s.c_str() + s.size();
}

inline std::vector<std::string> parse_csv_row(std::istream& in, bool& ok) {
    std::vector<std::string> cells;
    std::string cell;
    bool in_quotes = false;
    bool any = false;
    int ch;
    while ((ch = in.get()) != EOF) {
        any = true;
        char c = char(ch);
        if (in_quotes) {
            if (c == '"') {
                if (in.peek() == '"') { cell.push_back('"'); in.get(); }
                else in_quotes = false;
            } else cell.push_back(c);
        } else if (c == '"') {
            in_quotes = true;
        } else if (c == ',') {
            cells.push_back(cell);
            cell.clear();
        } else if (c == '\n') {
            break;
        } else if (c != '\r') {
            cell.push_back(c);
        }
    }
    ok = any;
    if (any) cells.push_back(cell);
    return cells;
}

inline std::vector<std::string> split_list(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == sep) {
            if (!cur.empty()) out.push_back(cur);
            cur.clear();
        } else if (c != ' ' || !cur.empty()) {
            cur.push_back(c);
        }
    }
    while (!cur.empty() && cur.back() == ' ') cur.pop_back();
    if (!cur.empty()) out.push_back(cur);
    return out;
}

inline RawReview review_from_json(const nlohmann::json& j, const std::string& where) {
    RawReview r;
    if (!j.contains("stars")) throw ParseError(where + ": record missing `stars`");
    if (!j.contains("text")) throw ParseError(where + ": record missing `text`");
    r.stars = j.at("stars").is_number() ? int(std::lround(j.at("stars").get<double>()))
                                        : std::stoi(j.at("stars").get<std::string>());
    check_stars(r.stars, where);
    r.text = j.at("text").get<std::string>();
    {
        std::string trimmed = r.text;
        trimmed.erase(std::remove_if(trimmed.begin(), trimmed.end(),
                                     [](unsigned char c) { return std::isspace(c); }),
                      trimmed.end());
        if (trimmed.empty()) throw ParseError(where + ": empty review text");
    }
    if (j.contains("review_id")) r.review_id = j.at("review_id").get<std::string>();
    if (j.contains("name") && j.at("name").is_string()) r.restaurant_name = j.at("name").get<std::string>();
    if (j.contains("sentiment_score") && j.at("sentiment_score").is_number()) {
        double s = j.at("sentiment_score").get<double>();
        if (s < -5.0 || s > 5.0)
            throw ParseError(where + ": sentiment_score " + std::to_string(s) + " outside [-5,5]");
        r.sentiment_score = s;
    }
    if (j.contains("date") && j.at("date").is_string())
        r.date_unix = parse_date_unix(j.at("date").get<std::string>());
    if (j.contains("categories")) {
        const auto& c = j.at("categories");
        std::vector<std::string> cats;
        if (c.is_array())
            for (const auto& e : c) cats.push_back(e.get<std::string>());
        else if (c.is_string())
            cats = split_list(c.get<std::string>(), ';');
        r.meta["categories"] = cats;
    }
    static const std::vector<std::string> handled = {"stars", "text", "review_id", "name",
                                                     "sentiment_score", "date", "categories"};
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (std::find(handled.begin(), handled.end(), it.key()) != handled.end()) continue;
        const auto& v = it.value();
        if (v.is_boolean()) r.meta[it.key()] = v.get<bool>();
        else if (v.is_number()) r.meta[it.key()] = v.get<double>();
        else if (v.is_string()) r.meta[it.key()] = v.get<std::string>();
        // nulls and nested objects are treated as absent
    }
    return r;
}

}  // namespace detail

inline std::vector<RawReview> load_raw_reviews(const std::string& path, ReviewFormat fmt) {
    std::ifstream f(path);
    if (!f) throw RevsentError("cannot read " + path);
    std::vector<RawReview> out;
    if (fmt == ReviewFormat::JsonLines) {
        std::string line;
        int lineno = 0;
        while (std::getline(f, line)) {
            ++lineno;
            if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
            const std::string where = path + ":" + std::to_string(lineno);
            nlohmann::json j;
            try {
                j = nlohmann::json::parse(line);
            } catch (const nlohmann::json::exception& e) {
                throw ParseError(where + ": invalid JSON: " + e.what());
            }
            out.push_back(detail::review_from_json(j, where));
        }
    } else {
        bool ok = false;
        auto header = detail::parse_csv_row(f, ok);
        if (!ok) throw ParseError(path + ": empty CSV file");
        int lineno = 1;
        while (true) {
            auto row = detail::parse_csv_row(f, ok);
            if (!ok) break;
            ++lineno;
            if (row.size() == 1 && row[0].empty()) continue;
            const std::string where = path + ":" + std::to_string(lineno);
            if (row.size() != header.size())
                throw ParseError(where + ": " + std::to_string(row.size()) + " cells, header has " +
                                 std::to_string(header.size()));
            nlohmann::json j;
            for (std::size_t i = 0; i < header.size(); ++i) {
                const auto& key = header[i];
                const auto& cell = row[i];
                if (cell.empty()) continue;
                double num;
                if (key == "text" || key == "review_id" || key == "name" || key == "date" ||
                    key == "categories")
                    j[key] = cell;
                else if (cell == "true" || cell == "True") j[key] = true;
                else if (cell == "false" || cell == "False") j[key] = false;
                else if (detail::looks_numeric(cell, num)) j[key] = num;
                else j[key] = cell;
            }
            out.push_back(detail::review_from_json(j, where));
        }
    }
    return out;
}

// Attach labels; sentiment targets fall back to the AFINN score when the
// record does not carry one.
inline LabeledDataset make_labeled(std::vector<RawReview> records, const AfinnLexicon* lexicon = nullptr) {
    LabeledDataset ds;
    ds.records = std::move(records);
    for (const auto& r : ds.records) {
        ds.labels_binary.push_back(binary_label(r.stars));
        ds.labels_five.push_back(r.stars - 1);
        if (r.sentiment_score)
            ds.targets_sentiment.push_back(*r.sentiment_score);
        else
            ds.targets_sentiment.push_back(lexicon ? lexicon->score(r.text) : 0.0);
    }
    return ds;
}

inline LabeledDataset load_reviews(const std::string& path, ReviewFormat fmt,
                                   const AfinnLexicon* lexicon = nullptr) {
    return make_labeled(load_raw_reviews(path, fmt), lexicon);
}

// ---- splitting -----------------------------------------------------------

namespace detail {

inline LabeledDataset take(const LabeledDataset& ds, const std::vector<std::size_t>& idx) {
    LabeledDataset out;
    for (std::size_t i : idx) {
        out.records.push_back(ds.records[i]);
        out.labels_binary.push_back(ds.labels_binary[i]);
        out.labels_five.push_back(ds.labels_five[i]);
        out.targets_sentiment.push_back(ds.targets_sentiment[i]);
    }
    return out;
}

}  // namespace detail

struct DatasetSplits {
    LabeledDataset train, val, test;
};

// Deterministic shuffle; floor sizes for val/test, remainder to train.
inline DatasetSplits split_dataset(const LabeledDataset& ds, const SplitSpec& spec) {
    const double fsum = spec.train_frac + spec.val_frac + spec.test_frac;
    if (spec.train_frac <= 0 || spec.val_frac <= 0 || spec.test_frac <= 0 || std::abs(fsum - 1.0) > 1e-9)
        throw RevsentError("split fractions must be positive and sum to 1");
    const std::size_t n = ds.size();
    if (n < 3) throw RevsentError("split needs at least 3 records, got " + std::to_string(n));

    std::vector<std::size_t> train_idx, val_idx, test_idx;
    auto assign = [&](std::vector<std::size_t> idx) {
        Rng rng(make_rng(derive_seed(spec.seed, 0xa11)));
        std::shuffle(idx.begin(), idx.end(), rng);
        const std::size_t nv = std::size_t(std::floor(spec.val_frac * double(idx.size())));
        const std::size_t nt = std::size_t(std::floor(spec.test_frac * double(idx.size())));
        std::size_t i = 0;
        for (; i < idx.size() - nv - nt; ++i) train_idx.push_back(idx[i]);
        for (; i < idx.size() - nt; ++i) val_idx.push_back(idx[i]);
        for (; i < idx.size(); ++i) test_idx.push_back(idx[i]);
    };
    if (spec.stratify) {
        std::map<int, std::vector<std::size_t>> by_label;
        for (std::size_t i = 0; i < n; ++i) by_label[ds.labels_five[i]].push_back(i);
        for (auto& [lab, idx] : by_label) assign(idx);
    } else {
        std::vector<std::size_t> idx(n);
        std::iota(idx.begin(), idx.end(), 0);
        assign(std::move(idx));
    }
    if (train_idx.empty() || val_idx.empty() || test_idx.empty())
        throw RevsentError("degenerate split: empty partition for N=" + std::to_string(n));
    return {detail::take(ds, train_idx), detail::take(ds, val_idx), detail::take(ds, test_idx)};
}

// ---- correlation ---------------------------------------------------------

inline CorrelationMatrix correlation_matrix(const std::vector<std::string>& names,
                                            const std::vector<std::vector<double>>& columns) {
    if (names.size() != columns.size()) throw RevsentError("correlation: names/columns count mismatch");
    const std::size_t k = columns.size();
    if (k == 0) return {};
    const std::size_t n = columns[0].size();
    if (n < 2) throw RevsentError("correlation needs at least 2 rows");
    for (const auto& c : columns)
        if (c.size() != n) throw RevsentError("correlation: column length mismatch");

    std::vector<double> means(k, 0.0), sds(k, 0.0);
    for (std::size_t j = 0; j < k; ++j) {
        for (double v : columns[j]) means[j] += v;
        means[j] /= double(n);
        for (double v : columns[j]) sds[j] += (v - means[j]) * (v - means[j]);
        sds[j] = std::sqrt(sds[j]);
    }
    CorrelationMatrix cm;
    cm.names = names;
    cm.values.assign(k, std::vector<double>(k, 0.0));
    for (std::size_t a = 0; a < k; ++a) {
        cm.values[a][a] = 1.0;
        for (std::size_t b = a + 1; b < k; ++b) {
            double r = 0.0;
            if (sds[a] > 0 && sds[b] > 0) {
                double cov = 0;
                for (std::size_t i = 0; i < n; ++i)
                    cov += (columns[a][i] - means[a]) * (columns[b][i] - means[b]);
                r = std::clamp(cov / (sds[a] * sds[b]), -1.0, 1.0);
            }
            cm.values[a][b] = cm.values[b][a] = r;  // constant columns stay 0
        }
    }
    return cm;
}

}  // namespace revsent
