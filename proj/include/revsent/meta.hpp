#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "revsent/review.hpp"

namespace revsent {

struct NumericStat {
    double mean = 0;
    double std = 1;
    bool constant = false;
};

// Meta-feature schema fitted on the train split only. Encoded layout:
// z-scored numerics (name order) ++ z-scored date ++ booleans as 0/1
// ++ category multi-hot.
class MetaSchema {
public:
    static constexpr std::size_t kCategoryCap = 201;

    static MetaSchema fit(const LabeledDataset& train, const std::set<std::string>& drop_list,
                          std::size_t category_cap = kCategoryCap) {
        for (const char* leak : {"stars", "sentiment_score"})
            if (!drop_list.count(leak))
                throw RevsentError("meta schema: drop list must include label-leaking field `" +
                                   std::string(leak) + "`");
        if (train.empty()) throw RevsentError("meta schema: empty train split");

        MetaSchema s;
        s.drop_list_ = drop_list;
        std::map<std::string, std::vector<double>> numeric_values;
        std::set<std::string> boolean_names;
        std::map<std::string, std::size_t> category_counts;
        bool any_date = false;
        std::vector<double> date_values;

        for (const auto& r : train.records) {
            if (r.date_unix) {
                any_date = true;
                date_values.push_back(double(*r.date_unix));
            }
            for (const auto& [name, value] : r.meta) {
                if (drop_list.count(name)) continue;
                if (std::holds_alternative<double>(value))
                    numeric_values[name].push_back(std::get<double>(value));
                else if (std::holds_alternative<bool>(value))
                    boolean_names.insert(name);
                else if (std::holds_alternative<std::vector<std::string>>(value))
                    for (const auto& c : std::get<std::vector<std::string>>(value))
                        ++category_counts[c];
                // free-text attributes are not encoded
            }
        }
        for (const auto& [name, vals] : numeric_values) s.numeric_stats_[name] = stat_of(vals);
        if (any_date && !drop_list.count("date")) {
            s.has_date_ = true;
            s.date_stat_ = stat_of(date_values);
        }
        s.boolean_names_.assign(boolean_names.begin(), boolean_names.end());

        // frequency-ordered, lexicographic tie-break, capped
        std::vector<std::pair<std::string, std::size_t>> ranked(category_counts.begin(),
                                                                category_counts.end());
        std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
            if (a.second != b.second) return a.second > b.second;
            return a.first < b.first;
        });
        for (const auto& [cat, cnt] : ranked) {
            if (s.category_vocab_.size() >= category_cap) break;
            s.category_index_[cat] = int(s.category_vocab_.size());
            s.category_vocab_.push_back(cat);
        }
        return s;
    }

    std::vector<double> encode(const RawReview& r) const {
        std::vector<double> out;
        out.reserve(dim());
        for (const auto& [name, st] : numeric_stats_) {
            double z = 0;
            auto it = r.meta.find(name);
            if (it != r.meta.end() && std::holds_alternative<double>(it->second) && !st.constant)
                z = (std::get<double>(it->second) - st.mean) / st.std;
            out.push_back(z);
        }
        if (has_date_) {
            double z = 0;
            if (r.date_unix && !date_stat_.constant)
                z = (double(*r.date_unix) - date_stat_.mean) / date_stat_.std;
            out.push_back(z);
        }
        for (const auto& name : boolean_names_) {
            auto it = r.meta.find(name);
            out.push_back(it != r.meta.end() && std::holds_alternative<bool>(it->second) &&
                                  std::get<bool>(it->second)
                              ? 1.0
                              : 0.0);
        }
        std::vector<double> hot(category_vocab_.size(), 0.0);
        auto it = r.meta.find("categories");
        if (it != r.meta.end() && std::holds_alternative<std::vector<std::string>>(it->second))
            for (const auto& c : std::get<std::vector<std::string>>(it->second)) {
                auto ci = category_index_.find(c);
                if (ci != category_index_.end()) hot[std::size_t(ci->second)] = 1.0;
            }
        out.insert(out.end(), hot.begin(), hot.end());
        return out;
    }

    std::size_t dim() const {
        return numeric_stats_.size() + (has_date_ ? 1 : 0) + boolean_names_.size() +
               category_vocab_.size();
    }

    const std::vector<std::string>& category_vocab() const { return category_vocab_; }
    const std::map<std::string, NumericStat>& numeric_stats() const { return numeric_stats_; }
    const std::vector<std::string>& boolean_names() const { return boolean_names_; }

    void save(const std::string& path) const {
        std::ofstream f(path);
        if (!f) throw RevsentError("cannot write schema file " + path);
        f.precision(17);
        for (const auto& d : drop_list_) f << "drop " << d << '\n';
        for (const auto& [name, st] : numeric_stats_)
            f << "numeric " << name << ' ' << st.mean << ' ' << st.std << ' ' << st.constant << '\n';
        if (has_date_)
            f << "date " << date_stat_.mean << ' ' << date_stat_.std << ' ' << date_stat_.constant << '\n';
        for (const auto& b : boolean_names_) f << "bool " << b << '\n';
        for (const auto& c : category_vocab_) f << "category " << c << '\n';
    }

    static MetaSchema load(const std::string& path) {
        std::ifstream f(path);
        if (!f) throw RevsentError("cannot read schema file " + path);
        MetaSchema s;
        std::string line;
        while (std::getline(f, line)) {
            if (line.empty()) continue;
            std::istringstream is(line);
            std::string kind;
            is >> kind;
            if (kind == "drop") {
                std::string n;
                is >> n;
                s.drop_list_.insert(n);
            } else if (kind == "numeric") {
                std::string n;
                NumericStat st;
                is >> n >> st.mean >> st.std >> st.constant;
                s.numeric_stats_[n] = st;
            } else if (kind == "date") {
                s.has_date_ = true;
                is >> s.date_stat_.mean >> s.date_stat_.std >> s.date_stat_.constant;
            } else if (kind == "bool") {
                std::string n;
                is >> n;
                s.boolean_names_.push_back(n);
            } else if (kind == "category") {
                std::string rest;
                std::getline(is, rest);
                if (!rest.empty() && rest[0] == ' ') rest.erase(0, 1);
                s.category_index_[rest] = int(s.category_vocab_.size());
                s.category_vocab_.push_back(rest);
            }
        }
        return s;
    }

private:
    static NumericStat stat_of(const std::vector<double>& vals) {
        NumericStat st;
        if (vals.empty()) {
            st.constant = true;
            return st;
        }
        for (double v : vals) st.mean += v;
        st.mean /= double(vals.size());
        double var = 0;
        for (double v : vals) var += (v - st.mean) * (v - st.mean);
        var /= double(vals.size());
        if (var <= 0) {
            st.constant = true;
            st.std = 1;
        } else {
            st.std = std::sqrt(var);
        }
        return st;
    }

    std::set<std::string> drop_list_;
    std::map<std::string, NumericStat> numeric_stats_;
    bool has_date_ = false;
    NumericStat date_stat_;
    std::vector<std::string> boolean_names_;
    std::vector<std::string> category_vocab_;
    std::map<std::string, int> category_index_;
};

}  // namespace revsent
