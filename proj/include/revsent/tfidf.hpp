#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "revsent/common.hpp"

namespace revsent {

using SparseVector = std::vector<std::pair<int, double>>;  // (column, value), sorted

// tf = raw count; idf(t) = ln((1+N)/(1+df(t))) + 1; rows L2-normalized.
class TfIdfModel {
public:
    // Fit on train documents only. Vocabulary indices are dense, assigned in
    // lexicographic term order.
    static TfIdfModel fit(const std::vector<std::vector<std::string>>& docs) {
        if (docs.empty()) throw RevsentError("tfidf: cannot fit on an empty corpus");
        std::map<std::string, int> df;  // ordered -> deterministic indices
        for (const auto& doc : docs) {
            std::unordered_map<std::string, bool> seen;
            for (const auto& t : doc)
                if (!seen.count(t)) {
                    seen[t] = true;
                    ++df[t];
                }
        }
        TfIdfModel m;
        m.doc_count_ = int(docs.size());
        int idx = 0;
        for (const auto& [term, d] : df) {
            m.vocab_[term] = idx++;
            m.idf_.push_back(std::log((1.0 + m.doc_count_) / (1.0 + d)) + 1.0);
        }
        return m;
    }

    SparseVector transform(const std::vector<std::string>& doc) const {
        std::map<int, double> counts;
        for (const auto& t : doc) {
            auto it = vocab_.find(t);
            if (it != vocab_.end()) counts[it->second] += 1.0;
        }
        SparseVector out;
        double sq = 0;
        for (const auto& [col, tf] : counts) {
            double v = tf * idf_[std::size_t(col)];
            out.emplace_back(col, v);
            sq += v * v;
        }
        if (sq > 0) {
            double inv = 1.0 / std::sqrt(sq);
            for (auto& [col, v] : out) v *= inv;
        }
        return out;
    }

    std::vector<double> transform_dense(const std::vector<std::string>& doc) const {
        std::vector<double> dense(dim(), 0.0);
        for (const auto& [col, v] : transform(doc)) dense[std::size_t(col)] = v;
        return dense;
    }

    int dim() const { return int(idf_.size()); }
    int doc_count() const { return doc_count_; }
    const std::unordered_map<std::string, int>& vocabulary() const { return vocab_; }
    double idf(int col) const { return idf_[std::size_t(col)]; }

    void save(const std::string& path) const {
        std::ofstream f(path);
        if (!f) throw RevsentError("cannot write tfidf model " + path);
        f << "docs " << doc_count_ << '\n';
        std::vector<std::string> terms(vocab_.size());
        for (const auto& [t, i] : vocab_) terms[std::size_t(i)] = t;
        f.precision(17);
        for (std::size_t i = 0; i < terms.size(); ++i)
            f << terms[i] << ' ' << idf_[i] << '\n';
    }

    static TfIdfModel load(const std::string& path) {
        std::ifstream f(path);
        if (!f) throw RevsentError("cannot read tfidf model " + path);
        TfIdfModel m;
        std::string tag;
        f >> tag >> m.doc_count_;
        std::string term;
        double idf;
        int idx = 0;
        while (f >> term >> idf) {
            m.vocab_[term] = idx++;
            m.idf_.push_back(idf);
        }
        return m;
    }

private:
    std::unordered_map<std::string, int> vocab_;
    std::vector<double> idf_;
    int doc_count_ = 0;
};

}  // namespace revsent
