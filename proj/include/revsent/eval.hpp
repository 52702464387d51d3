#pragma once

#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "revsent/common.hpp"
#include "revsent/model.hpp"

namespace revsent {

struct GroupAccuracy {
    std::string bucket;
    double accuracy = 0;  // NaN when the bucket is empty
    std::size_t count = 0;
};

struct EvalReport {
    double accuracy = 0;
    double macro_f1 = 0;
    std::vector<std::vector<std::size_t>> confusion;  // rows true, cols predicted
    std::vector<double> precision, recall, f1;        // per class
    std::vector<GroupAccuracy> per_group;
    std::size_t n = 0;
};

inline EvalReport evaluate(const std::vector<int>& predictions, const std::vector<int>& labels) {
    if (predictions.size() != labels.size() || predictions.empty())
        throw RevsentError("evaluate: need equal non-empty prediction/label lists, got " +
                           std::to_string(predictions.size()) + " vs " + std::to_string(labels.size()));
    int c = 0;
    for (std::size_t i = 0; i < labels.size(); ++i)
        c = std::max({c, labels[i] + 1, predictions[i] + 1});
    EvalReport r;
    r.n = labels.size();
    r.confusion.assign(std::size_t(c), std::vector<std::size_t>(std::size_t(c), 0));
    std::size_t correct = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        ++r.confusion[std::size_t(labels[i])][std::size_t(predictions[i])];
        if (labels[i] == predictions[i]) ++correct;
    }
    r.accuracy = double(correct) / double(r.n);
    double f1_sum = 0;
    for (int k = 0; k < c; ++k) {
        std::size_t tp = r.confusion[std::size_t(k)][std::size_t(k)], fp = 0, fn = 0;
        for (int j = 0; j < c; ++j) {
            if (j == k) continue;
            fp += r.confusion[std::size_t(j)][std::size_t(k)];
            fn += r.confusion[std::size_t(k)][std::size_t(j)];
        }
        const double prec = tp + fp ? double(tp) / double(tp + fp) : 0.0;
        const double rec = tp + fn ? double(tp) / double(tp + fn) : 0.0;
        const double f1 = prec + rec > 0 ? 2 * prec * rec / (prec + rec) : 0.0;
        r.precision.push_back(prec);
        r.recall.push_back(rec);
        r.f1.push_back(f1);
        f1_sum += f1;
    }
    r.macro_f1 = f1_sum / double(c);
    return r;
}

// Mean accuracy bucketed by how often each restaurant appears in training.
// Default edges: 0, 1-5, 6-20, 21-100, >100.
inline std::vector<GroupAccuracy> per_restaurant_bias(
    const std::vector<int>& predictions, const std::vector<int>& labels,
    const std::vector<std::string>& names, const std::map<std::string, std::size_t>& train_counts,
    std::vector<std::size_t> edges = {0, 5, 20, 100}) {
    if (predictions.size() != labels.size() || predictions.size() != names.size())
        throw RevsentError("per_restaurant_bias: prediction/label/name lengths differ");
    auto bucket_label = [&](std::size_t b) -> std::string {
        if (b == 0) return "0";
        std::ostringstream os;
        os << (edges[b - 1] + 1);
        if (b < edges.size()) os << "-" << edges[b];
        else os << "+";
        return os.str();
    };
    std::vector<std::size_t> correct(edges.size() + 1, 0), total(edges.size() + 1, 0);
    for (std::size_t i = 0; i < labels.size(); ++i) {
        auto it = train_counts.find(names[i]);
        const std::size_t cnt = it == train_counts.end() ? 0 : it->second;
        std::size_t b = 0;
        while (b < edges.size() && cnt > edges[b]) ++b;
        ++total[b];
        if (predictions[i] == labels[i]) ++correct[b];
    }
    std::vector<GroupAccuracy> out;
    for (std::size_t b = 0; b < total.size(); ++b) {
        GroupAccuracy g;
        g.bucket = bucket_label(b);
        g.count = total[b];
        g.accuracy = total[b] ? double(correct[b]) / double(total[b])
                              : std::numeric_limits<double>::quiet_NaN();
        out.push_back(g);
    }
    return out;
}

// ---- serialization -------------------------------------------------------

inline nlohmann::json report_to_json(const EvalReport& r) {
    nlohmann::json j;
    j["accuracy"] = r.accuracy;
    j["macro_f1"] = r.macro_f1;
    j["n"] = r.n;
    j["confusion"] = r.confusion;
    j["precision"] = r.precision;
    j["recall"] = r.recall;
    j["f1"] = r.f1;
    if (!r.per_group.empty()) {
        nlohmann::json groups = nlohmann::json::array();
        for (const auto& g : r.per_group) {
            nlohmann::json e;
            e["bucket"] = g.bucket;
            e["count"] = g.count;
            if (std::isnan(g.accuracy)) e["accuracy"] = nullptr;
            else e["accuracy"] = g.accuracy;
            groups.push_back(e);
        }
        j["per_group"] = groups;
    }
    return j;
}

inline void export_confusion_csv(const EvalReport& r, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw RevsentError("cannot write " + path);
    for (const auto& row : r.confusion) {
        for (std::size_t j = 0; j < row.size(); ++j) f << (j ? "," : "") << row[j];
        f << '\n';
    }
}

// CSV: epoch,train_loss,val_loss,val_accuracy
inline void export_curves(const TrainHistory& history, const std::string& path) {
    if (history.empty()) throw RevsentError("export_curves: empty history");
    std::ofstream f(path);
    if (!f) throw RevsentError("cannot write " + path);
    f.precision(17);
    f << "epoch,train_loss,val_loss,val_accuracy\n";
    for (const auto& e : history)
        f << e.epoch << ',' << e.train_loss << ',' << e.val_loss << ',' << e.val_accuracy << '\n';
}

inline TrainHistory import_curves(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw RevsentError("cannot read " + path);
    TrainHistory h;
    std::string line;
    std::getline(f, line);  // header
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        EpochStats e;
        char comma;
        std::istringstream is(line);
        is >> e.epoch >> comma >> e.train_loss >> comma >> e.val_loss >> comma >> e.val_accuracy;
        h.push_back(e);
    }
    return h;
}

}  // namespace revsent
