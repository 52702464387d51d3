// Command-line pipeline: prepare / baseline / train / evaluate / explain /
// predict. Every subcommand writes a manifest.json with its resolved
// configuration next to its outputs so a run can be replayed exactly.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "revsent/classical.hpp"
#include "revsent/embeddings.hpp"
#include "revsent/eval.hpp"
#include "revsent/ingest.hpp"
#include "revsent/interpret.hpp"
#include "revsent/meta.hpp"
#include "revsent/model.hpp"
#include "revsent/tfidf.hpp"
#include "revsent/text.hpp"

namespace fs = std::filesystem;
using namespace revsent;
using nlohmann::json;

namespace {

// ---- date formatting (inverse of parse_date_unix) ------------------------

void civil_from_days(std::int64_t z, int& y, unsigned& m, unsigned& d) {
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = unsigned(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const std::int64_t yy = std::int64_t(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    d = doy - (153 * mp + 2) / 5 + 1;
    m = mp < 10 ? mp + 3 : mp - 9;
    y = int(yy + (m <= 2));
}

std::string date_string(std::int64_t unix_s) {
    std::int64_t days = unix_s / 86400;
    std::int64_t rem = unix_s - days * 86400;
    if (rem < 0) {
        rem += 86400;
        --days;
    }
    int y;
    unsigned m, d;
    civil_from_days(days, y, m, d);
    char buf[64];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u %02lld:%02lld:%02lld", y, m, d,
                  (long long)(rem / 3600), (long long)(rem / 60 % 60), (long long)(rem % 60));
    return buf;
}

// ---- artifact io ---------------------------------------------------------

json review_to_json(const RawReview& r, double sentiment_target) {
    json j;
    if (!r.review_id.empty()) j["review_id"] = r.review_id;
    j["stars"] = r.stars;
    j["text"] = r.text;
    j["sentiment_score"] = sentiment_target;
    if (!r.restaurant_name.empty()) j["name"] = r.restaurant_name;
    if (r.date_unix) j["date"] = date_string(*r.date_unix);
    for (const auto& [k, v] : r.meta) {
        if (std::holds_alternative<double>(v)) j[k] = std::get<double>(v);
        else if (std::holds_alternative<bool>(v)) j[k] = std::get<bool>(v);
        else if (std::holds_alternative<std::string>(v)) j[k] = std::get<std::string>(v);
        else j[k] = std::get<std::vector<std::string>>(v);
    }
    return j;
}

void write_split(const LabeledDataset& ds, const fs::path& path) {
    std::ofstream f(path);
    if (!f) throw RevsentError("cannot write " + path.string());
    for (std::size_t i = 0; i < ds.size(); ++i)
        f << review_to_json(ds.records[i], ds.targets_sentiment[i]).dump() << '\n';
}

void write_manifest(const fs::path& dir, const json& j) {
    std::ofstream f(dir / "manifest.json");
    if (!f) throw RevsentError("cannot write " + (dir / "manifest.json").string());
    f << j.dump(2) << '\n';
}

LabeledDataset load_split(const fs::path& dir, const std::string& name) {
    return load_reviews((dir / (name + ".jsonl")).string(), ReviewFormat::JsonLines);
}

std::map<std::string, std::size_t> restaurant_counts(const LabeledDataset& train) {
    std::map<std::string, std::size_t> counts;
    for (const auto& r : train.records)
        if (!r.restaurant_name.empty()) ++counts[r.restaurant_name];
    return counts;
}

std::string class_label(LabelMode mode, int cls) {
    if (mode == LabelMode::Binary) return cls == 1 ? "positive" : "negative";
    return std::to_string(cls + 1) + "-star";
}

void write_report(const EvalReport& report, const fs::path& dir) {
    std::ofstream f(dir / "report.json");
    if (!f) throw RevsentError("cannot write " + (dir / "report.json").string());
    f << report_to_json(report).dump(2) << '\n';
    export_confusion_csv(report, (dir / "confusion.csv").string());
}

// ---- shared option blocks ------------------------------------------------

std::string default_data_dir() {
    const char* env = std::getenv("REVSENT_DATA_DIR");
    return env ? env : "";
}

struct PrepareOpts {
    std::string data, format = "auto", out, lexicon, stopwords;
    double train_frac = 0.70, val_frac = 0.15, test_frac = 0.15;
    bool stratify = false;
    std::uint64_t seed = 0;
    std::size_t max_vocab = 20000, min_count = 1, category_cap = MetaSchema::kCategoryCap;
};

struct BaselineOpts {
    std::string data_dir = default_data_dir(), model = "mlp", input = "text", mode = "binary", out;
    std::uint64_t seed = 0;
    int knn_k = 10, rf_trees = 100, gb_rounds = 100, svm_epochs = 20, mlp_epochs = 20;
};

struct TrainOpts {
    std::string data_dir = default_data_dir(), model = "cnn", input = "text", mode = "binary";
    std::string multitask = "off", embeddings, out;
    double lambda = 0.5, lr = 1e-4, clip_norm = 0.0, meta_dropout = 0.1;
    int epochs = 5, batch_size = 32, patience = 2;
    int embed_dim = 100, filters = 256, window = 3, word_hidden = 50, sentence_hidden = 50;
    int meta_hidden = 512, fusion_hidden = 256, n_max = 50, r_max = 10;
    bool freeze_embeddings = false;
    std::uint64_t seed = 0;
};

struct EvaluateOpts {
    std::string data_dir = default_data_dir(), checkpoint, split = "test", out;
};

struct ExplainOpts {
    std::string data_dir = default_data_dir(), checkpoint, split = "test", review_id;
    std::string method = "grad_x_input", out;
    int index = 0, steps = 64;
};

struct PredictOpts {
    std::string data_dir = default_data_dir(), checkpoint, text, input_file, out;
};

// ---- deep-path encoding --------------------------------------------------

EncodedDataset encode_deep(const LabeledDataset& part, const Vocab& vocab, const MetaSchema* schema,
                           LabelMode mode, int n_max, int r_max) {
    EncodedDataset out;
    for (std::size_t i = 0; i < part.size(); ++i) {
        out.reviews.push_back(preprocess_deep(part.records[i].text, vocab, n_max, r_max));
        if (schema) out.meta.push_back(schema->encode(part.records[i]));
        out.labels.push_back(mode == LabelMode::Binary ? part.labels_binary[i]
                                                       : part.labels_five[i]);
        out.targets.push_back(real(part.targets_sentiment[i]));
    }
    return out;
}

Matrix classical_features(const LabeledDataset& part, const std::string& input,
                          const TfIdfModel& tfidf, const MetaSchema& schema,
                          const StopwordSet& stopwords) {
    Matrix X;
    for (const auto& r : part.records) {
        std::vector<double> row;
        if (input == "text" || input == "joint")
            row = tfidf.transform_dense(preprocess_classical(r.text, stopwords));
        if (input == "meta" || input == "joint") {
            auto m = schema.encode(r);
            row.insert(row.end(), m.begin(), m.end());
        }
        X.push_back(std::move(row));
    }
    return X;
}

// ---- subcommand bodies ---------------------------------------------------

void run_prepare(const PrepareOpts& o) {
    fs::create_directories(o.out);
    ReviewFormat fmt = o.format == "csv"
                           ? ReviewFormat::Csv
                           : (o.format == "jsonl" ? ReviewFormat::JsonLines
                                                  : format_from_path(o.data));
    AfinnLexicon lexicon;
    if (!o.lexicon.empty()) lexicon = AfinnLexicon::load(o.lexicon);
    LabeledDataset ds = load_reviews(o.data, fmt, &lexicon);

    SplitSpec spec;
    spec.train_frac = o.train_frac;
    spec.val_frac = o.val_frac;
    spec.test_frac = o.test_frac;
    spec.seed = o.seed;
    spec.stratify = o.stratify;
    DatasetSplits splits = split_dataset(ds, spec);
    write_split(splits.train, fs::path(o.out) / "train.jsonl");
    write_split(splits.val, fs::path(o.out) / "val.jsonl");
    write_split(splits.test, fs::path(o.out) / "test.jsonl");

    MetaSchema schema = MetaSchema::fit(splits.train, {"stars", "sentiment_score"}, o.category_cap);
    schema.save((fs::path(o.out) / "schema.txt").string());

    StopwordSet stopwords = o.stopwords.empty() ? StopwordSet() : StopwordSet::load(o.stopwords);
    std::vector<std::vector<std::string>> classical_docs, deep_docs;
    for (const auto& r : splits.train.records) {
        classical_docs.push_back(preprocess_classical(r.text, stopwords));
        deep_docs.push_back(tokenize_words(r.text));
    }
    TfIdfModel tfidf = TfIdfModel::fit(classical_docs);
    tfidf.save((fs::path(o.out) / "tfidf.txt").string());
    Vocab vocab = Vocab::fit(deep_docs, o.max_vocab, o.min_count);
    vocab.save((fs::path(o.out) / "vocab.txt").string());

    // correlations across stars, sentiment target, and numeric attributes
    std::vector<std::string> names = {"stars", "sentiment_score"};
    std::vector<std::vector<double>> cols(2);
    for (std::size_t i = 0; i < ds.size(); ++i) {
        cols[0].push_back(double(ds.records[i].stars));
        cols[1].push_back(ds.targets_sentiment[i]);
    }
    for (const auto& [name, st] : schema.numeric_stats()) {
        names.push_back(name);
        std::vector<double> c;
        for (const auto& r : ds.records) {
            auto it = r.meta.find(name);
            c.push_back(it != r.meta.end() && std::holds_alternative<double>(it->second)
                            ? std::get<double>(it->second)
                            : 0.0);
        }
        cols.push_back(std::move(c));
    }
    CorrelationMatrix cm = correlation_matrix(names, cols);
    json cj;
    cj["names"] = cm.names;
    cj["values"] = cm.values;
    std::ofstream cf(fs::path(o.out) / "correlation.json");
    cf << cj.dump(2) << '\n';

    json m;
    m["command"] = "prepare";
    m["data"] = o.data;
    m["format"] = fmt == ReviewFormat::Csv ? "csv" : "jsonl";
    m["lexicon"] = o.lexicon;
    m["stopwords"] = o.stopwords;
    m["train_frac"] = o.train_frac;
    m["val_frac"] = o.val_frac;
    m["test_frac"] = o.test_frac;
    m["stratify"] = o.stratify;
    m["seed"] = o.seed;
    m["max_vocab"] = o.max_vocab;
    m["min_count"] = o.min_count;
    m["category_cap"] = o.category_cap;
    m["n_records"] = ds.size();
    m["n_train"] = splits.train.size();
    m["n_val"] = splits.val.size();
    m["n_test"] = splits.test.size();
    write_manifest(o.out, m);
}

void run_baseline(const BaselineOpts& o) {
    if (o.data_dir.empty())
        throw RevsentError("baseline: --data-dir required (or set REVSENT_DATA_DIR)");
    fs::create_directories(o.out);
    LabeledDataset train = load_split(o.data_dir, "train");
    LabeledDataset test = load_split(o.data_dir, "test");
    TfIdfModel tfidf = TfIdfModel::load((fs::path(o.data_dir) / "tfidf.txt").string());
    MetaSchema schema = MetaSchema::load((fs::path(o.data_dir) / "schema.txt").string());
    StopwordSet stopwords;

    const LabelMode mode = o.mode == "binary" ? LabelMode::Binary : LabelMode::FiveStar;
    const int num_classes = mode == LabelMode::Binary ? 2 : 5;
    auto labels_of = [&](const LabeledDataset& p) {
        return mode == LabelMode::Binary ? p.labels_binary : p.labels_five;
    };
    Matrix Xtr = classical_features(train, o.input, tfidf, schema, stopwords);
    Matrix Xte = classical_features(test, o.input, tfidf, schema, stopwords);
    const std::vector<int> ytr = labels_of(train), yte = labels_of(test);

    std::vector<int> pred;
    if (o.model == "dt") {
        DecisionTree m;
        m.fit(Xtr, ytr, num_classes, {.seed = o.seed});
        pred = m.predict(Xte);
    } else if (o.model == "rf") {
        RandomForest m(o.rf_trees, o.seed);
        m.fit(Xtr, ytr, num_classes);
        pred = m.predict(Xte);
    } else if (o.model == "knn") {
        Knn m(o.knn_k);
        m.fit(Xtr, ytr, num_classes);
        pred = m.predict(Xte);
    } else if (o.model == "svm") {
        LinearSvm m(1.0, o.svm_epochs, o.seed);
        m.fit(Xtr, ytr, num_classes);
        pred = m.predict(Xte);
    } else if (o.model == "gb") {
        GradientBoosting m(0.1, 5, 0.5, o.gb_rounds, o.seed);
        m.fit(Xtr, ytr, num_classes);
        pred = m.predict(Xte);
    } else {
        Mlp m({.epochs = o.mlp_epochs, .seed = o.seed});
        m.fit(Xtr, ytr, num_classes);
        pred = m.predict(Xte);
    }

    EvalReport report = evaluate(pred, yte);
    std::vector<std::string> names;
    for (const auto& r : test.records) names.push_back(r.restaurant_name);
    report.per_group = per_restaurant_bias(pred, yte, names, restaurant_counts(train));
    write_report(report, o.out);

    json m;
    m["command"] = "baseline";
    m["data_dir"] = o.data_dir;
    m["model"] = o.model;
    m["input"] = o.input;
    m["mode"] = o.mode;
    m["seed"] = o.seed;
    m["accuracy"] = report.accuracy;
    m["macro_f1"] = report.macro_f1;
    write_manifest(o.out, m);
}

void run_train(const TrainOpts& o) {
    if (o.data_dir.empty())
        throw RevsentError("train: --data-dir required (or set REVSENT_DATA_DIR)");
    if (o.input == "meta")
        throw RevsentError(
            "train: deep models require text input; use `baseline --model mlp --input meta`");
    fs::create_directories(o.out);
    LabeledDataset train_part = load_split(o.data_dir, "train");
    LabeledDataset val_part = load_split(o.data_dir, "val");
    Vocab vocab = Vocab::load((fs::path(o.data_dir) / "vocab.txt").string());

    JointModelConfig cfg;
    cfg.encoder = o.model == "cnn" ? EncoderKind::Cnn : EncoderKind::Han;
    cfg.input = o.input == "joint" ? InputMode::Joint : InputMode::TextOnly;
    cfg.loss = o.multitask == "off"
                   ? LossMode::Single
                   : (o.multitask == "weighted" ? LossMode::Weighted : LossMode::Uncertainty);
    cfg.labels = o.mode == "binary" ? LabelMode::Binary : LabelMode::FiveStar;
    cfg.embed_dim = o.embed_dim;
    cfg.num_filters = o.filters;
    cfg.window = o.window;
    cfg.word_hidden = o.word_hidden;
    cfg.sentence_hidden = o.sentence_hidden;
    cfg.meta_hidden = o.meta_hidden;
    cfg.fusion_hidden = o.fusion_hidden;
    cfg.meta_dropout = real(o.meta_dropout);
    cfg.lambda = real(o.lambda);
    cfg.train_embeddings = !o.freeze_embeddings;

    MetaSchema schema;
    const MetaSchema* schema_ptr = nullptr;
    if (cfg.input == InputMode::Joint) {
        schema = MetaSchema::load((fs::path(o.data_dir) / "schema.txt").string());
        cfg.meta_dim = int(schema.dim());
        schema_ptr = &schema;
    }

    EncodedDataset train_ds = encode_deep(train_part, vocab, schema_ptr, cfg.labels, o.n_max, o.r_max);
    EncodedDataset val_ds = encode_deep(val_part, vocab, schema_ptr, cfg.labels, o.n_max, o.r_max);

    Rng init_rng(make_rng(derive_seed(o.seed, 0x90d)));
    EmbeddingTable emb =
        o.embeddings.empty()
            ? EmbeddingTable::random(vocab, cfg.embed_dim, init_rng)
            : EmbeddingTable::load(o.embeddings, vocab, OovPolicy::RandomSeeded, o.seed);
    if (!o.embeddings.empty()) cfg.embed_dim = emb.dim;
    JointModel model(cfg, std::move(emb), init_rng);

    TrainConfig tc;
    tc.batch_size = o.batch_size;
    tc.epochs = o.epochs;
    tc.lr = real(o.lr);
    tc.clip_norm = real(o.clip_norm);
    tc.seed = o.seed;
    tc.patience = o.patience;
    TrainHistory history = train(model, train_ds, val_ds, tc);

    save_checkpoint(model.to_checkpoint(), (fs::path(o.out) / "model").string());
    export_curves(history, (fs::path(o.out) / "curves.csv").string());

    json m;
    m["command"] = "train";
    m["data_dir"] = o.data_dir;
    m["model"] = o.model;
    m["input"] = o.input;
    m["mode"] = o.mode;
    m["multitask"] = o.multitask;
    m["lambda"] = o.lambda;
    m["epochs"] = o.epochs;
    m["batch_size"] = o.batch_size;
    m["lr"] = o.lr;
    m["clip_norm"] = o.clip_norm;
    m["patience"] = o.patience;
    m["seed"] = o.seed;
    m["embed_dim"] = cfg.embed_dim;
    m["filters"] = o.filters;
    m["window"] = o.window;
    m["word_hidden"] = o.word_hidden;
    m["sentence_hidden"] = o.sentence_hidden;
    m["meta_hidden"] = o.meta_hidden;
    m["fusion_hidden"] = o.fusion_hidden;
    m["meta_dropout"] = o.meta_dropout;
    m["n_max"] = o.n_max;
    m["r_max"] = o.r_max;
    m["embeddings"] = o.embeddings;
    m["freeze_embeddings"] = o.freeze_embeddings;
    m["epochs_run"] = history.size();
    m["final_val_accuracy"] = history.empty() ? 0.0 : history.back().val_accuracy;
    write_manifest(o.out, m);
}

void run_evaluate(const EvaluateOpts& o) {
    if (o.data_dir.empty())
        throw RevsentError("evaluate: --data-dir required (or set REVSENT_DATA_DIR)");
    fs::create_directories(o.out);
    JointModel model = JointModel::from_checkpoint(load_checkpoint(o.checkpoint));
    Vocab vocab = Vocab::load((fs::path(o.data_dir) / "vocab.txt").string());
    LabeledDataset part = load_split(o.data_dir, o.split);
    LabeledDataset train_part = load_split(o.data_dir, "train");

    MetaSchema schema;
    const MetaSchema* schema_ptr = nullptr;
    if (model.config().input == InputMode::Joint) {
        schema = MetaSchema::load((fs::path(o.data_dir) / "schema.txt").string());
        schema_ptr = &schema;
    }
    EncodedDataset ds = encode_deep(part, vocab, schema_ptr, model.config().labels, 50, 10);

    std::vector<int> pred;
    for (std::size_t i = 0; i < ds.size(); ++i)
        pred.push_back(predict(model, ds.reviews[i], ds.meta.empty() ? nullptr : &ds.meta[i]).cls);
    EvalReport report = evaluate(pred, ds.labels);
    std::vector<std::string> names;
    for (const auto& r : part.records) names.push_back(r.restaurant_name);
    report.per_group = per_restaurant_bias(pred, ds.labels, names, restaurant_counts(train_part));
    write_report(report, o.out);

    json m;
    m["command"] = "evaluate";
    m["data_dir"] = o.data_dir;
    m["checkpoint"] = o.checkpoint;
    m["split"] = o.split;
    m["accuracy"] = report.accuracy;
    m["macro_f1"] = report.macro_f1;
    m["n"] = report.n;
    write_manifest(o.out, m);
}

void run_explain(const ExplainOpts& o) {
    if (o.data_dir.empty())
        throw RevsentError("explain: --data-dir required (or set REVSENT_DATA_DIR)");
    fs::create_directories(o.out);
    JointModel model = JointModel::from_checkpoint(load_checkpoint(o.checkpoint));
    Vocab vocab = Vocab::load((fs::path(o.data_dir) / "vocab.txt").string());
    LabeledDataset part = load_split(o.data_dir, o.split);

    std::size_t idx = std::size_t(o.index);
    if (!o.review_id.empty()) {
        bool found = false;
        for (std::size_t i = 0; i < part.size(); ++i)
            if (part.records[i].review_id == o.review_id) {
                idx = i;
                found = true;
                break;
            }
        if (!found)
            throw RevsentError("explain: review id `" + o.review_id + "` not in split " + o.split);
    }
    if (idx >= part.size())
        throw RevsentError("explain: index " + std::to_string(idx) + " outside split of size " +
                           std::to_string(part.size()));

    MetaSchema schema;
    std::vector<double> meta;
    const std::vector<double>* meta_ptr = nullptr;
    if (model.config().input == InputMode::Joint) {
        schema = MetaSchema::load((fs::path(o.data_dir) / "schema.txt").string());
        meta = schema.encode(part.records[idx]);
        meta_ptr = &meta;
    }
    TokenizedReview review = preprocess_deep(part.records[idx].text, vocab);

    Prediction p = predict(model, review, meta_ptr);
    const LabelMode lm = model.config().labels;
    const int actual = lm == LabelMode::Binary ? part.labels_binary[idx] : part.labels_five[idx];

    Attribution a = o.method == "integrated_gradients"
                        ? integrated_gradients(model, review, meta_ptr, p.cls, vocab, o.steps)
                        : grad_x_input(model, review, meta_ptr, p.cls, vocab);
    render_heatmap(a.tokens, a.scores, class_label(lm, p.cls), class_label(lm, actual),
                   (fs::path(o.out) / "heatmap.html").string());
    write_attribution_json(a, class_label(lm, p.cls), class_label(lm, actual),
                           (fs::path(o.out) / "attribution.json").string());

    if (model.config().encoder == EncoderKind::Han) {
        ForwardResult fr = model.forward(review, meta_ptr);
        AttentionWeights w = extract_attention(fr.trace);
        json aj;
        aj["word_weights"] = w.word_weights;
        aj["sentence_weights"] = w.sentence_weights;
        std::ofstream f(fs::path(o.out) / "attention.json");
        f << aj.dump(2) << '\n';
    }

    json m;
    m["command"] = "explain";
    m["data_dir"] = o.data_dir;
    m["checkpoint"] = o.checkpoint;
    m["split"] = o.split;
    m["index"] = idx;
    m["review_id"] = part.records[idx].review_id;
    m["method"] = o.method;
    m["steps"] = o.steps;
    m["predicted"] = class_label(lm, p.cls);
    m["actual"] = class_label(lm, actual);
    write_manifest(o.out, m);
}

void run_predict(const PredictOpts& o) {
    if (o.data_dir.empty())
        throw RevsentError("predict: --data-dir required (or set REVSENT_DATA_DIR)");
    if (o.text.empty() == o.input_file.empty())
        throw RevsentError("predict: give exactly one of --text or --input");
    JointModel model = JointModel::from_checkpoint(load_checkpoint(o.checkpoint));
    Vocab vocab = Vocab::load((fs::path(o.data_dir) / "vocab.txt").string());
    MetaSchema schema;
    const bool joint = model.config().input == InputMode::Joint;
    if (joint) schema = MetaSchema::load((fs::path(o.data_dir) / "schema.txt").string());
    const LabelMode lm = model.config().labels;

    auto predict_record = [&](const RawReview& r) {
        TokenizedReview review = preprocess_deep(r.text, vocab);
        std::vector<double> meta;
        if (joint) meta = schema.encode(r);
        Prediction p = predict(model, review, joint ? &meta : nullptr);
        json j;
        if (!r.review_id.empty()) j["review_id"] = r.review_id;
        j["class"] = p.cls;
        j["label"] = class_label(lm, p.cls);
        j["probabilities"] = p.probabilities;
        if (p.has_sentiment) j["sentiment"] = p.sentiment;
        return j;
    };

    std::ofstream out_file;
    std::ostream* out = &std::cout;
    if (!o.out.empty()) {
        fs::create_directories(o.out);
        out_file.open(fs::path(o.out) / "predictions.jsonl");
        if (!out_file) throw RevsentError("cannot write predictions file");
        out = &out_file;
    }
    if (!o.text.empty()) {
        RawReview r;
        r.text = o.text;
        *out << predict_record(r).dump() << '\n';
    } else {
        for (const auto& r : load_raw_reviews(o.input_file, format_from_path(o.input_file)))
            *out << predict_record(r).dump() << '\n';
    }
    if (!o.out.empty()) {
        json m;
        m["command"] = "predict";
        m["checkpoint"] = o.checkpoint;
        m["data_dir"] = o.data_dir;
        m["text"] = o.text;
        m["input"] = o.input_file;
        write_manifest(o.out, m);
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"review sentiment pipeline"};
    app.require_subcommand(1);
    app.set_config("--config", "", "read options from an ini/toml config file; flags win");

    PrepareOpts po;
    auto* prepare = app.add_subcommand("prepare", "split raw reviews and fit feature artifacts");
    prepare->add_option("--data", po.data, "raw reviews (.jsonl or .csv)")->required();
    prepare->add_option("--format", po.format)->check(CLI::IsMember({"auto", "jsonl", "csv"}));
    prepare->add_option("--out", po.out, "output directory")->required();
    prepare->add_option("--lexicon", po.lexicon, "word<TAB>score sentiment lexicon");
    prepare->add_option("--stopwords", po.stopwords, "one stopword per line");
    prepare->add_option("--train-frac", po.train_frac);
    prepare->add_option("--val-frac", po.val_frac);
    prepare->add_option("--test-frac", po.test_frac);
    prepare->add_flag("--stratify", po.stratify, "stratify the split by star label");
    prepare->add_option("--seed", po.seed);
    prepare->add_option("--max-vocab", po.max_vocab);
    prepare->add_option("--min-count", po.min_count);
    prepare->add_option("--category-cap", po.category_cap);
    prepare->callback([&] { run_prepare(po); });

    BaselineOpts bo;
    auto* baseline = app.add_subcommand("baseline", "fit and score a classical model");
    baseline->add_option("--data-dir", bo.data_dir, "prepared artifact directory");
    baseline->add_option("--model", bo.model)
        ->check(CLI::IsMember({"dt", "rf", "knn", "svm", "gb", "mlp"}));
    baseline->add_option("--input", bo.input)->check(CLI::IsMember({"meta", "text", "joint"}));
    baseline->add_option("--mode", bo.mode)->check(CLI::IsMember({"binary", "five"}));
    baseline->add_option("--out", bo.out)->required();
    baseline->add_option("--seed", bo.seed);
    baseline->add_option("--knn-k", bo.knn_k);
    baseline->add_option("--rf-trees", bo.rf_trees);
    baseline->add_option("--gb-rounds", bo.gb_rounds);
    baseline->add_option("--svm-epochs", bo.svm_epochs);
    baseline->add_option("--mlp-epochs", bo.mlp_epochs);
    baseline->callback([&] { run_baseline(bo); });

    TrainOpts to;
    auto* train_cmd = app.add_subcommand("train", "train a deep model");
    train_cmd->add_option("--data-dir", to.data_dir);
    train_cmd->add_option("--model", to.model)->check(CLI::IsMember({"cnn", "han"}));
    train_cmd->add_option("--input", to.input)->check(CLI::IsMember({"text", "joint", "meta"}));
    train_cmd->add_option("--mode", to.mode)->check(CLI::IsMember({"binary", "five"}));
    train_cmd->add_option("--multitask", to.multitask)
        ->check(CLI::IsMember({"off", "weighted", "uncertainty"}));
    train_cmd->add_option("--lambda", to.lambda, "weighted-loss classification weight");
    train_cmd->add_option("--embeddings", to.embeddings, "pretrained embedding text file");
    train_cmd->add_flag("--freeze-embeddings", to.freeze_embeddings);
    train_cmd->add_option("--epochs", to.epochs);
    train_cmd->add_option("--batch-size", to.batch_size);
    train_cmd->add_option("--lr", to.lr);
    train_cmd->add_option("--clip-norm", to.clip_norm);
    train_cmd->add_option("--patience", to.patience);
    train_cmd->add_option("--seed", to.seed);
    train_cmd->add_option("--embed-dim", to.embed_dim);
    train_cmd->add_option("--filters", to.filters);
    train_cmd->add_option("--window", to.window);
    train_cmd->add_option("--word-hidden", to.word_hidden);
    train_cmd->add_option("--sentence-hidden", to.sentence_hidden);
    train_cmd->add_option("--meta-hidden", to.meta_hidden);
    train_cmd->add_option("--fusion-hidden", to.fusion_hidden);
    train_cmd->add_option("--meta-dropout", to.meta_dropout);
    train_cmd->add_option("--n-max", to.n_max, "words kept per sentence");
    train_cmd->add_option("--r-max", to.r_max, "sentences kept per review");
    train_cmd->add_option("--out", to.out)->required();
    train_cmd->callback([&] { run_train(to); });

    EvaluateOpts eo;
    auto* eval_cmd = app.add_subcommand("evaluate", "score a trained checkpoint on a split");
    eval_cmd->add_option("--data-dir", eo.data_dir);
    eval_cmd->add_option("--checkpoint", eo.checkpoint, "checkpoint base path")->required();
    eval_cmd->add_option("--split", eo.split)->check(CLI::IsMember({"train", "val", "test"}));
    eval_cmd->add_option("--out", eo.out)->required();
    eval_cmd->callback([&] { run_evaluate(eo); });

    ExplainOpts xo;
    auto* explain = app.add_subcommand("explain", "token attribution for one review");
    explain->add_option("--data-dir", xo.data_dir);
    explain->add_option("--checkpoint", xo.checkpoint)->required();
    explain->add_option("--split", xo.split)->check(CLI::IsMember({"train", "val", "test"}));
    explain->add_option("--index", xo.index, "record index within the split");
    explain->add_option("--review-id", xo.review_id, "select by review id instead of index");
    explain->add_option("--method", xo.method)
        ->check(CLI::IsMember({"grad_x_input", "integrated_gradients"}));
    explain->add_option("--steps", xo.steps, "integration steps");
    explain->add_option("--out", xo.out)->required();
    explain->callback([&] { run_explain(xo); });

    PredictOpts ro;
    auto* predict_cmd = app.add_subcommand("predict", "classify raw text with a checkpoint");
    predict_cmd->add_option("--data-dir", ro.data_dir);
    predict_cmd->add_option("--checkpoint", ro.checkpoint)->required();
    predict_cmd->add_option("--text", ro.text, "a single review text");
    predict_cmd->add_option("--input", ro.input_file, "reviews file (.jsonl or .csv)");
    predict_cmd->add_option("--out", ro.out, "output directory (default: stdout)");
    predict_cmd->callback([&] { run_predict(ro); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const ParseError& e) {
        std::cerr << "error: parse: " << e.what() << '\n';
        return 1;
    } catch (const ShapeError& e) {
        std::cerr << "error: shape: " << e.what() << '\n';
        return 1;
    } catch (const RevsentError& e) {
        std::cerr << "error: runtime: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: internal: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
