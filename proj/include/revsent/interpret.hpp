#pragma once

#include <cmath>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "revsent/model.hpp"
#include "revsent/text.hpp"

namespace revsent {

enum class AttributionMethod { GradXInput, IntegratedGradients };

struct Attribution {
    std::vector<std::string> tokens;
    std::vector<double> scores;  // positive supports the target class
    int target_class = 0;
    AttributionMethod method = AttributionMethod::GradXInput;
};

namespace detail {

// Scalar objective for attribution: log-probability of the target class.
inline Tensor target_log_prob(const Tensor& logits, int target_class) {
    const int c = logits.dim(1);
    if (target_class < 0 || target_class >= c)
        throw RevsentError("attribution: target class " + std::to_string(target_class) +
                           " outside [0," + std::to_string(c) + ")");
    Tensor lp = log_op(softmax(logits));
    return sum_all(slice(lp, 1, target_class, target_class + 1));
}

// Per-token sum over embedding dims of value * gradient, read from a trace
// whose graph has already been run backward. Padding tokens are skipped.
inline void accumulate_grad_x_input(const EncoderTrace& trace, const Vocab& vocab,
                                    std::vector<std::string>& tokens, std::vector<double>& scores,
                                    bool append_tokens, double step_weight = 1.0) {
    std::size_t out_pos = 0;
    for (std::size_t s = 0; s < trace.embedded.size(); ++s) {
        const Tensor& emb = trace.embedded[s];
        const auto& ids = trace.token_ids[s];
        const int d = emb.dim(1);
        const auto& grad = emb.impl()->grad;
        for (std::size_t t = 0; t < ids.size(); ++t) {
            if (ids[t] == Vocab::kPad) continue;
            double score = 0;
            if (!grad.empty())
                for (int j = 0; j < d; ++j)
                    score += double(emb.data()[t * std::size_t(d) + j]) *
                             double(grad[t * std::size_t(d) + j]);
            if (append_tokens) {
                tokens.push_back(vocab.token(ids[t]));
                scores.push_back(step_weight * score);
            } else {
                scores[out_pos] += step_weight * score;
            }
            ++out_pos;
        }
    }
}

struct EmbeddingGradGuard {
    TensorImpl* impl;
    bool saved_requires, saved_needs;
    explicit EmbeddingGradGuard(const Tensor& table)
        : impl(table.impl().get()), saved_requires(impl->requires_grad), saved_needs(impl->needs_grad) {
        impl->requires_grad = impl->needs_grad = true;
    }
    ~EmbeddingGradGuard() {
        impl->requires_grad = saved_requires;
        impl->needs_grad = saved_needs;
    }
};

}  // namespace detail

inline Attribution grad_x_input(JointModel& model, const TokenizedReview& review,
                                const std::vector<double>* meta, int target_class,
                                const Vocab& vocab) {
    if (review.flat_tokens.empty()) throw RevsentError("attribution: empty review");
    detail::EmbeddingGradGuard guard(model.embedding().vectors);
    ForwardResult fr = model.forward(review, meta);
    backward(detail::target_log_prob(fr.logits, target_class));
    Attribution a;
    a.target_class = target_class;
    a.method = AttributionMethod::GradXInput;
    detail::accumulate_grad_x_input(fr.trace, vocab, a.tokens, a.scores, true);
    return a;
}

// Riemann (midpoint) path integral from the all-zero padding baseline to the
// input embeddings. With a zero baseline, scaling the embedding table by
// alpha scales every embedded input by alpha.
inline Attribution integrated_gradients(JointModel& model, const TokenizedReview& review,
                                        const std::vector<double>* meta, int target_class,
                                        const Vocab& vocab, int steps = 64) {
    if (steps < 8) throw RevsentError("integrated_gradients: needs at least 8 steps");
    if (review.flat_tokens.empty()) throw RevsentError("attribution: empty review");
    detail::EmbeddingGradGuard guard(model.embedding().vectors);
    Tensor table = model.embedding().vectors;
    const std::vector<real> original = table.data();

    Attribution a;
    a.target_class = target_class;
    a.method = AttributionMethod::IntegratedGradients;
    {
        // token list and score slots from an unscaled pass
        ForwardResult fr = model.forward(review, meta);
        std::vector<double> dummy;
        detail::accumulate_grad_x_input(fr.trace, vocab, a.tokens, dummy, true);
        a.scores.assign(a.tokens.size(), 0.0);
        for (auto& s : a.scores) s = 0.0;
    }
    for (int k = 0; k < steps; ++k) {
        const real alpha = real((double(k) + 0.5) / double(steps));
        for (std::size_t i = 0; i < table.data().size(); ++i) table.data()[i] = alpha * original[i];
        ForwardResult fr = model.forward(review, meta);
        backward(detail::target_log_prob(fr.logits, target_class));
        // grad at alpha*x times full x: grad_x_input at the scaled point is
        // alpha * x * grad, so divide the value factor back out.
        std::vector<std::string> unused;
        std::vector<double> step_scores(a.scores.size(), 0.0);
        detail::accumulate_grad_x_input(fr.trace, vocab, unused, step_scores, false);
        for (std::size_t i = 0; i < a.scores.size(); ++i)
            a.scores[i] += step_scores[i] / (double(alpha) * double(steps));
    }
    table.data() = original;
    return a;
}

// Objective value used by the attribution methods, for completeness checks.
inline double attribution_objective(JointModel& model, const TokenizedReview& review,
                                    const std::vector<double>* meta, int target_class,
                                    real embedding_scale = real(1)) {
    Tensor table = model.embedding().vectors;
    const std::vector<real> original = table.data();
    if (embedding_scale != real(1))
        for (auto& v : table.data()) v *= embedding_scale;
    ForwardResult fr = model.forward(review, meta);
    const double v = double(detail::target_log_prob(fr.logits, target_class).item());
    table.data() = original;
    return v;
}

// ---- attention extraction ------------------------------------------------

struct AttentionWeights {
    std::vector<std::vector<real>> word_weights;  // per sentence
    std::vector<real> sentence_weights;
};

inline AttentionWeights extract_attention(const EncoderTrace& trace) {
    if (!trace.has_attention)
        throw RevsentError("extract_attention: encoder produced no attention weights (CNN path)");
    return {trace.word_attention, trace.sentence_attention};
}

// ---- rendering -----------------------------------------------------------

// Self-contained HTML heatmap: green for positive scores, red for negative,
// opacity proportional to |score| / max|score|.
inline void render_heatmap(const std::vector<std::string>& tokens,
                           const std::vector<double>& scores, const std::string& predicted,
                           const std::string& actual, const std::string& path) {
    if (tokens.size() != scores.size())
        throw RevsentError("render_heatmap: token/score count mismatch");
    double max_abs = 0;
    for (double s : scores) {
        if (!std::isfinite(s)) throw RevsentError("render_heatmap: non-finite score");
        max_abs = std::max(max_abs, std::fabs(s));
    }
    std::ofstream f(path);
    if (!f) throw RevsentError("cannot write " + path);
    f << "<!DOCTYPE html><html><head><meta charset=\"utf-8\"><style>\n"
         "body{font-family:sans-serif;margin:2em}span.tok{padding:2px;margin:1px;border-radius:3px}\n"
         "</style></head><body>\n";
    f << "<p><b>predicted:</b> " << predicted << " &nbsp; <b>actual:</b> " << actual << "</p>\n<p>\n";
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        const double op = max_abs > 0 ? std::fabs(scores[i]) / max_abs : 0.0;
        const char* rgb = scores[i] >= 0 ? "0,160,0" : "200,0,0";
        f << "<span class=\"tok\" style=\"background-color:rgba(" << rgb << "," << op << ")\" title=\""
          << scores[i] << "\">";
        for (char c : tokens[i]) {
            if (c == '<') f << "&lt;";
            else if (c == '>') f << "&gt;";
            else if (c == '&') f << "&amp;";
            else f << c;
        }
        f << "</span>\n";
    }
    f << "</p></body></html>\n";
}

inline void write_attribution_json(const Attribution& a, const std::string& prediction,
                                   const std::string& label, const std::string& path) {
    nlohmann::json j;
    j["tokens"] = a.tokens;
    j["scores"] = a.scores;
    j["prediction"] = prediction;
    j["label"] = label;
    j["target_class"] = a.target_class;
    j["method"] = a.method == AttributionMethod::GradXInput ? "grad_x_input" : "integrated_gradients";
    std::ofstream f(path);
    if (!f) throw RevsentError("cannot write " + path);
    f << j.dump(2) << '\n';
}

}  // namespace revsent
