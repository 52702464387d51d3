#pragma once

#include <algorithm>
#include <cctype>
#include <fstream>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "revsent/common.hpp"

namespace revsent {

// ---- tokenization --------------------------------------------------------

// Lowercase word tokenizer: alphanumeric runs, interior apostrophes kept.
inline std::vector<std::string> tokenize_words(const std::string& text) {
    std::vector<std::string> out;
    std::string tok;
    auto flush = [&] {
        while (!tok.empty() && tok.front() == '\'') tok.erase(tok.begin());
        while (!tok.empty() && tok.back() == '\'') tok.pop_back();
        if (!tok.empty()) out.push_back(tok);
        tok.clear();
    };
    for (char ch : text) {
        unsigned char c = static_cast<unsigned char>(ch);
        if (std::isalnum(c) || c == '\'')
            tok.push_back(char(std::tolower(c)));
        else
            flush();
    }
    flush();
    return out;
}

// Split on sentence terminators {., !, ?}; runs of terminators count once.
inline std::vector<std::string> split_sentences(const std::string& text) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : text) {
        if (c == '.' || c == '!' || c == '?') {
            if (cur.find_first_not_of(" \t\r\n") != std::string::npos) out.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    if (cur.find_first_not_of(" \t\r\n") != std::string::npos) out.push_back(cur);
    return out;
}

// ---- stopwords -----------------------------------------------------------

// Fixed list shipped with the library; `data/stopwords.txt` mirrors it.
inline const std::vector<std::string>& default_stopwords() {
    static const std::vector<std::string> words = {
        "a", "about", "above", "after", "again", "against", "all", "am", "an", "and", "any",
        "are", "aren't", "as", "at", "be", "because", "been", "before", "being", "below",
        "between", "both", "but", "by", "can't", "cannot", "could", "couldn't", "did",
        "didn't", "do", "does", "doesn't", "doing", "don't", "down", "during", "each", "few",
        "for", "from", "further", "had", "hadn't", "has", "hasn't", "have", "haven't",
        "having", "he", "he'd", "he'll", "he's", "her", "here", "here's", "hers", "herself",
        "him", "himself", "his", "how", "how's", "i", "i'd", "i'll", "i'm", "i've", "if",
        "in", "into", "is", "isn't", "it", "it's", "its", "itself", "let's", "me", "more",
        "most", "mustn't", "my", "myself", "no", "nor", "not", "of", "off", "on", "once",
        "only", "or", "other", "ought", "our", "ours", "ourselves", "out", "over", "own",
        "same", "shan't", "she", "she'd", "she'll", "she's", "should", "shouldn't", "so",
        "some", "such", "than", "that", "that's", "the", "their", "theirs", "them",
        "themselves", "then", "there", "there's", "these", "they", "they'd", "they'll",
        "they're", "they've", "this", "those", "through", "to", "too", "under", "until",
        "up", "very", "was", "wasn't", "we", "we'd", "we'll", "we're", "we've", "were",
        "weren't", "what", "what's", "when", "when's", "where", "where's", "which", "while",
        "who", "who's", "whom", "why", "why's", "with", "won't", "would", "wouldn't", "you",
        "you'd", "you'll", "you're", "you've", "your", "yours", "yourself", "yourselves"};
    return words;
}

class StopwordSet {
public:
    StopwordSet() : StopwordSet(default_stopwords()) {}
    explicit StopwordSet(const std::vector<std::string>& words)
        : set_(words.begin(), words.end()) {}

    static StopwordSet load(const std::string& path) {
        std::ifstream f(path);
        if (!f) throw RevsentError("cannot read stopword file " + path);
        std::vector<std::string> words;
        std::string line;
        while (std::getline(f, line)) {
            while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
            if (!line.empty()) words.push_back(line);
        }
        return StopwordSet(words);
    }

    bool contains(const std::string& w) const { return set_.count(w) > 0; }
    std::size_t size() const { return set_.size(); }

private:
    std::unordered_set<std::string> set_;
};

// ---- stemming ------------------------------------------------------------

namespace detail {

inline bool is_vowel(const std::string& w, std::size_t i) {
    char c = w[i];
    if (c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u') return true;
    return c == 'y' && i > 0 && !is_vowel(w, i - 1);
}

// Porter's measure: number of VC sequences in the word.
inline int measure(const std::string& w) {
    int m = 0;
    bool prev_vowel = false;
    for (std::size_t i = 0; i < w.size(); ++i) {
        bool v = is_vowel(w, i);
        if (prev_vowel && !v) ++m;
        prev_vowel = v;
    }
    return m;
}

inline bool has_vowel(const std::string& w) {
    for (std::size_t i = 0; i < w.size(); ++i)
        if (is_vowel(w, i)) return true;
    return false;
}

inline bool ends_with(const std::string& w, const std::string& suf) {
    return w.size() >= suf.size() && w.compare(w.size() - suf.size(), suf.size(), suf) == 0;
}

inline bool double_consonant(const std::string& w) {
    std::size_t n = w.size();
    return n >= 2 && w[n - 1] == w[n - 2] && !is_vowel(w, n - 1);
}

// consonant-vowel-consonant ending where the last consonant is not w/x/y
inline bool cvc(const std::string& w) {
    std::size_t n = w.size();
    if (n < 3) return false;
    if (is_vowel(w, n - 1) || !is_vowel(w, n - 2) || is_vowel(w, n - 3)) return false;
    char c = w[n - 1];
    return c != 'w' && c != 'x' && c != 'y';
}

inline std::string stem_pass(std::string w) {
    if (w.size() <= 2) return w;

    // plurals
    if (ends_with(w, "sses")) w.erase(w.size() - 2);
    else if (ends_with(w, "ies")) w.erase(w.size() - 2);
    else if (!ends_with(w, "ss") && ends_with(w, "s") && w.size() > 3) w.pop_back();

    // -ed / -ing
    bool step1b_fixup = false;
    if (ends_with(w, "eed")) {
        if (measure(w.substr(0, w.size() - 3)) > 0) w.pop_back();
    } else if (ends_with(w, "ed") && has_vowel(w.substr(0, w.size() - 2))) {
        w.erase(w.size() - 2);
        step1b_fixup = true;
    } else if (ends_with(w, "ing") && has_vowel(w.substr(0, w.size() - 3))) {
        w.erase(w.size() - 3);
        step1b_fixup = true;
    }
    if (step1b_fixup) {
        if (ends_with(w, "at") || ends_with(w, "bl") || ends_with(w, "iz")) w.push_back('e');
        else if (double_consonant(w) && !ends_with(w, "l") && !ends_with(w, "s") && !ends_with(w, "z"))
            w.pop_back();
        else if (measure(w) == 1 && cvc(w)) w.push_back('e');
    }

    // trailing y -> i
    if (ends_with(w, "y") && has_vowel(w.substr(0, w.size() - 1))) w.back() = 'i';

    // common derivational suffixes (applied once per pass, longest first)
    static const std::vector<std::pair<std::string, std::string>> rules = {
        {"ational", "ate"}, {"ization", "ize"}, {"fulness", "ful"}, {"ousness", "ous"},
        {"iveness", "ive"}, {"tional", "tion"}, {"biliti", "ble"},  {"entli", "ent"},
        {"ousli", "ous"},   {"alism", "al"},    {"aliti", "al"},    {"iviti", "ive"},
        {"ation", "ate"},   {"iciti", "ic"},    {"alli", "al"},     {"ical", "ic"},
        {"ator", "ate"},    {"ment", ""},       {"ness", ""},       {"enci", "ence"},
        {"anci", "ance"},   {"izer", "ize"},    {"abli", "able"},   {"eli", "e"}};
    for (const auto& [suf, rep] : rules) {
        if (ends_with(w, suf)) {
            std::string stem = w.substr(0, w.size() - suf.size());
            if (measure(stem) > 0) w = stem + rep;
            break;
        }
    }
    return w;
}

}  // namespace detail

// Rule-based suffix-stripping stemmer iterated to a fixpoint, which makes
// stem(stem(w)) == stem(w) hold by construction.
inline std::string stem(std::string w) {
    for (int i = 0; i < 6; ++i) {
        std::string next = detail::stem_pass(w);
        if (next == w) return w;
        w = std::move(next);
    }
    return w;
}

// ---- classical pipeline --------------------------------------------------

// lowercase -> strip punctuation -> tokenize -> drop stopwords -> stem
inline std::vector<std::string> preprocess_classical(const std::string& text,
                                                     const StopwordSet& stopwords) {
    std::vector<std::string> out;
    for (auto& tok : tokenize_words(text))
        if (!stopwords.contains(tok)) out.push_back(stem(std::move(tok)));
    return out;
}

// ---- vocabulary and deep-path encoding -----------------------------------

class Vocab {
public:
    static constexpr int kPad = 0;
    static constexpr int kUnk = 1;

    Vocab() : tokens_{"<pad>", "<unk>"} {
        index_["<pad>"] = kPad;
        index_["<unk>"] = kUnk;
    }

    // Frequency-ordered vocabulary (lexicographic tie-break) from tokenized
    // train documents; max_size counts the pad/unk slots.
    static Vocab fit(const std::vector<std::vector<std::string>>& docs, std::size_t max_size = 0,
                     std::size_t min_count = 1) {
        std::unordered_map<std::string, std::size_t> counts;
        for (const auto& d : docs)
            for (const auto& t : d) ++counts[t];
        std::vector<std::pair<std::string, std::size_t>> ranked(counts.begin(), counts.end());
        std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
            if (a.second != b.second) return a.second > b.second;
            return a.first < b.first;
        });
        Vocab v;
        for (const auto& [tok, cnt] : ranked) {
            if (cnt < min_count) break;
            if (max_size && v.size() >= max_size) break;
            v.add(tok);
        }
        return v;
    }

    int add(const std::string& tok) {
        auto it = index_.find(tok);
        if (it != index_.end()) return it->second;
        int id = int(tokens_.size());
        tokens_.push_back(tok);
        index_[tok] = id;
        return id;
    }

    int id(const std::string& tok) const {
        auto it = index_.find(tok);
        return it == index_.end() ? kUnk : it->second;
    }

    const std::string& token(int id) const { return tokens_[std::size_t(id)]; }
    std::size_t size() const { return tokens_.size(); }

    void save(const std::string& path) const {
        std::ofstream f(path);
        if (!f) throw RevsentError("cannot write vocab file " + path);
        for (const auto& t : tokens_) f << t << '\n';
    }

    static Vocab load(const std::string& path) {
        std::ifstream f(path);
        if (!f) throw RevsentError("cannot read vocab file " + path);
        Vocab v;
        std::string line;
        std::size_t lineno = 0;
        while (std::getline(f, line)) {
            while (!line.empty() && line.back() == '\r') line.pop_back();
            if (lineno < 2) {
                // pad/unk rows written by save()
            } else {
                v.add(line);
            }
            ++lineno;
        }
        return v;
    }

private:
    std::vector<std::string> tokens_;
    std::unordered_map<std::string, int> index_;
};

struct TokenizedReview {
    std::vector<std::vector<int>> sentences;  // per-sentence token ids, <= n_max each
    std::vector<int> flat_tokens;             // order-preserving, for the CNN path
    int n_max = 50;
    int r_max = 10;
};

// Deep path: sentence split, lowercase tokenization, no stopword removal or
// stemming; token order preserved, truncation only.
inline TokenizedReview preprocess_deep(const std::string& text, const Vocab& vocab, int n_max = 50,
                                       int r_max = 10) {
    TokenizedReview out;
    out.n_max = n_max;
    out.r_max = r_max;
    for (const auto& sent : split_sentences(text)) {
        if (int(out.sentences.size()) >= r_max) break;
        std::vector<int> ids;
        for (const auto& tok : tokenize_words(sent)) {
            if (int(ids.size()) >= n_max) break;
            ids.push_back(vocab.id(tok));
        }
        if (!ids.empty()) out.sentences.push_back(std::move(ids));
    }
    if (out.sentences.empty()) out.sentences.push_back({Vocab::kPad});
    for (const auto& s : out.sentences)
        for (int id : s) out.flat_tokens.push_back(id);
    return out;
}

}  // namespace revsent
