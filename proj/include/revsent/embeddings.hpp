#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "revsent/tensor.hpp"
#include "revsent/text.hpp"

namespace revsent {

enum class OovPolicy { Zero, RandomSeeded };

// |vocab| x dim table aligned with the Vocab id space; row 0 (padding) is
// always zero. Built either from a GloVe-style text file or random init.
struct EmbeddingTable {
    int dim = 100;
    Tensor vectors;  // [|vocab|, dim]

    static EmbeddingTable random(const Vocab& vocab, int dim, Rng& rng, real bound = real(0.1)) {
        EmbeddingTable t;
        t.dim = dim;
        t.vectors = Tensor::uniform({int(vocab.size()), dim}, bound, rng, true);
        for (int d = 0; d < dim; ++d) t.vectors.data()[std::size_t(d)] = 0;  // pad row
        return t;
    }

    // File of lines `token v1 ... vD`, constant D across lines.
    static EmbeddingTable load(const std::string& path, const Vocab& vocab,
                               OovPolicy policy = OovPolicy::Zero, std::uint64_t seed = 0) {
        std::ifstream f(path);
        if (!f) throw RevsentError("cannot read embedding file " + path);
        EmbeddingTable t;
        std::vector<std::vector<real>> file_rows;
        std::vector<std::string> file_tokens;
        std::string line;
        int lineno = 0, dim = -1;
        while (std::getline(f, line)) {
            ++lineno;
            if (line.empty()) continue;
            std::istringstream is(line);
            std::string tok;
            is >> tok;
            std::vector<real> v;
            double x;
            while (is >> x) v.push_back(real(x));
            if (!is.eof())
                throw ParseError(path + ":" + std::to_string(lineno) + ": non-numeric vector component");
            if (dim < 0) dim = int(v.size());
            if (int(v.size()) != dim)
                throw ParseError(path + ":" + std::to_string(lineno) + ": dimension " +
                                 std::to_string(v.size()) + " differs from first line's " +
                                 std::to_string(dim));
            file_tokens.push_back(tok);
            file_rows.push_back(std::move(v));
        }
        if (dim <= 0) throw ParseError(path + ": no embedding rows");
        t.dim = dim;
        const int V = int(vocab.size());
        t.vectors = Tensor::zeros({V, dim}, true);
        std::vector<bool> found(std::size_t(V), false);
        for (std::size_t i = 0; i < file_tokens.size(); ++i) {
            int id = vocab.id(file_tokens[i]);
            if (id == Vocab::kUnk && file_tokens[i] != "<unk>") continue;
            if (id == Vocab::kPad) continue;
            found[std::size_t(id)] = true;
            for (int d = 0; d < dim; ++d)
                t.vectors.data()[std::size_t(id) * dim + d] = file_rows[i][std::size_t(d)];
        }
        if (policy == OovPolicy::RandomSeeded) {
            Rng rng(make_rng(derive_seed(seed, 0xe4b)));
            std::uniform_real_distribution<double> dist(-0.1, 0.1);
            for (int id = 1; id < V; ++id)
                if (!found[std::size_t(id)])
                    for (int d = 0; d < dim; ++d)
                        t.vectors.data()[std::size_t(id) * dim + d] = real(dist(rng));
        }
        return t;
    }
};

}  // namespace revsent
