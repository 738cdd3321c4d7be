#pragma once

// Independent reference implementations and random generators for tests.
// Nothing here calls into the library's metric code.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace oracle {

// O(P*N) pairwise count: wins plus half the ties over all (pos, neg) pairs.
inline double pairwise_auroc(const std::vector<double>& scores, const std::vector<int>& labels) {
    long double wins = 0;
    long double pairs = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (labels[i] != 1) continue;
        for (std::size_t j = 0; j < scores.size(); ++j) {
            if (labels[j] != 0) continue;
            pairs += 1;
            if (scores[i] > scores[j]) wins += 1;
            else if (scores[i] == scores[j]) wins += 0.5L;
        }
    }
    return static_cast<double>(wins / pairs);
}

inline double direct_geometric_mean(const std::vector<double>& p) {
    long double prod = 1;
    for (double x : p) prod *= x;
    return static_cast<double>(std::pow(prod, 1.0L / static_cast<long double>(p.size())));
}

inline double arithmetic_mean(const std::vector<double>& p) {
    long double s = 0;
    for (double x : p) s += x;
    return static_cast<double>(s / static_cast<long double>(p.size()));
}

// Token F1 over pre-split whitespace tokens.
inline double whitespace_f1(const std::string& pred, const std::string& gold) {
    auto split = [](const std::string& s) {
        std::istringstream in(s);
        std::vector<std::string> out;
        for (std::string w; in >> w;) out.push_back(w);
        return out;
    };
    const auto p = split(pred);
    const auto g = split(gold);
    if (p.empty() || g.empty()) return 0.0;
    std::map<std::string, int> counts;
    for (const auto& w : g) ++counts[w];
    int overlap = 0;
    for (const auto& w : p) {
        if (counts[w] > 0) {
            --counts[w];
            ++overlap;
        }
    }
    if (overlap == 0) return 0.0;
    const double precision = static_cast<double>(overlap) / static_cast<double>(p.size());
    const double recall = static_cast<double>(overlap) / static_cast<double>(g.size());
    return 2 * precision * recall / (precision + recall);
}

struct Gen {
    explicit Gen(std::uint64_t seed) : rng(seed) {}

    std::mt19937_64 rng;

    double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }
    std::size_t index(std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng); }
    bool coin(double p = 0.5) { return uniform(0.0, 1.0) < p; }

    // Scores with a share of exact duplicates so ties are exercised.
    std::vector<double> scores_with_ties(std::size_t n) {
        std::vector<double> out;
        for (std::size_t i = 0; i < n; ++i) {
            if (!out.empty() && coin(0.3)) out.push_back(out[index(out.size())]);
            else if (coin(0.2)) out.push_back(static_cast<double>(index(5)) / 4.0);
            else out.push_back(uniform(0.0, 1.0));
        }
        return out;
    }

    // Labels with both classes present; n >= 2.
    std::vector<int> labels(std::size_t n) {
        std::vector<int> out(n);
        for (auto& l : out) l = coin() ? 1 : 0;
        const auto positives = std::count(out.begin(), out.end(), 1);
        if (positives == 0 || positives == static_cast<long>(n)) out[index(n)] ^= 1;
        return out;
    }

    std::string word() {
        static const std::vector<std::string> vocab = {"paris", "tower", "river", "king", "blue", "nile",
                                                       "gold", "moon", "seven", "red", "tokyo", "bell"};
        return vocab[index(vocab.size())];
    }

    std::string phrase(std::size_t max_words) {
        std::string out;
        const std::size_t n = 1 + index(max_words);
        for (std::size_t i = 0; i < n; ++i) {
            if (i) out += " ";
            out += word();
        }
        return out;
    }
};

}  // namespace oracle
