#ifndef CONDET_TUNING_HPP
#define CONDET_TUNING_HPP

#include <algorithm>
#include <cstdint>
#include <exception>
#include <numeric>
#include <optional>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "condet/corpus.hpp"
#include "condet/eval.hpp"
#include "condet/gbdt.hpp"
#include "condet/parallel.hpp"

namespace condet {

// ---------------------------------------------------------------------------
// Grid search with document-level k-fold cross-validation, selecting by
// span-level micro F1 on the held-out folds.
// ---------------------------------------------------------------------------

struct ParamGrid {
    std::vector<double> learning_rate = {0.15, 0.2, 0.25, 0.3};
    std::vector<int> max_depth = {8, 10};
    std::vector<int> n_estimators = {400, 500};
    std::vector<double> max_delta_step = {4.0};
    std::vector<double> min_child_weight = {1.0};

    void validate() const {
        if (learning_rate.empty() || max_depth.empty() || n_estimators.empty() ||
            max_delta_step.empty() || min_child_weight.empty())
            throw std::invalid_argument("every grid dimension needs at least one candidate");
    }

    // Cartesian product in declaration order (learning_rate varies slowest).
    std::vector<Hyperparams> combinations(std::int64_t seed) const {
        validate();
        std::vector<Hyperparams> out;
        for (double lr : learning_rate)
            for (int depth : max_depth)
                for (int n : n_estimators)
                    for (double mds : max_delta_step)
                        for (double mcw : min_child_weight) {
                            Hyperparams hp;
                            hp.learning_rate = lr;
                            hp.max_depth = depth;
                            hp.n_estimators = n;
                            hp.max_delta_step = mds;
                            hp.min_child_weight = mcw;
                            hp.seed = seed;
                            out.push_back(hp);
                        }
        return out;
    }
};

struct CvResult {
    Hyperparams params;
    std::vector<double> fold_f1;
    double mean_f1 = 0.0;
    int rank = 0;  // 1 = selected
};

struct GridSearchResult {
    Hyperparams best;
    std::vector<CvResult> results;  // grid enumeration order
};

namespace detail {

// Fisher-Yates with explicit draws so fold assignment does not depend on
// the standard library's shuffle implementation.
inline std::vector<std::size_t> shuffled_indices(std::size_t n, std::uint64_t seed) {
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::mt19937_64 rng(seed);
    for (std::size_t i = n; i > 1; --i) std::swap(idx[i - 1], idx[rng() % i]);
    return idx;
}

// Preference order for grid winners: higher mean F1, then the cheaper and
// simpler configuration.
inline bool better_candidate(double mean_a, const Hyperparams& a, double mean_b,
                             const Hyperparams& b) {
    if (mean_a != mean_b) return mean_a > mean_b;
    if (a.n_estimators != b.n_estimators) return a.n_estimators < b.n_estimators;
    if (a.max_depth != b.max_depth) return a.max_depth < b.max_depth;
    if (a.learning_rate != b.learning_rate) return a.learning_rate < b.learning_rate;
    if (a.max_delta_step != b.max_delta_step) return a.max_delta_step < b.max_delta_step;
    return a.min_child_weight < b.min_child_weight;
}

inline Corpus select_documents(const Corpus& corpus, const std::vector<std::size_t>& doc_ids) {
    Corpus out;
    out.documents.reserve(doc_ids.size());
    for (std::size_t d : doc_ids) out.documents.push_back(corpus.documents[d]);
    return out;
}

// A one-document corpus cannot be folded at the document level; fall back
// to k contiguous sentence blocks promoted to pseudo-documents.
inline Corpus explode_single_document(const Corpus& corpus, int k) {
    const auto& doc = corpus.documents.front();
    const std::size_t n = doc.sentences.size();
    if (static_cast<std::size_t>(k) > n)
        throw std::invalid_argument("k = " + std::to_string(k) +
                                    " exceeds the number of sentences (" + std::to_string(n) +
                                    ") in the only document");
    Corpus out;
    const std::size_t base = n / static_cast<std::size_t>(k);
    const std::size_t extra = n % static_cast<std::size_t>(k);
    std::size_t next = 0;
    for (int block = 0; block < k; ++block) {
        const std::size_t size = base + (static_cast<std::size_t>(block) < extra ? 1 : 0);
        Document part;
        part.id = doc.id + "#" + std::to_string(block);
        part.sentences.assign(doc.sentences.begin() + static_cast<std::ptrdiff_t>(next),
                              doc.sentences.begin() + static_cast<std::ptrdiff_t>(next + size));
        out.documents.push_back(std::move(part));
        next += size;
    }
    return out;
}

inline std::string describe(const Hyperparams& hp) {
    std::ostringstream out;
    out << "lr=" << hp.learning_rate << " depth=" << hp.max_depth << " trees=" << hp.n_estimators
        << " mds=" << hp.max_delta_step << " mcw=" << hp.min_child_weight;
    return out.str();
}

}  // namespace detail

// Shuffles documents by seed and deals them round-robin into k disjoint
// folds whose sizes differ by at most one.
inline std::vector<std::vector<std::size_t>> make_folds(const Corpus& corpus, int k,
                                                        std::uint64_t seed) {
    const std::size_t docs = corpus.documents.size();
    if (k < 2) throw std::invalid_argument("k must be >= 2");
    if (static_cast<std::size_t>(k) > docs)
        throw std::invalid_argument("k = " + std::to_string(k) +
                                    " exceeds the number of documents (" + std::to_string(docs) +
                                    ")");
    const auto order = detail::shuffled_indices(docs, seed);
    std::vector<std::vector<std::size_t>> folds(static_cast<std::size_t>(k));
    for (std::size_t i = 0; i < docs; ++i)
        folds[i % static_cast<std::size_t>(k)].push_back(order[i]);
    return folds;
}

// Evaluates every grid combination with k-fold CV and returns the winner
// under the fixed preference order. Grid points run independently (and in
// parallel up to `threads`); the result table keeps grid order.
inline GridSearchResult grid_search(const Corpus& corpus, const ParamGrid& grid, int k,
                                    bool weighted, std::int64_t seed,
                                    const VerbPolicy& policy = {}, unsigned threads = 1) {
    const Corpus* working = &corpus;
    Corpus exploded;
    if (corpus.documents.size() == 1 && k >= 2) {
        exploded = detail::explode_single_document(corpus, k);
        working = &exploded;
    }
    const auto folds = make_folds(*working, k, static_cast<std::uint64_t>(seed));
    const auto combos = grid.combinations(seed);

    // Pre-build the k train/test corpora once; they are shared read-only.
    std::vector<Corpus> train_parts(folds.size()), test_parts(folds.size());
    for (std::size_t f = 0; f < folds.size(); ++f) {
        std::vector<std::size_t> train_docs;
        for (std::size_t d = 0; d < working->documents.size(); ++d)
            if (std::find(folds[f].begin(), folds[f].end(), d) == folds[f].end())
                train_docs.push_back(d);
        train_parts[f] = detail::select_documents(*working, train_docs);
        test_parts[f] = detail::select_documents(*working, folds[f]);
    }

    const std::size_t task_count = combos.size() * folds.size();
    std::vector<double> f1(task_count, 0.0);
    std::vector<std::string> errors(task_count);

    parallel_for(task_count, threads, [&](std::size_t task) {
        const std::size_t ci = task / folds.size();
        const std::size_t fi = task % folds.size();
        try {
            const auto model = fit_model(train_parts[fi], combos[ci], weighted, policy);
            const auto pred = predict_labels(model, test_parts[fi]);
            const auto gold = test_parts[fi].labels();
            f1[task] = score_corpus(test_parts[fi], gold, pred).f1();
        } catch (const std::exception& e) {
            errors[task] = e.what();
        }
    });

    for (std::size_t task = 0; task < task_count; ++task)
        if (!errors[task].empty())
            throw std::runtime_error("grid point [" + detail::describe(combos[task / folds.size()]) +
                                     "] fold " + std::to_string(task % folds.size()) + ": " +
                                     errors[task]);

    GridSearchResult result;
    result.results.resize(combos.size());
    for (std::size_t ci = 0; ci < combos.size(); ++ci) {
        CvResult& cv = result.results[ci];
        cv.params = combos[ci];
        cv.fold_f1.assign(f1.begin() + static_cast<std::ptrdiff_t>(ci * folds.size()),
                          f1.begin() + static_cast<std::ptrdiff_t>((ci + 1) * folds.size()));
        cv.mean_f1 = std::accumulate(cv.fold_f1.begin(), cv.fold_f1.end(), 0.0) /
                     static_cast<double>(cv.fold_f1.size());
    }

    std::vector<std::size_t> order(combos.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return detail::better_candidate(result.results[a].mean_f1, result.results[a].params,
                                        result.results[b].mean_f1, result.results[b].params);
    });
    for (std::size_t pos = 0; pos < order.size(); ++pos)
        result.results[order[pos]].rank = static_cast<int>(pos + 1);
    result.best = result.results[order.front()].params;
    return result;
}

}  // namespace condet

#endif  // CONDET_TUNING_HPP
