#ifndef CONDET_GBDT_HPP
#define CONDET_GBDT_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "condet/corpus.hpp"
#include "condet/features.hpp"

namespace condet {

// ---------------------------------------------------------------------------
// Multiclass gradient boosting with a softmax objective, trained by exact
// greedy second-order splitting. One regression tree per class per round;
// scores start at the base score (0) and accumulate learning_rate * leaf.
// All tie-breaks are fixed (lower feature index, lower threshold, lower
// class index) so training and prediction are bit-reproducible.
// ---------------------------------------------------------------------------

struct Hyperparams {
    double learning_rate = 0.2;
    int max_depth = 8;
    int n_estimators = 500;
    double max_delta_step = 4.0;    // 0 disables leaf clamping
    double min_child_weight = 1.0;  // minimum hessian mass per child
    double lambda_reg = 1.0;        // L2 penalty on leaf values
    double gamma = 0.0;             // additive gain penalty per split
    std::int64_t seed = 0;

    bool operator==(const Hyperparams&) const = default;

    void validate() const {
        if (!(learning_rate > 0.0) || learning_rate > 1.0)
            throw std::invalid_argument("learning_rate must be in (0, 1]");
        if (max_depth < 1) throw std::invalid_argument("max_depth must be >= 1");
        if (n_estimators < 1) throw std::invalid_argument("n_estimators must be >= 1");
        if (max_delta_step < 0.0) throw std::invalid_argument("max_delta_step must be >= 0");
        if (min_child_weight < 0.0) throw std::invalid_argument("min_child_weight must be >= 0");
        if (lambda_reg < 0.0) throw std::invalid_argument("lambda_reg must be >= 0");
        if (gamma < 0.0) throw std::invalid_argument("gamma must be >= 0");
    }
};

struct ClassWeights {
    std::vector<double> w;

    bool operator==(const ClassWeights&) const = default;
};

// w_i = N / (C * n_i); every class must occur.
inline ClassWeights compute_class_weights(const std::vector<int>& labels, int num_classes) {
    std::vector<std::size_t> counts(static_cast<std::size_t>(num_classes), 0);
    for (int y : labels) {
        if (y < 0 || y >= num_classes)
            throw std::invalid_argument("label " + std::to_string(y) + " out of range");
        ++counts[static_cast<std::size_t>(y)];
    }
    ClassWeights cw;
    cw.w.resize(static_cast<std::size_t>(num_classes));
    const auto n = static_cast<double>(labels.size());
    for (int c = 0; c < num_classes; ++c) {
        if (counts[static_cast<std::size_t>(c)] == 0)
            throw std::invalid_argument("class " + std::to_string(c) + " has zero instances");
        cw.w[static_cast<std::size_t>(c)] =
            n / (static_cast<double>(num_classes) *
                 static_cast<double>(counts[static_cast<std::size_t>(c)]));
    }
    return cw;
}

// Row-wise softmax derivatives of the weighted log-loss. Scores, grad and
// hess are N x C, flattened row-major. The hessian is floored at 1e-16.
inline void softmax_grad_hess(std::span<const double> scores, std::span<const int> targets,
                              std::span<const double> sample_weights, int num_classes,
                              std::vector<double>& grad, std::vector<double>& hess) {
    const std::size_t n = targets.size();
    const auto c_count = static_cast<std::size_t>(num_classes);
    grad.resize(n * c_count);
    hess.resize(n * c_count);
    std::vector<double> p(c_count);
    for (std::size_t i = 0; i < n; ++i) {
        const double* row = scores.data() + i * c_count;
        double mx = row[0];
        for (std::size_t c = 1; c < c_count; ++c) mx = std::max(mx, row[c]);
        double sum = 0.0;
        for (std::size_t c = 0; c < c_count; ++c) {
            p[c] = std::exp(row[c] - mx);
            sum += p[c];
        }
        const double w = sample_weights[i];
        const auto target = static_cast<std::size_t>(targets[i]);
        for (std::size_t c = 0; c < c_count; ++c) {
            const double prob = p[c] / sum;
            grad[i * c_count + c] = w * (prob - (c == target ? 1.0 : 0.0));
            hess[i * c_count + c] = std::max(w * prob * (1.0 - prob), 1e-16);
        }
    }
}

// Sum over rows of -w_i * log p(target_i).
inline double weighted_log_loss(std::span<const double> scores, std::span<const int> targets,
                                std::span<const double> sample_weights, int num_classes) {
    const std::size_t n = targets.size();
    const auto c_count = static_cast<std::size_t>(num_classes);
    double loss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double* row = scores.data() + i * c_count;
        double mx = row[0];
        for (std::size_t c = 1; c < c_count; ++c) mx = std::max(mx, row[c]);
        double sum = 0.0;
        for (std::size_t c = 0; c < c_count; ++c) sum += std::exp(row[c] - mx);
        const auto target = static_cast<std::size_t>(targets[i]);
        loss += sample_weights[i] * (std::log(sum) - (row[target] - mx));
    }
    return loss;
}

// ---------------------------------------------------------------------------
// Trees. Nodes live in a flat vector in breadth-first order; routing is
// strict: feature value < threshold goes left, everything else right.
// ---------------------------------------------------------------------------

struct TreeNode {
    std::int32_t feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    double gain = 0.0;  // split gain, kept for importance reports
    std::int32_t left = -1;
    std::int32_t right = -1;
    double value = 0.0;  // leaf output, unscaled

    bool is_leaf() const { return feature < 0; }
};

class Tree {
public:
    Tree() = default;

    static Tree from_nodes(std::vector<TreeNode> nodes) {
        Tree t;
        t.nodes_ = std::move(nodes);
        return t;
    }

    const std::vector<TreeNode>& nodes() const { return nodes_; }

    double value_at(const FeatureVector& x) const {
        std::int32_t idx = 0;
        while (!nodes_[static_cast<std::size_t>(idx)].is_leaf()) {
            const auto& node = nodes_[static_cast<std::size_t>(idx)];
            idx = x[static_cast<std::size_t>(node.feature)] < node.threshold ? node.left
                                                                             : node.right;
        }
        return nodes_[static_cast<std::size_t>(idx)].value;
    }

private:
    std::vector<TreeNode> nodes_;
};

struct SplitCandidate {
    int feature = -1;
    double threshold = 0.0;
    double gain = -std::numeric_limits<double>::infinity();
    double grad_left = 0.0;
    double hess_left = 0.0;
    std::size_t count_left = 0;
};

namespace detail {

// Candidate threshold strictly above `lo` and at most `hi`, so that rows at
// `lo` route left and rows at `hi` route right even when the two doubles
// are adjacent.
inline double split_midpoint(double lo, double hi) {
    double mid = lo + (hi - lo) / 2.0;
    if (!(lo < mid)) mid = hi;
    return mid;
}

inline double split_gain(double gl, double hl, double gr, double hr, double gp, double hp_sum,
                         double lambda, double gamma) {
    return 0.5 * (gl * gl / (hl + lambda) + gr * gr / (hr + lambda) -
                  gp * gp / (hp_sum + lambda)) -
           gamma;
}

inline double leaf_value(double g, double h, const Hyperparams& hp) {
    double value = -g / (h + hp.lambda_reg);
    if (hp.max_delta_step > 0.0)
        value = std::clamp(value, -hp.max_delta_step, hp.max_delta_step);
    return value;
}

// Row ids sorted per feature by (value, row); shared across every tree of a
// training run since feature values never change.
struct SortedColumns {
    std::vector<std::vector<std::uint32_t>> order;  // one vector per feature
};

inline SortedColumns sort_columns(std::span<const FeatureVector> x,
                                  std::span<const std::size_t> rows) {
    SortedColumns cols;
    cols.order.resize(kFeatureCount);
    std::vector<std::uint32_t> base;
    base.reserve(rows.size());
    for (std::size_t r : rows) base.push_back(static_cast<std::uint32_t>(r));
    for (std::size_t f = 0; f < kFeatureCount; ++f) {
        cols.order[f] = base;
        std::sort(cols.order[f].begin(), cols.order[f].end(),
                  [&](std::uint32_t a, std::uint32_t b) {
                      if (x[a][f] != x[b][f]) return x[a][f] < x[b][f];
                      return a < b;
                  });
    }
    return cols;
}

// Level-wise exact greedy builder. One pass per (level, feature) over the
// pre-sorted rows serves every open node at that level simultaneously.
inline Tree build_tree_sorted(const SortedColumns& cols, std::span<const FeatureVector> x,
                              std::span<const std::size_t> rows, std::span<const double> g,
                              std::span<const double> h, const Hyperparams& hp,
                              std::vector<std::int32_t>* node_of_row_out = nullptr) {
    struct NodeAgg {
        double grad_sum = 0.0;
        double hess_sum = 0.0;
        std::size_t count = 0;
    };
    struct ScanState {
        double grad_left = 0.0;
        double hess_left = 0.0;
        std::size_t count_left = 0;
        double prev_value = 0.0;
        bool has_prev = false;
    };

    std::vector<TreeNode> nodes(1);
    std::vector<NodeAgg> aggs(1);
    for (std::size_t r : rows) {
        aggs[0].grad_sum += g[r];
        aggs[0].hess_sum += h[r];
        ++aggs[0].count;
    }

    std::vector<std::int32_t> node_of_row(x.size(), -1);
    for (std::size_t r : rows) node_of_row[r] = 0;

    const auto finalize_leaf = [&](std::int32_t id) {
        nodes[static_cast<std::size_t>(id)].feature = -1;
        nodes[static_cast<std::size_t>(id)].value =
            leaf_value(aggs[static_cast<std::size_t>(id)].grad_sum,
                       aggs[static_cast<std::size_t>(id)].hess_sum, hp);
    };

    std::vector<std::int32_t> active = {0};
    std::vector<std::int32_t> slot_of_node;
    for (int depth = 0; depth < hp.max_depth && !active.empty(); ++depth) {
        std::vector<std::int32_t> open;
        for (std::int32_t id : active) {
            if (aggs[static_cast<std::size_t>(id)].count >= 2)
                open.push_back(id);
            else
                finalize_leaf(id);
        }
        if (open.empty()) {
            active.clear();
            break;
        }

        slot_of_node.assign(nodes.size(), -1);
        for (std::size_t s = 0; s < open.size(); ++s)
            slot_of_node[static_cast<std::size_t>(open[s])] = static_cast<std::int32_t>(s);

        std::vector<SplitCandidate> best(open.size());
        std::vector<ScanState> state(open.size());
        for (std::size_t f = 0; f < kFeatureCount; ++f) {
            std::fill(state.begin(), state.end(), ScanState{});
            for (std::uint32_t row : cols.order[f]) {
                const std::int32_t node = node_of_row[row];
                if (node < 0) continue;
                const std::int32_t s = slot_of_node[static_cast<std::size_t>(node)];
                if (s < 0) continue;
                ScanState& st = state[static_cast<std::size_t>(s)];
                const double v = x[row][f];
                if (st.has_prev && v != st.prev_value) {
                    const NodeAgg& agg = aggs[static_cast<std::size_t>(node)];
                    const double gr = agg.grad_sum - st.grad_left;
                    const double hr = agg.hess_sum - st.hess_left;
                    if (st.hess_left >= hp.min_child_weight && hr >= hp.min_child_weight) {
                        const double gain =
                            split_gain(st.grad_left, st.hess_left, gr, hr, agg.grad_sum,
                                       agg.hess_sum, hp.lambda_reg, hp.gamma);
                        SplitCandidate& b = best[static_cast<std::size_t>(s)];
                        if (gain > 0.0 && gain > b.gain) {
                            b.feature = static_cast<int>(f);
                            b.threshold = split_midpoint(st.prev_value, v);
                            b.gain = gain;
                            b.grad_left = st.grad_left;
                            b.hess_left = st.hess_left;
                            b.count_left = st.count_left;
                        }
                    }
                }
                st.grad_left += g[row];
                st.hess_left += h[row];
                ++st.count_left;
                st.prev_value = v;
                st.has_prev = true;
            }
        }

        std::vector<std::int32_t> next_active;
        bool any_split = false;
        for (std::size_t s = 0; s < open.size(); ++s) {
            const std::int32_t id = open[s];
            const SplitCandidate& b = best[s];
            if (b.feature < 0) {
                finalize_leaf(id);
                continue;
            }
            const NodeAgg parent = aggs[static_cast<std::size_t>(id)];
            const auto left_id = static_cast<std::int32_t>(nodes.size());
            const auto right_id = left_id + 1;
            nodes.emplace_back();
            nodes.emplace_back();
            aggs.push_back({b.grad_left, b.hess_left, b.count_left});
            aggs.push_back({parent.grad_sum - b.grad_left, parent.hess_sum - b.hess_left,
                            parent.count - b.count_left});
            TreeNode& node = nodes[static_cast<std::size_t>(id)];
            node.feature = b.feature;
            node.threshold = b.threshold;
            node.gain = b.gain;
            node.left = left_id;
            node.right = right_id;
            next_active.push_back(left_id);
            next_active.push_back(right_id);
            any_split = true;
        }

        if (any_split) {
            for (std::size_t r : rows) {
                const std::int32_t id = node_of_row[r];
                const TreeNode& node = nodes[static_cast<std::size_t>(id)];
                if (!node.is_leaf())
                    node_of_row[r] =
                        x[r][static_cast<std::size_t>(node.feature)] < node.threshold
                            ? node.left
                            : node.right;
            }
        }
        active = std::move(next_active);
    }
    for (std::int32_t id : active) finalize_leaf(id);

    if (node_of_row_out) *node_of_row_out = std::move(node_of_row);
    return Tree::from_nodes(std::move(nodes));
}

}  // namespace detail

// Exact greedy split search over an explicit row set. Candidates are the
// midpoints between distinct consecutive sorted values per feature; a split
// is admissible when both children carry at least min_child_weight hessian
// mass and the gain is strictly positive. Ties prefer the lower feature
// index, then the lower threshold.
inline std::optional<SplitCandidate> find_best_split(std::span<const std::size_t> rows,
                                                     std::span<const FeatureVector> x,
                                                     std::span<const double> g,
                                                     std::span<const double> h,
                                                     const Hyperparams& hp) {
    if (rows.size() < 2) return std::nullopt;
    SplitCandidate best;
    std::vector<std::pair<double, std::size_t>> vals(rows.size());
    for (std::size_t f = 0; f < kFeatureCount; ++f) {
        for (std::size_t i = 0; i < rows.size(); ++i) vals[i] = {x[rows[i]][f], rows[i]};
        std::sort(vals.begin(), vals.end());

        double total_g = 0.0, total_h = 0.0;
        for (const auto& [v, r] : vals) {
            total_g += g[r];
            total_h += h[r];
        }
        double gl = 0.0, hl = 0.0;
        for (std::size_t k = 0; k < vals.size(); ++k) {
            const auto [v, r] = vals[k];
            if (k > 0 && v != vals[k - 1].first) {
                const double gr = total_g - gl;
                const double hr = total_h - hl;
                if (hl >= hp.min_child_weight && hr >= hp.min_child_weight) {
                    const double gain = detail::split_gain(gl, hl, gr, hr, total_g, total_h,
                                                           hp.lambda_reg, hp.gamma);
                    if (gain > 0.0 && gain > best.gain) {
                        best.feature = static_cast<int>(f);
                        best.threshold = detail::split_midpoint(vals[k - 1].first, v);
                        best.gain = gain;
                        best.grad_left = gl;
                        best.hess_left = hl;
                        best.count_left = k;
                    }
                }
            }
            gl += g[r];
            hl += h[r];
        }
    }
    if (best.feature < 0) return std::nullopt;
    return best;
}

// Builds one regression tree over the given rows: recursive splitting until
// max_depth, no admissible split, or fewer than two rows; leaf values are
// -G/(H+lambda) clamped to +-max_delta_step when that cap is positive.
inline Tree build_tree(std::span<const std::size_t> rows, std::span<const FeatureVector> x,
                       std::span<const double> g, std::span<const double> h,
                       const Hyperparams& hp) {
    if (rows.empty()) throw std::invalid_argument("build_tree requires at least one row");
    const auto cols = detail::sort_columns(x, rows);
    return detail::build_tree_sorted(cols, x, rows, g, h, hp);
}

struct TrainingTrace {
    // round_loss[0] is the loss at the base score, round_loss[t] the loss
    // after round t.
    std::vector<double> round_loss;
};

struct Booster {
    Hyperparams hp;
    int num_classes = kNumClasses;
    std::vector<double> base_score = std::vector<double>(kNumClasses, 0.0);
    std::optional<ClassWeights> class_weights;
    std::vector<std::vector<Tree>> rounds;  // each round holds num_classes trees
};

// Fits n_estimators rounds of per-class trees. With `weighted` set, each
// row's gradient is scaled by the inverse-frequency weight of its gold
// class, which requires every class to be present.
inline Booster train(std::span<const FeatureVector> x, std::span<const int> y,
                     const Hyperparams& hp, bool weighted, int num_classes = kNumClasses,
                     TrainingTrace* trace = nullptr) {
    hp.validate();
    const std::size_t n = x.size();
    if (n == 0 || y.size() != n)
        throw std::invalid_argument("training set is empty or misaligned");
    for (int label : y)
        if (label < 0 || label >= num_classes)
            throw std::invalid_argument("label " + std::to_string(label) + " out of range");

    Booster booster;
    booster.hp = hp;
    booster.num_classes = num_classes;
    booster.base_score.assign(static_cast<std::size_t>(num_classes), 0.0);

    std::vector<double> sample_weights(n, 1.0);
    if (weighted) {
        const auto cw = compute_class_weights(std::vector<int>(y.begin(), y.end()), num_classes);
        for (std::size_t i = 0; i < n; ++i)
            sample_weights[i] = cw.w[static_cast<std::size_t>(y[i])];
        booster.class_weights = cw;
    }

    std::vector<std::size_t> rows(n);
    for (std::size_t i = 0; i < n; ++i) rows[i] = i;
    const auto cols = detail::sort_columns(x, rows);

    const auto c_count = static_cast<std::size_t>(num_classes);
    std::vector<double> scores(n * c_count, 0.0);
    std::vector<double> grad, hess;
    std::vector<double> gcol(n), hcol(n);
    std::vector<std::int32_t> leaf_of_row;

    if (trace) trace->round_loss.push_back(weighted_log_loss(scores, y, sample_weights, num_classes));

    booster.rounds.reserve(static_cast<std::size_t>(hp.n_estimators));
    for (int round = 0; round < hp.n_estimators; ++round) {
        softmax_grad_hess(scores, y, sample_weights, num_classes, grad, hess);
        booster.rounds.emplace_back();
        auto& trees = booster.rounds.back();
        trees.reserve(c_count);
        for (std::size_t c = 0; c < c_count; ++c) {
            for (std::size_t i = 0; i < n; ++i) {
                gcol[i] = grad[i * c_count + c];
                hcol[i] = hess[i * c_count + c];
            }
            Tree tree = detail::build_tree_sorted(cols, x, rows, gcol, hcol, hp, &leaf_of_row);
            for (std::size_t i = 0; i < n; ++i)
                scores[i * c_count + c] +=
                    hp.learning_rate *
                    tree.nodes()[static_cast<std::size_t>(leaf_of_row[i])].value;
            trees.push_back(std::move(tree));
        }
        if (trace)
            trace->round_loss.push_back(weighted_log_loss(scores, y, sample_weights, num_classes));
    }
    return booster;
}

// Raw scores, N x num_classes flattened: base_score plus the shrunken sum
// of per-round tree outputs, accumulated in round order.
inline std::vector<double> predict_scores(const Booster& booster,
                                          std::span<const FeatureVector> x) {
    const std::size_t n = x.size();
    const auto c_count = static_cast<std::size_t>(booster.num_classes);
    std::vector<double> scores(n * c_count);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t c = 0; c < c_count; ++c) scores[i * c_count + c] = booster.base_score[c];
    for (const auto& round : booster.rounds) {
        for (std::size_t c = 0; c < c_count; ++c) {
            const Tree& tree = round[c];
            for (std::size_t i = 0; i < n; ++i)
                scores[i * c_count + c] += booster.hp.learning_rate * tree.value_at(x[i]);
        }
    }
    return scores;
}

enum class ImportanceKind { Gain, SplitCount };

inline std::optional<ImportanceKind> parse_importance_kind(std::string_view s) {
    if (s == "gain") return ImportanceKind::Gain;
    if (s == "split_count") return ImportanceKind::SplitCount;
    return std::nullopt;
}

// Per-feature importance over all trees, descending with name tie-break.
inline std::vector<std::pair<std::string, double>> feature_importance(const Booster& booster,
                                                                      ImportanceKind kind) {
    if (booster.rounds.empty())
        throw std::invalid_argument("feature importance requires a trained model");
    std::array<double, kFeatureCount> totals{};
    for (const auto& round : booster.rounds)
        for (const auto& tree : round)
            for (const auto& node : tree.nodes())
                if (!node.is_leaf())
                    totals[static_cast<std::size_t>(node.feature)] +=
                        kind == ImportanceKind::Gain ? node.gain : 1.0;
    std::vector<std::pair<std::string, double>> ranking;
    ranking.reserve(kFeatureCount);
    for (std::size_t f = 0; f < kFeatureCount; ++f)
        ranking.emplace_back(std::string(feature_names()[f]), totals[f]);
    std::sort(ranking.begin(), ranking.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    return ranking;
}

// ---------------------------------------------------------------------------
// Full model: booster plus everything needed to featurize raw corpora.
// ---------------------------------------------------------------------------

class SchemaMismatchError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct GbdtModel {
    Booster booster;
    Vocabulary vocab;
    VerbPolicy verb_policy;
    std::string feature_schema_version = std::string(kFeatureSchemaVersion);
    std::vector<std::string> class_labels = class_label_names();
};

// Trains a model end to end: vocabulary from the training corpus only,
// then boosted trees over the extracted features.
inline GbdtModel fit_model(const Corpus& train_corpus, const Hyperparams& hp, bool weighted,
                           const VerbPolicy& policy = {}, TrainingTrace* trace = nullptr) {
    GbdtModel model;
    model.vocab = build_vocabulary(train_corpus);
    model.verb_policy = policy;
    const auto data = featurize_corpus(train_corpus, model.vocab, policy);
    model.booster = train(data.features, data.labels, hp, weighted, kNumClasses, trace);
    return model;
}

inline void check_schema(const GbdtModel& model) {
    if (model.feature_schema_version != kFeatureSchemaVersion)
        throw SchemaMismatchError("model feature schema '" + model.feature_schema_version +
                                  "' does not match extractor '" +
                                  std::string(kFeatureSchemaVersion) + "'");
}

// Argmax over class scores; exact ties resolve to the lowest class index,
// so an all-zero model predicts O everywhere.
inline std::vector<Label> predict_labels(const GbdtModel& model, const Corpus& corpus) {
    check_schema(model);
    const auto data = featurize_corpus(corpus, model.vocab, model.verb_policy);
    const auto scores = predict_scores(model.booster, data.features);
    const auto c_count = static_cast<std::size_t>(model.booster.num_classes);
    std::vector<Label> out;
    out.reserve(data.features.size());
    for (std::size_t i = 0; i < data.features.size(); ++i) {
        std::size_t best = 0;
        for (std::size_t c = 1; c < c_count; ++c)
            if (scores[i * c_count + c] > scores[i * c_count + best]) best = c;
        out.push_back(static_cast<Label>(best));
    }
    return out;
}

}  // namespace condet

#endif  // CONDET_GBDT_HPP
