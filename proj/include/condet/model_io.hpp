#ifndef CONDET_MODEL_IO_HPP
#define CONDET_MODEL_IO_HPP

#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "condet/gbdt.hpp"

namespace condet {

// Single persisted artifact format: a JSON document, version "condet-model/1".
// Doubles are written in shortest round-trip form, so a loaded model predicts
// bit-identically to the one that was saved.

inline constexpr std::string_view kModelFormatVersion = "condet-model/1";

class ModelFormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace detail {

inline nlohmann::json hyperparams_to_json(const Hyperparams& hp) {
    return {
        {"learning_rate", hp.learning_rate},
        {"max_depth", hp.max_depth},
        {"n_estimators", hp.n_estimators},
        {"max_delta_step", hp.max_delta_step},
        {"min_child_weight", hp.min_child_weight},
        {"lambda_reg", hp.lambda_reg},
        {"gamma", hp.gamma},
        {"seed", hp.seed},
    };
}

inline Hyperparams hyperparams_from_json(const nlohmann::json& j) {
    Hyperparams hp;
    hp.learning_rate = j.at("learning_rate").get<double>();
    hp.max_depth = j.at("max_depth").get<int>();
    hp.n_estimators = j.at("n_estimators").get<int>();
    hp.max_delta_step = j.at("max_delta_step").get<double>();
    hp.min_child_weight = j.at("min_child_weight").get<double>();
    hp.lambda_reg = j.value("lambda_reg", 1.0);
    hp.gamma = j.value("gamma", 0.0);
    hp.seed = j.value("seed", std::int64_t{0});
    hp.validate();
    return hp;
}

inline nlohmann::json node_to_json(const Tree& tree, std::int32_t idx) {
    const auto& node = tree.nodes()[static_cast<std::size_t>(idx)];
    if (node.is_leaf()) return {{"value", node.value}};
    return {{"feature", node.feature},
            {"threshold", node.threshold},
            {"gain", node.gain},
            {"left", node_to_json(tree, node.left)},
            {"right", node_to_json(tree, node.right)}};
}

inline std::int32_t node_from_json(const nlohmann::json& j, std::vector<TreeNode>& nodes,
                                   int depth, int max_depth) {
    if (depth > max_depth)
        throw ModelFormatError("tree deeper than the stored max_depth");
    const auto idx = static_cast<std::int32_t>(nodes.size());
    nodes.emplace_back();
    if (j.contains("value")) {
        nodes[static_cast<std::size_t>(idx)].value = j.at("value").get<double>();
        return idx;
    }
    const int feature = j.at("feature").get<int>();
    if (feature < 0 || feature >= static_cast<int>(kFeatureCount))
        throw ModelFormatError("split feature index out of range");
    const double threshold = j.at("threshold").get<double>();
    const double gain = j.value("gain", 0.0);
    const auto left = node_from_json(j.at("left"), nodes, depth + 1, max_depth);
    const auto right = node_from_json(j.at("right"), nodes, depth + 1, max_depth);
    TreeNode& node = nodes[static_cast<std::size_t>(idx)];
    node.feature = feature;
    node.threshold = threshold;
    node.gain = gain;
    node.left = left;
    node.right = right;
    return idx;
}

}  // namespace detail

inline nlohmann::json model_to_json(const GbdtModel& model) {
    nlohmann::json j;
    j["version"] = kModelFormatVersion;
    j["feature_schema_version"] = model.feature_schema_version;
    j["hyperparams"] = detail::hyperparams_to_json(model.booster.hp);
    j["class_labels"] = model.class_labels;
    if (model.booster.class_weights)
        j["class_weights"] = model.booster.class_weights->w;
    else
        j["class_weights"] = nullptr;
    j["verb_policy"] = {{"verb_tags", model.verb_policy.verb_tags},
                        {"include_aux", model.verb_policy.include_aux}};
    j["vocabulary"] = model.vocab.forms();  // index i holds the form with id i+1
    j["oov_id"] = 0;
    j["base_score"] = model.booster.base_score;

    nlohmann::json rounds = nlohmann::json::array();
    for (const auto& round : model.booster.rounds) {
        nlohmann::json trees = nlohmann::json::array();
        for (const auto& tree : round) trees.push_back(detail::node_to_json(tree, 0));
        rounds.push_back(std::move(trees));
    }
    j["trees"] = std::move(rounds);
    return j;
}

inline GbdtModel model_from_json(const nlohmann::json& j) {
    const auto version = j.at("version").get<std::string>();
    if (version != kModelFormatVersion)
        throw ModelFormatError("unsupported model version '" + version + "' (expected '" +
                               std::string(kModelFormatVersion) + "')");

    GbdtModel model;
    model.feature_schema_version = j.at("feature_schema_version").get<std::string>();
    model.class_labels = j.at("class_labels").get<std::vector<std::string>>();
    model.booster.hp = detail::hyperparams_from_json(j.at("hyperparams"));
    model.booster.num_classes = static_cast<int>(model.class_labels.size());
    model.booster.base_score = j.at("base_score").get<std::vector<double>>();
    if (model.booster.base_score.size() != model.class_labels.size())
        throw ModelFormatError("base_score size does not match class count");

    if (j.contains("class_weights") && !j.at("class_weights").is_null()) {
        ClassWeights cw;
        cw.w = j.at("class_weights").get<std::vector<double>>();
        if (cw.w.size() != model.class_labels.size())
            throw ModelFormatError("class_weights size does not match class count");
        model.booster.class_weights = std::move(cw);
    }

    const auto& policy = j.at("verb_policy");
    model.verb_policy.verb_tags = policy.at("verb_tags").get<std::vector<std::string>>();
    model.verb_policy.include_aux = policy.at("include_aux").get<bool>();
    if (model.verb_policy.verb_tags.empty())
        throw ModelFormatError("verb_tags must not be empty");

    model.vocab = Vocabulary::from_forms(j.at("vocabulary").get<std::vector<std::string>>());

    const auto& rounds = j.at("trees");
    if (!rounds.is_array()) throw ModelFormatError("trees must be an array");
    if (rounds.size() > static_cast<std::size_t>(model.booster.hp.n_estimators))
        throw ModelFormatError("more rounds than n_estimators");
    for (const auto& round : rounds) {
        if (round.size() != model.class_labels.size())
            throw ModelFormatError("each round must hold one tree per class");
        std::vector<Tree> trees;
        trees.reserve(round.size());
        for (const auto& tree_json : round) {
            std::vector<TreeNode> nodes;
            detail::node_from_json(tree_json, nodes, 0, model.booster.hp.max_depth);
            if (model.booster.hp.max_delta_step > 0.0) {
                for (const auto& node : nodes)
                    if (node.is_leaf() &&
                        std::abs(node.value) > model.booster.hp.max_delta_step)
                        throw ModelFormatError("leaf value exceeds max_delta_step");
            }
            trees.push_back(Tree::from_nodes(std::move(nodes)));
        }
        model.booster.rounds.push_back(std::move(trees));
    }
    return model;
}

inline void save_model(const GbdtModel& model, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open model file for writing: " + path.string());
    out << model_to_json(model).dump(1) << '\n';
    out.flush();
    if (!out) throw std::runtime_error("failed writing model file: " + path.string());
}

inline GbdtModel load_model(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open model file: " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ModelFormatError("model file parse error: " + std::string(e.what()));
    }
    try {
        return model_from_json(j);
    } catch (const nlohmann::json::exception& e) {
        throw ModelFormatError("malformed model file: " + std::string(e.what()));
    }
}

}  // namespace condet

#endif  // CONDET_MODEL_IO_HPP
