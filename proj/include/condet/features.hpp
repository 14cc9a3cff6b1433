#ifndef CONDET_FEATURES_HPP
#define CONDET_FEATURES_HPP

#include <algorithm>
#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "condet/corpus.hpp"
#include "condet/unicode.hpp"

namespace condet {

// Bump on any change to the feature layout below; models carry this string
// and refuse to run against a mismatched extractor.
inline constexpr std::string_view kFeatureSchemaVersion = "condet-features/1";

inline constexpr std::size_t kFeatureCount = 14;

using FeatureVector = std::array<double, kFeatureCount>;

// Fixed feature layout. Verb-window flags come first (three before, the
// token itself, three after), then verb distances, then word- and
// position-based features.
enum FeatureIndex : std::size_t {
    kIsVerbPrev3 = 0,
    kIsVerbPrev2 = 1,
    kIsVerbPrev1 = 2,
    kIsVerbCurr = 3,
    kIsVerbNext1 = 4,
    kIsVerbNext2 = 5,
    kIsVerbNext3 = 6,
    kDistPrevVerb = 7,
    kDistNextVerb = 8,
    kIsCapitalized = 9,
    kWordLength = 10,
    kWordId = 11,
    kPositionInSentence = 12,
    kSentenceLength = 13,
};

inline const std::array<std::string_view, kFeatureCount>& feature_names() {
    static const std::array<std::string_view, kFeatureCount> names = {
        "is_verb_prev3",  "is_verb_prev2", "is_verb_prev1", "is_verb_curr",
        "is_verb_next1",  "is_verb_next2", "is_verb_next3", "dist_prev_verb",
        "dist_next_verb", "is_capitalized", "word_length",  "word_id",
        "position_in_sentence", "sentence_length"};
    return names;
}

// Which POS tags count as verbs. The default follows the UPOS inventory;
// auxiliaries can be opted in for corpora where they carry the verbal load.
struct VerbPolicy {
    std::vector<std::string> verb_tags = {"VERB"};
    bool include_aux = false;

    bool is_verb(std::string_view upos) const {
        for (const auto& tag : verb_tags)
            if (upos == tag) return true;
        return include_aux && upos == "AUX";
    }
};

// Lowercased form -> id, ids 1..V assigned by descending training-corpus
// frequency with lexicographic tie-break. Id 0 is reserved for
// out-of-vocabulary forms.
class Vocabulary {
public:
    Vocabulary() = default;

    static Vocabulary build(const Corpus& corpus) {
        std::unordered_map<std::string, std::size_t> counts;
        for (const auto& doc : corpus.documents)
            for (const auto& sent : doc.sentences)
                for (const auto& tok : sent.tokens) ++counts[unicode::lowercase(tok.form)];

        std::vector<std::pair<std::string, std::size_t>> ranked(counts.begin(), counts.end());
        std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
            if (a.second != b.second) return a.second > b.second;
            return a.first < b.first;
        });

        Vocabulary vocab;
        vocab.forms_.reserve(ranked.size());
        for (const auto& [form, count] : ranked) {
            vocab.ids_.emplace(form, static_cast<std::uint32_t>(vocab.forms_.size() + 1));
            vocab.forms_.push_back(form);
        }
        return vocab;
    }

    // Rebuilds a vocabulary from forms listed in id order (1..V).
    static Vocabulary from_forms(std::vector<std::string> forms) {
        Vocabulary vocab;
        vocab.forms_ = std::move(forms);
        for (std::size_t i = 0; i < vocab.forms_.size(); ++i)
            vocab.ids_.emplace(vocab.forms_[i], static_cast<std::uint32_t>(i + 1));
        return vocab;
    }

    // Id of a surface form (case-folded), 0 when unseen.
    std::uint32_t id_of(std::string_view form) const {
        const auto it = ids_.find(unicode::lowercase(form));
        return it == ids_.end() ? 0 : it->second;
    }

    std::size_t size() const { return forms_.size(); }

    // Forms in id order; index i holds the form with id i+1.
    const std::vector<std::string>& forms() const { return forms_; }

    bool operator==(const Vocabulary& other) const { return forms_ == other.forms_; }

private:
    std::unordered_map<std::string, std::uint32_t> ids_;
    std::vector<std::string> forms_;
};

inline Vocabulary build_vocabulary(const Corpus& corpus) { return Vocabulary::build(corpus); }

// One feature vector per token. Verb positions are found in a single pass
// and distances by two sweeps, so the policy is consulted exactly once per
// token. Windows and distances never cross the sentence boundary; when no
// verb exists on a side, the distance is capped at the sentence length.
template <typename Policy = VerbPolicy>
std::vector<FeatureVector> extract_features(const Sentence& sentence, const Vocabulary& vocab,
                                            const Policy& policy) {
    const std::size_t n = sentence.tokens.size();
    if (n == 0) throw std::invalid_argument("cannot featurize an empty sentence");

    std::vector<unsigned char> is_verb(n);
    for (std::size_t i = 0; i < n; ++i)
        is_verb[i] = policy.is_verb(sentence.tokens[i].upos) ? 1 : 0;

    const auto cap = static_cast<double>(n);
    std::vector<double> dist_prev(n, cap), dist_next(n, cap);
    std::ptrdiff_t last = -1;
    for (std::size_t i = 0; i < n; ++i) {
        if (last >= 0) dist_prev[i] = static_cast<double>(static_cast<std::ptrdiff_t>(i) - last);
        if (is_verb[i]) last = static_cast<std::ptrdiff_t>(i);
    }
    std::ptrdiff_t next = -1;
    for (std::ptrdiff_t i = static_cast<std::ptrdiff_t>(n) - 1; i >= 0; --i) {
        if (next >= 0) dist_next[i] = static_cast<double>(next - i);
        if (is_verb[i]) next = i;
    }

    std::vector<FeatureVector> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& tok = sentence.tokens[i];
        FeatureVector& f = out[i];
        for (int off = 1; off <= 3; ++off) {
            f[3 - off] = (i >= static_cast<std::size_t>(off) && is_verb[i - off]) ? 1.0 : 0.0;
            f[3 + off] = (i + off < n && is_verb[i + off]) ? 1.0 : 0.0;
        }
        f[kIsVerbCurr] = is_verb[i] ? 1.0 : 0.0;
        f[kDistPrevVerb] = dist_prev[i];
        f[kDistNextVerb] = dist_next[i];
        f[kIsCapitalized] = unicode::first_char_upper(tok.form) ? 1.0 : 0.0;
        f[kWordLength] = static_cast<double>(unicode::codepoint_count(tok.form));
        f[kWordId] = static_cast<double>(vocab.id_of(tok.form));
        f[kPositionInSentence] = static_cast<double>(i);
        f[kSentenceLength] = cap;
    }
    return out;
}

struct FeaturizedCorpus {
    std::vector<FeatureVector> features;  // row order = corpus token order
    std::vector<int> labels;              // class indices, O=0 B=1 I=2
};

inline FeaturizedCorpus featurize_corpus(const Corpus& corpus, const Vocabulary& vocab,
                                         const VerbPolicy& policy) {
    FeaturizedCorpus out;
    out.features.reserve(corpus.token_count());
    out.labels.reserve(corpus.token_count());
    for (const auto& doc : corpus.documents) {
        for (const auto& sent : doc.sentences) {
            auto rows = extract_features(sent, vocab, policy);
            out.features.insert(out.features.end(), rows.begin(), rows.end());
            for (const auto& tok : sent.tokens) out.labels.push_back(static_cast<int>(tok.label));
        }
    }
    return out;
}

}  // namespace condet

#endif  // CONDET_FEATURES_HPP
