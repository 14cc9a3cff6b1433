#ifndef CONDET_TEST_SYNTHETIC_HPP
#define CONDET_TEST_SYNTHETIC_HPP

#include <array>
#include <string>
#include <vector>

#include "condet/corpus.hpp"
#include "test_util.hpp"

namespace condet::testing {

// Synthetic connective corpus with a planted, fully learnable rule: a
// lexicon form is a discourse connective exactly when it sits within two
// tokens of a verb. Distractor occurrences of the same forms are placed in
// verbless sentences or at distance >= 5 from any verb and stay O. Two of
// the ten lexicon entries are two-token phrasals, so all three classes
// occur.

struct ConnectiveLexicon {
    struct Entry {
        std::vector<std::pair<std::string, std::string>> tokens;  // form, upos
    };
    std::vector<Entry> entries;

    static ConnectiveLexicon standard() {
        ConnectiveLexicon lex;
        const auto single = [&](const char* form, const char* upos) {
            lex.entries.push_back({{{form, upos}}});
        };
        single("and", "CCONJ");
        single("but", "CCONJ");
        single("because", "SCONJ");
        single("when", "SCONJ");
        single("although", "SCONJ");
        single("however", "ADV");
        single("since", "SCONJ");
        single("while", "SCONJ");
        lex.entries.push_back({{{"even", "ADV"}, {"though", "SCONJ"}}});
        lex.entries.push_back({{{"as", "ADV"}, {"if", "SCONJ"}}});
        return lex;
    }
};

namespace detail {

inline const std::vector<std::string>& verb_forms() {
    static const std::vector<std::string> verbs = {
        "runs", "sees",  "goes",  "says",  "makes", "takes",  "gives", "finds", "keeps", "turns",
        "shows", "plays", "moves", "lives", "holds", "brings", "writes", "reads", "walks", "sings"};
    return verbs;
}

inline const std::vector<std::string>& filler_forms() {
    static const std::vector<std::string> fillers = [] {
        const std::array<const char*, 10> first = {"ta", "mo", "ri", "sel", "don",
                                                   "ka", "lu", "ben", "sor", "mi"};
        const std::array<const char*, 15> second = {"ra", "len", "dos", "ma", "tur",
                                                    "vel", "ni", "gar", "pol", "sha",
                                                    "ket", "rum", "ba", "lis", "nor"};
        std::vector<std::string> out;
        out.reserve(first.size() * second.size());
        for (const char* a : first)
            for (const char* b : second) out.push_back(std::string(a) + b);
        return out;
    }();
    return fillers;
}

inline Token filler_token(Rng& rng) {
    const auto& pool = filler_forms();
    Token tok;
    tok.form = pool[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(pool.size()) - 1))];
    tok.upos = rng.chance(0.75) ? "NOUN" : (rng.chance(0.5) ? "ADJ" : "DET");
    tok.label = Label::O;
    return tok;
}

inline Token verb_token(Rng& rng) {
    const auto& pool = verb_forms();
    Token tok;
    tok.form = pool[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(pool.size()) - 1))];
    tok.upos = "VERB";
    tok.label = Label::O;
    return tok;
}

inline void place_connective(Sentence& sent, const ConnectiveLexicon::Entry& entry,
                             std::size_t pos, bool is_dc) {
    for (std::size_t k = 0; k < entry.tokens.size(); ++k) {
        Token tok;
        tok.form = entry.tokens[k].first;
        tok.upos = entry.tokens[k].second;
        tok.label = is_dc ? (k == 0 ? Label::BConn : Label::IConn) : Label::O;
        sent.tokens[pos + k] = std::move(tok);
    }
}

inline void capitalize_first(Sentence& sent) {
    std::string& form = sent.tokens.front().form;
    if (!form.empty() && form.front() >= 'a' && form.front() <= 'z')
        form.front() = static_cast<char>(form.front() - 'a' + 'A');
}

// Discourse usage: one verb, connective planted within distance 2 of it.
inline Sentence dc_sentence(Rng& rng, const ConnectiveLexicon& lex) {
    const auto len = static_cast<std::size_t>(rng.uniform_int(8, 16));
    Sentence sent;
    sent.tokens.reserve(len);
    for (std::size_t i = 0; i < len; ++i) sent.tokens.push_back(filler_token(rng));

    const auto vp = static_cast<std::size_t>(rng.uniform_int(2, static_cast<std::int64_t>(len) - 4));
    sent.tokens[vp] = verb_token(rng);

    const auto& entry =
        lex.entries[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(lex.entries.size()) - 1))];
    std::size_t pos;
    if (entry.tokens.size() == 2) {
        pos = rng.chance(0.5) && vp >= 2 ? vp - 2 : vp + 1;  // both tokens within distance 2
    } else {
        const std::array<int, 4> deltas = {-2, -1, 1, 2};
        int delta = deltas[static_cast<std::size_t>(rng.uniform_int(0, 3))];
        while (vp < 2 && delta < 0) delta = deltas[static_cast<std::size_t>(rng.uniform_int(2, 3))];
        pos = static_cast<std::size_t>(static_cast<std::ptrdiff_t>(vp) + delta);
    }
    place_connective(sent, entry, pos, true);
    capitalize_first(sent);
    return sent;
}

// Distractor usage in a verbless sentence: distances cap at the length.
inline Sentence verbless_ndc_sentence(Rng& rng, const ConnectiveLexicon& lex) {
    const auto len = static_cast<std::size_t>(rng.uniform_int(6, 12));
    Sentence sent;
    sent.tokens.reserve(len);
    for (std::size_t i = 0; i < len; ++i) sent.tokens.push_back(filler_token(rng));
    const auto& entry =
        lex.entries[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(lex.entries.size()) - 1))];
    const auto slack = len - entry.tokens.size();
    const auto pos = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(slack)));
    place_connective(sent, entry, pos, false);
    capitalize_first(sent);
    return sent;
}

// Distractor usage in a sentence that does contain a verb, at distance >= 5.
inline Sentence far_ndc_sentence(Rng& rng, const ConnectiveLexicon& lex) {
    const auto len = static_cast<std::size_t>(rng.uniform_int(12, 18));
    Sentence sent;
    sent.tokens.reserve(len);
    for (std::size_t i = 0; i < len; ++i) sent.tokens.push_back(filler_token(rng));
    const auto vp = static_cast<std::size_t>(rng.uniform_int(0, 1));
    sent.tokens[vp] = verb_token(rng);
    const auto& entry =
        lex.entries[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(lex.entries.size()) - 1))];
    const std::size_t lo = vp + 5;
    const std::size_t hi = len - entry.tokens.size();
    const auto pos = static_cast<std::size_t>(rng.uniform_int(static_cast<std::int64_t>(lo),
                                                              static_cast<std::int64_t>(hi)));
    place_connective(sent, entry, pos, false);
    capitalize_first(sent);
    return sent;
}

inline Sentence plain_sentence(Rng& rng, std::size_t len) {
    Sentence sent;
    sent.tokens.reserve(len);
    for (std::size_t i = 0; i < len; ++i) sent.tokens.push_back(filler_token(rng));
    capitalize_first(sent);
    return sent;
}

}  // namespace detail

inline Corpus make_synthetic_corpus(std::size_t target_tokens, std::uint64_t seed) {
    Rng rng(seed);
    const auto lex = ConnectiveLexicon::standard();
    Corpus corpus;
    Document doc;
    std::size_t doc_index = 0;
    std::size_t produced = 0;
    auto sentences_in_doc = static_cast<std::size_t>(rng.uniform_int(8, 12));

    const auto flush_doc = [&] {
        if (doc.sentences.empty()) return;
        doc.id = "synth-" + std::to_string(doc_index++);
        corpus.documents.push_back(std::move(doc));
        doc = {};
        sentences_in_doc = static_cast<std::size_t>(rng.uniform_int(8, 12));
    };

    while (produced < target_tokens) {
        const std::size_t remaining = target_tokens - produced;
        Sentence sent;
        if (remaining < 8) {
            sent = detail::plain_sentence(rng, remaining);
        } else {
            const double roll = rng.uniform(0.0, 1.0);
            if (roll < 0.45)
                sent = detail::dc_sentence(rng, lex);
            else if (roll < 0.80)
                sent = detail::verbless_ndc_sentence(rng, lex);
            else
                sent = detail::far_ndc_sentence(rng, lex);
            if (sent.tokens.size() > remaining) sent = detail::plain_sentence(rng, remaining);
        }
        produced += sent.tokens.size();
        doc.sentences.push_back(std::move(sent));
        if (doc.sentences.size() >= sentences_in_doc) flush_doc();
    }
    flush_doc();
    return corpus;
}

// Splits off the last `test_fraction` of documents as a held-out corpus.
inline std::pair<Corpus, Corpus> train_test_split(const Corpus& corpus, double test_fraction) {
    const std::size_t docs = corpus.documents.size();
    auto test_docs = static_cast<std::size_t>(static_cast<double>(docs) * test_fraction);
    if (test_docs == 0) test_docs = 1;
    Corpus train, test;
    for (std::size_t d = 0; d < docs; ++d) {
        if (d < docs - test_docs)
            train.documents.push_back(corpus.documents[d]);
        else
            test.documents.push_back(corpus.documents[d]);
    }
    return {train, test};
}

}  // namespace condet::testing

#endif  // CONDET_TEST_SYNTHETIC_HPP
