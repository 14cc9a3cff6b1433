#ifndef CONDET_CORPUS_HPP
#define CONDET_CORPUS_HPP

#include <cstddef>
#include <filesystem>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace condet {

// ---------------------------------------------------------------------------
// Label scheme: every token is O, B-Conn (span start) or I-Conn (span
// continuation). Class indices are fixed and used everywhere downstream.
// ---------------------------------------------------------------------------

enum class Label : int { O = 0, BConn = 1, IConn = 2 };

inline constexpr int kNumClasses = 3;

inline std::string_view to_string(Label label) {
    switch (label) {
        case Label::O: return "O";
        case Label::BConn: return "B-Conn";
        case Label::IConn: return "I-Conn";
    }
    return "O";
}

inline std::optional<Label> parse_label(std::string_view s) {
    if (s == "O") return Label::O;
    if (s == "B-Conn") return Label::BConn;
    if (s == "I-Conn") return Label::IConn;
    return std::nullopt;
}

inline const std::vector<std::string>& class_label_names() {
    static const std::vector<std::string> names = {"O", "B-Conn", "I-Conn"};
    return names;
}

struct Token {
    std::string form;
    std::string upos;
    Label label = Label::O;

    bool operator==(const Token&) const = default;
};

struct Sentence {
    std::vector<Token> tokens;

    bool operator==(const Sentence&) const = default;
};

struct Document {
    std::string id;
    std::vector<Sentence> sentences;

    bool operator==(const Document&) const = default;
};

struct Corpus {
    std::vector<Document> documents;

    bool operator==(const Corpus&) const = default;

    std::size_t sentence_count() const {
        std::size_t n = 0;
        for (const auto& doc : documents) n += doc.sentences.size();
        return n;
    }

    std::size_t token_count() const {
        std::size_t n = 0;
        for (const auto& doc : documents)
            for (const auto& sent : doc.sentences) n += sent.tokens.size();
        return n;
    }

    // Gold labels flattened in corpus token order.
    std::vector<Label> labels() const {
        std::vector<Label> out;
        out.reserve(token_count());
        for (const auto& doc : documents)
            for (const auto& sent : doc.sentences)
                for (const auto& tok : sent.tokens) out.push_back(tok.label);
        return out;
    }
};

struct LabelStats {
    std::size_t count_b = 0;
    std::size_t count_i = 0;
    std::size_t count_o = 0;

    std::size_t total() const { return count_b + count_i + count_o; }

    // Fraction of tokens inside connective spans; 0 for an empty corpus.
    double connective_proportion() const {
        const std::size_t n = total();
        if (n == 0) return 0.0;
        return static_cast<double>(count_b + count_i) / static_cast<double>(n);
    }
};

inline LabelStats corpus_stats(const Corpus& corpus) {
    LabelStats stats;
    for (const auto& doc : corpus.documents) {
        for (const auto& sent : doc.sentences) {
            for (const auto& tok : sent.tokens) {
                switch (tok.label) {
                    case Label::O: ++stats.count_o; break;
                    case Label::BConn: ++stats.count_b; break;
                    case Label::IConn: ++stats.count_i; break;
                }
            }
        }
    }
    return stats;
}

// ---------------------------------------------------------------------------
// File formats. Two token-level formats are supported:
//   tsv    — FORM<TAB>UPOS<TAB>LABEL, blank line between sentences,
//            "# doc = <id>" lines between documents.
//   conllu — standard 10-column CoNLL-U; the label is carried in the MISC
//            column under the key "Conn=" (absent key means O) and
//            "# newdoc id = <id>" comments delimit documents.
// All text is UTF-8, newline is LF, column separator a single tab.
// ---------------------------------------------------------------------------

enum class CorpusFormat { Conllu, Tsv };

inline std::optional<CorpusFormat> parse_format(std::string_view s) {
    if (s == "conllu") return CorpusFormat::Conllu;
    if (s == "tsv") return CorpusFormat::Tsv;
    return std::nullopt;
}

// Picks the format from a file extension; ".conllu" and ".conll" map to
// CoNLL-U, everything else to TSV.
inline CorpusFormat guess_format(const std::filesystem::path& path) {
    const auto ext = path.extension().string();
    if (ext == ".conllu" || ext == ".conll") return CorpusFormat::Conllu;
    return CorpusFormat::Tsv;
}

class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& source, std::size_t line, const std::string& what)
        : std::runtime_error(source + ":" + std::to_string(line) + ": " + what),
          line_(line) {}

    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

namespace detail {

inline std::vector<std::string_view> split_tabs(std::string_view line) {
    std::vector<std::string_view> cols;
    std::size_t start = 0;
    while (true) {
        const auto tab = line.find('\t', start);
        if (tab == std::string_view::npos) {
            cols.push_back(line.substr(start));
            break;
        }
        cols.push_back(line.substr(start, tab - start));
        start = tab + 1;
    }
    return cols;
}

// Comment lines start with '#' and carry no tab; a token whose form begins
// with '#' still parses because token lines always contain tabs.
inline bool is_comment(std::string_view line) {
    return !line.empty() && line.front() == '#' &&
           line.find('\t') == std::string_view::npos;
}

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
        s.remove_suffix(1);
    return s;
}

// Extracts "<id>" from a comment of the shape "# <key> = <id>".
inline std::optional<std::string> comment_value(std::string_view line, std::string_view key) {
    std::string_view rest = trim(line);
    if (rest.empty() || rest.front() != '#') return std::nullopt;
    rest.remove_prefix(1);
    rest = trim(rest);
    if (rest.substr(0, key.size()) != key) return std::nullopt;
    rest.remove_prefix(key.size());
    rest = trim(rest);
    if (rest.empty() || rest.front() != '=') return std::nullopt;
    rest.remove_prefix(1);
    return std::string(trim(rest));
}

inline Label misc_label(std::string_view misc, const std::string& source, std::size_t lineno) {
    if (misc == "_" || misc.empty()) return Label::O;
    std::size_t start = 0;
    while (start <= misc.size()) {
        const auto bar = misc.find('|', start);
        const auto item = misc.substr(start, bar == std::string_view::npos ? std::string_view::npos
                                                                           : bar - start);
        if (item.substr(0, 5) == "Conn=") {
            const auto value = item.substr(5);
            const auto label = parse_label(value);
            if (!label || *label == Label::O)
                throw ParseError(source, lineno,
                                 "unknown connective label '" + std::string(value) + "'");
            return *label;
        }
        if (bar == std::string_view::npos) break;
        start = bar + 1;
    }
    return Label::O;
}

class CorpusBuilder {
public:
    explicit CorpusBuilder(std::string source) : source_(std::move(source)) {}

    void start_document(std::string id, std::size_t lineno) {
        flush_sentence();
        flush_document();
        if (!seen_ids_.insert(id).second)
            throw ParseError(source_, lineno, "duplicate document id '" + id + "'");
        current_doc_id_ = std::move(id);
        has_explicit_doc_ = true;
    }

    void add_token(Token token) { current_sentence_.tokens.push_back(std::move(token)); }

    void end_sentence() { flush_sentence(); }

    Corpus finish() {
        flush_sentence();
        flush_document();
        return std::move(corpus_);
    }

private:
    void flush_sentence() {
        if (current_sentence_.tokens.empty()) return;
        if (!has_explicit_doc_ && current_doc_.sentences.empty() && corpus_.documents.empty() &&
            current_doc_id_.empty()) {
            // Tokens before any document marker form one implicit document.
            current_doc_id_ = "doc1";
            seen_ids_.insert(current_doc_id_);
        }
        current_doc_.sentences.push_back(std::move(current_sentence_));
        current_sentence_ = {};
    }

    void flush_document() {
        if (!current_doc_.sentences.empty()) {
            current_doc_.id = current_doc_id_;
            corpus_.documents.push_back(std::move(current_doc_));
            current_doc_ = {};
        }
        current_doc_id_.clear();
        has_explicit_doc_ = false;
    }

    std::string source_;
    Corpus corpus_;
    Document current_doc_;
    Sentence current_sentence_;
    std::string current_doc_id_;
    bool has_explicit_doc_ = false;
    std::unordered_set<std::string> seen_ids_;
};

}  // namespace detail

// Parses a corpus from a stream; `source` is used in error messages only.
inline Corpus parse_corpus(std::istream& in, CorpusFormat format,
                           const std::string& source = "<stream>") {
    detail::CorpusBuilder builder(source);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) {
            builder.end_sentence();
            continue;
        }
        if (detail::is_comment(line)) {
            const auto key = format == CorpusFormat::Conllu ? "newdoc id" : "doc";
            if (auto id = detail::comment_value(line, key)) {
                builder.start_document(std::move(*id), lineno);
            }
            continue;
        }
        const auto cols = detail::split_tabs(line);
        if (format == CorpusFormat::Tsv) {
            if (cols.size() != 3)
                throw ParseError(source, lineno,
                                 "expected 3 tab-separated columns, got " +
                                     std::to_string(cols.size()));
            const auto label = parse_label(cols[2]);
            if (!label)
                throw ParseError(source, lineno,
                                 "unknown label '" + std::string(cols[2]) + "'");
            if (cols[0].empty()) throw ParseError(source, lineno, "empty token form");
            if (cols[1].empty()) throw ParseError(source, lineno, "empty POS tag");
            builder.add_token({std::string(cols[0]), std::string(cols[1]), *label});
        } else {
            if (cols.size() != 10)
                throw ParseError(source, lineno,
                                 "expected 10 tab-separated columns, got " +
                                     std::to_string(cols.size()));
            const auto id = cols[0];
            // Multi-word-token ranges (1-2) and empty nodes (1.1) carry no
            // syntactic word of their own and are skipped.
            if (id.find('-') != std::string_view::npos ||
                id.find('.') != std::string_view::npos)
                continue;
            if (id.empty() || id.find_first_not_of("0123456789") != std::string_view::npos)
                throw ParseError(source, lineno, "malformed token id '" + std::string(id) + "'");
            if (cols[1].empty()) throw ParseError(source, lineno, "empty token form");
            const Label label = detail::misc_label(cols[9], source, lineno);
            builder.add_token({std::string(cols[1]), std::string(cols[3]), label});
        }
    }
    return builder.finish();
}

inline Corpus load_corpus(const std::filesystem::path& path, CorpusFormat format) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open corpus file: " + path.string());
    return parse_corpus(in, format, path.string());
}

// Writes `corpus` with `predictions` substituted for the gold labels.
// Loading the result reproduces forms, POS tags, document and sentence
// boundaries, and the predicted labels exactly.
inline void write_predictions(const Corpus& corpus, const std::vector<Label>& predictions,
                              std::ostream& out, CorpusFormat format) {
    if (predictions.size() != corpus.token_count())
        throw std::invalid_argument(
            "prediction count " + std::to_string(predictions.size()) +
            " does not match corpus token count " + std::to_string(corpus.token_count()));
    std::size_t next = 0;
    for (const auto& doc : corpus.documents) {
        if (format == CorpusFormat::Conllu)
            out << "# newdoc id = " << doc.id << '\n';
        else
            out << "# doc = " << doc.id << '\n';
        for (const auto& sent : doc.sentences) {
            for (std::size_t t = 0; t < sent.tokens.size(); ++t) {
                const auto& tok = sent.tokens[t];
                const Label label = predictions[next++];
                if (format == CorpusFormat::Tsv) {
                    out << tok.form << '\t' << tok.upos << '\t' << to_string(label) << '\n';
                } else {
                    out << (t + 1) << '\t' << tok.form << "\t_\t" << tok.upos
                        << "\t_\t_\t_\t_\t_\t";
                    if (label == Label::O)
                        out << "_\n";
                    else
                        out << "Conn=" << to_string(label) << '\n';
                }
            }
            out << '\n';
        }
    }
}

inline void write_predictions(const Corpus& corpus, const std::vector<Label>& predictions,
                              const std::filesystem::path& path, CorpusFormat format) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open output file: " + path.string());
    write_predictions(corpus, predictions, out, format);
    out.flush();
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

inline void write_corpus(const Corpus& corpus, const std::filesystem::path& path,
                         CorpusFormat format) {
    write_predictions(corpus, corpus.labels(), path, format);
}

}  // namespace condet

#endif  // CONDET_CORPUS_HPP
