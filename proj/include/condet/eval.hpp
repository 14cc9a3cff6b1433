#ifndef CONDET_EVAL_HPP
#define CONDET_EVAL_HPP

#include <algorithm>
#include <chrono>
#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "condet/corpus.hpp"
#include "condet/gbdt.hpp"

namespace condet {

// ---------------------------------------------------------------------------
// Exact-span evaluation. A predicted span counts only when its start and end
// both match a gold span; partial overlaps score nothing. Decoding runs per
// label sequence (one sentence), so spans never cross sentence boundaries.
// ---------------------------------------------------------------------------

struct Span {
    std::size_t start = 0;  // token index, inclusive
    std::size_t end = 0;    // token index, inclusive

    auto operator<=>(const Span&) const = default;
};

// Maximal B/I runs. A B-Conn always opens a span; an I-Conn continues the
// preceding span when one is open and otherwise opens a new span of its own
// (robust decoding of orphan continuations).
inline std::vector<Span> extract_spans(std::span<const Label> labels) {
    std::vector<Span> spans;
    bool open = false;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        switch (labels[i]) {
            case Label::O:
                open = false;
                break;
            case Label::BConn:
                spans.push_back({i, i});
                open = true;
                break;
            case Label::IConn:
                if (open)
                    spans.back().end = i;
                else
                    spans.push_back({i, i});
                open = true;
                break;
        }
    }
    return spans;
}

struct ScoreReport {
    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t fn = 0;
    std::optional<double> inference_seconds;

    double precision() const {
        return tp + fp == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fp);
    }
    double recall() const {
        return tp + fn == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fn);
    }
    double f1() const {
        const double p = precision();
        const double r = recall();
        return p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r);
    }
};

namespace detail {

inline ScoreReport score_span_sets(const std::vector<Span>& gold, const std::vector<Span>& pred) {
    const std::set<Span> gold_set(gold.begin(), gold.end());
    ScoreReport report;
    for (const auto& span : pred)
        if (gold_set.count(span))
            ++report.tp;
        else
            ++report.fp;
    report.fn = gold.size() - report.tp;
    return report;
}

}  // namespace detail

// Scores one label sequence against another under exact span matching.
inline ScoreReport score_spans(std::span<const Label> gold, std::span<const Label> pred) {
    if (gold.size() != pred.size())
        throw std::invalid_argument("gold and predicted label sequences differ in length");
    return detail::score_span_sets(extract_spans(gold), extract_spans(pred));
}

// Micro-averaged corpus score: spans are decoded sentence by sentence with
// corpus-global token indices, then pooled.
inline ScoreReport score_corpus(const Corpus& corpus, std::span<const Label> gold,
                                std::span<const Label> pred) {
    const std::size_t total = corpus.token_count();
    if (gold.size() != total || pred.size() != total)
        throw std::invalid_argument("label sequences do not match the corpus token count");
    ScoreReport report;
    std::size_t offset = 0;
    for (const auto& doc : corpus.documents) {
        for (const auto& sent : doc.sentences) {
            const std::size_t n = sent.tokens.size();
            const auto part =
                score_spans(gold.subspan(offset, n), pred.subspan(offset, n));
            report.tp += part.tp;
            report.fp += part.fp;
            report.fn += part.fn;
            offset += n;
        }
    }
    return report;
}

// ---------------------------------------------------------------------------
// Per-connective error statistics keyed by surface form.
// ---------------------------------------------------------------------------

struct ConnectiveErrorRow {
    std::string form;
    std::size_t tp = 0;
    std::size_t tn = 0;
    std::size_t fp = 0;
    std::size_t fn = 0;

    std::size_t total() const { return tp + tn + fp + fn; }
    double accuracy() const {
        const auto denom = total();
        return denom == 0 ? 0.0 : static_cast<double>(tp + tn) / static_cast<double>(denom);
    }
};

// Rows for every surface form occurring as a gold or predicted span. TP/FN
// count gold spans of that form by exact-match success; FP counts predicted
// spans of that form with no exactly matching gold span; TN counts further
// occurrences of the form in the text lying entirely outside all gold and
// predicted spans. Sorted by total occurrences descending, then by form.
inline std::vector<ConnectiveErrorRow> error_report(const Corpus& corpus,
                                                    std::span<const Label> gold,
                                                    std::span<const Label> pred) {
    const std::size_t total = corpus.token_count();
    if (gold.size() != total || pred.size() != total)
        throw std::invalid_argument("label sequences do not match the corpus token count");

    std::vector<std::string> forms;
    forms.reserve(total);
    for (const auto& doc : corpus.documents)
        for (const auto& sent : doc.sentences)
            for (const auto& tok : sent.tokens) forms.push_back(tok.form);

    const auto span_form = [&](const Span& span) {
        std::string text = forms[span.start];
        for (std::size_t i = span.start + 1; i <= span.end; ++i) {
            text += ' ';
            text += forms[i];
        }
        return text;
    };

    // Decode spans per sentence with global offsets.
    std::vector<Span> gold_spans, pred_spans;
    std::vector<std::pair<std::size_t, std::size_t>> sentence_ranges;
    std::size_t offset = 0;
    for (const auto& doc : corpus.documents) {
        for (const auto& sent : doc.sentences) {
            const std::size_t n = sent.tokens.size();
            for (auto span : extract_spans(gold.subspan(offset, n)))
                gold_spans.push_back({span.start + offset, span.end + offset});
            for (auto span : extract_spans(pred.subspan(offset, n)))
                pred_spans.push_back({span.start + offset, span.end + offset});
            sentence_ranges.emplace_back(offset, offset + n);
            offset += n;
        }
    }

    std::vector<bool> covered(total, false);
    for (const auto& span : gold_spans)
        for (std::size_t i = span.start; i <= span.end; ++i) covered[i] = true;
    for (const auto& span : pred_spans)
        for (std::size_t i = span.start; i <= span.end; ++i) covered[i] = true;

    const std::set<Span> gold_set(gold_spans.begin(), gold_spans.end());

    std::map<std::string, ConnectiveErrorRow> rows;
    const auto row_for = [&](const std::string& form) -> ConnectiveErrorRow& {
        auto& row = rows[form];
        row.form = form;
        return row;
    };

    std::set<Span> matched;
    for (const auto& span : pred_spans) {
        if (gold_set.count(span)) {
            ++row_for(span_form(span)).tp;
            matched.insert(span);
        } else {
            ++row_for(span_form(span)).fp;
        }
    }
    for (const auto& span : gold_spans)
        if (!matched.count(span)) ++row_for(span_form(span)).fn;

    // True negatives: n-gram occurrences of each row's form, within one
    // sentence, touching no gold or predicted span.
    for (auto& [form, row] : rows) {
        std::vector<std::string> parts;
        std::size_t start = 0;
        while (true) {
            const auto space = form.find(' ', start);
            parts.push_back(form.substr(start, space - start));
            if (space == std::string::npos) break;
            start = space + 1;
        }
        const std::size_t len = parts.size();
        for (const auto& [lo, hi] : sentence_ranges) {
            if (hi - lo < len) continue;
            for (std::size_t i = lo; i + len <= hi; ++i) {
                bool match = true;
                for (std::size_t k = 0; k < len && match; ++k)
                    match = forms[i + k] == parts[k];
                if (!match) continue;
                bool free = true;
                for (std::size_t k = 0; k < len && free; ++k) free = !covered[i + k];
                if (free) ++row.tn;
            }
        }
    }

    std::vector<ConnectiveErrorRow> out;
    out.reserve(rows.size());
    for (auto& [form, row] : rows) out.push_back(std::move(row));
    std::sort(out.begin(), out.end(), [](const ConnectiveErrorRow& a, const ConnectiveErrorRow& b) {
        if (a.total() != b.total()) return a.total() > b.total();
        return a.form < b.form;
    });
    return out;
}

// ---------------------------------------------------------------------------
// Inference timing: featurize + predict over the full corpus, no file I/O.
// ---------------------------------------------------------------------------

struct TimingResult {
    double seconds = 0.0;            // median wall-clock over the repetitions
    double tokens_per_second = 0.0;
};

inline TimingResult time_inference(const GbdtModel& model, const Corpus& corpus,
                                   int repetitions) {
    if (repetitions < 1) throw std::invalid_argument("repetitions must be >= 1");
    check_schema(model);
    std::vector<double> durations;
    durations.reserve(static_cast<std::size_t>(repetitions));
    std::size_t guard = 0;  // keeps the work observable
    for (int rep = 0; rep < repetitions; ++rep) {
        const auto start = std::chrono::steady_clock::now();
        const auto labels = predict_labels(model, corpus);
        const auto stop = std::chrono::steady_clock::now();
        guard += labels.size();
        durations.push_back(std::chrono::duration<double>(stop - start).count());
    }
    std::sort(durations.begin(), durations.end());
    const std::size_t mid = durations.size() / 2;
    const double median = durations.size() % 2 == 1
                              ? durations[mid]
                              : 0.5 * (durations[mid - 1] + durations[mid]);
    TimingResult result;
    result.seconds = median;
    const auto tokens = static_cast<double>(guard / static_cast<std::size_t>(repetitions));
    result.tokens_per_second = median > 0.0 ? tokens / median : 0.0;
    return result;
}

}  // namespace condet

#endif  // CONDET_EVAL_HPP
