#include <catch2/catch_amalgamated.hpp>

#include <sstream>

#include "condet/corpus.hpp"
#include "test_util.hpp"

using namespace condet;
using condet::testing::Rng;

namespace {

Corpus parse_tsv(const std::string& text) {
    std::istringstream in(text);
    return parse_corpus(in, CorpusFormat::Tsv, "test.tsv");
}

Corpus parse_conllu(const std::string& text) {
    std::istringstream in(text);
    return parse_corpus(in, CorpusFormat::Conllu, "test.conllu");
}

std::string conllu_line(int id, const std::string& form, const std::string& upos,
                        const std::string& misc) {
    std::ostringstream out;
    out << id << '\t' << form << "\t_\t" << upos << "\t_\t_\t_\t_\t_\t" << misc << '\n';
    return out.str();
}

Corpus random_corpus(Rng& rng, std::size_t n_docs) {
    Corpus corpus;
    for (std::size_t d = 0; d < n_docs; ++d) {
        Document doc;
        doc.id = "doc-" + std::to_string(d);
        const auto n_sents = static_cast<std::size_t>(rng.uniform_int(1, 4));
        for (std::size_t s = 0; s < n_sents; ++s) {
            Sentence sent;
            const auto n_toks = static_cast<std::size_t>(rng.uniform_int(1, 8));
            for (std::size_t t = 0; t < n_toks; ++t) {
                Token tok;
                tok.form = "w" + std::to_string(rng.uniform_int(0, 30));
                tok.upos = rng.chance(0.25) ? "VERB" : "NOUN";
                tok.label = rng.chance(0.85) ? Label::O
                                             : (rng.chance(0.6) ? Label::BConn : Label::IConn);
                sent.tokens.push_back(std::move(tok));
            }
            doc.sentences.push_back(std::move(sent));
        }
        corpus.documents.push_back(std::move(doc));
    }
    return corpus;
}

}  // namespace

TEST_CASE("label serialization round-trips and rejects unknowns") {
    for (Label l : {Label::O, Label::BConn, Label::IConn}) {
        const auto parsed = parse_label(to_string(l));
        REQUIRE(parsed.has_value());
        CHECK(*parsed == l);
    }
    CHECK_FALSE(parse_label("B-conn").has_value());
    CHECK_FALSE(parse_label("").has_value());
    CHECK_FALSE(parse_label("BConn").has_value());
}

TEST_CASE("tsv parsing") {
    SECTION("single token block") {
        const auto corpus = parse_tsv("ve\tCCONJ\tB-Conn\n");
        REQUIRE(corpus.documents.size() == 1);
        REQUIRE(corpus.documents[0].sentences.size() == 1);
        const auto& tok = corpus.documents[0].sentences[0].tokens.at(0);
        CHECK(tok.form == "ve");
        CHECK(tok.upos == "CCONJ");
        CHECK(tok.label == Label::BConn);
    }
    SECTION("blank lines split sentences, doc markers split documents") {
        const auto corpus = parse_tsv(
            "# doc = a\n"
            "x\tNOUN\tO\n"
            "\n"
            "y\tNOUN\tO\n"
            "\n"
            "# doc = b\n"
            "z\tVERB\tO\n");
        REQUIRE(corpus.documents.size() == 2);
        CHECK(corpus.documents[0].id == "a");
        CHECK(corpus.documents[0].sentences.size() == 2);
        CHECK(corpus.documents[1].id == "b");
        CHECK(corpus.documents[1].sentences.size() == 1);
    }
    SECTION("tokens before any marker become one implicit document") {
        const auto corpus = parse_tsv("x\tNOUN\tO\n\ny\tNOUN\tO\n");
        REQUIRE(corpus.documents.size() == 1);
        CHECK(corpus.documents[0].sentences.size() == 2);
    }
    SECTION("empty input gives an empty corpus") {
        CHECK(parse_tsv("").documents.empty());
    }
    SECTION("malformed column count names the line") {
        try {
            parse_tsv("x\tNOUN\tO\nbroken line\n");
            FAIL("expected ParseError");
        } catch (const ParseError& e) {
            CHECK(e.line() == 2);
            CHECK(std::string(e.what()).find("test.tsv:2") != std::string::npos);
        }
    }
    SECTION("unknown label is rejected") {
        REQUIRE_THROWS_AS(parse_tsv("x\tNOUN\tB-Foo\n"), ParseError);
    }
    SECTION("duplicate document ids are rejected") {
        REQUIRE_THROWS_AS(parse_tsv("# doc = a\nx\tNOUN\tO\n\n# doc = a\ny\tNOUN\tO\n"),
                          ParseError);
    }
    SECTION("a form starting with '#' is still a token") {
        const auto corpus = parse_tsv("#tag\tSYM\tO\n");
        REQUIRE(corpus.token_count() == 1);
        CHECK(corpus.documents[0].sentences[0].tokens[0].form == "#tag");
    }
}

TEST_CASE("conllu parsing") {
    SECTION("labels come from the MISC Conn key") {
        std::string text = "# newdoc id = d1\n";
        text += conllu_line(1, "He", "PRON", "_");
        text += conllu_line(2, "left", "VERB", "SpaceAfter=No|Conn=I-Conn");
        text += conllu_line(3, "because", "SCONJ", "Conn=B-Conn");
        text += "\n";
        const auto corpus = parse_conllu(text);
        const auto& toks = corpus.documents.at(0).sentences.at(0).tokens;
        CHECK(toks[0].label == Label::O);
        CHECK(toks[1].label == Label::IConn);
        CHECK(toks[2].label == Label::BConn);
        CHECK(toks[1].upos == "VERB");
    }
    SECTION("range and decimal ids are skipped") {
        std::string text;
        text += "1-2\tdel\t_\t_\t_\t_\t_\t_\t_\t_\n";
        text += conllu_line(1, "de", "ADP", "_");
        text += conllu_line(2, "el", "DET", "_");
        text += "3.1\tghost\t_\t_\t_\t_\t_\t_\t_\t_\n";
        text += "\n";
        const auto corpus = parse_conllu(text);
        REQUIRE(corpus.token_count() == 2);
    }
    SECTION("wrong column count names the line") {
        try {
            parse_conllu("1\tonly\tfour\tcols\n");
            FAIL("expected ParseError");
        } catch (const ParseError& e) {
            CHECK(e.line() == 1);
        }
    }
    SECTION("Conn=O is not a valid span label") {
        REQUIRE_THROWS_AS(
            parse_conllu("1\tx\t_\tNOUN\t_\t_\t_\t_\t_\tConn=O\n"),
            ParseError);
    }
    SECTION("zero-byte file is an empty corpus") {
        CHECK(parse_conllu("").documents.empty());
    }
}

TEST_CASE("write_predictions") {
    Rng rng(11);
    SECTION("round-trip is lossless for both formats") {
        for (auto format : {CorpusFormat::Tsv, CorpusFormat::Conllu}) {
            for (int trial = 0; trial < 10; ++trial) {
                const auto corpus = random_corpus(rng, 3);
                std::ostringstream out;
                write_predictions(corpus, corpus.labels(), out, format);
                std::istringstream in(out.str());
                const auto reloaded = parse_corpus(in, format);
                REQUIRE(reloaded == corpus);
            }
        }
    }
    SECTION("predicted labels replace gold labels") {
        const auto corpus = parse_tsv("a\tNOUN\tB-Conn\nb\tNOUN\tI-Conn\n");
        std::vector<Label> preds = {Label::O, Label::BConn};
        std::ostringstream out;
        write_predictions(corpus, preds, out, CorpusFormat::Tsv);
        std::istringstream in(out.str());
        const auto reloaded = parse_corpus(in, CorpusFormat::Tsv);
        CHECK(reloaded.labels() == preds);
    }
    SECTION("length mismatch is a contract violation") {
        const auto corpus = parse_tsv("a\tNOUN\tO\nb\tNOUN\tO\n");
        std::ostringstream out;
        REQUIRE_THROWS_AS(write_predictions(corpus, {Label::O}, out, CorpusFormat::Tsv),
                          std::invalid_argument);
    }
    SECTION("empty corpus writes an empty file") {
        std::ostringstream out;
        write_predictions(Corpus{}, {}, out, CorpusFormat::Tsv);
        CHECK(out.str().empty());
    }
}

TEST_CASE("corpus statistics") {
    SECTION("counts partition the corpus") {
        Rng rng(7);
        const auto corpus = random_corpus(rng, 5);
        const auto stats = corpus_stats(corpus);
        CHECK(stats.total() == corpus.token_count());
    }
    SECTION("published label distributions reproduce the printed percentages") {
        struct Row {
            std::size_t b, i, o;
            double pct;
        };
        // B-Conn / I-Conn / O counts with their published proportions.
        const Row rows[] = {
            {7044, 1259, 385256, 2.11}, {773, 130, 45939, 1.93},  {849, 165, 45944, 2.16},
            {23848, 4499, 1032851, 2.67}, {953, 159, 38656, 2.80}, {1245, 238, 54164, 2.67},
        };
        for (const auto& row : rows) {
            LabelStats stats;
            stats.count_b = row.b;
            stats.count_i = row.i;
            stats.count_o = row.o;
            CHECK(std::abs(stats.connective_proportion() * 100.0 - row.pct) < 0.005);
        }
    }
    SECTION("an all-O corpus has zero proportion, as does an empty one") {
        const auto corpus = parse_tsv("a\tNOUN\tO\nb\tNOUN\tO\n");
        CHECK(corpus_stats(corpus).connective_proportion() == 0.0);
        CHECK(corpus_stats(Corpus{}).connective_proportion() == 0.0);
    }
}

TEST_CASE("load_corpus reads files and reports missing ones") {
    condet::testing::TempDir tmp;
    const auto path = tmp.path("sample.tsv");
    condet::testing::write_file(path, "a\tNOUN\tO\n");
    const auto corpus = load_corpus(path, CorpusFormat::Tsv);
    CHECK(corpus.token_count() == 1);
    REQUIRE_THROWS(load_corpus(tmp.path("missing.tsv"), CorpusFormat::Tsv));
}

TEST_CASE("format guessing by extension") {
    CHECK(guess_format("x.conllu") == CorpusFormat::Conllu);
    CHECK(guess_format("x.conll") == CorpusFormat::Conllu);
    CHECK(guess_format("x.tsv") == CorpusFormat::Tsv);
    CHECK(guess_format("x.txt") == CorpusFormat::Tsv);
}
