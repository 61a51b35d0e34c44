#include <doctest.h>

#include <algorithm>
#include <random>

#include "ritual/error.hpp"
#include "ritual/text.hpp"
#include "support.hpp"

using namespace ritual;

namespace {

std::vector<std::string> norms(const std::vector<NormalizedTerm>& terms) {
    std::vector<std::string> out;
    for (const auto& t : terms) out.push_back(t.norm);
    return out;
}

std::vector<NormalizedTerm> terms_of(std::initializer_list<const char*> words) {
    std::vector<NormalizedTerm> out;
    for (const char* w : words) out.push_back({w, normalize_token(w), Lang::unknown});
    return out;
}

} // namespace

TEST_SUITE("normalize") {
    TEST_CASE("diacritics and definite article") {
        TextNormalizer n;
        auto terms = n.normalize("الطَّوَاف");
        REQUIRE(terms.size() == 1);
        CHECK(terms[0].norm == "طواف");
        CHECK(terms[0].lang == Lang::ar);
        CHECK(terms[0].surface == "الطَّوَاف");
    }

    TEST_CASE("empty input") {
        CHECK(TextNormalizer{}.normalize("").empty());
        CHECK(TextNormalizer{}.normalize("  ,.;  ").empty());
    }

    TEST_CASE("English lowercasing and stop words") {
        auto terms = TextNormalizer{}.normalize("the pillars of Hajj");
        CHECK(norms(terms) == std::vector<std::string>{"pillars", "hajj"});
        CHECK(terms[0].lang == Lang::en);
    }

    TEST_CASE("letter folding") {
        CHECK(normalize_token("أحمد") == "احمد");
        CHECK(normalize_token("إسلام") == "اسلام");
        CHECK(normalize_token("آمن") == "امن");
        CHECK(normalize_token("مصلى") == "مصلي");
        CHECK(normalize_token("عرفة") == "عرفه");
        CHECK(normalize_token("حـــج") == "حج");
        CHECK(normalize_token("HaJJ") == "hajj");
    }

    TEST_CASE("short words keep their article-like prefix") {
        CHECK(normalize_token("الب") == "الب");
        CHECK(normalize_token("ال") == "ال");
        CHECK(normalize_token("الحج") == "حج");
    }

    TEST_CASE("punctuation splits tokens") {
        CHECK(norms(TextNormalizer{}.normalize("طواف، عرفة؟ tawaf/arafat")) ==
              std::vector<std::string>{"طواف", "عرفه", "tawaf", "arafat"});
    }

    TEST_CASE("Arabic stop words") {
        CHECK(norms(TextNormalizer{}.normalize("الطواف في الحج")) == std::vector<std::string>{"طواف", "حج"});
    }

    TEST_CASE("custom stop list") {
        StopWords sw;
        sw.add_from("# comment\nطواف\n", Lang::ar);
        sw.add_from("Pillars\n", Lang::en);
        TextNormalizer n(sw);
        CHECK(norms(n.normalize("الطواف pillars of hajj")) == std::vector<std::string>{"of", "hajj"});
    }

    TEST_CASE("idempotence and stop-word exclusion on random text") {
        const std::vector<std::string> pieces = {
            "ال", "ط", "و", "ا", "ف", "أ", "إ", "آ", "ى", "ة", "ـ", "َ", "ِ", "ُ", "ّ", "ْ", "ٰ", "ح", "ج",
            "ع", "ر", "ه", "ي", "ٱ", " ", " ", ",", "؟", "،", "A", "b", "Z", "q", "1", "the", "of", "في", "من"};
        std::mt19937_64 rng(3);
        std::uniform_int_distribution<std::size_t> pick(0, pieces.size() - 1);
        std::uniform_int_distribution<int> len(0, 20);
        TextNormalizer n;
        for (int i = 0; i < 2000; ++i) {
            std::string text;
            for (int k = len(rng); k > 0; --k) text += pieces[pick(rng)];
            CAPTURE(text);
            for (const auto& t : n.normalize(text)) {
                CHECK_FALSE(t.norm.empty());
                CHECK(normalize_token(t.norm) == t.norm);
                CHECK_FALSE(n.stop_words().contains(t.norm));
            }
        }
    }
}

TEST_SUITE("match_concepts") {
    TEST_CASE("own name matches") {
        auto corpus = testsupport::rituals_corpus();
        TextNormalizer n;
        Lexicon lex = Lexicon::build(*corpus, n);
        auto m = match_concepts(n.normalize("طواف"), lex);
        REQUIRE(m.size() == 1);
        CHECK(m[0] == ConceptMatch{5, 1.0});
        CHECK(match_concepts(n.normalize("zzz"), lex).empty());
    }

    TEST_CASE("tie broken by concept id") {
        auto corpus = testsupport::rituals_corpus();
        Lexicon lex = Lexicon::build(*corpus, TextNormalizer{});
        CHECK(lex.entries().at("tawaf") == std::set<ConceptId>{5});
        CHECK(lex.entries().at("arafat") == std::set<ConceptId>{4});
        auto m = match_concepts(terms_of({"tawaf", "arafat"}), lex);
        CHECK(m == std::vector<ConceptMatch>{{4, 0.5}, {5, 0.5}});
    }

    TEST_CASE("multi-word labels score by share of query terms") {
        auto corpus = testsupport::rituals_corpus();
        TextNormalizer n;
        Lexicon lex = Lexicon::build(*corpus, n);
        // "الحج" matches concept 2 and every "... الحج" label.
        auto m = match_concepts(n.normalize("وقت الحج"), lex);
        REQUIRE(m.size() == 4);
        CHECK(m[0] == ConceptMatch{136, 1.0});
        CHECK(m[1] == ConceptMatch{2, 0.5});
        CHECK(m[2] == ConceptMatch{134, 0.5});
        CHECK(m[3] == ConceptMatch{135, 0.5});
    }

    TEST_CASE("synonyms") {
        auto corpus = testsupport::rituals_corpus();
        TextNormalizer n;
        auto syn = parse_synonyms("# extra descriptors\ncircumambulation\t5\n");
        Lexicon lex = Lexicon::build(*corpus, n, syn);
        CHECK(match_concepts(n.normalize("Circumambulation"), lex) == std::vector<ConceptMatch>{{5, 1.0}});
        CHECK(lex.descriptors(5).count("circumambulation") == 1);
        CHECK_THROWS_AS(Lexicon::build(*corpus, n, parse_synonyms("x\t999\n")), ResolutionError);
        CHECK_THROWS_AS(parse_synonyms("no tab here\n"), ValidationError);
    }

    TEST_CASE("lexicon keys are never stop words") {
        auto corpus = testsupport::rituals_corpus();
        StopWords sw = StopWords::defaults();
        sw.add_from("tawaf\n", Lang::en);
        TextNormalizer n(sw);
        Lexicon lex = Lexicon::build(*corpus, n);
        for (const auto& [term, _] : lex.entries()) CHECK_FALSE(sw.contains(term));
        CHECK(lex.entries().count("tawaf") == 0);
    }

    TEST_CASE("score range and permutation invariance") {
        auto corpus = testsupport::rituals_corpus();
        TextNormalizer n;
        Lexicon lex = Lexicon::build(*corpus, n);
        std::vector<std::string> words = {"طواف", "hajj", "عرفة", "zzz", "وقت", "umrah", "فضل", "tawaf"};
        std::mt19937_64 rng(11);
        for (int i = 0; i < 200; ++i) {
            std::shuffle(words.begin(), words.end(), rng);
            std::size_t take = 1 + rng() % words.size();
            std::vector<NormalizedTerm> terms;
            for (std::size_t k = 0; k < take; ++k) terms.push_back({words[k], normalize_token(words[k]), Lang::unknown});
            auto base = match_concepts(terms, lex);
            std::set<std::string> distinct;
            for (const auto& t : terms) distinct.insert(t.norm);
            for (const auto& m : base) {
                CHECK(m.score > 0.0);
                CHECK(m.score <= 1.0);
                bool all = std::all_of(distinct.begin(), distinct.end(), [&](const std::string& t) {
                    return lex.descriptors(m.concept_id).count(t) > 0;
                });
                CHECK((m.score == 1.0) == all);
            }
            auto shuffled = terms;
            std::shuffle(shuffled.begin(), shuffled.end(), rng);
            CHECK(match_concepts(shuffled, lex) == base);
        }
    }
}
