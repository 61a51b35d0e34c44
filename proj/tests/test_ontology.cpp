#include <doctest.h>

#include <random>

#include "ritual/error.hpp"
#include "ritual/generator.hpp"
#include "ritual/ontology.hpp"
#include "support.hpp"

using namespace ritual;
using testsupport::fixture;
using testsupport::slurp;

namespace {

Ontology rituals_ontology() { return Ontology::parse(slurp(fixture("rituals/ontology.xml"))); }

std::set<ConceptId> keys(const std::map<ConceptId, double>& m) {
    std::set<ConceptId> out;
    for (const auto& [k, _] : m) out.insert(k);
    return out;
}

} // namespace

TEST_SUITE("ontology") {
    TEST_CASE("node references") {
        CHECK(NodeRef::parse("context:3") == NodeRef::context(3));
        CHECK(NodeRef::parse("concept:5") == NodeRef::concept_of(5));
        CHECK(NodeRef::parse("5") == NodeRef::concept_of(5));
        CHECK(NodeRef::context(3).str() == "context:3");
        CHECK(NodeRef::context(99) < NodeRef::concept_of(1));
        CHECK_THROWS_AS(NodeRef::parse("video:1"), LookupError);
        CHECK_THROWS_AS(NodeRef::parse("concept:0"), LookupError);
        CHECK_THROWS_AS(NodeRef::parse(""), LookupError);
    }

    TEST_CASE("context expansion reaches its member concepts") {
        Ontology o = rituals_ontology();
        auto e = o.expand({NodeRef::context(2)}, 1);
        CHECK(e.count(5) == 1); // طواف
        CHECK(e.count(4) == 1); // عرفة
        CHECK(e.count(3) == 1); // جمرات
        CHECK(e.at(5) == 0.5);
    }

    TEST_CASE("leaf self-expansion") {
        Ontology o = rituals_ontology();
        CHECK(o.expand({NodeRef::concept_of(5)}, 0) == std::map<ConceptId, double>{{5, 1.0}});
        CHECK(o.expand({NodeRef::concept_of(5)}, 3) == std::map<ConceptId, double>{{5, 1.0}});
    }

    TEST_CASE("attenuation per level") {
        Ontology o = Ontology::parse(
            R"(<ontology><Contexte Num="1" Name="c"><concept ConceptId="1" Weight="1"/></Contexte></ontology>)");
        CHECK(o.expand({NodeRef::context(1)}, 1) == std::map<ConceptId, double>{{1, 0.5}});
        CHECK(o.expand({NodeRef::context(1)}, 0).empty());
    }

    TEST_CASE("narrower links compound weights") {
        Ontology o = rituals_ontology();
        auto e = o.expand({NodeRef::context(2)}, 2);
        CHECK(e.at(2) == 0.5);
        CHECK(e.at(134) == doctest::Approx(0.25).epsilon(1e-15));
        CHECK(e.at(135) == doctest::Approx(0.8 * 0.25).epsilon(1e-15));
        auto from_concept = o.expand({NodeRef::concept_of(2)}, 1);
        CHECK(from_concept == std::map<ConceptId, double>{{2, 1.0}, {134, 0.5}, {135, 0.4}});
    }

    TEST_CASE("union keeps the maximum") {
        Ontology o = rituals_ontology();
        // 134 is a depth-1 child of context 1 (0.5) and a depth-2 grandchild of context 2 (0.25).
        auto e = o.expand({NodeRef::context(1), NodeRef::context(2)}, 2);
        CHECK(e.at(134) == 0.5);
        auto both = o.expand({NodeRef::concept_of(2), NodeRef::concept_of(134)}, 1);
        CHECK(both.at(134) == 1.0);
    }

    TEST_CASE("unknown nodes") {
        Ontology o = rituals_ontology();
        CHECK_THROWS_AS(o.expand({NodeRef::concept_of(4242)}, 1), LookupError);
        CHECK_THROWS_AS(o.neighbors(NodeRef::context(99)), LookupError);
        CHECK_THROWS_AS(o.expand({NodeRef::concept_of(5)}, -1), DomainError);
    }

    TEST_CASE("neighbors") {
        Ontology o = rituals_ontology();
        auto root = o.neighbors(NodeRef::context(2));
        CHECK(root.parents.empty());
        CHECK(root.children == std::vector<NodeRef>{NodeRef::concept_of(2), NodeRef::concept_of(3),
                                                    NodeRef::concept_of(4), NodeRef::concept_of(5)});
        auto tawaf = o.neighbors(NodeRef::concept_of(5));
        CHECK(tawaf.parents == std::vector<NodeRef>{NodeRef::context(2), NodeRef::context(3)});
        CHECK(tawaf.children.empty());

        Ontology lone = Ontology::parse(R"(<ontology><concept num="9" Name="x"/></ontology>)");
        auto n = lone.neighbors(NodeRef::concept_of(9));
        CHECK(n.parents.empty());
        CHECK(n.children.empty());
    }

    TEST_CASE("labels") {
        Ontology o = rituals_ontology();
        CHECK(o.node(NodeRef::context(1)).labels.at("ar") == "شعيرة الحج");
        CHECK(o.node(NodeRef::context(1)).labels.at("en") == "The Hajj ritual");
        CHECK(o.node(NodeRef::concept_of(134)).labels.at("ar") == "مفهوم الحج");
        CHECK(o.contexts() == std::vector<NodeRef>{NodeRef::context(1), NodeRef::context(2), NodeRef::context(3)});
    }

    TEST_CASE("cycles are rejected") {
        CHECK_THROWS_AS(Ontology::parse(slurp(fixture("cyclic_ontology.xml"))), ValidationError);
        CHECK_THROWS_AS(Ontology::parse(R"(<ontology><concept num="1" Name="a"><narrower ConceptId="1"/></concept></ontology>)"),
                        ValidationError);
    }

    TEST_CASE("bad ontology files") {
        CHECK_THROWS_AS(Ontology::parse("<contextes/>"), ValidationError);
        CHECK_THROWS_AS(Ontology::parse(R"(<ontology><Contexte Num="1" Name="c"><concept ConceptId="1" Weight="2"/></Contexte></ontology>)"),
                        ValidationError);
        CHECK_THROWS_AS(Ontology::parse("<ontology><oops/></ontology>"), ValidationError);
        CHECK_THROWS_AS(Ontology::parse("<ontology>"), ParseError);
    }

    TEST_CASE("corpus-derived ontology matches the context file") {
        auto corpus = testsupport::rituals_corpus();
        Ontology o = Ontology::from_corpus(*corpus);
        CHECK(o.contexts().size() == 3);
        auto e = o.expand({NodeRef::context(3)}, 1);
        CHECK(e == std::map<ConceptId, double>{{1, 0.5}, {5, 0.5}, {6, 0.4}});
        CHECK(o.node(NodeRef::concept_of(5)).labels.at("en") == "Tawaf");
        CHECK_NOTHROW(o.check_against(*corpus));
        CHECK_NOTHROW(rituals_ontology().check_against(*corpus));
    }

    TEST_CASE("ontology concepts must exist in the corpus") {
        auto corpus = testsupport::rituals_corpus();
        Ontology o = Ontology::parse(R"(<ontology><concept num="321" Name="x"/></ontology>)");
        CHECK_THROWS_AS(o.check_against(*corpus), ResolutionError);
    }

    TEST_CASE("expansion is monotone in depth with weights in (0, 1]") {
        for (std::uint64_t seed = 1; seed <= 4; ++seed) {
            GeneratorOptions opts;
            opts.n_videos = 30;
            opts.n_concepts = 40;
            opts.n_contexts = 6;
            opts.seed = seed;
            Ontology o = Ontology::parse(generate_corpus(opts).ontology_xml);
            std::mt19937_64 rng(seed);
            std::vector<NodeRef> all;
            for (const auto& [ref, _] : o.nodes()) all.push_back(ref);
            for (int trial = 0; trial < 20; ++trial) {
                std::set<NodeRef> sel;
                for (int i = 0; i < 3; ++i) sel.insert(all[rng() % all.size()]);
                std::set<ConceptId> prev;
                for (int depth = 0; depth <= 4; ++depth) {
                    auto e = o.expand(sel, depth);
                    auto ks = keys(e);
                    CHECK(std::includes(ks.begin(), ks.end(), prev.begin(), prev.end()));
                    for (const auto& [_, w] : e) {
                        CHECK(w > 0.0);
                        CHECK(w <= 1.0);
                    }
                    prev = ks;
                }
            }
        }
    }
}
