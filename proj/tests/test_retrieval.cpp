#include <doctest.h>

#include <cmath>
#include <random>

#include "ritual/error.hpp"
#include "ritual/retrieval.hpp"
#include "support.hpp"

using namespace ritual;
namespace oracle = testsupport::oracle;

namespace {

IndexedCorpus rituals_index() { return build_index(testsupport::rituals_corpus(), WeightSource::precomputed); }

QueryState query_of(SparseVector pq, double alpha = kDefaultAlpha) {
    QueryState s;
    s.p_initial = pq;
    s.pq = std::move(pq);
    s.alpha = alpha;
    return s;
}

std::vector<std::string> nums(const std::vector<RankedResult>& rs) {
    std::vector<std::string> out;
    for (const auto& r : rs) out.push_back(r.video_num);
    return out;
}

void check_equals_oracle(const IndexedCorpus& index, const SparseVector& q, std::size_t k) {
    auto got = search(index, query_of(q), {k, std::nullopt});
    auto want = oracle::rank(oracle::doc_table(index.corpus()), q, k);
    REQUIRE(got.size() == want.size());
    for (std::size_t i = 0; i < got.size(); ++i) {
        CHECK(got[i].rank == i + 1);
        CHECK(got[i].video_num == want[i].video_num);
        CHECK(got[i].score == want[i].score);
    }
}

} // namespace

TEST_SUITE("cosine") {
    TEST_CASE("examples") {
        SparseVector q{{1, 1.0}, {2, 2.0}};
        SparseVector d{{1, 2.0}, {2, 1.0}};
        CHECK(cosine(q, d) == doctest::Approx(0.8).epsilon(1e-15));
        CHECK(cosine(q, q) == doctest::Approx(1.0).epsilon(1e-15));
        CHECK(cosine(q, {{3, 1.0}}) == 0.0);
        CHECK(cosine({}, d) == 0.0);
        CHECK(cosine(q, {}) == 0.0);
    }

    TEST_CASE("symmetry and scale invariance") {
        std::mt19937_64 rng(2);
        for (int i = 0; i < 500; ++i) {
            auto q = testsupport::random_query(rng, 8, 5);
            auto d = testsupport::random_query(rng, 8, 5);
            CHECK(cosine(q, d) == doctest::Approx(cosine(d, q)).epsilon(1e-12));
            SparseVector scaled = q;
            for (auto& [_, w] : scaled) w *= 3.7;
            CHECK(cosine(scaled, d) == doctest::Approx(cosine(q, d)).epsilon(1e-12));
            double c = cosine(q, d);
            CHECK(c >= 0.0);
            CHECK(c <= 1.0);
        }
    }
}

TEST_SUITE("search") {
    TEST_CASE("single concept follows normalized posting weight") {
        auto index = rituals_index();
        auto results = search(index, query_of({{5, 1.0}}));
        REQUIRE(results.size() == index.postings(5).size());
        std::vector<std::pair<double, std::string>> expected;
        for (const auto& p : index.postings(5)) expected.push_back({p.weight / index.doc_norm(p.doc), index.video_num(p.doc)});
        std::sort(expected.begin(), expected.end(), [](const auto& a, const auto& b) {
            if (a.first != b.first) return a.first > b.first;
            return VideoNumLess{}(a.second, b.second);
        });
        for (std::size_t i = 0; i < results.size(); ++i) {
            CHECK(results[i].video_num == expected[i].second);
            CHECK(results[i].score == doctest::Approx(expected[i].first).epsilon(1e-12));
        }
        REQUIRE(results[0].matched_concepts.size() == 1);
        CHECK(results[0].matched_concepts[0].first == 5);
        CHECK(results[0].matched_concepts[0].second == doctest::Approx(results[0].score).epsilon(1e-12));
    }

    TEST_CASE("empty query") {
        auto index = rituals_index();
        CHECK(search(index, query_of({})).empty());
        CHECK(search(index, query_of({{4242, 1.0}})).empty());
    }

    TEST_CASE("five-video fixture agrees with exhaustive scoring") {
        auto index = rituals_index();
        REQUIRE(index.size() == 5);
        check_equals_oracle(index, {{2, 1.0}, {5, 1.0}, {6, 1.0}}, 30);
        check_equals_oracle(index, {{4, 1.0}, {135, 0.5}, {1, 2.0}}, 30);
        check_equals_oracle(index, {{2, 1.0}, {5, 1.0}, {6, 1.0}}, 2);
    }

    TEST_CASE("matched concept contributions sum to the score") {
        auto index = rituals_index();
        for (const auto& r : search(index, query_of({{2, 1.0}, {5, 1.0}, {6, 1.0}}))) {
            double sum = 0.0;
            for (const auto& [_, c] : r.matched_concepts) sum += c;
            CHECK(sum == doctest::Approx(r.score).epsilon(1e-12));
        }
    }

    TEST_CASE("context filter") {
        auto index = rituals_index();
        QueryState q = query_of({{2, 1.0}, {5, 1.0}, {4, 1.0}});
        // Context 1 holds 134..136: only videos 4 and 5 carry those.
        auto results = search(index, q, {30, 1});
        for (const auto& r : results) CHECK((r.video_num == "00004" || r.video_num == "00005"));
        CHECK(results.size() == 2);
        std::set<std::string> allowed{"00004", "00005"};
        auto want = oracle::rank(oracle::doc_table(index.corpus()), q.pq, 30, &allowed);
        CHECK(nums(results) == std::vector<std::string>{want[0].video_num, want[1].video_num});
        CHECK_THROWS_AS(search(index, q, {30, 99}), LookupError);
    }

    TEST_CASE("k must be positive") {
        auto index = rituals_index();
        CHECK_THROWS_AS(search(index, query_of({{5, 1.0}}), {0, std::nullopt}), DomainError);
    }

    TEST_CASE("random corpora: oracle equality, prefix property, determinism") {
        std::mt19937_64 rng(17);
        for (int round = 0; round < 8; ++round) {
            auto parts = testsupport::random_parts(rng, 20 + rng() % 120, 5 + rng() % 30);
            std::size_t n_concepts = parts.concepts.size();
            auto index = build_index(std::make_shared<const Corpus>(finalize(std::move(parts))), WeightSource::precomputed);
            for (int qi = 0; qi < 10; ++qi) {
                auto q = testsupport::random_query(rng, n_concepts);
                check_equals_oracle(index, q, 1000);
                for (std::size_t k : {1, 5, 17}) {
                    auto a = nums(search(index, query_of(q), {k, std::nullopt}));
                    auto b = nums(search(index, query_of(q), {k + 1, std::nullopt}));
                    REQUIRE(a.size() <= b.size());
                    CHECK(std::equal(a.begin(), a.end(), b.begin()));
                }
                auto r1 = search(index, query_of(q));
                auto r2 = search(index, query_of(q));
                REQUIRE(r1.size() == r2.size());
                for (std::size_t i = 0; i < r1.size(); ++i) {
                    CHECK(r1[i].video_num == r2[i].video_num);
                    CHECK(r1[i].score == r2[i].score);
                    CHECK(r1[i].matched_concepts == r2[i].matched_concepts);
                    if (i > 0) CHECK(r1[i - 1].score >= r1[i].score);
                }
            }
        }
    }
}

TEST_SUITE("query assembly") {
    TEST_CASE("selected concepts weigh 1, expansion keeps the larger weight") {
        auto s = initial_query("q", {1, 2}, {{2, 0.5}, {3, 0.25}, {4, 0.0}});
        CHECK(s.p_initial == SparseVector{{1, 1.0}, {2, 1.0}, {3, 0.25}});
        CHECK(s.pq == s.p_initial);
        CHECK(s.p_fb.empty());
        CHECK(s.iteration == 0);
        CHECK(s.alpha == kDefaultAlpha);
        CHECK_THROWS_AS(initial_query("q", {1}, {}, -0.1), DomainError);
    }
}

TEST_SUITE("feedback") {
    // Videos 1..3: "a" has only c1, "b" only c2, "c" both.
    IndexedCorpus tiny() {
        auto concepts = parse_concept_video_file(
            R"(<concepts>
                 <concept num="1" Name="a"><video Num="1" Name="a" Weight="1" NUMBER_shots="1" shotrepres="shot1_1"/>
                                           <video Num="3" Name="c" Weight="0.5" NUMBER_shots="1" shotrepres="shot3_1"/></concept>
                 <concept num="2" Name="b"><video Num="2" Name="b" Weight="1" NUMBER_shots="1" shotrepres="shot2_1"/>
                                           <video Num="3" Name="c" Weight="0.5" NUMBER_shots="1" shotrepres="shot3_1"/></concept>
               </concepts>)");
        CorpusParts parts;
        parts.concepts = concepts;
        parts.videos = videos_from_concepts(concepts);
        return build_index(std::make_shared<const Corpus>(finalize(std::move(parts))), WeightSource::precomputed);
    }

    TEST_CASE("empty judgments double the initial query") {
        auto index = tiny();
        auto s0 = initial_query("q", {1, 2});
        std::vector<std::string> shown = presented_window(search(index, s0));
        auto s1 = feedback_update(s0, {}, shown, index);
        CHECK(s1.iteration == 1);
        CHECK(s1.p_fb == s0.pq);
        CHECK(s1.pq == SparseVector{{1, 2.0}, {2, 2.0}});
        CHECK(s1.p_initial == s0.p_initial);
        auto s2 = feedback_update(s1, {}, shown, index);
        CHECK(s2.pq == SparseVector{{1, 3.0}, {2, 3.0}});
    }

    TEST_CASE("positive and negative adjustments") {
        auto index = tiny();
        auto s0 = initial_query("q", {1, 2}, {}, 0.02);
        std::vector<std::string> shown = {"1", "2", "3"};
        auto s1 = feedback_update(s0, {{"1"}, {"2"}}, shown, index);
        CHECK(s1.pq.at(1) == doctest::Approx(2.02).epsilon(1e-15));
        CHECK(s1.pq.at(2) == doctest::Approx(1.98).epsilon(1e-15));
        // A concept in both sets nets to zero.
        auto s1b = feedback_update(s0, {{"1"}, {"3"}}, shown, index);
        CHECK(s1b.pq.at(1) == 2.0);
        CHECK(s1b.pq.at(2) == doctest::Approx(1.98).epsilon(1e-15));
    }

    TEST_CASE("components are clamped at zero and dropped") {
        auto index = tiny();
        QueryState s = query_of({{1, 1.0}}, 0.5);
        s.p_initial = {{1, 1.0}};
        s.pq = {{1, 1.0}, {2, 0.2}};
        // p_initial + p_fb gives c2 = 0.2; the negative takes 0.5 off.
        auto next = feedback_update(s, {{}, {"2"}}, std::vector<std::string>{"2"}, index);
        CHECK(next.pq == SparseVector{{1, 2.0}});
        for (const auto& [_, w] : next.pq) CHECK(w > 0.0);
    }

    TEST_CASE("judgments must come from the presented window and not overlap") {
        auto index = tiny();
        auto s0 = initial_query("q", {1});
        std::vector<std::string> shown = {"1", "3"};
        CHECK_THROWS_AS(feedback_update(s0, {{"2"}, {}}, shown, index), ValidationError);
        CHECK_THROWS_AS(feedback_update(s0, {{}, {"2"}}, shown, index), ValidationError);
        CHECK_THROWS_AS(feedback_update(s0, {{"1"}, {"1"}}, shown, index), ValidationError);
        CHECK_NOTHROW(feedback_update(s0, {{"00001"}, {"3"}}, shown, index));
    }

    TEST_CASE("positive-only concepts gain exactly alpha") {
        std::mt19937_64 rng(23);
        for (int round = 0; round < 10; ++round) {
            auto parts = testsupport::random_parts(rng, 60, 15, 0.25);
            auto index = build_index(std::make_shared<const Corpus>(finalize(std::move(parts))), WeightSource::precomputed);
            auto s0 = query_of(testsupport::random_query(rng, 15), 0.02);
            auto shown = presented_window(search(index, s0));
            if (shown.size() < 2) continue;
            JudgmentSet j;
            for (std::size_t i = 0; i < shown.size(); ++i) (i % 3 == 0 ? j.positives : j.negatives).insert(shown[i]);
            auto plain = feedback_update(s0, {}, shown, index);
            auto judged = feedback_update(s0, j, shown, index);
            std::set<ConceptId> pos, neg;
            for (const auto& v : j.positives) for (const auto& [c, _] : index.doc_vector(*index.find(v))) pos.insert(c);
            for (const auto& v : j.negatives) for (const auto& [c, _] : index.doc_vector(*index.find(v))) neg.insert(c);
            for (ConceptId c : pos) {
                if (neg.count(c)) continue;
                double base = plain.pq.count(c) ? plain.pq.at(c) : 0.0;
                CHECK(judged.pq.at(c) == base + 0.02);
            }
        }
    }

    TEST_CASE("window helper") {
        std::vector<RankedResult> rs(40);
        for (std::size_t i = 0; i < rs.size(); ++i) rs[i].video_num = std::to_string(i + 1);
        CHECK(presented_window(rs).size() == 30);
        CHECK(presented_window(rs, 5) == std::vector<std::string>{"1", "2", "3", "4", "5"});
    }
}
