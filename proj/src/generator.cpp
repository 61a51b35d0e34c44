#include "ritual/generator.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <vector>

#include "ritual/corpus.hpp"
#include "ritual/error.hpp"
#include "ritual/numbers.hpp"
#include "xml_dom.hpp"

namespace ritual {

namespace {

// std distributions are implementation-defined; only the engine is portable.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    std::size_t below(std::size_t n) { return static_cast<std::size_t>(engine_() % n); }

private:
    std::mt19937_64 engine_;
};

double weight(Rng& rng, double lo, double hi) {
    double w = std::round(rng.uniform(lo, hi) * 100.0) / 100.0;
    return std::max(w, 0.01);
}

std::string english_word(std::size_t n) {
    static const char* const syllables[] = {"ka", "ri", "mo", "sa", "tu", "ne", "fa", "lo", "bi", "de", "ha", "ju"};
    constexpr std::size_t base = std::size(syllables);
    std::string out;
    std::size_t v = n;
    for (int i = 0; i < 2 || v > 0; ++i) {
        out += syllables[v % base];
        v /= base;
    }
    return out;
}

std::string arabic_word(std::size_t n) {
    // Letters untouched by normalization; no word starts with alef-lam.
    static const char* const letters[] = {"ب", "ت", "ث", "ج", "ح", "خ", "د", "ذ", "ر", "ز", "س",
                                          "ش", "ص", "ض", "ط", "ظ", "ع", "غ", "ف", "ق", "ك", "م",
                                          "ن", "ه", "و", "ي"};
    constexpr std::size_t base = std::size(letters);
    std::string out;
    std::size_t v = n;
    for (int i = 0; i < 3 || v > 0; ++i) {
        out += letters[v % base];
        v /= base;
    }
    return out;
}

std::string pad(std::size_t n, std::size_t width) {
    std::string s = std::to_string(n);
    return std::string(width > s.size() ? width - s.size() : 0, '0') + s;
}

enum class Role { background, relevant, distractor };

} // namespace

GeneratedPaths GeneratedPaths::in(const std::filesystem::path& dir) {
    return {dir / "concepts.xml", dir / "shots.xml",  dir / "contexts.xml",
            dir / "ontology.xml", dir / "qrels.tsv", dir / "queries.tsv"};
}

GeneratedCorpus generate_corpus(const GeneratorOptions& opt) {
    if (opt.n_videos == 0 || opt.n_concepts == 0 || opt.n_contexts == 0) {
        throw DomainError("corpus sizes must be at least 1");
    }
    Rng rng(opt.seed);
    const std::size_t n_queries = std::min(opt.n_queries, opt.n_concepts / 2);
    const std::size_t width = std::max<std::size_t>(5, std::to_string(opt.n_videos).size());

    auto surface = [](std::size_t q) { return static_cast<ConceptId>(2 * q + 1); };
    auto signature = [](std::size_t q) { return static_cast<ConceptId>(2 * q + 2); };
    std::vector<ConceptId> noise;
    for (std::size_t c = 2 * n_queries + 1; c <= opt.n_concepts; ++c) noise.push_back(static_cast<ConceptId>(c));
    if (noise.empty()) {
        for (std::size_t c = 1; c <= opt.n_concepts; ++c) noise.push_back(static_cast<ConceptId>(c));
    }

    const double p_rel = 0.03;
    const double p_dis = 0.06;
    const double scale = std::min(1.0, 0.9 / (static_cast<double>(n_queries) * (p_rel + p_dis) + 1e-12));

    std::vector<Concept> concepts(opt.n_concepts);
    for (std::size_t c = 0; c < opt.n_concepts; ++c) {
        concepts[c].id = static_cast<ConceptId>(c + 1);
        concepts[c].labels["ar"] = arabic_word(c);
        concepts[c].labels["en"] = english_word(c);
    }

    struct Planned {
        std::map<ConceptId, double> weights;
        int number_shots = 1;
        Role role = Role::background;
        std::size_t query = 0;
    };
    std::vector<Planned> videos(opt.n_videos);
    std::map<std::size_t, VideoSet> relevant;

    // Planted topics carry strong weights, like the annotated ones; what
    // else a candidate video shows is faint.
    constexpr double kTopicLo = 0.85, kTopicHi = 0.95;
    auto add_faint = [&](Planned& v) {
        std::size_t count = 1 + rng.below(3);
        for (std::size_t i = 0; i < count; ++i) v.weights.try_emplace(noise[rng.below(noise.size())], weight(rng, 0.05, 0.3));
    };
    auto add_noise = [&](Planned& v, std::size_t lo, std::size_t hi) {
        std::size_t count = lo + rng.below(hi - lo + 1);
        for (std::size_t i = 0; i < count; ++i) {
            v.weights.try_emplace(noise[rng.below(noise.size())], weight(rng, 0.05, 1.0));
        }
    };

    for (std::size_t i = 0; i < opt.n_videos; ++i) {
        Planned& v = videos[i];
        double r = rng.uniform();
        for (std::size_t q = 0; q < n_queries; ++q) {
            double rel = p_rel * scale;
            double dis = p_dis * scale;
            if (r < rel) {
                v.role = Role::relevant;
                v.query = q;
                break;
            }
            r -= rel;
            if (r < dis) {
                v.role = Role::distractor;
                v.query = q;
                break;
            }
            r -= dis;
        }
        switch (v.role) {
        case Role::relevant:
            v.weights[surface(v.query)] = weight(rng, kTopicLo, kTopicHi);
            v.weights[signature(v.query)] = weight(rng, kTopicLo, kTopicHi);
            add_faint(v);
            break;
        case Role::distractor:
            // A decoy topic in place of the signature: same shape, other concept.
            v.weights[surface(v.query)] = weight(rng, kTopicLo, kTopicHi);
            v.weights.try_emplace(noise[rng.below(noise.size())], weight(rng, kTopicLo, kTopicHi));
            add_faint(v);
            break;
        case Role::background:
            add_noise(v, 2, 4);
            break;
        }
        v.number_shots = 3 + static_cast<int>(rng.below(3));
    }

    // Every query needs at least one relevant video.
    for (std::size_t q = 0; q < n_queries; ++q) {
        bool any = std::any_of(videos.begin(), videos.end(),
                               [&](const Planned& v) { return v.role == Role::relevant && v.query == q; });
        if (any) continue;
        for (auto& v : videos) {
            if (v.role != Role::background) continue;
            v.role = Role::relevant;
            v.query = q;
            v.weights[surface(q)] = weight(rng, kTopicLo, kTopicHi);
            v.weights[signature(q)] = weight(rng, kTopicLo, kTopicHi);
            break;
        }
    }

    std::map<ConceptId, ShotListing> listings;
    for (std::size_t i = 0; i < opt.n_videos; ++i) {
        Planned& v = videos[i];
        std::string num = pad(i + 1, width);
        if (v.role == Role::relevant) relevant[v.query].insert(num);

        std::vector<ConceptId> ids;
        for (const auto& [cid, _] : v.weights) ids.push_back(cid);
        std::map<ConceptId, std::set<int>> shots_of;
        for (int s = 0; s < v.number_shots; ++s) {
            shots_of[ids[static_cast<std::size_t>(s) % ids.size()]].insert(s + 1);
        }
        for (ConceptId cid : ids) {
            if (rng.uniform() < 0.3) shots_of[cid].insert(1 + static_cast<int>(rng.below(static_cast<std::size_t>(v.number_shots))));
        }
        for (const auto& [cid, shots] : shots_of) {
            for (int s : shots) listings[cid].shots.push_back({"shot" + num + "_" + std::to_string(s), 0, {}});
        }

        std::string repres = "shot" + num + "_" + std::to_string(1 + rng.below(static_cast<std::size_t>(v.number_shots)));
        for (const auto& [cid, w] : v.weights) {
            concepts[static_cast<std::size_t>(cid - 1)].videos.push_back(
                {num, "VIDEO_" + num, w, v.number_shots, repres, {}});
        }
    }

    std::vector<ShotListing> shot_listings;
    for (auto& [cid, listing] : listings) {
        listing.marker = std::to_string(cid);
        int seq = 0;
        for (auto& shot : listing.shots) shot.seq_num = ++seq;
        shot_listings.push_back(std::move(listing));
    }

    std::vector<Context> contexts(opt.n_contexts);
    for (std::size_t k = 0; k < opt.n_contexts; ++k) {
        contexts[k].id = static_cast<ContextId>(k + 1);
        contexts[k].name = "سياق " + arabic_word(k + 1000);
    }
    static const double member_weights[] = {1.0, 0.8, 0.6};
    for (const auto& c : concepts) {
        std::size_t home = static_cast<std::size_t>(c.id - 1) % opt.n_contexts;
        std::set<std::size_t> homes{home};
        if (opt.n_contexts > 1 && rng.uniform() < 0.2) homes.insert(rng.below(opt.n_contexts));
        for (std::size_t h : homes) {
            contexts[h].members.push_back({c.id, c.labels.at("ar"), member_weights[rng.below(3)], {}});
        }
    }
    for (auto& ctx : contexts) ctx.nbr_concept = static_cast<int>(ctx.members.size());

    xml::Element onto{"ontology", {}, {}, 0, 0};
    for (const auto& ctx : contexts) {
        auto& el = onto.add("Contexte");
        el.set("Num", std::to_string(ctx.id));
        el.set("Name", ctx.name);
        el.set("NameEn", "context " + english_word(ctx.id + 1000));
        for (const auto& m : ctx.members) {
            auto& child = el.add("concept");
            child.set("ConceptId", std::to_string(m.concept_id));
            child.set("ConceptName", m.concept_name);
            child.set("Weight", format_decimal(m.weight));
        }
    }
    for (const auto& c : concepts) {
        auto& el = onto.add("concept");
        el.set("num", std::to_string(c.id));
        el.set("Name", c.labels.at("ar"));
        el.set("NameEn", c.labels.at("en"));
        if (static_cast<std::size_t>(c.id) < opt.n_concepts && rng.uniform() < 0.1) {
            std::size_t span = opt.n_concepts - static_cast<std::size_t>(c.id);
            auto target = static_cast<ConceptId>(c.id + 1 + static_cast<int>(rng.below(span)));
            auto& link = el.add("narrower");
            link.set("ConceptId", std::to_string(target));
            link.set("Weight", format_decimal(weight(rng, 0.5, 1.0)));
        }
    }

    GeneratedCorpus out;
    out.concepts_xml = serialize_concept_video_file(concepts);
    out.shots_xml = serialize_concept_shot_file(shot_listings);
    out.contexts_xml = serialize_context_file(contexts);
    out.ontology_xml = xml::serialize(onto);
    for (const auto& [q, vids] : relevant) {
        std::string qid = "q" + std::to_string(q + 1);
        out.queries_tsv += qid + "\t" + concepts[static_cast<std::size_t>(surface(q) - 1)].labels.at("en") + "\n";
        for (const auto& v : vids) out.qrels_tsv += qid + "\t" + v + "\n";
    }
    return out;
}

GeneratedPaths write_generated(const GeneratedCorpus& corpus, const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
    GeneratedPaths paths = GeneratedPaths::in(dir);
    auto put = [](const std::filesystem::path& p, const std::string& text) {
        std::ofstream out(p, std::ios::binary);
        out << text;
        if (!out) throw IoError("cannot write " + p.string());
    };
    put(paths.concepts, corpus.concepts_xml);
    put(paths.shots, corpus.shots_xml);
    put(paths.contexts, corpus.contexts_xml);
    put(paths.ontology, corpus.ontology_xml);
    put(paths.qrels, corpus.qrels_tsv);
    put(paths.queries, corpus.queries_tsv);
    return paths;
}

} // namespace ritual
