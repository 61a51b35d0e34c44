#include "ritual/engine.hpp"

#include <fstream>
#include <sstream>

#include "ritual/error.hpp"

namespace ritual {

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    if (in.bad()) throw IoError("cannot read " + path.string());
    return buf.str();
}

std::shared_ptr<const Engine> Engine::load(const EngineConfig& config) {
    auto optional_file = [](const std::optional<std::filesystem::path>& p) {
        return p ? read_file(*p) : std::string();
    };
    const std::string concepts_xml = read_file(config.concepts);
    const std::string contexts_xml = optional_file(config.contexts);
    const std::string shots_xml = optional_file(config.shots);
    const std::string markers_txt = optional_file(config.markers);

    CorpusParts parts;
    parts.concepts = parse_concept_video_file(concepts_xml, config.concepts.string());
    parts.videos = videos_from_concepts(parts.concepts);
    if (config.contexts) parts.contexts = parse_context_file(contexts_xml, config.contexts->string());
    if (config.shots) parts.shot_listings = parse_concept_shot_file(shots_xml, config.shots->string());
    if (config.markers) parts.markers = parse_marker_map(markers_txt);
    auto corpus = std::make_shared<const Corpus>(finalize(std::move(parts)));

    StopWords stop = StopWords::defaults();
    if (config.stopwords_ar) stop.add_from(read_file(*config.stopwords_ar), Lang::ar);
    if (config.stopwords_en) stop.add_from(read_file(*config.stopwords_en), Lang::en);
    std::vector<std::pair<std::string, ConceptId>> synonyms;
    if (config.synonyms) synonyms = parse_synonyms(read_file(*config.synonyms));

    Ontology ontology = config.ontology
                            ? Ontology::parse(read_file(*config.ontology), config.ontology->string(), config.attenuation)
                            : Ontology::from_corpus(*corpus, config.attenuation);
    ontology.check_against(*corpus);

    const std::string source_tag(to_string(config.weight_source));
    const std::string_view parts_for_hash[] = {concepts_xml, contexts_xml, shots_xml, markers_txt, source_tag};
    const std::uint64_t hash = ritual::content_hash(parts_for_hash);

    std::optional<IndexedCorpus> index;
    if (config.index_cache && std::filesystem::exists(*config.index_cache)) {
        std::ifstream in(*config.index_cache, std::ios::binary);
        if (!in) throw IoError("cannot open " + config.index_cache->string());
        index = read_index_cache(in, corpus, hash);
    }
    const bool from_cache = index.has_value();
    if (!index) {
        index = build_index(corpus, config.weight_source);
        if (config.index_cache && config.write_cache) {
            std::ofstream out(*config.index_cache, std::ios::binary | std::ios::trunc);
            if (!out) throw IoError("cannot write " + config.index_cache->string());
            write_index_cache(*index, hash, out);
        }
    }

    TextNormalizer normalizer(std::move(stop));
    Lexicon lexicon = Lexicon::build(*corpus, normalizer, synonyms);
    auto engine = std::shared_ptr<Engine>(
        new Engine(std::move(*index), std::move(lexicon), std::move(ontology), std::move(normalizer)));
    engine->hash_ = hash;
    engine->from_cache_ = from_cache;
    return engine;
}

std::shared_ptr<const Engine> Engine::from_parts(IndexedCorpus index,
                                                 Ontology ontology, TextNormalizer normalizer,
                                                 const std::vector<std::pair<std::string, ConceptId>>& synonyms) {
    Lexicon lexicon = Lexicon::build(index.corpus(), normalizer, synonyms);
    return std::shared_ptr<Engine>(
        new Engine(std::move(index), std::move(lexicon), std::move(ontology), std::move(normalizer)));
}

std::vector<ConceptMatch> Engine::suggest(std::string_view text) const {
    return match_concepts(normalizer_.normalize(text), lexicon_);
}

QueryState Engine::make_query(std::string raw_text, const std::set<ConceptId>& chosen, int expand_depth,
                              double alpha) const {
    std::set<NodeRef> nodes;
    for (ConceptId id : chosen) {
        if (!corpus().find_concept(id)) throw LookupError("unknown concept " + std::to_string(id));
        nodes.insert(NodeRef::concept_of(id));
    }
    std::map<ConceptId, double> expansion;
    if (expand_depth > 0) {
        for (NodeRef n : nodes) {
            if (!ontology_.contains(n)) continue;
            for (const auto& [cid, w] : ontology_.expand({n}, expand_depth)) {
                double& slot = expansion[cid];
                slot = std::max(slot, w);
            }
        }
    }
    return initial_query(std::move(raw_text), chosen, expansion, alpha);
}

} // namespace ritual
