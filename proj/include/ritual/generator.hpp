#pragma once

// Deterministic synthetic corpora with planted relevance, in the same file
// formats the engine ingests.
//
// Each query q owns a "surface" concept (the one its text names) and a
// "signature" concept. Relevant videos carry both; distractor videos carry
// the surface concept and a decoy topic of the same strength; background
// videos carry neither. The query text therefore retrieves relevant and
// distractor videos alike, and judged feedback is what separates them.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>

namespace ritual {

struct GeneratorOptions {
    std::size_t n_videos = 1000;
    std::size_t n_concepts = 130;
    std::size_t n_contexts = 12;
    std::uint64_t seed = 1;
    /// Capped at n_concepts / 2.
    std::size_t n_queries = 5;
};

struct GeneratedCorpus {
    std::string concepts_xml;
    std::string shots_xml;
    std::string contexts_xml;
    std::string ontology_xml;
    std::string qrels_tsv;
    std::string queries_tsv;
};

struct GeneratedPaths {
    std::filesystem::path concepts;
    std::filesystem::path shots;
    std::filesystem::path contexts;
    std::filesystem::path ontology;
    std::filesystem::path qrels;
    std::filesystem::path queries;

    static GeneratedPaths in(const std::filesystem::path& dir);
};

/// Throws DomainError when any size is zero.
GeneratedCorpus generate_corpus(const GeneratorOptions& options);

/// Writes concepts.xml, shots.xml, contexts.xml, ontology.xml, qrels.tsv and
/// queries.tsv under `dir` (created if missing). Throws IoError.
GeneratedPaths write_generated(const GeneratedCorpus& corpus, const std::filesystem::path& dir);

} // namespace ritual
