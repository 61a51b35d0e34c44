#pragma once

// Domain ontology over the context and concept levels. Contexts hold weighted
// concept members; concepts may carry weighted "narrower" links to other
// concepts. The concept graph must be acyclic.

#include <compare>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ritual/corpus.hpp"

namespace ritual {

enum class NodeKind { context, concept_node };

/// Node address. Text form is "context:<id>" or "concept:<id>"; contexts
/// order before concepts.
struct NodeRef {
    NodeKind kind = NodeKind::concept_node;
    int id = 0;

    static NodeRef context(ContextId id) { return {NodeKind::context, id}; }
    static NodeRef concept_of(ConceptId id) { return {NodeKind::concept_node, id}; }
    /// Accepts "context:3", "concept:5", or a bare integer (a concept).
    static NodeRef parse(std::string_view text);
    std::string str() const;

    friend auto operator<=>(const NodeRef&, const NodeRef&) = default;
};

struct OntologyNode {
    NodeRef ref;
    std::map<std::string, std::string> labels;
    /// Child -> membership or link weight in [0, 1].
    std::map<NodeRef, double> children;
    std::set<NodeRef> parents;
};

struct Neighbors {
    std::vector<NodeRef> parents;
    std::vector<NodeRef> children;
};

class Ontology {
public:
    static constexpr double kDefaultAttenuation = 0.5;

    Ontology() = default;

    /// Contexts and concept labels taken from a finalized corpus.
    static Ontology from_corpus(const Corpus& corpus, double attenuation = kDefaultAttenuation);
    /// Ontology XML (see docs/formats.md). Throws ValidationError on cycles.
    static Ontology parse(std::string_view bytes, const std::string& source = "<ontology>",
                          double attenuation = kDefaultAttenuation);

    bool contains(NodeRef ref) const { return nodes_.count(ref) > 0; }
    const OntologyNode& node(NodeRef ref) const;
    const std::map<NodeRef, OntologyNode>& nodes() const noexcept { return nodes_; }
    std::vector<NodeRef> contexts() const;
    double attenuation() const noexcept { return attenuation_; }

    /// Both lists ascending. Throws LookupError for unknown nodes.
    Neighbors neighbors(NodeRef ref) const;

    /// Selected concepts at weight 1; descendants down to `depth` levels at
    /// (product of edge weights) * attenuation^level. Best weight wins when a
    /// concept is reachable several ways. Zero-weight paths are dropped.
    std::map<ConceptId, double> expand(const std::set<NodeRef>& selected, int depth) const;

    /// Throws ResolutionError if a concept node is not in the corpus.
    void check_against(const Corpus& corpus) const;

private:
    OntologyNode& ensure(NodeRef ref);
    void link(NodeRef parent, NodeRef child, double weight);
    void check_acyclic() const;

    std::map<NodeRef, OntologyNode> nodes_;
    double attenuation_ = kDefaultAttenuation;
};

} // namespace ritual
