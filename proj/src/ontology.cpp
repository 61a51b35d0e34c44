#include "ritual/ontology.hpp"

#include <algorithm>
#include <deque>
#include <sstream>

#include "ritual/error.hpp"
#include "ritual/numbers.hpp"
#include "xml_dom.hpp"

namespace ritual {

NodeRef NodeRef::parse(std::string_view text) {
    auto parse_id = [&](std::string_view digits) {
        auto v = parse_integer(digits);
        if (!v || *v < 1) throw LookupError("bad node id '" + std::string(text) + "'");
        return static_cast<int>(*v);
    };
    constexpr std::string_view ctx = "context:";
    constexpr std::string_view con = "concept:";
    if (text.substr(0, ctx.size()) == ctx) return context(parse_id(text.substr(ctx.size())));
    if (text.substr(0, con.size()) == con) return concept_of(parse_id(text.substr(con.size())));
    return concept_of(parse_id(text));
}

std::string NodeRef::str() const {
    return (kind == NodeKind::context ? "context:" : "concept:") + std::to_string(id);
}

OntologyNode& Ontology::ensure(NodeRef ref) {
    auto [it, inserted] = nodes_.try_emplace(ref);
    if (inserted) it->second.ref = ref;
    return it->second;
}

void Ontology::link(NodeRef parent, NodeRef child, double weight) {
    if (parent == child) throw ValidationError("ontology self-loop on " + parent.str());
    if (child.kind == NodeKind::context) {
        throw ValidationError("ontology node " + parent.str() + " cannot have context child " + child.str());
    }
    ensure(parent).children[child] = weight;
    ensure(child).parents.insert(parent);
}

const OntologyNode& Ontology::node(NodeRef ref) const {
    auto it = nodes_.find(ref);
    if (it == nodes_.end()) throw LookupError("unknown ontology node " + ref.str());
    return it->second;
}

std::vector<NodeRef> Ontology::contexts() const {
    std::vector<NodeRef> out;
    for (const auto& [ref, _] : nodes_) {
        if (ref.kind == NodeKind::context) out.push_back(ref);
    }
    return out;
}

Neighbors Ontology::neighbors(NodeRef ref) const {
    const OntologyNode& n = node(ref);
    Neighbors out;
    out.parents.assign(n.parents.begin(), n.parents.end());
    for (const auto& [child, _] : n.children) out.children.push_back(child);
    return out;
}

std::map<ConceptId, double> Ontology::expand(const std::set<NodeRef>& selected, int depth) const {
    if (depth < 0) throw DomainError("expansion depth must be non-negative");
    std::map<ConceptId, double> result;
    auto keep = [&](NodeRef ref, double w) {
        if (ref.kind != NodeKind::concept_node || !(w > 0.0)) return;
        double& slot = result[ref.id];
        slot = std::max(slot, w);
    };

    for (NodeRef start : selected) {
        node(start);
        keep(start, 1.0);
        // Best weight over paths of exactly `level` edges.
        std::map<NodeRef, double> frontier{{start, 1.0}};
        for (int level = 1; level <= depth && !frontier.empty(); ++level) {
            std::map<NodeRef, double> next;
            for (const auto& [ref, w] : frontier) {
                for (const auto& [child, edge] : nodes_.at(ref).children) {
                    double cw = w * edge * attenuation_;
                    if (!(cw > 0.0)) continue;
                    double& slot = next[child];
                    slot = std::max(slot, cw);
                }
            }
            for (const auto& [ref, w] : next) keep(ref, w);
            frontier = std::move(next);
        }
    }
    return result;
}

void Ontology::check_acyclic() const {
    std::map<NodeRef, std::size_t> indegree;
    for (const auto& [ref, n] : nodes_) indegree[ref] = n.parents.size();
    std::deque<NodeRef> ready;
    for (const auto& [ref, d] : indegree) {
        if (d == 0) ready.push_back(ref);
    }
    std::size_t visited = 0;
    while (!ready.empty()) {
        NodeRef ref = ready.front();
        ready.pop_front();
        ++visited;
        for (const auto& [child, _] : nodes_.at(ref).children) {
            if (--indegree[child] == 0) ready.push_back(child);
        }
    }
    if (visited != nodes_.size()) {
        std::ostringstream msg;
        msg << "ontology contains a cycle through:";
        for (const auto& [ref, d] : indegree) {
            if (d > 0) msg << ' ' << ref.str();
        }
        throw ValidationError(msg.str());
    }
}

void Ontology::check_against(const Corpus& corpus) const {
    std::vector<std::string> missing;
    for (const auto& [ref, _] : nodes_) {
        if (ref.kind == NodeKind::concept_node && !corpus.find_concept(ref.id)) missing.push_back(ref.str());
    }
    if (!missing.empty()) {
        std::string msg = "ontology references concepts absent from the corpus:";
        for (const auto& m : missing) msg += " " + m;
        throw ResolutionError(msg);
    }
}

Ontology Ontology::from_corpus(const Corpus& corpus, double attenuation) {
    Ontology o;
    o.attenuation_ = attenuation;
    for (const auto& [id, c] : corpus.concepts()) o.ensure(NodeRef::concept_of(id)).labels = c.labels;
    for (const auto& [id, ctx] : corpus.contexts()) {
        o.ensure(NodeRef::context(id)).labels["ar"] = ctx.name;
        for (const auto& m : ctx.members) o.link(NodeRef::context(id), NodeRef::concept_of(m.concept_id), m.weight);
    }
    return o;
}

namespace {

int id_attr(const xml::Element& el, std::string_view key, const std::string& source) {
    const std::string* raw = el.attr(key);
    auto v = raw ? parse_integer(*raw) : std::nullopt;
    if (!v || *v < 1) {
        throw ValidationError(source + ": " + el.where() + " needs a positive integer " + std::string(key));
    }
    return static_cast<int>(*v);
}

double weight_attr(const xml::Element& el, const std::string& source) {
    const std::string* raw = el.attr("Weight");
    if (raw == nullptr) return 1.0;
    auto w = parse_decimal(*raw);
    if (!w || *w < 0.0 || *w > 1.0) {
        throw ValidationError(source + ": " + el.where() + " Weight must be a decimal in [0, 1]");
    }
    return *w;
}

void read_labels(const xml::Element& el, std::map<std::string, std::string>& labels) {
    if (const std::string* ar = el.attr("Name"); ar && !ar->empty()) labels["ar"] = *ar;
    if (const std::string* en = el.attr("NameEn"); en && !en->empty()) labels["en"] = *en;
}

} // namespace

Ontology Ontology::parse(std::string_view bytes, const std::string& source, double attenuation) {
    xml::Element root = xml::parse(bytes, source);
    if (root.name != "ontology") throw ValidationError(source + ": root element must be <ontology>");

    Ontology o;
    o.attenuation_ = attenuation;
    for (const auto& el : root.children) {
        if (el.name == "Contexte") {
            NodeRef ctx = NodeRef::context(id_attr(el, "Num", source));
            read_labels(el, o.ensure(ctx).labels);
            for (const auto& m : el.children) {
                if (m.name != "concept") throw ValidationError(source + ": unexpected " + m.where());
                NodeRef child = NodeRef::concept_of(id_attr(m, "ConceptId", source));
                auto& labels = o.ensure(child).labels;
                if (const std::string* n = m.attr("ConceptName"); n && !n->empty()) labels.try_emplace("ar", *n);
                o.link(ctx, child, weight_attr(m, source));
            }
        } else if (el.name == "concept") {
            NodeRef self = NodeRef::concept_of(id_attr(el, "num", source));
            read_labels(el, o.ensure(self).labels);
            for (const auto& n : el.children) {
                if (n.name != "narrower") throw ValidationError(source + ": unexpected " + n.where());
                o.link(self, NodeRef::concept_of(id_attr(n, "ConceptId", source)), weight_attr(n, source));
            }
        } else {
            throw ValidationError(source + ": unexpected " + el.where());
        }
    }
    o.check_acyclic();
    return o;
}

} // namespace ritual
