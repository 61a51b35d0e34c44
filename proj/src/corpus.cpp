#include "ritual/corpus.hpp"

#include <algorithm>
#include <limits>
#include <sstream>

#include "ritual/error.hpp"
#include "ritual/numbers.hpp"
#include "xml_dom.hpp"

namespace ritual {

std::string canonical_video_num(std::string_view video_num) {
    std::size_t i = 0;
    while (i + 1 < video_num.size() && video_num[i] == '0') ++i;
    return std::string(video_num.substr(i));
}

bool VideoNumLess::operator()(std::string_view a, std::string_view b) const {
    auto strip = [](std::string_view s) {
        std::size_t i = 0;
        while (i + 1 < s.size() && s[i] == '0') ++i;
        return s.substr(i);
    };
    auto ca = strip(a);
    auto cb = strip(b);
    if (ca.size() != cb.size()) return ca.size() < cb.size();
    return ca < cb;
}

std::optional<double> Concept::weight_of(std::string_view video_num) const {
    VideoNumLess less;
    for (const auto& ref : videos) {
        if (!less(ref.video_num, video_num) && !less(video_num, ref.video_num)) return ref.weight;
    }
    return std::nullopt;
}

const std::string& Concept::label(std::string_view lang) const {
    if (auto it = labels.find(std::string(lang)); it != labels.end() && !it->second.empty()) {
        return it->second;
    }
    return labels.at("ar");
}

const VideoDoc* Corpus::find_video(std::string_view video_num) const {
    auto it = videos_.find(video_num);
    return it == videos_.end() ? nullptr : &it->second;
}

const Concept* Corpus::find_concept(ConceptId id) const {
    auto it = concepts_.find(id);
    return it == concepts_.end() ? nullptr : &it->second;
}

const Context* Corpus::find_context(ContextId id) const {
    auto it = contexts_.find(id);
    return it == contexts_.end() ? nullptr : &it->second;
}

std::optional<std::string> video_of_shot(std::string_view shot_id) {
    constexpr std::string_view prefix = "shot";
    if (shot_id.substr(0, prefix.size()) != prefix) return std::nullopt;
    auto rest = shot_id.substr(prefix.size());
    auto sep = rest.find('_');
    if (sep == 0 || sep == std::string_view::npos) return std::nullopt;
    return std::string(rest.substr(0, sep));
}

namespace {

const std::string& required(const xml::Element& el, std::string_view key, const std::string& source) {
    const std::string* v = el.attr(key);
    if (v == nullptr) {
        throw ValidationError(source + ": " + el.where() + " is missing attribute '" +
                              std::string(key) + "'");
    }
    return *v;
}

long long positive_int(const xml::Element& el, std::string_view key, const std::string& source,
                       long long min_value = 1) {
    const std::string& raw = required(el, key, source);
    auto v = parse_integer(raw);
    if (!v || *v < min_value) {
        throw ValidationError(source + ": " + el.where() + " attribute " + std::string(key) + "=\"" +
                              raw + "\" must be an integer >= " + std::to_string(min_value));
    }
    return *v;
}

double weight_attr(const xml::Element& el, const std::string& source, double max_value) {
    const std::string& raw = required(el, "Weight", source);
    auto w = parse_decimal(raw);
    if (!w || *w < 0.0 || *w > max_value) {
        std::string range = max_value == 1.0 ? "[0, 1]" : "[0, +inf)";
        throw ValidationError(source + ": " + el.where() + " Weight=\"" + raw +
                              "\" is not a decimal in " + range);
    }
    return *w;
}

void expect_name(const xml::Element& el, std::string_view name, const std::string& source) {
    if (el.name != name) {
        throw ValidationError(source + ": expected <" + std::string(name) + "> but found " +
                              el.where());
    }
}

Attributes extra_attributes(const xml::Element& el, std::initializer_list<std::string_view> known) {
    Attributes extra;
    for (const auto& kv : el.attributes) {
        if (std::find(known.begin(), known.end(), kv.first) == known.end()) extra.push_back(kv);
    }
    return extra;
}

void append_extra(xml::Element& el, const Attributes& extra) {
    for (const auto& [k, v] : extra) el.set(k, v);
}

} // namespace

std::vector<ShotListing> parse_concept_shot_file(std::string_view bytes, const std::string& source) {
    xml::Element root = xml::parse(bytes, source);
    expect_name(root, "concept", source);

    std::vector<ShotListing> out;
    for (const auto& listing_el : root.children) {
        expect_name(listing_el, "videoFeatureExtractionFeatureResult", source);
        ShotListing listing;
        listing.marker = required(listing_el, "fNum", source);
        listing.extra = extra_attributes(listing_el, {"fNum"});
        for (const auto& item : listing_el.children) {
            expect_name(item, "item", source);
            Shot shot;
            shot.seq_num = static_cast<int>(positive_int(item, "seqNum", source));
            shot.shot_id = required(item, "shotId", source);
            shot.extra = extra_attributes(item, {"seqNum", "shotId"});
            if (shot.shot_id.empty()) {
                throw ValidationError(source + ": " + item.where() + " has an empty shotId");
            }
            if (!listing.shots.empty() && shot.seq_num <= listing.shots.back().seq_num) {
                throw ValidationError(source + ": " + item.where() + " seqNum " +
                                      std::to_string(shot.seq_num) + " does not follow seqNum " +
                                      std::to_string(listing.shots.back().seq_num) +
                                      " in listing fNum=\"" + listing.marker + "\"");
            }
            listing.shots.push_back(std::move(shot));
        }
        out.push_back(std::move(listing));
    }
    return out;
}

std::string serialize_concept_shot_file(const std::vector<ShotListing>& listings) {
    xml::Element root{"concept", {}, {}, 0, 0};
    for (const auto& listing : listings) {
        auto& el = root.add("videoFeatureExtractionFeatureResult");
        el.set("fNum", listing.marker);
        append_extra(el, listing.extra);
        for (const auto& shot : listing.shots) {
            auto& item = el.add("item");
            item.set("seqNum", std::to_string(shot.seq_num));
            item.set("shotId", shot.shot_id);
            append_extra(item, shot.extra);
        }
    }
    return xml::serialize(root);
}

std::vector<Concept> parse_concept_video_file(std::string_view bytes, const std::string& source) {
    xml::Element root = xml::parse(bytes, source);
    expect_name(root, "concepts", source);

    std::vector<Concept> out;
    std::set<ConceptId> seen;
    std::set<ConceptId> duplicates;
    for (const auto& concept_el : root.children) {
        expect_name(concept_el, "concept", source);
        Concept c;
        c.id = static_cast<ConceptId>(positive_int(concept_el, "num", source));
        const std::string& name = required(concept_el, "Name", source);
        if (name.empty()) throw ValidationError(source + ": " + concept_el.where() + " has an empty Name");
        c.labels["ar"] = name;
        if (const std::string* en = concept_el.attr("NameEn"); en != nullptr && !en->empty()) {
            c.labels["en"] = *en;
        }
        c.extra = extra_attributes(concept_el, {"num", "Name", "NameEn"});
        if (!seen.insert(c.id).second) duplicates.insert(c.id);

        VideoSet in_concept;
        for (const auto& video_el : concept_el.children) {
            expect_name(video_el, "video", source);
            VideoRef ref;
            ref.video_num = required(video_el, "Num", source);
            if (ref.video_num.empty()) {
                throw ValidationError(source + ": " + video_el.where() + " has an empty Num");
            }
            ref.name = required(video_el, "Name", source);
            ref.weight = weight_attr(video_el, source, std::numeric_limits<double>::infinity());
            ref.number_shots = static_cast<int>(positive_int(video_el, "NUMBER_shots", source));
            ref.shot_repres = required(video_el, "shotrepres", source);
            if (ref.shot_repres.empty()) {
                throw ValidationError(source + ": " + video_el.where() + " has an empty shotrepres");
            }
            ref.extra = extra_attributes(video_el, {"Num", "Name", "Weight", "NUMBER_shots", "shotrepres"});
            if (!in_concept.insert(ref.video_num).second) {
                throw ValidationError(source + ": " + video_el.where() + " repeats video " +
                                      ref.video_num + " within concept " + std::to_string(c.id));
            }
            c.videos.push_back(std::move(ref));
        }
        out.push_back(std::move(c));
    }
    if (!duplicates.empty()) {
        std::ostringstream msg;
        msg << source << ": duplicate concept num:";
        for (ConceptId id : duplicates) msg << ' ' << id;
        throw ValidationError(msg.str());
    }
    return out;
}

std::string serialize_concept_video_file(const std::vector<Concept>& concepts) {
    xml::Element root{"concepts", {}, {}, 0, 0};
    for (const auto& c : concepts) {
        auto& el = root.add("concept");
        el.set("num", std::to_string(c.id));
        el.set("Name", c.labels.at("ar"));
        if (auto en = c.labels.find("en"); en != c.labels.end()) el.set("NameEn", en->second);
        append_extra(el, c.extra);
        for (const auto& ref : c.videos) {
            auto& v = el.add("video");
            v.set("Num", ref.video_num);
            v.set("Name", ref.name);
            v.set("Weight", format_decimal(ref.weight));
            v.set("NUMBER_shots", std::to_string(ref.number_shots));
            v.set("shotrepres", ref.shot_repres);
            append_extra(v, ref.extra);
        }
    }
    return xml::serialize(root);
}

std::vector<Context> parse_context_file(std::string_view bytes, const std::string& source) {
    xml::Element root = xml::parse(bytes, source);
    expect_name(root, "contextes", source);

    std::vector<Context> out;
    std::set<ContextId> seen;
    for (const auto& ctx_el : root.children) {
        expect_name(ctx_el, "Contexte", source);
        Context ctx;
        ctx.id = static_cast<ContextId>(positive_int(ctx_el, "Num", source));
        ctx.name = required(ctx_el, "Name", source);
        ctx.nbr_concept = static_cast<int>(positive_int(ctx_el, "Nbrconcept", source, 0));
        ctx.extra = extra_attributes(ctx_el, {"Num", "Name", "Nbrconcept"});
        if (!seen.insert(ctx.id).second) {
            throw ValidationError(source + ": " + ctx_el.where() + " duplicate context Num " +
                                  std::to_string(ctx.id));
        }
        std::set<ConceptId> members;
        for (const auto& m_el : ctx_el.children) {
            expect_name(m_el, "concept", source);
            ContextMember m;
            m.concept_id = static_cast<ConceptId>(positive_int(m_el, "ConceptId", source));
            if (const std::string* n = m_el.attr("ConceptName")) m.concept_name = *n;
            m.weight = weight_attr(m_el, source, 1.0);
            m.extra = extra_attributes(m_el, {"ConceptId", "ConceptName", "Weight"});
            if (!members.insert(m.concept_id).second) {
                throw ValidationError(source + ": " + m_el.where() + " lists concept " +
                                      std::to_string(m.concept_id) + " twice");
            }
            ctx.members.push_back(std::move(m));
        }
        if (static_cast<std::size_t>(ctx.nbr_concept) != ctx.members.size()) {
            throw ValidationError(source + ": " + ctx_el.where() + " declares Nbrconcept=" +
                                  std::to_string(ctx.nbr_concept) + " but has " +
                                  std::to_string(ctx.members.size()) + " concept children");
        }
        out.push_back(std::move(ctx));
    }
    return out;
}

std::string serialize_context_file(const std::vector<Context>& contexts) {
    xml::Element root{"contextes", {}, {}, 0, 0};
    for (const auto& ctx : contexts) {
        auto& el = root.add("Contexte");
        el.set("Num", std::to_string(ctx.id));
        el.set("Name", ctx.name);
        el.set("Nbrconcept", std::to_string(ctx.members.size()));
        append_extra(el, ctx.extra);
        for (const auto& m : ctx.members) {
            auto& c = el.add("concept");
            c.set("ConceptId", std::to_string(m.concept_id));
            c.set("ConceptName", m.concept_name);
            c.set("Weight", format_decimal(m.weight));
            append_extra(c, m.extra);
        }
    }
    return xml::serialize(root);
}

MarkerMap parse_marker_map(std::string_view text) {
    MarkerMap out;
    std::istringstream in{std::string(text)};
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line.front() == '#') continue;
        auto tab = line.find('\t');
        auto id = tab == std::string::npos ? std::nullopt : parse_integer(line.substr(tab + 1));
        if (!id || *id < 1) {
            throw ValidationError("marker map line " + std::to_string(lineno) +
                                  ": expected 'fNum<TAB>concept_id'");
        }
        out[line.substr(0, tab)] = static_cast<ConceptId>(*id);
    }
    return out;
}

std::vector<VideoDoc> videos_from_concepts(const std::vector<Concept>& concepts) {
    std::map<std::string, VideoDoc, VideoNumLess> catalogue;
    for (const auto& c : concepts) {
        for (const auto& ref : c.videos) {
            auto [it, inserted] = catalogue.try_emplace(ref.video_num);
            VideoDoc& doc = it->second;
            if (inserted) {
                doc.video_num = ref.video_num;
                doc.name = ref.name;
                doc.number_shots = ref.number_shots;
                doc.shot_repres = ref.shot_repres;
            } else if (doc.name != ref.name || doc.number_shots != ref.number_shots ||
                       doc.shot_repres != ref.shot_repres) {
                throw ValidationError("video " + ref.video_num + " has conflicting metadata under concept " +
                                      std::to_string(c.id));
            }
        }
    }
    std::vector<VideoDoc> out;
    out.reserve(catalogue.size());
    for (auto& [_, doc] : catalogue) out.push_back(std::move(doc));
    return out;
}

Corpus finalize(CorpusParts parts) {
    Corpus corpus;
    std::vector<std::string> dangling;
    std::vector<std::string> problems;

    for (auto& doc : parts.videos) {
        if (doc.number_shots < 1) problems.push_back("video " + doc.video_num + " has NUMBER_shots < 1");
        if (doc.shot_repres.empty()) problems.push_back("video " + doc.video_num + " has no shotrepres");
        doc.concept_weights.clear();
        doc.labeled_shots.clear();
        std::string key = doc.video_num;
        if (!corpus.videos_.emplace(key, std::move(doc)).second) {
            problems.push_back("video " + key + " listed twice");
        }
    }

    for (auto& c : parts.concepts) {
        if (c.labels["ar"].empty()) problems.push_back("concept " + std::to_string(c.id) + " has no Arabic label");
        c.shots.clear();
        for (const auto& ref : c.videos) {
            auto it = corpus.videos_.find(ref.video_num);
            if (it == corpus.videos_.end()) {
                dangling.push_back("concept " + std::to_string(c.id) + " -> video " + ref.video_num);
                continue;
            }
            if (!(ref.weight >= 0.0)) {
                problems.push_back("concept " + std::to_string(c.id) + " has a negative weight");
            } else if (ref.weight > 0.0) {
                it->second.concept_weights[c.id] = ref.weight;
            }
        }
        ConceptId id = c.id;
        if (!corpus.concepts_.emplace(id, std::move(c)).second) {
            problems.push_back("concept " + std::to_string(id) + " listed twice");
        }
    }

    for (auto& ctx : parts.contexts) {
        for (const auto& m : ctx.members) {
            if (!corpus.concepts_.count(m.concept_id)) {
                dangling.push_back("context " + std::to_string(ctx.id) + " -> concept " +
                                   std::to_string(m.concept_id));
            }
        }
        ctx.nbr_concept = static_cast<int>(ctx.members.size());
        ContextId id = ctx.id;
        if (!corpus.contexts_.emplace(id, std::move(ctx)).second) {
            problems.push_back("context " + std::to_string(id) + " listed twice");
        }
    }

    // Distinct shots per (video, concept).
    std::map<std::pair<std::string, ConceptId>, std::set<std::string>, std::less<>> labeled;
    for (const auto& listing : parts.shot_listings) {
        std::optional<ConceptId> cid;
        if (parts.markers.empty()) {
            if (auto v = parse_integer(listing.marker)) cid = static_cast<ConceptId>(*v);
        } else if (auto it = parts.markers.find(listing.marker); it != parts.markers.end()) {
            cid = it->second;
        }
        auto concept_it = cid ? corpus.concepts_.find(*cid) : corpus.concepts_.end();
        if (concept_it == corpus.concepts_.end()) {
            dangling.push_back("shot listing fNum=" + listing.marker + " -> no concept");
            continue;
        }
        for (const auto& shot : listing.shots) {
            auto video = video_of_shot(shot.shot_id);
            auto vit = video ? corpus.videos_.find(*video) : corpus.videos_.end();
            if (vit == corpus.videos_.end()) {
                dangling.push_back("shot " + shot.shot_id + " -> video " + video.value_or("?"));
                continue;
            }
            concept_it->second.shots.push_back(shot);
            labeled[{vit->first, concept_it->first}].insert(shot.shot_id);
        }
    }
    corpus.has_shot_data_ = !parts.shot_listings.empty();
    for (const auto& [key, shots] : labeled) {
        VideoDoc& doc = corpus.videos_.find(key.first)->second;
        int count = static_cast<int>(shots.size());
        if (count > doc.number_shots) {
            problems.push_back("video " + doc.video_num + " has " + std::to_string(count) +
                               " shots labelled with concept " + std::to_string(key.second) +
                               " but NUMBER_shots=" + std::to_string(doc.number_shots));
        }
        doc.labeled_shots[key.second] = count;
    }

    if (!dangling.empty()) {
        std::ostringstream msg;
        msg << dangling.size() << " dangling reference(s):";
        for (const auto& d : dangling) msg << "\n  " << d;
        throw ResolutionError(msg.str());
    }
    if (!problems.empty()) {
        std::ostringstream msg;
        msg << "invalid corpus:";
        for (const auto& p : problems) msg << "\n  " << p;
        throw ValidationError(msg.str());
    }
    return corpus;
}

} // namespace ritual
