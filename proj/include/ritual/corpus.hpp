#pragma once

// Three-level corpus organization: contexts group weighted concepts, concepts
// label videos (and their keyframe shots) with weights. Parsers and writers
// for the three XML corpus files live here as well; the normative schema is
// documented in docs/formats.md.

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace ritual {

using ConceptId = int;
using ContextId = int;

/// Attributes not understood by the parser, kept in document order so that
/// writing a parsed file back re-emits them.
using Attributes = std::vector<std::pair<std::string, std::string>>;

/// "00001" and "1" name the same video.
std::string canonical_video_num(std::string_view video_num);

/// Orders video numbers by canonical form: numerically for digit strings,
/// then lexicographically. Equivalent ids compare equal.
struct VideoNumLess {
    using is_transparent = void;
    bool operator()(std::string_view a, std::string_view b) const;
};

using VideoSet = std::set<std::string, VideoNumLess>;

struct Shot {
    std::string shot_id;
    int seq_num = 0;
    Attributes extra;

    friend bool operator==(const Shot&, const Shot&) = default;
};

/// One `videoFeatureExtractionFeatureResult` listing. `marker` is the raw
/// fNum attribute; a MarkerMap resolves it to a concept.
struct ShotListing {
    std::string marker;
    std::vector<Shot> shots;
    Attributes extra;

    friend bool operator==(const ShotListing&, const ShotListing&) = default;
};

/// A `video` element inside a concept of the concept description file.
struct VideoRef {
    std::string video_num;
    std::string name;
    double weight = 0.0;
    int number_shots = 1;
    std::string shot_repres;
    Attributes extra;

    friend bool operator==(const VideoRef&, const VideoRef&) = default;
};

struct Concept {
    ConceptId id = 0;
    /// Language tag ("ar", "en") to display label. "ar" is mandatory.
    std::map<std::string, std::string> labels;
    std::vector<VideoRef> videos;
    /// Filled by finalize from the shot listings mapped to this concept.
    std::vector<Shot> shots;
    Attributes extra;

    std::optional<double> weight_of(std::string_view video_num) const;
    /// Label in `lang`, falling back to the Arabic label.
    const std::string& label(std::string_view lang = "ar") const;

    friend bool operator==(const Concept&, const Concept&) = default;
};

struct ContextMember {
    ConceptId concept_id = 0;
    std::string concept_name;
    double weight = 1.0;
    Attributes extra;

    friend bool operator==(const ContextMember&, const ContextMember&) = default;
};

struct Context {
    ContextId id = 0;
    std::string name;
    int nbr_concept = 0;
    std::vector<ContextMember> members;
    Attributes extra;

    friend bool operator==(const Context&, const Context&) = default;
};

struct VideoDoc {
    std::string video_num;
    std::string name;
    int number_shots = 1;
    std::string shot_repres;
    /// Sparse: zero weights are never stored.
    std::map<ConceptId, double> concept_weights;
    /// Distinct shots of this video labelled with each concept (shot file data).
    std::map<ConceptId, int> labeled_shots;
};

using MarkerMap = std::map<std::string, ConceptId>;

struct CorpusParts {
    std::vector<VideoDoc> videos;
    std::vector<Concept> concepts;
    std::vector<Context> contexts;
    std::vector<ShotListing> shot_listings;
    /// fNum -> concept id. Empty means fNum is read as the concept id itself.
    MarkerMap markers;
};

/// Immutable after construction; only `finalize` builds one.
class Corpus {
public:
    using VideoMap = std::map<std::string, VideoDoc, VideoNumLess>;

    const VideoMap& videos() const noexcept { return videos_; }
    const std::map<ConceptId, Concept>& concepts() const noexcept { return concepts_; }
    const std::map<ContextId, Context>& contexts() const noexcept { return contexts_; }
    std::size_t n_videos() const noexcept { return videos_.size(); }
    bool has_shot_data() const noexcept { return has_shot_data_; }

    const VideoDoc* find_video(std::string_view video_num) const;
    const Concept* find_concept(ConceptId id) const;
    const Context* find_context(ContextId id) const;

private:
    friend Corpus finalize(CorpusParts parts);
    Corpus() = default;

    VideoMap videos_;
    std::map<ConceptId, Concept> concepts_;
    std::map<ContextId, Context> contexts_;
    bool has_shot_data_ = false;
};

std::vector<ShotListing> parse_concept_shot_file(std::string_view bytes,
                                                 const std::string& source = "<shots>");
std::string serialize_concept_shot_file(const std::vector<ShotListing>& listings);

std::vector<Concept> parse_concept_video_file(std::string_view bytes,
                                              const std::string& source = "<concepts>");
std::string serialize_concept_video_file(const std::vector<Concept>& concepts);

std::vector<Context> parse_context_file(std::string_view bytes,
                                        const std::string& source = "<contexts>");
std::string serialize_context_file(const std::vector<Context>& contexts);

/// "fNum TAB concept_id" per line, '#' comments.
MarkerMap parse_marker_map(std::string_view text);

/// Video catalogue implied by the `video` elements of a concept file. The same
/// video listed under several concepts must carry the same metadata.
std::vector<VideoDoc> videos_from_concepts(const std::vector<Concept>& concepts);

/// Resolves every cross reference and transposes concept->video weights into
/// per-video vectors. Throws ResolutionError listing all dangling references.
Corpus finalize(CorpusParts parts);

/// Shot ids follow "shot<video>_<n>"; returns the video part.
std::optional<std::string> video_of_shot(std::string_view shot_id);

} // namespace ritual
