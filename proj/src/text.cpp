#include "ritual/text.hpp"

#include <algorithm>
#include <sstream>

#include "ritual/error.hpp"
#include "ritual/numbers.hpp"

namespace ritual {

namespace {

constexpr char32_t kInvalid = 0xFFFFFFFF;

// Decodes one code point at `i`, advancing it. Malformed sequences yield
// kInvalid and consume a single byte.
char32_t next_code_point(std::string_view s, std::size_t& i) {
    auto byte = [&](std::size_t k) { return static_cast<unsigned char>(s[k]); };
    unsigned char b0 = byte(i);
    if (b0 < 0x80) {
        ++i;
        return b0;
    }
    int len = 0;
    char32_t cp = 0;
    if ((b0 & 0xE0) == 0xC0) {
        len = 2;
        cp = b0 & 0x1F;
    } else if ((b0 & 0xF0) == 0xE0) {
        len = 3;
        cp = b0 & 0x0F;
    } else if ((b0 & 0xF8) == 0xF0) {
        len = 4;
        cp = b0 & 0x07;
    } else {
        ++i;
        return kInvalid;
    }
    if (i + static_cast<std::size_t>(len) > s.size()) {
        ++i;
        return kInvalid;
    }
    for (int k = 1; k < len; ++k) {
        unsigned char b = byte(i + static_cast<std::size_t>(k));
        if ((b & 0xC0) != 0x80) {
            ++i;
            return kInvalid;
        }
        cp = (cp << 6) | (b & 0x3F);
    }
    i += static_cast<std::size_t>(len);
    return cp;
}

void append_utf8(std::string& out, char32_t cp) {
    if (cp < 0x80) {
        out += static_cast<char>(cp);
    } else if (cp < 0x800) {
        out += static_cast<char>(0xC0 | (cp >> 6));
        out += static_cast<char>(0x80 | (cp & 0x3F));
    } else if (cp < 0x10000) {
        out += static_cast<char>(0xE0 | (cp >> 12));
        out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
        out += static_cast<char>(0x80 | (cp & 0x3F));
    } else {
        out += static_cast<char>(0xF0 | (cp >> 18));
        out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
        out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
        out += static_cast<char>(0x80 | (cp & 0x3F));
    }
}

bool is_separator(char32_t cp) {
    if (cp == kInvalid) return true;
    if (cp < 0x80) {
        return !((cp >= '0' && cp <= '9') || (cp >= 'a' && cp <= 'z') || (cp >= 'A' && cp <= 'Z'));
    }
    return (cp >= 0x80 && cp <= 0xBF) || cp == 0xD7 || cp == 0xF7 || cp == 0x060C || cp == 0x061B ||
           cp == 0x061F || (cp >= 0x066A && cp <= 0x066D) || cp == 0x06D4 ||
           (cp >= 0x2000 && cp <= 0x206F) || (cp >= 0x3000 && cp <= 0x303F) || cp == 0xFD3E ||
           cp == 0xFD3F || cp == 0xFEFF;
}

bool is_arabic_mark(char32_t cp) {
    return (cp >= 0x0610 && cp <= 0x061A) || (cp >= 0x064B && cp <= 0x065F) || cp == 0x0670 ||
           cp == 0x0640;
}

bool is_arabic_letter(char32_t cp) {
    return (cp >= 0x0620 && cp <= 0x064A) || (cp >= 0x066E && cp <= 0x06D3) ||
           (cp >= 0x06FA && cp <= 0x06FF);
}

char32_t fold(char32_t cp) {
    switch (cp) {
    case 0x0622: // alef with madda
    case 0x0623: // alef with hamza above
    case 0x0625: // alef with hamza below
    case 0x0671: // alef wasla
        return 0x0627;
    case 0x0649: return 0x064A; // alef maqsura -> ya
    case 0x0629: return 0x0647; // ta marbuta -> ha
    default:
        if (cp >= 'A' && cp <= 'Z') return cp - 'A' + 'a';
        return cp;
    }
}

Lang detect(std::u32string_view cps) {
    bool latin = false;
    for (char32_t cp : cps) {
        if (is_arabic_letter(cp)) return Lang::ar;
        if (cp >= 'a' && cp <= 'z') latin = true;
    }
    return latin ? Lang::en : Lang::unknown;
}

std::u32string normalize_cps(std::string_view token) {
    std::u32string cps;
    for (std::size_t i = 0; i < token.size();) {
        char32_t cp = next_code_point(token, i);
        if (cp == kInvalid || is_arabic_mark(cp)) continue;
        cps += fold(cp);
    }
    while (cps.size() >= 4 && cps[0] == 0x0627 && cps[1] == 0x0644) cps.erase(0, 2);
    return cps;
}

std::string encode(std::u32string_view cps) {
    std::string out;
    for (char32_t cp : cps) append_utf8(out, cp);
    return out;
}

const char* const kDefaultEnglish[] = {
    "a",     "about", "an",    "and",   "are",   "as",    "at",    "be",    "by",    "can",
    "do",    "does",  "for",   "from",  "he",    "her",   "his",   "how",   "i",     "in",
    "into",  "is",    "it",    "its",   "me",    "my",    "no",    "not",   "of",    "on",
    "or",    "our",   "she",   "that",  "the",   "their", "them",  "these", "they",
    "this",  "those", "to",    "was",   "we",    "were",  "what",  "when",  "where", "which",
    "who",   "will",  "with",  "you",   "your",
};

const char* const kDefaultArabic[] = {
    "من",  "في",  "على",  "إلى", "عن",   "مع",  "و",   "أو",   "ثم",  "هذا", "هذه",
    "ذلك", "تلك", "التي", "الذي", "الذين", "ما",  "ماذا", "كيف", "متى", "أين", "هل",
    "لا",  "لم",  "لن",   "قد",  "كان",  "كانت", "هو",  "هي",  "هم",  "أن",  "إن",
    "كل",  "بعض", "عند",  "بين", "حتى",  "إلا", "يا",
};

} // namespace

std::string_view to_string(Lang lang) {
    switch (lang) {
    case Lang::ar: return "ar";
    case Lang::en: return "en";
    default: return "unknown";
    }
}

std::string normalize_token(std::string_view token) { return encode(normalize_cps(token)); }

std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> tokens;
    std::string current;
    for (std::size_t i = 0; i < text.size();) {
        std::size_t start = i;
        char32_t cp = next_code_point(text, i);
        if (is_separator(cp)) {
            if (!current.empty()) tokens.push_back(std::move(current));
            current.clear();
        } else {
            current.append(text.substr(start, i - start));
        }
    }
    if (!current.empty()) tokens.push_back(std::move(current));
    return tokens;
}

StopWords StopWords::defaults() {
    StopWords sw;
    for (const char* w : kDefaultEnglish) sw.en.insert(normalize_token(w));
    for (const char* w : kDefaultArabic) sw.ar.insert(normalize_token(w));
    return sw;
}

void StopWords::add_from(std::string_view text, Lang lang) {
    std::istringstream in{std::string(text)};
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line.front() == '#') continue;
        for (const auto& tok : tokenize(line)) {
            std::string norm = normalize_token(tok);
            if (norm.empty()) continue;
            (lang == Lang::ar ? ar : en).insert(norm);
        }
    }
}

bool StopWords::contains(std::string_view norm) const {
    std::string key(norm);
    return ar.count(key) > 0 || en.count(key) > 0;
}

std::vector<NormalizedTerm> TextNormalizer::normalize(std::string_view text) const {
    std::vector<NormalizedTerm> out;
    for (auto& tok : tokenize(text)) {
        std::u32string cps = normalize_cps(tok);
        if (cps.empty()) continue;
        NormalizedTerm term{std::move(tok), encode(cps), detect(cps)};
        if (stop_words_.contains(term.norm)) continue;
        out.push_back(std::move(term));
    }
    return out;
}

std::vector<std::pair<std::string, ConceptId>> parse_synonyms(std::string_view text) {
    std::vector<std::pair<std::string, ConceptId>> out;
    std::istringstream in{std::string(text)};
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line.front() == '#') continue;
        auto tab = line.rfind('\t');
        auto id = tab == std::string::npos ? std::nullopt : parse_integer(line.substr(tab + 1));
        if (!id || *id < 1) {
            throw ValidationError("synonym line " + std::to_string(lineno) +
                                  ": expected 'term<TAB>concept_id'");
        }
        out.emplace_back(line.substr(0, tab), static_cast<ConceptId>(*id));
    }
    return out;
}

Lexicon Lexicon::build(const Corpus& corpus, const TextNormalizer& normalizer,
                       const std::vector<std::pair<std::string, ConceptId>>& synonyms) {
    Lexicon lex;
    auto add = [&](std::string_view text, ConceptId id) {
        for (auto& term : normalizer.normalize(text)) {
            lex.entries_[term.norm].insert(id);
            lex.descriptors_[id].insert(term.norm);
        }
    };
    for (const auto& [id, c] : corpus.concepts()) {
        for (const auto& [lang, label] : c.labels) add(label, id);
    }
    std::vector<ConceptId> unknown;
    for (const auto& [term, id] : synonyms) {
        if (!corpus.find_concept(id)) {
            unknown.push_back(id);
            continue;
        }
        add(term, id);
    }
    if (!unknown.empty()) {
        std::string msg = "synonyms reference unknown concept(s):";
        for (ConceptId id : unknown) msg += " " + std::to_string(id);
        throw ResolutionError(msg);
    }
    return lex;
}

const std::set<std::string>& Lexicon::descriptors(ConceptId id) const {
    static const std::set<std::string> empty;
    auto it = descriptors_.find(id);
    return it == descriptors_.end() ? empty : it->second;
}

std::vector<ConceptMatch> match_concepts(const std::vector<NormalizedTerm>& terms, const Lexicon& lexicon) {
    std::set<std::string> query;
    for (const auto& t : terms) query.insert(t.norm);
    if (query.empty()) return {};

    std::map<ConceptId, std::size_t> hits;
    for (const auto& q : query) {
        auto it = lexicon.entries().find(q);
        if (it == lexicon.entries().end()) continue;
        for (ConceptId id : it->second) ++hits[id];
    }

    std::vector<ConceptMatch> out;
    out.reserve(hits.size());
    for (const auto& [id, n] : hits) {
        out.push_back({id, static_cast<double>(n) / static_cast<double>(query.size())});
    }
    std::stable_sort(out.begin(), out.end(),
                     [](const ConceptMatch& a, const ConceptMatch& b) { return a.score > b.score; });
    return out;
}

} // namespace ritual
