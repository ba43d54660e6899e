#include "coop_rag/lexicon.hpp"

#include "coop_rag/error.hpp"
#include "coop_rag/text.hpp"

#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <fstream>
#include <numeric>
#include <sstream>

namespace coop_rag {

using nlohmann::json;

namespace {

// Starter vocabulary; deployments replace it with lexicon_path.
constexpr const char *kBuiltinLexicon = R"json({
  "keywords": {
    "species": ["poultry", "chicken", "chickens", "broiler", "broilers", "layer", "layers", "hen", "hens",
                "pullet", "pullets", "rooster", "roosters", "cockerel", "cockerels", "chick", "chicks",
                "turkey", "turkeys", "duck", "ducks", "ducklings", "goose", "geese", "quail", "breeder",
                "breeders", "flock", "flocks", "bird", "birds", "fowl"],
    "disease": ["disease", "diseases", "coccidiosis", "coccidia", "newcastle", "influenza", "salmonella",
                "salmonellosis", "marek", "mareks", "gumboro", "bursal", "bronchitis", "mycoplasma",
                "colibacillosis", "coryza", "fowlpox", "aspergillosis", "enteritis", "necrotic", "ascites",
                "diarrhea", "lesion", "lesions", "mites", "lice", "worms", "parasites", "infection",
                "infections", "outbreak", "mortality", "lameness", "pododermatitis", "respiratory",
                "vaccine", "vaccines", "vaccination", "antibiotic", "antibiotics", "pathogen", "pathogenic",
                "avian", "virus", "bacteria", "droppings", "symptoms"],
    "management_topic": ["ventilation", "litter", "housing", "biosecurity", "lighting", "photoperiod",
                         "brooding", "brooder", "temperature", "humidity", "ammonia", "stocking", "density",
                         "welfare", "hygiene", "manure", "cleaning", "disinfection", "heat", "cooling",
                         "barn", "coop", "perches", "enrichment", "rodents", "records"],
    "nutrition_topic": ["feed", "feeds", "feeding", "feeder", "feeders", "diet", "diets", "nutrition",
                        "nutrient", "nutrients", "protein", "calcium", "phosphorus", "vitamin", "vitamins",
                        "minerals", "water", "drinking", "drinkers", "ration", "rations", "starter",
                        "grower", "finisher", "lysine", "methionine", "amino", "conversion", "supplement",
                        "supplements", "grit", "intake"],
    "reproduction_topic": ["egg", "eggs", "laying", "lay", "hatch", "hatching", "hatchery", "hatchability",
                           "incubation", "incubator", "fertility", "fertile", "breeding", "mating", "semen",
                           "insemination", "embryo", "embryos", "molt", "molting", "broody", "eggshell",
                           "yolk", "clutch"]
  },
  "abbreviations": {
    "HPAI": "highly pathogenic avian influenza",
    "LPAI": "low pathogenic avian influenza",
    "FCR": "feed conversion ratio",
    "ND": "newcastle disease",
    "IB": "infectious bronchitis",
    "IBD": "infectious bursal disease",
    "ILT": "infectious laryngotracheitis",
    "NE": "necrotic enteritis",
    "CRD": "chronic respiratory disease",
    "EDS": "egg drop syndrome",
    "ADG": "average daily gain",
    "AGP": "antibiotic growth promoter",
    "NH3": "ammonia",
    "RH": "relative humidity",
    "BW": "body weight"
  }
})json";

std::vector<std::string> facet_list(const json &keywords, Facet f) {
  const auto key = std::string(to_string(f));
  if (!keywords.contains(key)) {
    return {};
  }
  return keywords.at(key).get<std::vector<std::string>>();
}

} // namespace

DomainLexicon::DomainLexicon(const std::map<Facet, std::vector<std::string>> &keywords,
                             std::map<std::string, std::string> abbreviations, std::size_t max_edit_distance)
    : max_edit_distance_(max_edit_distance) {
  for (const auto f : kAllFacets) {
    auto &list = by_facet_[f];
    const auto it = keywords.find(f);
    if (it == keywords.end()) {
      continue;
    }
    for (const auto &raw : it->second) {
      const auto toks = tokenize(raw);
      if (toks.size() != 1 || toks.front() != raw) {
        throw Error(Errc::config_error, "lexicon keyword must be a single lowercase token: \"" + raw + "\"");
      }
      if (facet_by_term_.emplace(raw, f).second) {
        list.push_back(raw);
        ordered_.push_back(raw);
      }
    }
  }
  for (auto &[key, expansion] : abbreviations) {
    if (key.empty() || to_upper_ascii(key) != key ||
        !std::all_of(key.begin(), key.end(), [](unsigned char c) { return std::isalnum(c) != 0; })) {
      throw Error(Errc::config_error, "abbreviation key must be uppercase alphanumeric: \"" + key + "\"");
    }
    if (tokenize(expansion).empty()) {
      throw Error(Errc::config_error, "abbreviation " + key + " has an empty expansion");
    }
    abbreviations_.emplace(key, to_lower_ascii(trim(expansion)));
  }
}

DomainLexicon DomainLexicon::builtin() { return from_json(kBuiltinLexicon); }

DomainLexicon DomainLexicon::from_json(std::string_view json_text) {
  try {
    const auto doc = json::parse(json_text);
    for (const auto &[key, _] : doc.items()) {
      if (key != "keywords" && key != "abbreviations" && key != "max_edit_distance") {
        throw Error(Errc::config_error, "unknown lexicon key: " + key);
      }
    }
    std::map<Facet, std::vector<std::string>> keywords;
    if (doc.contains("keywords")) {
      const auto &kw = doc.at("keywords");
      for (const auto &[key, _] : kw.items()) {
        if (!parse_facet(key)) {
          throw Error(Errc::config_error, "unknown lexicon facet: " + key);
        }
      }
      for (const auto f : kAllFacets) {
        keywords[f] = facet_list(kw, f);
      }
    }
    std::map<std::string, std::string> abbreviations;
    if (doc.contains("abbreviations")) {
      abbreviations = doc.at("abbreviations").get<std::map<std::string, std::string>>();
    }
    const auto distance = doc.value("max_edit_distance", std::size_t{1});
    return DomainLexicon(keywords, std::move(abbreviations), distance);
  } catch (const json::exception &e) {
    throw Error(Errc::config_error, std::string("malformed lexicon: ") + e.what());
  }
}

DomainLexicon DomainLexicon::load(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(Errc::io_error, "cannot read lexicon " + path.string());
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return from_json(ss.str());
}

std::optional<Facet> DomainLexicon::facet_of(std::string_view token) const {
  const auto it = facet_by_term_.find(std::string(token));
  if (it == facet_by_term_.end()) {
    return std::nullopt;
  }
  return it->second;
}

const std::string *DomainLexicon::expansion_of(std::string_view upper_token) const {
  const auto it = abbreviations_.find(std::string(upper_token));
  return it == abbreviations_.end() ? nullptr : &it->second;
}

const std::vector<std::string> &DomainLexicon::keywords(Facet f) const {
  static const std::vector<std::string> empty;
  const auto it = by_facet_.find(f);
  return it == by_facet_.end() ? empty : it->second;
}

std::size_t levenshtein(std::string_view a, std::string_view b) {
  std::vector<std::size_t> prev(b.size() + 1);
  std::vector<std::size_t> cur(b.size() + 1);
  std::iota(prev.begin(), prev.end(), std::size_t{0});
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

} // namespace coop_rag
