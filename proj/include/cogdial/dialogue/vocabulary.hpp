#pragma once

// Closed vocabularies shared by the content pack and the dialogue manager.

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <utility>

namespace cogdial {

namespace detail {

template <typename E, std::size_t N>
using NameTable = std::array<std::pair<E, std::string_view>, N>;

template <typename E, std::size_t N>
constexpr std::string_view name_of(const NameTable<E, N>& table, E e) {
  for (const auto& [value, name] : table) {
    if (value == e) return name;
  }
  return "?";
}

template <typename E, std::size_t N>
constexpr std::optional<E> parse_name(const NameTable<E, N>& table, std::string_view s) {
  for (const auto& [value, name] : table) {
    if (name == s) return value;
  }
  return std::nullopt;
}

}  // namespace detail

// Ordinal user-model level for knowledge and intention.
enum class Level { low, medium, high };

enum class CommunicativeFunction {
  greeting_self_introduction,
  question,
  inform,
  reinforce,
  argument,
  exception,
  substitution,
  acknowledge,
  goodbye,
};

enum class PersuasiveTechnique { ad_populum, ad_verecundiam, framing };

enum class QuestionKind { knowledge_probe, intention_probe, role_reassessment };

// Declared in priority order: earlier kinds win when several are unsatisfied.
enum class NeedKind {
  social_affiliation,
  competence,
  intentional_assessment,
  argumentation,
  climax,
  open_mindedness,
};

enum class NeedCategory { social, cognitive, argumentative, narrative, ethical };

enum class EthicalProfile { open_minded, neutral };

enum class ProfileChoice { open_minded, neutral, random };

inline constexpr detail::NameTable<Level, 3> kLevelNames{{
    {Level::low, "low"}, {Level::medium, "medium"}, {Level::high, "high"}}};

inline constexpr detail::NameTable<CommunicativeFunction, 9> kFunctionNames{{
    {CommunicativeFunction::greeting_self_introduction, "greeting_self_introduction"},
    {CommunicativeFunction::question, "question"},
    {CommunicativeFunction::inform, "inform"},
    {CommunicativeFunction::reinforce, "reinforce"},
    {CommunicativeFunction::argument, "argument"},
    {CommunicativeFunction::exception, "exception"},
    {CommunicativeFunction::substitution, "substitution"},
    {CommunicativeFunction::acknowledge, "acknowledge"},
    {CommunicativeFunction::goodbye, "goodbye"},
}};

inline constexpr detail::NameTable<PersuasiveTechnique, 3> kTechniqueNames{{
    {PersuasiveTechnique::ad_populum, "ad_populum"},
    {PersuasiveTechnique::ad_verecundiam, "ad_verecundiam"},
    {PersuasiveTechnique::framing, "framing"},
}};

inline constexpr detail::NameTable<QuestionKind, 3> kQuestionKindNames{{
    {QuestionKind::knowledge_probe, "knowledge_probe"},
    {QuestionKind::intention_probe, "intention_probe"},
    {QuestionKind::role_reassessment, "role_reassessment"},
}};

inline constexpr detail::NameTable<NeedKind, 6> kNeedNames{{
    {NeedKind::social_affiliation, "social_affiliation"},
    {NeedKind::competence, "competence"},
    {NeedKind::intentional_assessment, "intentional_assessment"},
    {NeedKind::argumentation, "argumentation"},
    {NeedKind::climax, "climax"},
    {NeedKind::open_mindedness, "open_mindedness"},
}};

inline constexpr detail::NameTable<NeedCategory, 5> kCategoryNames{{
    {NeedCategory::social, "social"},
    {NeedCategory::cognitive, "cognitive"},
    {NeedCategory::argumentative, "argumentative"},
    {NeedCategory::narrative, "narrative"},
    {NeedCategory::ethical, "ethical"},
}};

inline constexpr detail::NameTable<EthicalProfile, 2> kProfileNames{{
    {EthicalProfile::open_minded, "open_minded"}, {EthicalProfile::neutral, "neutral"}}};

inline constexpr detail::NameTable<ProfileChoice, 3> kProfileChoiceNames{{
    {ProfileChoice::open_minded, "open_minded"},
    {ProfileChoice::neutral, "neutral"},
    {ProfileChoice::random, "random"},
}};

inline constexpr std::array<PersuasiveTechnique, 3> kAllTechniques{
    PersuasiveTechnique::ad_populum, PersuasiveTechnique::ad_verecundiam, PersuasiveTechnique::framing};

inline constexpr std::array<NeedKind, 6> kNeedPriority{
    NeedKind::social_affiliation, NeedKind::competence,  NeedKind::intentional_assessment,
    NeedKind::argumentation,      NeedKind::climax,      NeedKind::open_mindedness};

inline constexpr std::array<Level, 3> kAllLevels{Level::low, Level::medium, Level::high};

constexpr std::string_view to_string(Level v) { return detail::name_of(kLevelNames, v); }
constexpr std::string_view to_string(CommunicativeFunction v) { return detail::name_of(kFunctionNames, v); }
constexpr std::string_view to_string(PersuasiveTechnique v) { return detail::name_of(kTechniqueNames, v); }
constexpr std::string_view to_string(QuestionKind v) { return detail::name_of(kQuestionKindNames, v); }
constexpr std::string_view to_string(NeedKind v) { return detail::name_of(kNeedNames, v); }
constexpr std::string_view to_string(NeedCategory v) { return detail::name_of(kCategoryNames, v); }
constexpr std::string_view to_string(EthicalProfile v) { return detail::name_of(kProfileNames, v); }
constexpr std::string_view to_string(ProfileChoice v) { return detail::name_of(kProfileChoiceNames, v); }

template <typename E>
std::optional<E> parse(std::string_view s);

template <> inline std::optional<Level> parse<Level>(std::string_view s) { return detail::parse_name(kLevelNames, s); }
template <> inline std::optional<CommunicativeFunction> parse<CommunicativeFunction>(std::string_view s) {
  return detail::parse_name(kFunctionNames, s);
}
template <> inline std::optional<PersuasiveTechnique> parse<PersuasiveTechnique>(std::string_view s) {
  return detail::parse_name(kTechniqueNames, s);
}
template <> inline std::optional<QuestionKind> parse<QuestionKind>(std::string_view s) {
  return detail::parse_name(kQuestionKindNames, s);
}
template <> inline std::optional<NeedKind> parse<NeedKind>(std::string_view s) {
  return detail::parse_name(kNeedNames, s);
}
template <> inline std::optional<EthicalProfile> parse<EthicalProfile>(std::string_view s) {
  return detail::parse_name(kProfileNames, s);
}
template <> inline std::optional<ProfileChoice> parse<ProfileChoice>(std::string_view s) {
  return detail::parse_name(kProfileChoiceNames, s);
}

constexpr NeedCategory category_of(NeedKind k) {
  switch (k) {
    case NeedKind::social_affiliation: return NeedCategory::social;
    case NeedKind::competence:
    case NeedKind::intentional_assessment: return NeedCategory::cognitive;
    case NeedKind::argumentation: return NeedCategory::argumentative;
    case NeedKind::climax: return NeedCategory::narrative;
    case NeedKind::open_mindedness: return NeedCategory::ethical;
  }
  return NeedCategory::social;
}

}  // namespace cogdial
