#pragma once

// Update rules over the Information State. These are pure bookkeeping; act
// selection (which goes through the production kernel) lives in manager.hpp.

#include <algorithm>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "cogdial/dialogue/state.hpp"
#include "cogdial/kernel/rng.hpp"
#include "cogdial/pack/content_pack.hpp"

namespace cogdial::dialogue {

namespace detail {

inline void enter_scene(InformationState& s, const pack::ContentPack& pack, std::size_t index) {
  const pack::SceneSpec& scene = pack.scenes.at(index);
  s.scene_index = index;
  s.current_scene = scene.id;
  s.current_topic = scene.topic;
  if (index == 0) s.phase = ScenePhase::opening;
  else if (index + 1 == pack.scenes.size()) s.phase = ScenePhase::closing;
  else s.phase = ScenePhase::topic;
}

inline void set_need(InformationState& s, NeedKind k, bool unsatisfied) {
  Need& n = s.needs[k];
  n.kind = k;
  n.category = category_of(k);
  n.expected_value = 1.0;
  n.current_value = unsatisfied ? 0.0 : 1.0;
}

}  // namespace detail

// Recomputes every need from the rest of the state, in place.
inline void refresh_needs(InformationState& s) {
  using detail::set_need;
  set_need(s, NeedKind::social_affiliation, !s.greeted);

  const TopicState* t = s.topic_state();
  if (t == nullptr) {
    for (NeedKind k : kNeedPriority) {
      if (k != NeedKind::social_affiliation) set_need(s, k, false);
    }
    return;
  }
  const bool low_intention = t->intention == Level::low;
  set_need(s, NeedKind::competence, !(t->knowledge_answered && t->informative_done));
  set_need(s, NeedKind::intentional_assessment,
           !t->intention_answered || (t->exception_issued && !t->reassessment_answered));
  set_need(s, NeedKind::argumentation,
           t->intention_answered && low_intention && !t->argued && !t->exception_issued);
  const bool climax_open = t->climax_capable && (t->argued || t->informed);
  const bool needs_exception = climax_open && !t->exception_issued;
  const bool needs_closure = climax_open && t->exception_issued && t->reassessment_answered && low_intention &&
                             s.ethical_profile == EthicalProfile::neutral && !t->climax_closed;
  set_need(s, NeedKind::climax, needs_exception || needs_closure);
  set_need(s, NeedKind::open_mindedness,
           s.ethical_profile == EthicalProfile::open_minded && t->exception_issued && t->reassessment_answered &&
               low_intention && !t->substitution_issued);
}

inline InformationState emerge_needs(InformationState s) {
  refresh_needs(s);
  return s;
}

inline bool any_unsatisfied(const InformationState& s) { return s.top_need().has_value(); }

inline bool is_complete(const InformationState& s) {
  return std::any_of(s.history.begin(), s.history.end(), [](const HistoryRecord& h) {
    auto* a = std::get_if<DialogueAct>(&h);
    return a && a->function == CommunicativeFunction::goodbye;
  });
}

// The closing scene's goodbye is a scripted step rather than a need.
inline bool scripted_step_pending(const InformationState& s) {
  return s.phase == ScenePhase::closing && !is_complete(s);
}

inline InformationState init_state(const pack::ContentPack& pack, ProfileChoice choice, kernel::Rng& rng) {
  InformationState s;
  for (const auto& scene : pack.scenes) {
    if (!scene.topic) continue;
    TopicState t;
    t.topic = *scene.topic;
    t.climax_capable = scene.climax_capable;
    s.topic_states.emplace(t.topic, t);
  }
  switch (choice) {
    case ProfileChoice::open_minded: s.ethical_profile = EthicalProfile::open_minded; break;
    case ProfileChoice::neutral: s.ethical_profile = EthicalProfile::neutral; break;
    case ProfileChoice::random:
      s.ethical_profile = rng.bernoulli(0.5) ? EthicalProfile::open_minded : EthicalProfile::neutral;
      break;
  }
  detail::enter_scene(s, pack, 0);
  refresh_needs(s);
  return s;
}

inline PersuasiveTechnique choose_technique(kernel::Rng& rng, std::span<const PersuasiveTechnique> enabled) {
  if (enabled.empty()) throw DialogueFault("no persuasive technique enabled");
  return enabled[rng.uniform_index(enabled.size())];
}

inline PersuasiveTechnique choose_technique(kernel::Rng& rng) { return choose_technique(rng, kAllTechniques); }

// Bookkeeping after the agent emitted `act`.
inline void record_act(InformationState& s, const pack::ContentPack& pack, const DialogueAct& act) {
  TopicState* t = s.topic_state();
  auto need_topic = [&]() -> TopicState& {
    if (t == nullptr)
      throw DialogueFault(std::string(to_string(act.function)) + " act outside a topic scene");
    return *t;
  };
  switch (act.function) {
    case CommunicativeFunction::greeting_self_introduction: s.greeted = true; break;
    case CommunicativeFunction::question: s.pending_question = act.question; break;
    case CommunicativeFunction::inform:
      need_topic().informed = true;
      need_topic().informative_done = true;
      break;
    case CommunicativeFunction::reinforce: need_topic().informative_done = true; break;
    case CommunicativeFunction::acknowledge:
      if (act.fulfils == NeedKind::climax) need_topic().climax_closed = true;
      else need_topic().informative_done = true;
      break;
    case CommunicativeFunction::argument: need_topic().argued = true; break;
    case CommunicativeFunction::exception: {
      need_topic().exception_issued = true;
      const pack::SceneSpec* scene = pack.scene(s.current_scene);
      if (scene && scene->exception) s.active_role = scene->exception->role;
      break;
    }
    case CommunicativeFunction::substitution: need_topic().substitution_issued = true; break;
    case CommunicativeFunction::goodbye: break;
  }
  // Bookkeeping follows the need an act fulfils as well as its function.
  if (act.fulfils == NeedKind::argumentation) need_topic().argued = true;
  s.history.push_back(act);
  refresh_needs(s);
}

// Applies the effects of the chosen answer option. Throws ProtocolError
// (leaving `s` unchanged) when the option does not belong to the pending question.
inline void apply_user_reply(InformationState& s, const pack::ContentPack& pack, std::string_view option_id) {
  if (!s.pending_question) throw ProtocolError("no question is pending");
  auto ref = pack.question(*s.pending_question);
  if (!ref) throw DialogueFault("pending question " + *s.pending_question + " not in pack");
  const pack::AnswerOption* option = ref->question->option(option_id);
  if (option == nullptr)
    throw ProtocolError("option '" + std::string(option_id) + "' does not belong to question " + ref->question->id);

  for (const auto& e : option->effects) {
    TopicState& t = s.topic_states.at(e.topic);
    (e.attribute == pack::Attribute::knowledge ? t.knowledge : t.intention) = e.level;
  }
  const std::string& topic = ref->scene->topic.value();
  TopicState& t = s.topic_states.at(topic);
  switch (ref->question->kind) {
    case QuestionKind::knowledge_probe: t.knowledge_answered = true; break;
    case QuestionKind::intention_probe: t.intention_answered = true; break;
    case QuestionKind::role_reassessment: t.reassessment_answered = true; break;
  }
  s.history.push_back(UserReply{ref->scene->id, ref->question->id, option->id, option->effects});
  s.pending_question.reset();
  refresh_needs(s);
}

inline void advance_scene(InformationState& s, const pack::ContentPack& pack) {
  refresh_needs(s);
  if (auto need = s.top_need())
    throw DialogueFault("cannot leave scene " + s.current_scene + ": need " + std::string(to_string(*need)) +
                        " is unsatisfied");
  if (s.pending_question) throw DialogueFault("cannot leave scene " + s.current_scene + ": question pending");
  if (s.scene_index + 1 >= pack.scenes.size()) throw DialogueFault("no scene after " + s.current_scene);
  s.previous_scene = s.current_scene;
  detail::enter_scene(s, pack, s.scene_index + 1);
  s.active_role.reset();
  refresh_needs(s);
}

}  // namespace cogdial::dialogue
