#pragma once

// DialogueManager: one session's dialogue engine. Owns the Information
// State and the production kernel that selects acts on top of it.

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "cogdial/dialogue/policy.hpp"
#include "cogdial/dialogue/state.hpp"
#include "cogdial/dialogue/update_rules.hpp"
#include "cogdial/kernel/kernel.hpp"
#include "cogdial/pack/content_pack.hpp"

namespace cogdial::dialogue {

namespace detail {

inline kernel::ActivationParams activation_params(const pack::KernelSpec& spec) {
  kernel::ActivationParams p;
  p.source_weight_total = spec.source_weight_total;
  p.noise_scale = spec.noise_scale;
  if (spec.retrieval_threshold) p.retrieval_threshold = *spec.retrieval_threshold;
  for (const auto& a : spec.associations) p.association_strengths[{a.source, a.target}] = a.strength;
  return p;
}

// Declarative memory: one chunk per scene and one per renderable template.
inline void load_declarative_memory(kernel::KernelState& k, const pack::ContentPack& pack) {
  using kernel::Chunk;
  using kernel::ChunkRef;
  for (const auto& scene : pack.scenes) {
    k.memory().add(Chunk{pack::scene_chunk_id(scene.id), "scene",
                         {{"topic", scene.topic.value_or("none")}, {"title", scene.title}}, 0.0});
  }
  for (const auto& scene : pack.scenes) {
    const ChunkRef scene_ref{pack::scene_chunk_id(scene.id)};
    for (const auto& t : scene.templates) {
      k.memory().add(Chunk{pack::template_chunk_id(scene.id, t.function, t.technique),
                           "template",
                           {{"function", std::string(to_string(t.function))},
                            {"scene", scene_ref},
                            {"technique", t.technique ? std::string(to_string(*t.technique)) : "none"},
                            {"kind", std::string("none")},
                            {"question", std::string("none")},
                            {"text", t.text}},
                           0.0});
    }
    for (const auto& q : scene.questions) {
      k.memory().add(Chunk{pack::question_chunk_id(scene.id, q.id),
                           "template",
                           {{"function", std::string("question")},
                            {"scene", scene_ref},
                            {"technique", std::string("none")},
                            {"kind", std::string(to_string(q.kind))},
                            {"question", q.id},
                            {"text", q.prompt}},
                           0.0});
    }
  }
}

inline const char* flag(bool b) { return b ? "yes" : "no"; }

}  // namespace detail

class DialogueManager {
 public:
  DialogueManager(std::shared_ptr<const pack::ContentPack> pack, ProfileChoice choice, std::uint64_t seed)
      : DialogueManager(std::move(pack), choice, seed, policy_productions()) {}

  // Custom policy; tests use this to run deliberately broken rule sets.
  DialogueManager(std::shared_ptr<const pack::ContentPack> pack, ProfileChoice choice, std::uint64_t seed,
                  const std::vector<kernel::Production>& policy)
      : pack_(std::move(pack)), kernel_(seed, detail::activation_params(pack_->kernel)) {
    state_ = init_state(*pack_, choice, kernel_.rng());
    detail::load_declarative_memory(kernel_, *pack_);
    for (const auto& p : policy) kernel_.add_production(p);
  }

  const InformationState& state() const { return state_; }
  const pack::ContentPack& pack() const { return *pack_; }
  const std::shared_ptr<const pack::ContentPack>& pack_ptr() const { return pack_; }
  const kernel::KernelState& kernel() const { return kernel_; }

  bool complete() const { return is_complete(state_); }
  // True when the agent owes an act in the current scene.
  bool act_due() const { return any_unsatisfied(state_) || scripted_step_pending(state_); }
  const std::optional<std::string>& pending_question() const { return state_.pending_question; }

  // Selects, records and returns the next agent act.
  DialogueAct select_act() {
    refresh_needs(state_);
    if (!any_unsatisfied(state_) && !scripted_step_pending(state_))
      throw DialogueFault("select_act called with no unsatisfied need in scene " + state_.current_scene);
    if (state_.pending_question) throw DialogueFault("select_act called while a question is pending");

    load_buffers();
    using kernel::BufferName;
    for (int cycle = 0; cycle < kMaxCycles; ++cycle) {
      kernel::StepResult r = kernel::step(kernel_);
      if (r.quiescent()) throw selection_fault();
      for (const auto& d : r.directives) {
        if (d.name == "choose-technique") {
          PersuasiveTechnique t = choose_technique(kernel_.rng(), pack_->techniques);
          kernel::Chunk* goal = kernel_.buffer(BufferName::goal).get();
          goal->slots["technique"] = std::string(to_string(t));
          goal->slots["step"] = std::string("argue");
        } else if (d.name == "act") {
          DialogueAct act = build_act(d);
          record_act(state_, *pack_, act);
          return act;
        }
      }
    }
    throw DialogueFault("act selection did not converge in scene " + state_.current_scene);
  }

  void apply_user_reply(std::string_view option_id) {
    dialogue::apply_user_reply(state_, *pack_, option_id);
    const auto& reply = std::get<UserReply>(state_.history.back());
    kernel_.buffer(kernel::BufferName::aural)
        .set(kernel::Chunk{"heard", "heard", {{"question", reply.question}, {"option", reply.option}}, 0.0});
  }

  void advance_scene() { dialogue::advance_scene(state_, *pack_); }

  // Runs the agent until it needs user input or the session ends. Returns
  // the acts emitted, in order; the last one is a question unless complete.
  std::vector<DialogueAct> run_until_input() {
    std::vector<DialogueAct> acts;
    while (!complete() && !state_.pending_question) {
      if (act_due()) acts.push_back(select_act());
      else advance_scene();
    }
    return acts;
  }

 private:
  static constexpr int kMaxCycles = 16;

  void load_buffers() {
    using kernel::BufferName;
    using kernel::Chunk;
    Chunk goal{"goal", "dialogue-goal", {}, 0.0};
    goal.slots["step"] = std::string("select");
    goal.slots["scene"] = kernel::ChunkRef{pack::scene_chunk_id(state_.current_scene)};
    goal.slots["phase"] = std::string(state_.phase == ScenePhase::opening   ? "opening"
                                      : state_.phase == ScenePhase::closing ? "closing"
                                                                            : "topic");
    for (NeedKind k : kNeedPriority)
      goal.slots[std::string(to_string(k))] = std::string(state_.unsatisfied(k) ? "unsatisfied" : "satisfied");
    goal.slots["farewell"] = std::string(scripted_step_pending(state_) ? "pending" : "done");
    goal.slots["technique"] = std::string("none");
    goal.slots["function"] = std::string("none");
    goal.slots["fulfils"] = std::string("none");
    kernel_.buffer(BufferName::goal).set(std::move(goal));

    if (const TopicState* t = state_.topic_state()) {
      kernel_.buffer(BufferName::imaginal)
          .set(Chunk{"imaginal",
                     "topic-state",
                     {{"topic", t->topic},
                      {"knowledge", std::string(to_string(t->knowledge))},
                      {"intention", std::string(to_string(t->intention))},
                      {"knowledge_answered", std::string(detail::flag(t->knowledge_answered))},
                      {"exception", std::string(detail::flag(t->exception_issued))}},
                     0.0});
    } else {
      kernel_.buffer(BufferName::imaginal).clear();
    }
    kernel_.buffer(BufferName::retrieval).clear();
  }

  DialogueFault selection_fault() const {
    const kernel::Chunk* goal = kernel_.buffer(kernel::BufferName::goal).get();
    std::string fn = goal && goal->symbol("function") ? *goal->symbol("function") : "?";
    std::string tech = goal && goal->symbol("technique") ? *goal->symbol("technique") : "none";
    if (kernel_.retrieval_failed()) {
      return DialogueFault("scene " + state_.current_scene + ": no template for " + fn +
                           (tech == "none" ? "" : ":" + tech));
    }
    return DialogueFault("no production applies in scene " + state_.current_scene);
  }

  DialogueAct build_act(const kernel::Directive& d) const {
    auto sym = [&](const char* key) -> std::string {
      const std::string* v = d.symbol(key);
      if (v == nullptr) throw DialogueFault(std::string("act directive without ") + key);
      return *v;
    };
    DialogueAct act;
    auto fn = parse<CommunicativeFunction>(sym("function"));
    auto need = parse<NeedKind>(sym("fulfils"));
    if (!fn || !need) throw DialogueFault("malformed act directive");
    act.function = *fn;
    act.fulfils = *need;
    act.scene = state_.current_scene;
    act.topic = state_.current_topic;
    if (auto t = parse<PersuasiveTechnique>(sym("technique"))) act.technique = *t;
    act.utterance = sym("text");
    if (act.function == CommunicativeFunction::question) {
      act.question = sym("question");
      auto ref = pack_->question(*act.question);
      if (!ref) throw DialogueFault("unknown question " + *act.question);
      for (const auto& o : ref->question->options) act.options.push_back(o.id);
    }
    return act;
  }

  std::shared_ptr<const pack::ContentPack> pack_;
  kernel::KernelState kernel_;
  InformationState state_;
};

}  // namespace cogdial::dialogue
