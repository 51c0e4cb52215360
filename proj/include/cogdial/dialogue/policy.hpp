#pragma once

// The dialogue policy as kernel productions.
//
// The manager encodes the Information State into two chunks before each
// selection cycle:
//   goal      (dialogue-goal): step, scene ref, phase, one slot per need
//             (satisfied/unsatisfied), farewell, technique, function, fulfils
//   imaginal  (topic-state):   knowledge, knowledge_answered, exception
// Productions with higher priority encode the need order. A selection
// production requests the template chunk and moves the goal to `render`;
// `render` turns the retrieved template into an `act` directive. Argument
// selection first emits `choose-technique`, which the host answers by
// writing the drawn technique into the goal and setting step to `argue`.

#include <string_view>
#include <vector>

#include "cogdial/kernel/production.hpp"

namespace cogdial::dialogue {

inline constexpr std::string_view kPolicyProductions = R"json([
  {"name": "render", "priority": 100,
   "if": [{"buffer": "goal", "type": "dialogue-goal",
           "slots": {"step": "render", "function": "=f", "fulfils": "=n", "technique": "=t"}},
          {"buffer": "retrieval", "type": "template", "slots": {"text": "=text", "question": "=q"}}],
   "then": [{"set": "vocal", "type": "utterance", "slots": {"text": "=text"}},
            {"emit": "act", "args": {"function": "=f", "fulfils": "=n", "technique": "=t",
                                     "text": "=text", "question": "=q"}},
            {"modify": "goal", "slots": {"step": "done"}},
            {"clear": "retrieval"}]},

  {"name": "greet", "priority": 60,
   "if": [{"buffer": "goal", "type": "dialogue-goal",
           "slots": {"step": "select", "social_affiliation": "unsatisfied", "scene": "=s"}}],
   "then": [{"retrieve": {"type": "template",
                          "slots": {"function": "greeting_self_introduction", "scene": "=s", "technique": "none"}}},
            {"modify": "goal", "slots": {"step": "render", "function": "greeting_self_introduction",
                                         "fulfils": "social_affiliation", "technique": "none"}}]},

  {"name": "ask-knowledge", "priority": 50,
   "if": [{"buffer": "goal", "type": "dialogue-goal",
           "slots": {"step": "select", "competence": "unsatisfied", "scene": "=s"}},
          {"buffer": "imaginal", "type": "topic-state", "slots": {"knowledge_answered": "no"}}],
   "then": [{"retrieve": {"type": "template",
                          "slots": {"function": "question", "kind": "knowledge_probe", "scene": "=s"}}},
            {"modify": "goal", "slots": {"step": "render", "function": "question",
                                         "fulfils": "competence", "technique": "none"}}]},

  {"name": "inform", "priority": 50,
   "if": [{"buffer": "goal", "type": "dialogue-goal",
           "slots": {"step": "select", "competence": "unsatisfied", "scene": "=s"}},
          {"buffer": "imaginal", "type": "topic-state", "slots": {"knowledge_answered": "yes", "knowledge": "low"}}],
   "then": [{"retrieve": {"type": "template", "slots": {"function": "inform", "scene": "=s", "technique": "none"}}},
            {"modify": "goal", "slots": {"step": "render", "function": "inform",
                                         "fulfils": "competence", "technique": "none"}}]},

  {"name": "reinforce", "priority": 50,
   "if": [{"buffer": "goal", "type": "dialogue-goal",
           "slots": {"step": "select", "competence": "unsatisfied", "scene": "=s"}},
          {"buffer": "imaginal", "type": "topic-state",
           "slots": {"knowledge_answered": "yes", "knowledge": "medium"}}],
   "then": [{"retrieve": {"type": "template", "slots": {"function": "reinforce", "scene": "=s", "technique": "none"}}},
            {"modify": "goal", "slots": {"step": "render", "function": "reinforce",
                                         "fulfils": "competence", "technique": "none"}}]},

  {"name": "acknowledge-knowledge", "priority": 50,
   "if": [{"buffer": "goal", "type": "dialogue-goal",
           "slots": {"step": "select", "competence": "unsatisfied", "scene": "=s"}},
          {"buffer": "imaginal", "type": "topic-state", "slots": {"knowledge_answered": "yes", "knowledge": "high"}}],
   "then": [{"retrieve": {"type": "template",
                          "slots": {"function": "acknowledge", "scene": "=s", "technique": "none"}}},
            {"modify": "goal", "slots": {"step": "render", "function": "acknowledge",
                                         "fulfils": "competence", "technique": "none"}}]},

  {"name": "ask-intention", "priority": 40,
   "if": [{"buffer": "goal", "type": "dialogue-goal",
           "slots": {"step": "select", "intentional_assessment": "unsatisfied", "scene": "=s"}},
          {"buffer": "imaginal", "type": "topic-state", "slots": {"exception": "no"}}],
   "then": [{"retrieve": {"type": "template",
                          "slots": {"function": "question", "kind": "intention_probe", "scene": "=s"}}},
            {"modify": "goal", "slots": {"step": "render", "function": "question",
                                         "fulfils": "intentional_assessment", "technique": "none"}}]},

  {"name": "reassess-in-role", "priority": 40,
   "if": [{"buffer": "goal", "type": "dialogue-goal",
           "slots": {"step": "select", "intentional_assessment": "unsatisfied", "scene": "=s"}},
          {"buffer": "imaginal", "type": "topic-state", "slots": {"exception": "yes"}}],
   "then": [{"retrieve": {"type": "template",
                          "slots": {"function": "question", "kind": "role_reassessment", "scene": "=s"}}},
            {"modify": "goal", "slots": {"step": "render", "function": "question",
                                         "fulfils": "intentional_assessment", "technique": "none"}}]},

  {"name": "pick-technique", "priority": 30,
   "if": [{"buffer": "goal", "type": "dialogue-goal", "slots": {"step": "select", "argumentation": "unsatisfied"}}],
   "then": [{"emit": "choose-technique"},
            {"modify": "goal", "slots": {"step": "choosing"}}]},

  {"name": "argue", "priority": 30,
   "if": [{"buffer": "goal", "type": "dialogue-goal",
           "slots": {"step": "argue", "technique": "=t", "scene": "=s"}}],
   "then": [{"retrieve": {"type": "template", "slots": {"function": "argument", "scene": "=s", "technique": "=t"}}},
            {"modify": "goal", "slots": {"step": "render", "function": "argument", "fulfils": "argumentation"}}]},

  {"name": "raise-exception", "priority": 20,
   "if": [{"buffer": "goal", "type": "dialogue-goal",
           "slots": {"step": "select", "climax": "unsatisfied", "scene": "=s"}},
          {"buffer": "imaginal", "type": "topic-state", "slots": {"exception": "no"}}],
   "then": [{"retrieve": {"type": "template", "slots": {"function": "exception", "scene": "=s", "technique": "none"}}},
            {"modify": "goal", "slots": {"step": "render", "function": "exception",
                                         "fulfils": "climax", "technique": "none"}}]},

  {"name": "close-climax", "priority": 20,
   "if": [{"buffer": "goal", "type": "dialogue-goal",
           "slots": {"step": "select", "climax": "unsatisfied", "scene": "=s"}},
          {"buffer": "imaginal", "type": "topic-state", "slots": {"exception": "yes"}}],
   "then": [{"retrieve": {"type": "template",
                          "slots": {"function": "acknowledge", "scene": "=s", "technique": "none"}}},
            {"modify": "goal", "slots": {"step": "render", "function": "acknowledge",
                                         "fulfils": "climax", "technique": "none"}}]},

  {"name": "substitute", "priority": 10,
   "if": [{"buffer": "goal", "type": "dialogue-goal",
           "slots": {"step": "select", "open_mindedness": "unsatisfied", "scene": "=s"}}],
   "then": [{"retrieve": {"type": "template",
                          "slots": {"function": "substitution", "scene": "=s", "technique": "none"}}},
            {"modify": "goal", "slots": {"step": "render", "function": "substitution",
                                         "fulfils": "open_mindedness", "technique": "none"}}]},

  {"name": "farewell", "priority": 5,
   "if": [{"buffer": "goal", "type": "dialogue-goal",
           "slots": {"step": "select", "phase": "closing", "farewell": "pending", "scene": "=s"}}],
   "then": [{"retrieve": {"type": "template", "slots": {"function": "goodbye", "scene": "=s", "technique": "none"}}},
            {"modify": "goal", "slots": {"step": "render", "function": "goodbye",
                                         "fulfils": "social_affiliation", "technique": "none"}}]}
])json";

inline const std::vector<kernel::Production>& policy_productions() {
  static const std::vector<kernel::Production> productions =
      kernel::productions_from_json(nlohmann::json::parse(kPolicyProductions));
  return productions;
}

}  // namespace cogdial::dialogue
