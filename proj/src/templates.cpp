// SPDX-License-Identifier: Apache-2.0
#include "avbench/templates.hpp"

#include <array>

namespace avbench::corpus {

namespace {

using Bank = std::array<std::string, kTemplatesPerTask>;

const Bank kStg = {
    "At what <time_token> does the person in <descriptor> begin speaking?",
    "When does the woman in the red dress start talking in the video?",
    "Identify the <time_token> at which the man on the left first begins to speak.",
    "Locate the moment the person in the blue shirt starts speaking.",
    "At which <time_token> does their speech initiation occur?",
    "Find the starting time of the speaker's voice for the person near the doorway.",
    "When is the first audible word from the person sitting on the right side of the table?",
    "Mark the <time_token> at which the person in the black hoodie begins their utterance.",
    "What is the earliest <time_token> at which this person starts speaking?",
    "Between which <time_token> values does the speaker's utterance begin?",
    "Give the <time_token> where the woman in the center first speaks.",
    "When does the speech associated with the man in the gray sweater start?",
    "Identify the first frame in time (as <time_token>) when the speaker on the left starts talking.",
    "At what <time_token> does the dialogue contribution of the person in the white shirt begin?",
    "At what time does this speaker enter the conversation for the first time?",
    "When is their first vocalization heard after they appear on screen?",
    "What exact <time_token> corresponds to the onset of the speaker's voice?",
    "Find the <time_token> where this speaker's sentence begins in the timeline.",
    "At which <time_token> does the person standing at the counter start speaking?",
    "Determine the onset <time_token> of the utterance produced by the speaker in <descriptor>.",
};

const Bank kAvds = {
    "Summarize what the person in the <descriptor> says between <time_token> and <time_token>.",
    "What is the main idea expressed by the speaker wearing a red shirt at <time_token>? Please summarize",
    "Briefly summarize the key point the woman on the left conveys during <time_token>.",
    "What is the speaker in the blue jacket trying to communicate at <time_token>?",
    "Summarize the statement made by the man in the center into one sentence.",
    "What message is the person standing on the right conveying at <time_token>?",
    "Describe what the highlighted individual talks about during the segment starting at <time_token>.",
    "Provide a brief summary of the response given by the seated person at <time_token>.",
    "Rephrase the speaker's comment between <time_token> and <time_token> concisely.",
    "What conclusion does the person in the black hoodie present during this segment?",
    "In a few words, describe what the speaker with glasses emphasizes at <time_token>.",
    "What information does the person in <outfit descriptor> share at <time_token>?",
    "What does the dialogue turn from the woman on the right mainly focus on at <time_token>?",
    "Summarize the viewpoint expressed by the man in the gray shirt in this part.",
    "What does the person near the doorway explain during the segment starting at <time_token>?",
    "Which topic does the speaker in the red dress address between <time_token> and <time_token>?",
    "Summarize the line spoken by the person on the left couch at <time_token>.",
    "What is the essence of the statement made by the speaker standing at the table?",
    "Give a short paraphrase of what the person in the blue sweater says at <time_token>.",
    "Summarize the main point communicated by the speaker facing the camera.",
};

const Bank kAvsa = {
    "Who is speaking during the audio segment at <time_token>?",
    "Match the utterance at <time_token> to the correct person in the scene.",
    "Which individual is producing the speech at <time_token>?",
    "Identify who is talking using lip movement and voice cues at <time_token>.",
    "Who is talking while others remain silent at <time_token>?",
    "Which person corresponds to the audio clip starting at <time_token>?",
    "Who is the active speaker when the man in the red shirt moves his lips at <time_token>?",
    "Whose voice do we hear when the woman seated on the left is shown at <time_token>?",
    "Based on audio-visual cues, who is speaking while the man in the blue jacket appears at <time_token>?",
    "Which on-screen person is talking during the segment at <time_token>?",
    "Whose lip motion aligns with the spoken sentence at <time_token>?",
    "Identify the speaker when the right-side participant is visible at <time_token>.",
    "Which speaker's voice corresponds to the utterance at <time_token>?",
    "Which person produces the spoken line heard at <time_token>?",
    "Who is responsible for the highlighted phrase at <time_token>?",
    "Who is delivering the dialogue while the person in the black jacket is centered at <time_token>?",
    "Which person should be attributed as the speaker of the sentence aligned with the lip motion at <time_token>?",
    "Whose mouth movement matches the audio when the left side of the table is shown at <time_token>?",
    "Who is the speaker when the person in the white shirt appears at <time_token>?",
    "Who produces the spoken line associated with the audio segment at <time_token>?",
};

const Bank kNsp = {
    "Based on the interaction up to <time_token>, who is most likely to speak next?",
    "Who seems prepared to reply following the segment ending at <time_token>?",
    "Which individual is most likely to take the next turn in the conversation?",
    "Predict the next speaker among the on-screen participants.",
    "Who appears ready to answer the question asked at <time_token>?",
    "Which person is positioned to speak next, given their posture and gaze?",
    "Whose body language suggests they are about to answer after <time_token>?",
    "Considering the conversation flow, who is expected to continue the dialogue?",
    "Who on the left side of the frame seems ready to speak next?",
    "Which person on the right side of the table will likely speak after the current turn?",
    "Who follows up the conversation after the speaker in the red shirt finishes at <time_token>?",
    "Using gaze direction and facial expressions at <time_token>, who is likely to speak next?",
    "Which person will likely contribute the next line following <time_token>?",
    "Which participant seated on the couch is expected to speak next?",
    "From the pattern of turn-taking up to <time_token>, who takes the next turn?",
    "Who seems about to interject when the camera shows the group at <time_token>?",
    "Which character is cueing up the next utterance, for example by leaning forward or opening their mouth?",
    "Whose gestures indicate that they are preparing to speak next?",
    "Who resumes the conversation after the short pause at <time_token>?",
    "Who logically continues the dialogue when the question is directed towards the person in the blue sweater at <time_token>?",
};

const Bank kSrid = {
    "Is the speaker at <time_token> the same person as the speaker at <time_token>?",
    "Does the voice in the segment at <time_token> match the voice at <time_token>?",
    "Are the speech segments at the two <time_token> values produced by the same individual?",
    "Is the person wearing a red shirt at <time_token> the same as the speaker at <time_token>?",
    "Compare the speaker at <time_token> with the speaker at <time_token>: are they the same person?",
    "Do the face and voice at <time_token> correspond to the same identity as at <time_token>?",
    "Are the appearances of the man on the left at the two <time_token> positions from the same person?",
    "Is the person in the blue jacket at <time_token> the same speaker who talks at <time_token>?",
    "Do the vocal patterns and facial cues at <time_token> and <time_token> indicate a single speaker identity?",
    "Is the speaker near the doorway at <time_token> the same as the speaker at <time_token>?",
    "Does the speaker at <time_token> match the person in the striped shirt speaking at <time_token>?",
    "Are the speakers across the segments at <time_token> and <time_token> the same individual?",
    "Is the woman on the right speaking at <time_token> the same woman speaking at <time_token>?",
    "Are the vocal characteristics of the person in the black hoodie at <time_token> consistent with those at <time_token>?",
    "Does the person speaking at the table at <time_token> correspond to the same identity speaking on the couch at <time_token>?",
    "Is the speaker shown in close-up at <time_token> the same as the one talking in the wide shot at <time_token>?",
    "Does the voice of the person in the red dress at <time_token> match the voice at <time_token>?",
    "Do the face and audio cues of the man on the left at <time_token> indicate the same speaker identity as at <time_token>?",
    "Does the person shown near the window at <time_token> match the speaker filmed near the table at <time_token>?",
    "Are the dialogue segments at <time_token> and <time_token> delivered by the same speaker?",
};

const Bank kCsnl = {
    "How does the event at <time_token> connect to the reaction of the person in the red sweater at <time_token>?",
    "What detail shown at <time_token> explains why the woman on the left reacts at <time_token>?",
    "Why does the man in the blue shirt react the way he does at <time_token>, given what happened at <time_token>?",
    "Which event at <time_token> provides context for the final scene at <time_token>?",
    "What narrative link exists between the segment at <time_token> and the segment at <time_token>?",
    "How does the phone call or object mention at <time_token> relate to the reaction of the person standing on the right at <time_token>?",
    "What realization does the woman in the black jacket have at <time_token> based on something shown at <time_token>?",
    "Explain what triggers the behavior of the person sitting on the couch at <time_token>, using clues from <time_token>.",
    "Which event witnessed by the man on the far left at <time_token> leads to his action at <time_token>?",
    "How does the interaction at <time_token> influence the character's response at <time_token>?",
    "What causal link connects the scene at <time_token> with the outcome at <time_token>?",
    "Which visual clue shown at <time_token> helps explain the reaction of the woman in the red dress at <time_token>?",
    "How does the introduction of the <object> at <time_token> shape the character's interpretation at <time_token>?",
    "Which detail noticed by the man on the right side of the frame at <time_token> sets up his reaction at <time_token>?",
    "How does the sequence at <time_token> prepare the narrative moment occurring at <time_token>?",
    "What information revealed at <time_token> does the woman in the blue sweater realize at <time_token>?",
    "What continuity links the segment occurring at <time_token> with the one at <time_token>?",
    "How do the events at <time_token> and <time_token> form a complete narrative arc?",
    "What observation made by the person in the striped shirt at <time_token> is recalled at <time_token>?",
    "What chain of events starting from the scene at <time_token> leads to the reaction of the person near the doorway at <time_token>?",
};

const Bank& bank_for(Task task) {
  switch (task) {
    case Task::STG: return kStg;
    case Task::AVDS: return kAvds;
    case Task::AVSA: return kAvsa;
    case Task::NSP: return kNsp;
    case Task::SRID: return kSrid;
    case Task::CSNL: return kCsnl;
  }
  return kStg;
}

}  // namespace

const std::string& question_template(Task task, int index) {
  if (index < 1 || index > kTemplatesPerTask) {
    throw Error(ErrorCode::ConfigError,
                "template index out of range: " + std::to_string(index));
  }
  return bank_for(task)[static_cast<size_t>(index - 1)];
}

std::string render_question(Task task, const TemplateContext& context,
                            int template_index, uint64_t /*rng_seed*/) {
  const std::string& tpl = question_template(task, template_index);

  struct Cursor {
    const std::vector<std::string>* values;
    size_t next = 0;
  };
  Cursor time{&context.time_tokens};
  Cursor desc{&context.descriptors};
  Cursor outfit{&context.outfit_descriptors};
  Cursor object{&context.objects};

  auto take = [&](Cursor& c, const std::string& name) -> const std::string& {
    if (c.next >= c.values->size()) {
      throw Error(ErrorCode::UnboundPlaceholder, name);
    }
    return (*c.values)[c.next++];
  };

  std::string out;
  out.reserve(tpl.size() + 32);
  size_t i = 0;
  while (i < tpl.size()) {
    if (tpl[i] != '<') {
      out.push_back(tpl[i++]);
      continue;
    }
    size_t close = tpl.find('>', i);
    if (close == std::string::npos) {
      out.push_back(tpl[i++]);
      continue;
    }
    std::string name = tpl.substr(i + 1, close - i - 1);
    if (name == "time_token") {
      out += take(time, name);
    } else if (name == "descriptor") {
      out += take(desc, name);
    } else if (name == "outfit descriptor") {
      out += take(outfit, name);
    } else if (name == "object") {
      out += take(object, name);
    } else {
      throw Error(ErrorCode::UnboundPlaceholder, name);
    }
    i = close + 1;
  }
  return out;
}

}  // namespace avbench::corpus
