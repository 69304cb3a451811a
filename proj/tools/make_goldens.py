#!/usr/bin/env python3
"""Writes the prompt golden files from hand-transcribed reference prompts.

The templates below are typed in by hand, with only these
mechanical edits: the "..." / "…" elisions are expanded to all ten options,
LaTeX line breaks become "\\n", and trailing LaTeX spaces after a caption are
dropped. Nothing here imports or calls the C++ renderer.

    python3 tools/make_goldens.py tests/golden
"""
import json
import sys
from pathlib import Path

LETTERS = "ABCDEFGHIJ"

GREEDY = ["<caption for image %d>" % (n + 1) for n in range(10)]
BEAM = ["<captions for image %d>" % (n + 1) for n in range(10)]

# Enhancement prompts, one row per template.
ENHANCEMENT = {
    "exact": "<phrase> ",
    "what_is": "What is <phrase>?",
    "describe": "Describe <phrase>.",
    "meaning_of": "What is the meaning of <phrase>?",
}


def inline(options):
    return " ".join("(%s) %s" % (LETTERS[i], o) for i, o in enumerate(options))


def lines(options):
    return "\n".join("(%s) %s" % (LETTERS[i], o) for i, o in enumerate(options))


CHOOSE_FORMAT = (
    "\n\nUse the following format:\n"
    "Question: What image do you choose?\n"
    "Thought: you should always think about what you choose.\n"
    "Result: the result of your thought.\n"
)

QA = {
    "think_greedy": "Q: What is the most appropriate caption for the <context>?\n"
                    "Answer choices: " + inline(GREEDY) + "\n"
                    "A: Let’s think step by step. ",
    "think_beam": "Q: What is the most appropriate group of captions for the <context>?\n"
                  "Answer choices: " + inline(BEAM) + "\n"
                  "A: Let’s think step by step. ",
    "cot": "<think_prompt> <response of LLM with think prompt>\n"
           "Therefore, among A through J, the answer is",
    "no_cot_greedy": "Q: What is the most appropriate caption for the <context>?\n"
                     "Answer choices: " + inline(GREEDY) + "\n"
                     "A: ",
    "no_cot_beam": "Q: What is the most appropriate group of captions for the <context>?\n"
                   "Answer choices: " + inline(BEAM) + "\n"
                   "A: ",
    # Options one per line, as the choose CoT rows lay them out.
    "choose_no_cot_greedy": "You have ten images, (A) to (J), which are given to you in the form of captions.\n"
                            + lines(GREEDY) + "\n"
                            "You should choose the image, and therefore the caption that could better represent the <phrase>.\n"
                            "What image do you choose?",
    "choose_no_cot_beam": "You have ten images, (A) to (J), which are given to you in the form of captions.\n"
                          + lines(BEAM) + "\n"
                          "You should choose the image, and therefore the set of captions that could better represent the <phrase>.\n"
                          "What image do you choose?",
    "choose_cot_greedy": "You have ten images, (A) to (J), which are given to you in the form of captions.\n"
                         + lines(GREEDY) + "\n"
                         "You should choose the image, and therefore the caption that could better represent the <phrase>."
                         + CHOOSE_FORMAT +
                         "Final Answer: the image that you choose.\n"
                         "\n"
                         "Begin!\n"
                         "Question: What image do you choose?",
    "choose_cot_beam": "You have ten images, (A) to (J), which are given to you in the form of a set of captions.\n"
                       + lines(BEAM) + "\n"
                       "You should choose the image, and therefore the set of captions that could better represent the <phrase>."
                       + CHOOSE_FORMAT +
                       "Final Answer: the image that you choose\n"
                       "\n"
                       "Begin!\n"
                       "Question: What image do you choose?",
}

# Five solved examples and the query of the "football goal" few-shot prompt.
FIVE_SHOT = [
    ("vanillin compound", [
        "a fossil fossil with a spiral pattern", "a blue plate topped with pastries and a piece of bread.",
        "the bones of the foot are very thin.", "a spoon full of sugar on a table.",
        "the tower of the building is made of brick.", "a pair of sunglasses with a white background.",
        "a close up of a plant with a yellow flower.", "turmeric powder in a bowl",
        "a man with glasses and a tie sitting at a desk.", "a close up of a bike tire with a yellow tag on it."], "D"),
    ("nankeen fabric", [
        "a close up of a white quilt with a tree design on it.", "a man in a blue jacket and tan pants holding a sword.",
        "a collection of brass trombones", "a close up of a green plant", "a pine tree in the forest",
        "a row of mannequins in black dresses.", "two boys are standing in front of a red wall.",
        "two apples sitting next to each other on a white surface.", "a cartoon of two women in fancy hats and a mirror.",
        "a close up of a woman's face with a round ball on her forehead."], "B"),
    ("olmec indian", [
        "a large stone head in a garden", "a woman lighting a candle at a table",
        "[ unused0 ] is the new champion of the world", "a table full of food",
        "a group of women holding banners in a protest.", "a woman in a traditional dress stands in front of a tent.",
        "a man in a suit sitting in a chair.", "a clay pot with a small hole on top of it.",
        "a close up of three green leaves of a plant", "a fern in the forest near the lake"], "A"),
    ("charales order", [
        "a man walking past a store with a sign on it.", "the road to the island", "the art of the flower",
        "a black snake with white spots on it's body.", "a bird perched on a branch in a tree.",
        "a lion roaring in the wild.", "a man falling from a skateboard",
        "a large, thin, green plant with long thin leaves.", "a close up of a bush with blue berries",
        "a mouse in a hollow log."], "H"),
    ("skink lizard", [
        "two lizards on a log with a log in the background.", "a man walking past a store with a sign on it.",
        "the art of the flower", "a portrait of [ unused0 ], seated at a desk in front of a telescope.",
        "the car is a small car that can be found in the museum.", "a black snake with white spots on it's body.",
        "a bird perched on a branch in a tree.", "a close up of a bush with blue berries",
        "a close up of a metal container with a white label on it.", "a white door with a glass window"], "A"),
    ("football goal", [
        "a large stadium with a large field and a large structure.", "a woman wearing a blue ski mask",
        "[ unused0 ] of spain during the fifa world cup brazil group a match between spain and argentina at the "
        "estadio santiago bernabeu on june 25, 2010 in santiago, chile.",
        "a woman lifting a barbell in a competition.", "a man in a suit and tie looking at the camera.",
        "person is a player for football team", "[ unused0 ], the brazilian national team, in the 1960s.",
        "the empty stand at the old trafford stadium", "a soccer field with a goal post in the middle",
        "the emblem of the football club of the italian football club of the italian football club of the italian "
        "football club of the italian football club of the italian football club of the italian football club of the"],
     "I"),
]


def five_shot_prompt():
    out = ""
    for phrase, options, gold in FIVE_SHOT[:-1]:
        out += "Q: What is the most appropriate caption for the %s?\nAnswer choices: %s\nA: (%s) %s\n\n" % (
            phrase, inline(options), gold, options[LETTERS.index(gold)])
    phrase, options, _ = FIVE_SHOT[-1]
    out += "Q: What is the most appropriate caption for the %s?\nAnswer choices: %s\nA:" % (phrase, inline(options))
    return out


def main():
    root = Path(sys.argv[1])
    for name, text in ENHANCEMENT.items():
        (root / "enhancement").mkdir(parents=True, exist_ok=True)
        (root / "enhancement" / (name + ".txt")).write_bytes(text.encode())
    for name, text in QA.items():
        (root / "qa").mkdir(parents=True, exist_ok=True)
        (root / "qa" / (name + ".txt")).write_bytes(text.encode())
    (root / "few_shot").mkdir(parents=True, exist_ok=True)
    (root / "few_shot" / "five_shot.txt").write_bytes(five_shot_prompt().encode())
    (root / "few_shot" / "five_shot_instances.json").write_text(json.dumps(
        [{"phrase": p, "options": o, "gold": g} for p, o, g in FIVE_SHOT], indent=2, ensure_ascii=False) + "\n")


if __name__ == "__main__":
    main()
