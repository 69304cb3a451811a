// Writes the synthetic end-to-end fixture: 12 instances, image and phrase
// embeddings, greedy and beam captions, and an LLM cache warmed through the
// real gateway from a scripted stub. Output is meant to be committed.
//
//   make_fixture <out-dir>

#include "vwsd/caption_store.hpp"
#include "vwsd/commands.hpp"
#include "vwsd/config.hpp"
#include "vwsd/dataset.hpp"
#include "vwsd/io.hpp"
#include "vwsd/knowledge_enhancer.hpp"
#include "vwsd/qa.hpp"
#include "vwsd/text.hpp"
#include "vwsd/vector_store.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <random>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace vwsd;

namespace {

constexpr std::uint32_t kDim = 8;
constexpr const char* kImageModel = "clip-l";

struct Seed {
  const char* target;
  const char* phrase;
  const char* gold_caption;
};

const Seed kSeeds[] = {
    {"andromeda", "andromeda tree", "a shrub with clusters of small white flowers"},
    {"bank", "bank river", "a grassy slope beside flowing water"},
    {"mouse", "mouse computer", "a wireless pointing device on a desk"},
    {"bass", "bass fish", "a large green fish held by an angler"},
    {"crane", "crane bird", "a tall grey bird wading in a marsh"},
    {"jaguar", "jaguar car", "a silver sports car parked on a street"},
    {"bat", "bat cricket", "a wooden paddle leaning against stumps"},
    {"palm", "palm hand", "the open inside of a human hand"},
    {"seal", "seal stamp", "a wax stamp pressed onto an envelope"},
    {"mole", "mole skin", "a small dark spot on pale skin"},
    {"pitcher", "pitcher baseball", "a player throwing a ball from a mound"},
    {"pupil", "pupil eye", "a close up of the black centre of an eye"},
};
constexpr std::size_t kInstances = std::size(kSeeds);

const char* kDistractorCaptions[] = {
    "a city skyline at night",     "a plate of pasta with tomato sauce", "a red bicycle against a wall",
    "a snowy mountain peak",       "a child flying a kite",              "an old clock tower",
    "a bowl of fresh strawberries", "a sailboat on a calm lake",         "a cat sleeping on a sofa",
    "a crowded train station",     "a stack of old books",               "a field of sunflowers",
};

std::string image_id(std::size_t n) { return "image." + std::to_string(n) + ".jpg"; }

std::vector<float> gaussian(std::mt19937& rng) {
  std::normal_distribution<float> n(0.0f, 1.0f);
  std::vector<float> v(kDim);
  for (auto& x : v) x = n(rng);
  return v;
}

std::vector<float> mix(std::initializer_list<std::pair<float, const std::vector<float>*>> parts) {
  std::vector<float> out(kDim, 0.0f);
  for (const auto& [w, v] : parts)
    for (std::size_t d = 0; d < kDim; ++d) out[d] += w * (*v)[d];
  // Six decimals keep the committed JSONL readable.
  for (auto& x : out) x = static_cast<float>(std::round(x * 1e6) / 1e6);
  return out;
}

// Scripted replies keyed off the instance a prompt is about.
struct Script {
  std::vector<QaPrompt> greedy;
  std::vector<QaPrompt> beam;
  std::vector<VwsdInstance> instances;

  // The instance whose question appears last in the prompt is the query.
  std::size_t query_of(const std::string& prompt) const {
    std::size_t best = 0, best_pos = 0;
    bool found = false;
    for (const auto* prompts : {&greedy, &beam}) {
      for (std::size_t i = 0; i < prompts->size(); ++i) {
        const auto pos = prompt.rfind((*prompts)[i].question);
        if (pos != std::string::npos && (!found || pos > best_pos)) {
          found = true;
          best = i;
          best_pos = pos;
        }
      }
    }
    if (!found) throw std::runtime_error("fixture script has no reply for prompt:\n" + prompt);
    return best;
  }

  std::string reply(const std::string& prompt) const {
    for (std::size_t i = 0; i < instances.size(); ++i) {
      if (prompt == build_enhancement_prompt(instances[i].full_phrase, EnhancementTemplate::meaning_of)) {
        return "  A " + instances[i].full_phrase + " is the " + instances[i].target_word + " found with " +
               instances[i].context_word + ";\n it is " + kSeeds[i].gold_caption + ". ";
      }
    }
    const std::size_t i = query_of(prompt);
    const auto& inst = instances[i];
    const char gold = inst.gold_letter();
    const char wrong = gold == 'A' ? 'B' : 'A';
    const std::size_t wrong_pos = static_cast<std::size_t>(wrong - 'A');
    const auto& texts = greedy[i].option_texts;

    if (prompt.find(kCotAnswerCue) != std::string::npos) {
      return i == 2 ? std::string(" (") + wrong + ")." : std::string(" (") + gold + ").";
    }
    if (prompt.ends_with(kThinkCue)) {
      return "The " + inst.target_word + " here goes with " + inst.context_word + ", so the caption must show " +
             kSeeds[i].gold_caption + ".";
    }
    if (prompt.starts_with("You have ten images")) {
      if (i == 3) return "I choose image (" + std::string(1, wrong) + ").";
      return "I choose image (" + std::string(1, gold) + ") because it fits the " + inst.full_phrase + ".";
    }
    if (prompt.rfind("Q: ") != 0 && prompt.find("\n\nQ: ") != std::string::npos) {  // few-shot
      return i == 5 ? std::string(" (") + wrong + ") " + texts[wrong_pos]
                    : std::string(" (") + gold + ") " + texts[inst.gold_position()];
    }
    switch (i) {
      case 4: return std::string("(") + wrong + ") " + texts[wrong_pos];
      case 7: return "I cannot tell which caption fits best.";
      case 9: return std::string("The answer is (") + gold + ").";
      case 11: return texts[inst.gold_position()];
      default: return std::string("(") + gold + ") " + texts[inst.gold_position()];
    }
  }
};

void run_step(RunConfig config, std::initializer_list<std::pair<const char*, std::string>> settings,
              const std::shared_ptr<StubTransport>& stub, bool qa) {
  for (const auto& [k, v] : settings) apply_setting(config, k, v);
  const auto result = qa ? cmd_qa(config, stub) : cmd_enhance(config, stub);
  for (const auto& w : result.warnings) std::cerr << "warning: " << w << '\n';
  std::cerr << result.summary << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 2) {
    std::cerr << "usage: make_fixture <out-dir>\n";
    return 1;
  }
  const fs::path out = argv[1];
  fs::create_directories(out);
  fs::remove_all(out / "cache");

  std::mt19937 rng(20230501);
  const std::size_t image_count = kInstances * 3 + 2;
  std::vector<std::vector<float>> image_vecs;
  for (std::size_t n = 0; n < image_count; ++n) image_vecs.push_back(gaussian(rng));
  const std::size_t hub_a = kInstances * 3, hub_b = kInstances * 3 + 1;

  // Dataset: own gold + two own distractors + two hub images + five golds of other instances.
  std::vector<VwsdInstance> instances;
  for (std::size_t i = 0; i < kInstances; ++i) {
    VwsdInstance inst;
    inst.instance_id = instance_id_for_line(i);
    inst.target_word = kSeeds[i].target;
    inst.full_phrase = kSeeds[i].phrase;
    inst.context_word = derive_context(inst.target_word, inst.full_phrase);
    std::vector<std::size_t> ids = {i * 3, i * 3 + 1, i * 3 + 2, hub_a, hub_b};
    for (std::size_t k = 1; k <= 5; ++k) ids.push_back(((i + k) % kInstances) * 3);
    std::shuffle(ids.begin(), ids.end(), rng);
    for (auto n : ids) inst.candidate_ids.push_back(image_id(n));
    inst.gold_id = image_id(i * 3);
    instances.push_back(inst);
  }
  const Dataset dataset = make_dataset(instances);
  write_file_atomic(out / "data.tsv", serialize_data_tsv(dataset));
  write_file_atomic(out / "gold.txt", serialize_gold(dataset));

  EmbeddingStore images;
  for (std::size_t n = 0; n < image_count; ++n) {
    images.add({image_id(n), EmbeddingKind::image, kImageModel, kDim, mix({{1.0f, &image_vecs[n]}})});
  }
  write_file_atomic(out / "images.bin", serialize_embeddings_binary(images));

  // Captions: greedy for every image, beam sets of ten variations.
  std::string captions;
  for (std::size_t n = 0; n < image_count; ++n) {
    std::string base;
    if (n == hub_a) base = "a blurry photo of something";
    else if (n == hub_b) base = "a picture with several objects";
    else if (n % 3 == 0) base = kSeeds[n / 3].gold_caption;
    else base = kDistractorCaptions[(n + n / 3) % std::size(kDistractorCaptions)] + std::string(n % 3 == 2 ? " at dusk" : "");
    captions += serialize_caption_set({image_id(n), "git-l", CaptionStrategy::greedy, {base}});
    std::vector<std::string> beam;
    for (std::size_t b = 0; b < kBeamCaptionCount; ++b) beam.push_back(b == 0 ? base : base + " " + std::to_string(b));
    captions += serialize_caption_set({image_id(n), "git-l", CaptionStrategy::beam, beam});
  }
  write_file_atomic(out / "captions.jsonl", captions);

  write_file_atomic(out / "run.toml",
                    "# End-to-end fixture run; paths are relative to this file.\n"
                    "[data]\n"
                    "tsv = data.tsv\n"
                    "gold = gold.txt\n"
                    "captions = captions.jsonl\n"
                    "\n"
                    "[retrieval]\n"
                    "embeddings = images.bin,text.jsonl\n"
                    "measure = cosine\n"
                    "model = clip-l\n"
                    "\n"
                    "[penalty]\n"
                    "lambda = 1.0\n"
                    "\n"
                    "[enhance]\n"
                    "template = meaning_of\n"
                    "\n"
                    "[llm]\n"
                    "model = gpt-3.5-turbo\n"
                    "temperature = 0\n"
                    "max_tokens = 150\n"
                    "cache_dir = cache\n"
                    "\n"
                    "[qa]\n"
                    "captioner = git-l\n"
                    "strategy = greedy\n"
                    "embedding_model = clip-l\n"
                    "\n"
                    "[run]\n"
                    "jobs = 4\n");

  RunConfig base;
  apply_config_file(base, out / "run.toml");
  const fs::path scratch = fs::temp_directory_path() / "vwsd_make_fixture";
  fs::remove_all(scratch);

  Script script;
  script.instances = dataset.instances;
  const CaptionStore caption_store = load_captions(out / "captions.jsonl");
  for (const auto& inst : dataset.instances) {
    script.greedy.push_back(render_qa_prompt(inst, caption_store, QaTemplate::no_cot_greedy, "git-l"));
    script.beam.push_back(render_qa_prompt(inst, caption_store, QaTemplate::choose_no_cot_beam, "git-l"));
  }
  auto stub = std::make_shared<StubTransport>();
  stub->set_responder([&script](const std::string& prompt) { return script.reply(prompt); });

  // Enhancement first: the enhanced phrases need text embeddings of their own.
  run_step(base, {{"run.out_dir", (scratch / "enhance").string()}}, stub, false);
  const auto enhanced = parse_enhanced_jsonl(read_file(scratch / "enhance" / "enhanced.jsonl"));

  EmbeddingStore text;
  for (std::size_t i = 0; i < kInstances; ++i) {
    const auto& gold = image_vecs[i * 3];
    const auto& hub = image_vecs[hub_a];
    auto noise = gaussian(rng);
    // Plain phrases lean towards the hub image; the knowledge moves them to gold.
    const auto plain = mix({{0.55f, &gold}, {0.75f, &hub}, {0.45f, &noise}});
    const auto rich = mix({{1.0f, &gold}, {0.6f, &hub}, {0.3f, &noise}});
    text.add({text_embedding_key(dataset.instances[i].full_phrase, kImageModel), EmbeddingKind::text, kImageModel,
              kDim, plain});
    text.add({text_embedding_key(enhanced.at(i).enhanced, kImageModel), EmbeddingKind::text, kImageModel, kDim, rich});
  }
  write_file_atomic(out / "text.jsonl", serialize_embeddings_jsonl(text));

  apply_config_file(base, out / "run.toml");
  run_step(base, {{"qa.template", "no_cot"}, {"run.out_dir", (scratch / "qa_zero").string()}}, stub, true);
  run_step(base, {{"qa.template", "cot"}, {"run.out_dir", (scratch / "qa_cot").string()}}, stub, true);
  run_step(base,
           {{"qa.template", "no_cot"}, {"qa.shots", "3"}, {"qa.selection", "random"}, {"qa.seed", "7"},
            {"run.out_dir", (scratch / "qa_few").string()}},
           stub, true);
  run_step(base,
           {{"qa.template", "no_cot"}, {"qa.shots", "2"}, {"qa.selection", "top"},
            {"run.out_dir", (scratch / "qa_top").string()}},
           stub, true);
  run_step(base,
           {{"qa.template", "choose_no_cot"}, {"qa.strategy", "beam"}, {"run.out_dir", (scratch / "qa_choose").string()}},
           stub, true);

  fs::remove_all(scratch);
  std::cerr << "upstream calls: " << stub->call_count() << '\n';
  return 0;
}
