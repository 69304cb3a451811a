// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any failure.

#include "vwsd/dataset.hpp"
#include "vwsd/evaluator.hpp"
#include "vwsd/io.hpp"
#include "vwsd/knowledge_enhancer.hpp"
#include "vwsd/qa.hpp"
#include "vwsd/retrieval.hpp"
#include "vwsd/text.hpp"
#include "vwsd/vector_store.hpp"

#include "run_process.hpp"
#include "test_support.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>

using namespace vwsd;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

struct Failure {
  std::string detail;
};

void require(bool ok, const std::string& detail) {
  if (!ok) throw Failure{detail};
}

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// ---------------------------------------------------------------------------
// Synthetic retrieval batch

struct Batch {
  std::vector<VwsdInstance> instances;
  std::vector<std::vector<float>> phrases;
  EmbeddingStore images;
};

Batch synthetic_batch(std::size_t n, std::uint32_t dim, std::uint32_t seed) {
  Batch b;
  std::mt19937 rng(seed);
  std::normal_distribution<float> normal;
  const auto vec = [&] {
    std::vector<float> v(dim);
    for (auto& x : v) x = normal(rng);
    return v;
  };
  for (std::size_t i = 0; i < n; ++i) {
    VwsdInstance inst;
    inst.instance_id = instance_id_for_line(i);
    inst.target_word = "t";
    inst.context_word = "c";
    inst.full_phrase = "t c";
    std::vector<float> previous;
    for (std::size_t c = 0; c < kCandidateCount; ++c) {
      // Shared hub images across instances and repeated vectors force ties.
      std::string id = (c < 2 ? "hub" + std::to_string((i + c) % 7) : "img" + std::to_string(i) + "_" + std::to_string(c));
      inst.candidate_ids.push_back(id);
      if (b.images.find("m", id)) continue;
      std::vector<float> v = (!previous.empty() && rng() % 5 == 0) ? previous : vec();
      previous = v;
      b.images.add({id, EmbeddingKind::image, "m", dim, v});
    }
    inst.gold_id = inst.candidate_ids[rng() % kCandidateCount];
    b.instances.push_back(std::move(inst));
    b.phrases.push_back(vec());
  }
  return b;
}

// Brute force: score, then selection sort that prefers the earlier candidate on ties.
std::vector<std::string> oracle_order(const VwsdInstance& inst, const std::vector<float>& phrase,
                                      const EmbeddingStore& images, SimilarityMeasure m) {
  std::vector<std::pair<double, std::string>> scored;
  for (const auto& id : inst.candidate_ids) {
    const auto& v = images.at("m", id).vector;
    double a = 0, b = 0, c = 0;
    for (std::size_t k = 0; k < v.size(); ++k) {
      const double x = phrase[k], y = v[k];
      if (m == SimilarityMeasure::cosine) {
        a += x * y;
        b += x * x;
        c += y * y;
      } else if (m == SimilarityMeasure::euclidean) {
        a += (x - y) * (x - y);
      } else {
        a += std::fabs(x - y);
      }
    }
    const double s = m == SimilarityMeasure::cosine ? a / (std::sqrt(b) * std::sqrt(c))
                     : m == SimilarityMeasure::euclidean ? -std::sqrt(a)
                                                         : -a;
    scored.emplace_back(s, id);
  }
  std::vector<std::string> order;
  std::vector<bool> used(scored.size(), false);
  for (std::size_t round = 0; round < scored.size(); ++round) {
    std::size_t best = scored.size();
    for (std::size_t i = 0; i < scored.size(); ++i) {
      if (used[i]) continue;
      if (best == scored.size() || scored[i].first > scored[best].first) best = i;
    }
    used[best] = true;
    order.push_back(scored[best].second);
  }
  return order;
}

std::vector<std::string> order_of(const RankingResult& r) {
  std::vector<std::string> ids;
  for (const auto& c : r.ranked) ids.push_back(c.image_id);
  return ids;
}

constexpr SimilarityMeasure kMeasures[] = {SimilarityMeasure::cosine, SimilarityMeasure::euclidean,
                                           SimilarityMeasure::manhattan};

void ranking_oracle() {
  const auto start = Clock::now();
  const auto b = synthetic_batch(200, 8, 1);
  std::size_t ties = 0;
  for (auto m : kMeasures) {
    for (std::size_t i = 0; i < b.instances.size(); ++i) {
      const auto r = rank_candidates(b.instances[i], "t c", b.phrases[i], "m", b.images, m, nullptr);
      require(order_of(r) == oracle_order(b.instances[i], b.phrases[i], b.images, m),
              "order differs for instance " + b.instances[i].instance_id + " under " + std::string(to_string(m)));
      for (std::size_t k = 1; k < r.ranked.size(); ++k) ties += r.ranked[k].final_score == r.ranked[k - 1].final_score;
    }
  }
  require(ties > 0, "batch produced no ties to exercise the tie rule");
  const double s = seconds_since(start);
  require(s < 5.0, "took " + std::to_string(s) + " s");
}

void score_identity() {
  const auto b = synthetic_batch(200, 8, 2);
  for (auto m : kMeasures) {
    std::vector<RankingResult> plain;
    for (std::size_t i = 0; i < b.instances.size(); ++i)
      plain.push_back(rank_candidates(b.instances[i], "t c", b.phrases[i], "m", b.images, m, nullptr));
    const auto table = compute_penalty(plain, 1.0);
    for (std::size_t i = 0; i < b.instances.size(); ++i) {
      const auto r = rank_candidates(b.instances[i], "t c", b.phrases[i], "m", b.images, m, &table);
      for (const auto& c : r.ranked) {
        require(std::fabs(c.final_score - (c.raw_sim - table.penalty_for(c.image_id))) <= 1e-9,
                "identity broken for " + c.image_id);
      }
    }
  }
}

void uniform_penalty_invariance() {
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0), c01(0.0, 1.0);
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<std::string> ids;
    std::vector<double> sims;
    PenaltyTable base, shifted;
    const double c = c01(rng);
    for (int i = 0; i < 10; ++i) {
      ids.push_back("c" + std::to_string(i));
      sims.push_back(u(rng));
      base.values[ids.back()] = 0.0;
      shifted.values[ids.back()] = c;
    }
    const auto a = rank_scored("q", "t", ids, sims, "c0", SimilarityMeasure::cosine, &base);
    const auto s = rank_scored("q", "t", ids, sims, "c0", SimilarityMeasure::cosine, &shifted);
    require(order_of(a) == order_of(s), "trial " + std::to_string(trial) + " changed order");
  }
}

void penalty_construction() {
  // Three phrases over images X, Y, Z; X is ranked first twice.
  const std::vector<std::string> ids = {"X", "Y", "Z"};
  const std::vector<std::vector<double>> sims = {{0.9, 0.5, 0.1}, {0.4, 0.8, 0.2}, {0.7, 0.1, 0.6}};
  std::vector<RankingResult> plain;
  for (std::size_t i = 0; i < sims.size(); ++i)
    plain.push_back(rank_scored("p" + std::to_string(i), "p", ids, sims[i], "X", SimilarityMeasure::cosine, nullptr));
  std::map<std::string, int> argmax;
  for (const auto& s : sims) ++argmax[ids[std::max_element(s.begin(), s.end()) - s.begin()]];
  for (double lambda : {1.0, 0.5, 2.0}) {
    const auto table = compute_penalty(plain, lambda);
    for (const auto& id : ids) {
      const double want = lambda * argmax[id] / 3.0;
      require(std::fabs(table.penalty_for(id) - want) <= 1e-12,
              "p(" + id + ") = " + std::to_string(table.penalty_for(id)) + " at lambda " + std::to_string(lambda));
    }
  }
  require(argmax["X"] == 2, "oracle: X should be top twice");

  // lambda = 0: penalised report equals the unpenalised one except for the config snapshot.
  const auto b = synthetic_batch(50, 8, 4);
  std::vector<RankingResult> base, zero;
  for (std::size_t i = 0; i < b.instances.size(); ++i)
    base.push_back(rank_candidates(b.instances[i], "t c", b.phrases[i], "m", b.images, SimilarityMeasure::cosine, nullptr));
  const auto table = compute_penalty(base, 0.0);
  for (std::size_t i = 0; i < b.instances.size(); ++i)
    zero.push_back(rank_candidates(b.instances[i], "t c", b.phrases[i], "m", b.images, SimilarityMeasure::cosine, &table));
  auto ra = score_rankings(base), rb = score_rankings(zero);
  require(emit_report(ra, ReportFormat::json) == emit_report(rb, ReportFormat::json), "lambda 0 report differs");
  for (auto& r : zero) r.penalized = false;
  require(serialize_rankings_jsonl(base) == serialize_rankings_jsonl(zero), "lambda 0 rankings differ");
}

void metric_oracle() {
  std::vector<RankingResult> rs;
  for (std::size_t r : {1, 1, 2, 5}) {
    RankingResult x;
    x.instance_id = instance_id_for_line(rs.size());
    x.gold_rank = r;
    rs.push_back(x);
  }
  const auto report = score_rankings(rs);
  require(report.accuracy_text() == "50.00" && report.mrr_text() == "67.50",
          "got " + report.accuracy_text() + " / " + report.mrr_text());
  std::mt19937 rng(5);
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<RankingResult> v(1 + rng() % 50);
    for (auto& x : v) x.gold_rank = 1 + rng() % 10;
    const auto r = score_rankings(v);
    require(r.mrr() >= r.accuracy(), "mrr < accuracy in trial " + std::to_string(trial));
    const double m = std::stod(r.mrr_text());
    require(m >= 10.0 && m <= 100.0, "MRR " + r.mrr_text() + " out of bounds");
  }
}

void parser_corpus() {
  const auto corpus = nlohmann::json::parse(read_file(vwsd::testing::golden_dir() / "parser_corpus.json"));
  require(corpus.at("cases").size() == 25, "corpus is not 25 cases");
  for (const auto& c : corpus.at("cases")) {
    std::vector<std::string> options;
    if (!c.at("options").is_null()) options = corpus.at("option_sets").at(c.at("options").get<std::string>()).get<std::vector<std::string>>();
    const auto raw = c.at("raw").get<std::string>();
    const auto got = parse_answer(raw, options).outcome();
    require(got == c.at("expected").get<std::string>(), "'" + raw.substr(0, 60) + "' -> " + got);
  }
  for (char l = 'A'; l <= 'J'; ++l) {
    const auto p = parse_answer(std::string("(") + l + ")");
    require(p.letter == l, std::string("round trip failed for ") + l);
  }
}

void template_fidelity() {
  const auto golden = vwsd::testing::golden_dir();
  for (auto t : kEnhancementTemplates) {
    const auto want = read_file(golden / "enhancement" / (std::string(to_string(t)) + ".txt"));
    require(build_enhancement_prompt("<phrase>", t) == want, "enhancement template " + std::string(to_string(t)));
  }
  std::vector<std::string> greedy, beam;
  for (int i = 1; i <= 10; ++i) {
    greedy.push_back("<caption for image " + std::to_string(i) + ">");
    beam.push_back("<captions for image " + std::to_string(i) + ">");
  }
  for (auto t : kQaTemplates) {
    const std::string name(to_string(t));
    const auto want = read_file(golden / "qa" / (name + ".txt"));
    std::string got;
    if (t == QaTemplate::cot) {
      got = render_cot_prompt("<think_prompt>", "<response of LLM with think prompt>");
    } else {
      const auto f = family_of(t);
      const char* slot = f == QaFamily::think || f == QaFamily::no_cot ? "<context>" : "<phrase>";
      got = render_qa_body(t, slot, strategy_of(t) == CaptionStrategy::beam ? beam : greedy);
    }
    require(got == want, "QA template " + name);
  }
}

// ---------------------------------------------------------------------------
// Few-shot

void few_shot_invariants() {
  std::mt19937 rng(6);
  std::normal_distribution<float> normal;
  std::vector<VwsdInstance> instances;
  EmbeddingStore phrases;
  for (std::size_t i = 0; i < 60; ++i) {
    VwsdInstance inst;
    inst.instance_id = instance_id_for_line(i);
    inst.target_word = "w" + std::to_string(i);
    inst.context_word = "x";
    inst.full_phrase = inst.target_word + " x";
    for (std::size_t c = 0; c < kCandidateCount; ++c) inst.candidate_ids.push_back("i" + std::to_string(i * 10 + c));
    inst.gold_id = inst.candidate_ids[i % 10];
    std::vector<float> v(8);
    for (auto& x : v) x = normal(rng);
    phrases.add({text_embedding_key(inst.full_phrase, "align"), EmbeddingKind::text, "align", 8, v});
    instances.push_back(std::move(inst));
  }
  const auto dataset = make_dataset(std::move(instances));
  const auto idx = [](const std::vector<InContextChoice>& cs) {
    std::vector<std::size_t> out;
    for (const auto& c : cs) out.push_back(c.index);
    return out;
  };
  for (int q = 0; q < 500; ++q) {
    const std::size_t query = rng() % dataset.size();
    const std::size_t k = 1 + rng() % 10;
    auto top = idx(select_in_context(query, dataset, phrases, {k, ShotSelection::top, 0, "align"}));
    const auto inv = idx(select_in_context(query, dataset, phrases, {k, ShotSelection::inverse_top, 0, "align"}));
    require(std::set(top.begin(), top.end()) == std::set(inv.begin(), inv.end()), "top and inverse-top sets differ");
    std::reverse(top.begin(), top.end());
    require(top == inv, "inverse-top is not the reversed top");
    const InContextConfig random{k, ShotSelection::random, static_cast<std::uint64_t>(q), "align"};
    const auto a = idx(select_in_context(query, dataset, phrases, random));
    require(a == idx(select_in_context(query, dataset, phrases, random)), "random selection not reproducible");
    require(std::find(a.begin(), a.end(), query) == a.end(), "query selected as its own example");
  }

  // Five solved questions, then the query.
  const auto j = nlohmann::json::parse(read_file(vwsd::testing::golden_dir() / "few_shot" / "five_shot_instances.json"));
  CaptionStore captions;
  std::vector<VwsdInstance> solved;
  for (std::size_t n = 0; n < j.size(); ++n) {
    const auto phrase = j[n].at("phrase").get<std::string>();
    const auto options = j[n].at("options").get<std::vector<std::string>>();
    VwsdInstance inst;
    inst.instance_id = instance_id_for_line(n);
    inst.full_phrase = phrase;
    inst.target_word = split(phrase, ' ')[1];
    inst.context_word = derive_context(inst.target_word, phrase);
    for (std::size_t o = 0; o < options.size(); ++o) {
      inst.candidate_ids.push_back("q" + std::to_string(n) + "." + std::to_string(o));
      captions.add({inst.candidate_ids.back(), "git-l", CaptionStrategy::greedy, {options[o]}});
    }
    inst.gold_id = inst.candidate_ids[static_cast<std::size_t>(j[n].at("gold").get<std::string>()[0] - 'A')];
    solved.push_back(std::move(inst));
  }
  std::vector<QaPrompt> prompts;
  for (const auto& inst : solved) prompts.push_back(render_qa_prompt(inst, captions, QaTemplate::no_cot_greedy, "git-l"));
  std::vector<FewShotExample> shots;
  for (std::size_t n = 0; n < 5; ++n)
    shots.push_back({prompts[n], solved[n].gold_letter(), prompts[n].option_texts[solved[n].gold_position()]});
  require(render_few_shot_prompt(shots, prompts[5]) ==
              read_file(vwsd::testing::golden_dir() / "few_shot" / "five_shot.txt"),
          "5-shot prompt differs from the golden");
}

// ---------------------------------------------------------------------------
// End-to-end offline replay through the CLI

void run_cli(const std::string& args) {
  using vwsd::testing::quoted;
  const auto cmd = quoted(vwsd::testing::cli_path().string()) + " " + args + " --offline --config " +
                   quoted((vwsd::testing::fixture_dir() / "run.toml").string());
  const auto r = vwsd::testing::run_process(cmd);
  require(r.exit_code == 0, "`vwsd " + args + "` exited " + std::to_string(r.exit_code) + ": " + r.output);
}

void replay_into(const fs::path& out) {
  const auto o = [&](const char* sub) { return vwsd::testing::quoted((out / sub).string()); };
  run_cli("enhance --out-dir " + o("enhance"));
  run_cli("retrieve --out-dir " + o("baseline"));
  run_cli("retrieve --penalty --out-dir " + o("penalty"));
  run_cli("retrieve --enhanced " + o("enhance/enhanced.jsonl") + " --out-dir " + o("enhanced"));
  run_cli("retrieve --enhanced " + o("enhance/enhanced.jsonl") + " --penalty --out-dir " + o("enhanced_penalty"));
  run_cli("qa --qa-template no_cot --out-dir " + o("qa_zero"));
  run_cli("qa --qa-template cot --out-dir " + o("qa_cot"));
  run_cli("qa --qa-template no_cot --shots 3 --selection random --seed 7 --out-dir " + o("qa_few"));
  run_cli("qa --qa-template no_cot --shots 2 --selection top --out-dir " + o("qa_top"));
  run_cli("qa --qa-template choose_no_cot --strategy beam --out-dir " + o("qa_choose"));
  run_cli("eval --rankings " + o("baseline/rankings.jsonl") + " --out-dir " + o("eval"));
  run_cli("report " + o("baseline/report.json") + " " + o("penalty/report.json") + " " + o("enhanced/report.json") +
          " " + o("enhanced_penalty/report.json") + " --out-dir " + o("compare"));
}

std::map<std::string, std::string> tree(const fs::path& root) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (e.is_regular_file()) files[fs::relative(e.path(), root).string()] = read_file(e.path());
  }
  return files;
}

void end_to_end_replay() {
  vwsd::testing::TempDir first, second;
  const auto start = Clock::now();
  replay_into(first.path());
  replay_into(second.path());
  const double s = seconds_since(start);

  const auto a = tree(first.path()), b = tree(second.path());
  require(a.size() >= 30, "only " + std::to_string(a.size()) + " output files");
  require(a.size() == b.size(), "runs wrote different file sets");
  for (const auto& [name, bytes] : a) {
    const auto it = b.find(name);
    require(it != b.end() && it->second == bytes, name + " differs between runs");
  }
  for (const char* kind : {"rankings.jsonl", "transcripts.jsonl", "report.json"}) {
    require(std::any_of(a.begin(), a.end(), [&](const auto& f) { return f.first.ends_with(kind); }),
            std::string("no ") + kind + " written");
  }

  const auto expected = nlohmann::json::parse(read_file(vwsd::testing::fixture_dir() / "expected.json"));
  for (const auto& [run, want] : expected.items()) {
    const auto report = nlohmann::json::parse(a.at(run + "/report.json"));
    require(report.at("metrics").at("accuracy") == want.at("accuracy") && report.at("metrics").at("mrr") == want.at("mrr"),
            run + " metrics differ from the fixture oracle");
  }
  require(s < 60.0, "took " + std::to_string(s) + " s");
}

}  // namespace

int main() {
  const std::pair<const char*, std::function<void()>> checks[] = {
      {"ranking oracle equivalence (200 instances, 3 measures, < 5 s)", ranking_oracle},
      {"final score identity with penalty (|final - (raw - p)| <= 1e-9)", score_identity},
      {"uniform penalty leaves ranking order unchanged (1000 trials)", uniform_penalty_invariance},
      {"penalty construction (3-phrase batch, lambda 0 reproduces baseline)", penalty_construction},
      {"metric oracle (1,1,2,5 -> 50.00/67.50; mrr >= acc; MRR bounds)", metric_oracle},
      {"answer parser corpus (25 cases) and letter round trip", parser_corpus},
      {"template fidelity (4 enhancement + 9 QA goldens)", template_fidelity},
      {"few-shot selection invariants and 5-shot golden prompt", few_shot_invariants},
      {"deterministic offline end-to-end replay (< 60 s)", end_to_end_replay},
  };
  int failed = 0;
  for (const auto& [name, check] : checks) {
    try {
      check();
      std::cout << "PASS " << name << '\n';
    } catch (const Failure& f) {
      ++failed;
      std::cout << "FAIL " << name << ": " << f.detail << '\n';
    } catch (const std::exception& e) {
      ++failed;
      std::cout << "FAIL " << name << ": " << e.what() << '\n';
    }
  }
  std::cout << (failed == 0 ? "all criteria passed" : std::to_string(failed) + " criteria failed") << '\n';
  return failed == 0 ? 0 : 1;
}
