#include <atomic>
#include <cstdlib>
#include <sstream>
#include <thread>

#include <gtest/gtest.h>
#include <httplib.h>
#include <json.hpp>

#include "app.h"
#include "test_support.h"

namespace termforge::cli {
namespace {

using nlohmann::json;
using testing_support::FixtureDir;
using testing_support::ReadText;
using testing_support::TempDir;
using testing_support::WriteText;

struct Result {
  int code;
  std::string out;
  std::string err;
  json doc() const { return json::parse(out); }
};

Result Call(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = Run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string Fixture(const std::string& name) { return (FixtureDir() / name).string(); }

TEST(Cli, UsageErrorsExitTwo) {
  EXPECT_EQ(Call({}).code, kExitUsage);
  EXPECT_EQ(Call({"frobnicate"}).code, kExitUsage);
  const Result r = Call({"evaluate", "--hyp", Fixture("e2e_mt.txt")});
  EXPECT_EQ(r.code, kExitUsage);
  EXPECT_NE(r.err.find("--ref"), std::string::npos);
  EXPECT_EQ(Call({"evaluate", "--hyp", "/nonexistent", "--ref", "/nonexistent"}).code, kExitUsage);
}

TEST(Cli, HelpIsSuccess) {
  const Result r = Call({"--help"});
  EXPECT_EQ(r.code, kExitOk);
  EXPECT_NE((r.out + r.err).find("substitute"), std::string::npos);
}

TEST(Cli, GlossaryValidateAndStats) {
  const Result v = Call({"glossary", "validate", "--in", Fixture("e2e_glossary.jsonl")});
  ASSERT_EQ(v.code, kExitOk) << v.err;
  EXPECT_EQ(v.doc()["valid"], true);
  EXPECT_EQ(v.doc()["entries"], 10);
  const Result s = Call({"glossary", "stats", "--in", Fixture("e2e_glossary.jsonl"), "--lang", "fr"});
  ASSERT_EQ(s.code, kExitOk) << s.err;
  EXPECT_EQ(s.doc()["n_terms"], 10);
}

TEST(Cli, GlossaryDomainErrorsExitOne) {
  TempDir dir("cli");
  WriteText(dir / "dup.jsonl",
            "{\"source_term\":\"a\",\"language\":\"fr\",\"translation\":\"x\"}\n"
            "{\"source_term\":\"a\",\"language\":\"fr\",\"translation\":\"y\"}\n");
  const Result r = Call({"glossary", "validate", "--in", (dir / "dup.jsonl").string()});
  EXPECT_EQ(r.code, kExitDomainError);
  EXPECT_NE(r.err.find("duplicate"), std::string::npos);
  const Result s = Call({"glossary", "stats", "--in", Fixture("e2e_glossary.jsonl"), "--lang", "ja"});
  EXPECT_EQ(s.code, kExitDomainError);
}

TEST(Cli, GlossaryMergePolicies) {
  TempDir dir("cli");
  WriteText(dir / "a.jsonl", "{\"source_term\":\"a\",\"language\":\"fr\",\"translation\":\"x\"}\n");
  WriteText(dir / "b.jsonl", "{\"source_term\":\"a\",\"language\":\"fr\",\"translation\":\"y\"}\n");
  const std::string a = (dir / "a.jsonl").string(), b = (dir / "b.jsonl").string();
  EXPECT_EQ(Call({"glossary", "merge", "--base", a, "--other", b, "--policy", "error_on_conflict"}).code,
            kExitDomainError);
  const Result r = Call({"glossary", "merge", "--base", a, "--other", b, "--policy", "prefer_other"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_NE(r.out.find("\"y\""), std::string::npos);
  EXPECT_NE(r.out.find("merged"), std::string::npos);
  const Result tsv = Call({"--format", "tsv", "glossary", "merge", "--base", a, "--other", b,
                           "--policy", "prefer_base"});
  EXPECT_EQ(tsv.out, "a\tfr\tx\tmerged\n");
}

TEST(Cli, MatchFindsTerms) {
  const Result r = Call({"match", "--in", Fixture("e2e_src.txt"), "--glossary",
                         Fixture("e2e_glossary.jsonl"), "--lang", "fr"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const json segs = r.doc()["segments"];
  EXPECT_EQ(segs.size(), 20u);
  EXPECT_EQ(segs[0]["matches"][0]["source_term"], "neural network");
  EXPECT_TRUE(segs[10]["matches"].empty());
}

TEST(Cli, EvaluateAndFormats) {
  const Result r = Call({"evaluate", "--hyp", Fixture("e2e_mt.txt"), "--ref", Fixture("e2e_mt.txt"),
                         "--lang", "fr"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_NEAR(r.doc()["bleu"].get<double>(), 100.0, 1e-9);
  EXPECT_EQ(r.doc()["ter"].get<double>(), 0.0);
  const Result tsv = Call({"--format", "tsv", "evaluate", "--hyp", Fixture("e2e_mt.txt"), "--ref",
                           Fixture("e2e_src.txt"), "--lang", "fr"});
  ASSERT_EQ(tsv.code, kExitOk);
  EXPECT_EQ(tsv.out.rfind("bleu\t", 0), 0u);
}

TEST(Cli, ConfigFileAndOverrides) {
  TempDir dir("cli");
  WriteText(dir / "cfg.json", R"({"target_lang": "fr", "metrics": {"char_order": 1}})");
  WriteText(dir / "h.txt", "abc\n");
  WriteText(dir / "r.txt", "abd\n");
  const std::string cfg = (dir / "cfg.json").string();
  const Result r = Call({"--config", cfg, "evaluate", "--hyp", (dir / "h.txt").string(), "--ref",
                         (dir / "r.txt").string(), "--word-order", "0"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_NEAR(r.doc()["chrf"].get<double>(), 200.0 / 3.0, 1e-9);
  const Result flag = Call({"--config", cfg, "evaluate", "--hyp", (dir / "h.txt").string(), "--ref",
                            (dir / "r.txt").string(), "--char-order", "6"});
  EXPECT_LT(flag.doc()["chrf"].get<double>(), 60.0);
  WriteText(dir / "bad.json", R"({"colour": "blue"})");
  EXPECT_EQ(Call({"--config", (dir / "bad.json").string(), "evaluate", "--hyp",
                  (dir / "h.txt").string(), "--ref", (dir / "r.txt").string(), "--lang", "fr"})
                .code,
            kExitDomainError);
}

TEST(Cli, OutFlagWritesFile) {
  TempDir dir("cli");
  const std::string path = (dir / "o.json").string();
  const Result r = Call({"--out", path, "glossary", "validate", "--in", Fixture("e2e_glossary.jsonl")});
  ASSERT_EQ(r.code, kExitOk);
  EXPECT_TRUE(r.out.empty());
  EXPECT_EQ(json::parse(ReadText(path))["entries"], 10);
}

TEST(Cli, AgreementTtestRarefy) {
  TempDir dir("cli");
  WriteText(dir / "k.csv", "a,b\n2,0\n0,2\n1,1\n");
  const Result k = Call({"agreement", "--table", (dir / "k.csv").string()});
  ASSERT_EQ(k.code, kExitOk) << k.err;
  EXPECT_NEAR(k.doc()["kappa"].get<double>(), 1.0 / 3.0, 1e-12);

  WriteText(dir / "a.txt", "2\n4\n");
  const Result t = Call({"ttest", "--a", (dir / "a.txt").string(), "--mu0", "1"});
  ASSERT_EQ(t.code, kExitOk) << t.err;
  EXPECT_NEAR(t.doc()["t_statistic"].get<double>(), 2.0, 1e-12);

  WriteText(dir / "p.jsonl", "[\"a\",\"b\"]\n{\"terms\":[\"b\",\"c\"]}\n[\"e\"]\n");
  WriteText(dir / "d.txt", "a\nb\nc\nd\n");
  const std::vector<std::string> base = {"rarefy", "--papers", (dir / "p.jsonl").string(),
                                         "--dictionary", (dir / "d.txt").string(),
                                         "--fractions", "0.6666666666666666,1"};
  auto ex = base;
  ex.push_back("--exhaustive");
  const Result e = Call(ex);
  ASSERT_EQ(e.code, kExitOk) << e.err;
  EXPECT_DOUBLE_EQ(e.doc()["points"][0]["mean_coverage"].get<double>(), 7.0 / 12.0);
  auto seeded = base;
  seeded.insert(seeded.end(), {"--seed", "7", "--samples", "25"});
  EXPECT_EQ(Call(seeded).out, Call(seeded).out);
}

TEST(Cli, DecodeDemo) {
  TempDir dir("cli");
  WriteText(dir / "t.json",
            R"({"vocab_size":3,"eos":2,"default":[0,0,5],"table":[{"prefix":[],"logits":[0.9,0.7,0]}]})");
  const std::string t = (dir / "t.json").string();
  const Result plain = Call({"decode-demo", "--table", t, "--max-len", "3"});
  ASSERT_EQ(plain.code, kExitOk) << plain.err;
  EXPECT_EQ(plain.doc()["greedy"], json::array({0}));
  const Result boosted = Call({"decode-demo", "--table", t, "--max-len", "3", "--boost", "1",
                               "--factor", "10/7"});
  EXPECT_EQ(boosted.doc()["greedy"], json::array({0}));
  EXPECT_EQ(boosted.doc()["greedy_boosted"], json::array({1}));
  const Result constrained = Call({"decode-demo", "--table", t, "--max-len", "3", "--constraint", "1"});
  ASSERT_EQ(constrained.code, kExitOk) << constrained.err;
  EXPECT_EQ(constrained.doc()["beam"]["tokens"], json::array({1}));
}

// Chat endpoint that answers every refine prompt with a fixed fenced reply
// and every select prompt with label 2.
class Endpoint {
 public:
  Endpoint() {
    server_.Post("/v1/chat/completions", [this](const httplib::Request& req, httplib::Response& res) {
      ++hits;
      const std::string prompt = json::parse(req.body)["messages"][0]["content"];
      const std::string answer =
          prompt.find("<terms>") != std::string::npos ? "```\nREFINED\n```" : "2";
      res.set_content(json{{"choices", {{{"message", {{"content", answer}}}}}}}.dump(),
                      "application/json");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
    setenv("TERMFORGE_CLI_TEST_KEY", "k", 1);
  }
  ~Endpoint() {
    server_.stop();
    thread_.join();
    unsetenv("TERMFORGE_CLI_TEST_KEY");
  }
  std::vector<std::string> Flags() const {
    return {"--base-url", "http://127.0.0.1:" + std::to_string(port_) + "/v1", "--model", "m",
            "--api-key-env", "TERMFORGE_CLI_TEST_KEY"};
  }
  std::atomic<int> hits{0};

 private:
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
};

TEST(Cli, RefineSkipsSegmentsWithoutTerms) {
  Endpoint ep;
  std::vector<std::string> args = {"refine", "--src", Fixture("e2e_src.txt"), "--tgt",
                                   Fixture("e2e_mt.txt"), "--glossary",
                                   Fixture("e2e_glossary.jsonl"), "--lang", "fr"};
  for (const auto& f : ep.Flags()) args.push_back(f);
  const Result r = Call(args);
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const json segs = r.doc()["segments"];
  EXPECT_EQ(ep.hits.load(), 18);
  EXPECT_EQ(segs[0]["refined"], "REFINED");
  EXPECT_EQ(segs[10]["refined"], segs[10]["initial"]);
}

TEST(Cli, RefineWithoutKeyIsDomainError) {
  unsetenv("TERMFORGE_CLI_MISSING_KEY");
  const Result r = Call({"refine", "--src", Fixture("e2e_src.txt"), "--tgt", Fixture("e2e_mt.txt"),
                         "--glossary", Fixture("e2e_glossary.jsonl"), "--lang", "fr",
                         "--base-url", "http://127.0.0.1:9/v1", "--model", "m", "--api-key-env",
                         "TERMFORGE_CLI_MISSING_KEY"});
  EXPECT_EQ(r.code, kExitDomainError);
}

TEST(Cli, SelectVotesBeforeAsking) {
  Endpoint ep;
  TempDir dir("cli");
  json majority = {{"term", "t"}, {"language", "fr"},
                   {"candidates", std::vector<std::string>(11, "x")}};
  std::vector<std::string> mixed;
  for (int i = 0; i < 11; ++i) mixed.push_back("c" + std::to_string(i));
  json split = {{"term", "u"}, {"language", "fr"}, {"candidates", mixed}};
  WriteText(dir / "c.jsonl", majority.dump() + "\n" + split.dump() + "\n");
  std::vector<std::string> args = {"select", "--in", (dir / "c.jsonl").string()};
  for (const auto& f : ep.Flags()) args.push_back(f);
  const Result r = Call(args);
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_EQ(ep.hits.load(), 1);
  EXPECT_EQ(r.doc()["results"][0]["source"], "vote");
  EXPECT_EQ(r.doc()["results"][1]["translation"], "c1");
  EXPECT_EQ(r.doc()["results"][1]["label"], 2);
}

TEST(Cli, PipelineToReport) {
  TempDir dir("cli");
  const std::string subs = (dir / "subs.json").string();
  const Result s = Call({"--out", subs, "substitute", "--src", Fixture("e2e_src.txt"), "--tgt",
                         Fixture("e2e_mt.txt"), "--glossary", Fixture("e2e_glossary.jsonl"),
                         "--lang", "fr", "--dump", Fixture("e2e_dump.json")});
  ASSERT_EQ(s.code, kExitOk) << s.err;
  const json doc = json::parse(ReadText(subs));
  std::size_t edits = 0;
  for (const auto& seg : doc["segments"]) edits += seg["edits"].size();
  EXPECT_GT(edits, 0u);
  const Result rep = Call({"report", "--src", Fixture("e2e_src.txt"), "--direct",
                           Fixture("e2e_mt.txt"), "--substitutions", subs});
  ASSERT_EQ(rep.code, kExitOk) << rep.err;
  EXPECT_EQ(testing_support::XmlProblems(rep.out), "");
  std::size_t marks = 0;
  for (std::size_t p = rep.out.find("<mark>"); p != std::string::npos; p = rep.out.find("<mark>", p + 1)) ++marks;
  EXPECT_EQ(marks, edits);
}

TEST(Cli, SubstituteRejectsMismatchedDump) {
  TempDir dir("cli");
  WriteText(dir / "one.txt", "only one line\n");
  const Result r = Call({"substitute", "--src", (dir / "one.txt").string(), "--tgt",
                         (dir / "one.txt").string(), "--glossary", Fixture("e2e_glossary.jsonl"),
                         "--lang", "fr", "--dump", Fixture("e2e_dump.json")});
  EXPECT_EQ(r.code, kExitDomainError);
}

}  // namespace
}  // namespace termforge::cli
