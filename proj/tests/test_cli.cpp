#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <string>

#include <algorithm>

#include <nlohmann/json.hpp>

#include "sdoc/digest.hpp"
#include "sdoc/selfdocs_gen.hpp"
#include "support/test_support.hpp"

using namespace sdoc;
using namespace sdoc::test;
using nlohmann::json;

namespace {

namespace fs = std::filesystem;

int run_cli(const std::string& args, const fs::path& log) {
  const std::string command =
      std::string(SDOC_CLI_PATH) + " " + args + " >> " + log.string() + " 2>&1";
  const int status = std::system(command.c_str());
  return WEXITSTATUS(status);
}

struct CliRun {
  fs::path workdir;
  fs::path log;
  std::string common;

  CliRun() {
    workdir = make_temp_dir("cli");
    log = workdir / "cli.log";
    const fs::path fixture = fixture_dir() / "e2e";
    common = "--backend replay --fixtures " + (fixture / "trace.jsonl").string() +
             " --workdir " + workdir.string() +
             " --model fixture-chat --embed-model fixture-embed" +
             " --transform-model fixture-transform --max-tokens 512 --parallelism 1";
  }

  std::string dataset(const std::string& task) const {
    return (fixture_dir() / "e2e" / (task + ".jsonl")).string();
  }
};

}  // namespace

TEST_CASE("the four pipeline stages run hermetically and idempotently") {
  CliRun cli;
  const std::string shots_args = " shots --dataset " + cli.dataset("opendomainqa") +
                                 " --task tqa --k 3 --m 2 --seed 1 --style CCU --out pool.json";
  const std::string generate_args = " generate --dataset " + cli.dataset("opendomainqa") +
                                    " --task tqa --pool pool.json --n 3 --seed 1 --store store";
  const std::string answer_args = " answer --dataset " + cli.dataset("opendomainqa") +
                                  " --task tqa --mix style --k 2 --n 3 --style CCU" +
                                  " --store store --out answers.jsonl";
  const std::string eval_args = " eval --dataset " + cli.dataset("opendomainqa") +
                                " --task tqa --answers answers.jsonl --label CCU" +
                                " --out results.json --csv results.csv";

  REQUIRE(run_cli(cli.common + shots_args, cli.log) == 0);
  REQUIRE(run_cli(cli.common + generate_args, cli.log) == 0);
  REQUIRE(run_cli(cli.common + answer_args, cli.log) == 0);
  REQUIRE(run_cli(cli.common + eval_args, cli.log) == 0);

  for (const char* name : {"pool.json", "answers.jsonl", "results.json", "results.csv"}) {
    CHECK_MESSAGE(fs::exists(cli.workdir / name), name);
  }
  CHECK(fs::exists(cli.workdir / "pool.json.manifest.json"));
  CHECK(fs::exists(cli.workdir / "store" / "manifest.json"));

  const std::string pool_digest = sha256_hex(read_text(cli.workdir / "pool.json"));
  const std::string answers_digest = sha256_hex(read_text(cli.workdir / "answers.jsonl"));
  const std::string results_digest = sha256_hex(read_text(cli.workdir / "results.json"));

  // replayed aggregate equals the recorded one
  const json expected = json::parse(read_text(fixture_dir() / "e2e" / "expected.json"));
  const json results = json::parse(read_text(cli.workdir / "results.json"));
  CHECK(results["rows"]["CCU"]["TQA"].get<double>() ==
        doctest::Approx(expected["opendomainqa"]["aggregate_percent"].get<double>()));

  // rerun every stage: warm cache, zero backend calls, identical bytes
  const fs::path rerun_log = cli.workdir / "rerun.log";
  REQUIRE(run_cli(cli.common + shots_args, rerun_log) == 0);
  REQUIRE(run_cli(cli.common + generate_args, rerun_log) == 0);
  REQUIRE(run_cli(cli.common + answer_args, rerun_log) == 0);
  REQUIRE(run_cli(cli.common + eval_args, rerun_log) == 0);

  CHECK(sha256_hex(read_text(cli.workdir / "pool.json")) == pool_digest);
  CHECK(sha256_hex(read_text(cli.workdir / "answers.jsonl")) == answers_digest);
  CHECK(sha256_hex(read_text(cli.workdir / "results.json")) == results_digest);

  const std::string rerun_output = read_text(rerun_log);
  CHECK(rerun_output.find("chat_calls=0 embed_calls=0") != std::string::npos);
  CHECK(rerun_output.find("backend=replay") != std::string::npos);
}

TEST_CASE("answering without context replays the no-rag prompts") {
  CliRun cli;
  REQUIRE(run_cli(cli.common + " answer --dataset " + cli.dataset("opendomainqa") +
                      " --task tqa --mix none --out norag.jsonl",
                  cli.log) == 0);
  REQUIRE(run_cli(cli.common + " eval --dataset " + cli.dataset("opendomainqa") +
                      " --task tqa --answers norag.jsonl --label norag --out norag.json",
                  cli.log) == 0);
  const json expected = json::parse(read_text(fixture_dir() / "e2e" / "expected.json"));
  const json results = json::parse(read_text(cli.workdir / "norag.json"));
  CHECK(results["rows"]["norag"]["TQA"].get<double>() ==
        doctest::Approx(expected["opendomainqa"]["aggregate_percent_norag"].get<double>()));
}

TEST_CASE("validation failures exit with code 2") {
  CliRun cli;
  // answers file that misses every query
  write_text(cli.workdir / "empty.jsonl", "");
  const int code = run_cli(cli.common + " eval --dataset " + cli.dataset("opendomainqa") +
                               " --task tqa --answers empty.jsonl --out r.json",
                           cli.log);
  CHECK(code == 2);

  CHECK(run_cli(cli.common + " eval --task tqa --answers x --out r.json", cli.log) == 2);
  CHECK(run_cli(cli.common + " answer --dataset " + cli.dataset("opendomainqa") +
                    " --task tqa --mix bogus",
                cli.log) == 2);
}

TEST_CASE("report assembles tables and dimension aggregates from results files") {
  CliRun cli;
  // synthesize eight per-type results files
  std::string results_args;
  int value = 0;
  for (const char* code : {"AFS", "AFU", "ACS", "ACU", "CFS", "CFU", "CCS", "CCU"}) {
    json rows = json::object();
    rows[code] = json{{"TQA", 50.0 + value}, {"HotpotQA", 40.0 + value},
                      {"FEVER", 80.0 + value}, {"ELI5", 20.0 + value}};
    ++value;
    const fs::path path = cli.workdir / (std::string(code) + ".json");
    write_text(path, json{{"rows", rows}, {"manifests", json::array()}}.dump());
    results_args += " --results " + path.string();
  }
  REQUIRE(run_cli(cli.common + " report" + results_args +
                      " --out merged.json --csv table.csv --dimensions",
                  cli.log) == 0);
  CHECK(fs::exists(cli.workdir / "merged.json"));
  const std::string csv = read_text(cli.workdir / "table.csv");
  CHECK(csv.find("AFS,50.0,40.0,80.0,20.0,47.5") != std::string::npos);
  CHECK(fs::exists(cli.workdir / "table.csv.dimensions.csv"));
}

TEST_CASE("audit exports a csv with blank judgement columns") {
  CliRun cli;
  // synthesize a store holding two docs per type
  RunManifest manifest;
  manifest.set("stage", std::string("generate"));
  DocStore store = DocStore::create(cli.workdir / "astore", manifest);
  for (SflType type : all_sfl_types()) {
    for (int i = 0; i < 2; ++i) {
      Document doc;
      doc.id = sfl_code(type) + std::to_string(i);
      doc.text = "doc body " + doc.id;
      doc.doc_type = DocType::sfl(type);
      doc.source = DocSource::SelfGenerated;
      doc.origin_query_id = "q" + std::to_string(i);
      doc.replicate_index = 0;
      store.put(doc, "m", "p");
    }
  }
  REQUIRE(run_cli(cli.common + " audit --store astore --per-type 2 --seed 4 --out audit.csv",
                  cli.log) == 0);
  const std::string csv = read_text(cli.workdir / "audit.csv");
  CHECK(csv.find("doc_id,type_code,text,interpersonal_ok,ideational_ok,textual_ok") == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 17);  // header + 16 rows

  // undersupplied stores fail with a validation exit
  CHECK(run_cli(cli.common + " audit --store astore --per-type 3 --out a2.csv", cli.log) == 2);
}
