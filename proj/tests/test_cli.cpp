/*
 * Copyright 2026 The Atomcode Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *   http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cstdlib>
#include <fstream>

#include <json.hpp>

#include "atomcode/util.hpp"
#include "doctest.h"
#include "test_support.hpp"

using atomcode::read_file;
using nlohmann::json;
using testsupport::TempDir;

namespace {

struct CommandResult {
    int exit_code = -1;
    std::string out;
    std::string err;
};

/// Run the installed CLI binary inside `dir` with shell-ready arguments.
CommandResult run_cli(const TempDir& dir, const std::string& args) {
    const auto out_path = dir.file("cmd.out");
    const auto err_path = dir.file("cmd.err");
    const std::string command = "cd " + dir.path.string() + " && " + ATOMCODE_CLI_PATH + " " +
                                args + " 1>" + out_path.string() + " 2>" + err_path.string();
    const int status = std::system(command.c_str());

    CommandResult result;
    result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    result.out = read_file(out_path);
    result.err = read_file(err_path);
    std::filesystem::remove(out_path);
    std::filesystem::remove(err_path);
    return result;
}

void write_file(const TempDir& dir, const std::string& name, const std::string& text) {
    atomcode::atomic_write_file(dir.file(name), text);
}

constexpr const char* kInterview =
    "P01: We kept growing as a team.\n"
    "P02: I agree, every sprint taught us something.\n"
    "\n"
    "P01: The second week was harder.\n";

constexpr const char* kCodebook = R"({
  "construct": {"name": "Development", "definition": "Mentions of growth over time."},
  "indicators": ["references to change", "references to stages"],
  "output_schema": {"allowed_labels": ["Present", "Absent"], "count": true, "rationale": true}
})";

}  // namespace

TEST_CASE("the full workflow runs from raw text to a reliability report") {
    TempDir dir;
    write_file(dir, "interview.txt", kInterview);
    write_file(dir, "codebook.json", kCodebook);

    // segment
    auto result = run_cli(dir, "segment interview.txt --mode speaker -o segments.csv --json");
    REQUIRE_MESSAGE(result.exit_code == 0, result.err);
    CHECK(json::parse(result.out)["segments"] == 3);
    CHECK(std::filesystem::exists(dir.file("segments.csv")));

    // prompt build
    result = run_cli(dir, "prompt build codebook.json --library prompts --json");
    REQUIRE_MESSAGE(result.exit_code == 0, result.err);
    const auto built = json::parse(result.out);
    CHECK(built["name"] == "Development");
    CHECK(built["hash"].get<std::string>().size() == 64);

    // two mock passes
    for (const char* pass : {"pass1", "pass2"}) {
        result = run_cli(dir, std::string("run segments.csv --prompt Development "
                                          "--model mock:seed1 --out out:dev:") +
                                  pass + " --library prompts --quiet --json");
        REQUIRE_MESSAGE(result.exit_code == 0, result.err);
        const auto summary = json::parse(result.out);
        CHECK(summary["ok"] == 3);
        CHECK(summary["error"] == 0);
    }

    // extract the label from each pass
    for (const char* pass : {"pass1", "pass2"}) {
        result = run_cli(dir, std::string("extract segments.csv --col out:dev:") + pass +
                                  " --allowed Present --allowed Absent --count --json");
        REQUIRE_MESSAGE(result.exit_code == 0, result.err);
        CHECK(json::parse(result.out)["json"] == 3);
    }

    // irr over the extracted labels
    result = run_cli(dir, "irr segments.csv --col-a out:dev.label:pass1 "
                          "--col-b out:dev.label:pass2 --kind categorical --json");
    REQUIRE_MESSAGE(result.exit_code == 0, result.err);
    const auto report = json::parse(result.out);
    CHECK(report["kappa"] == 1.0);
    CHECK(report["percent_agreement"] == 1.0);
    CHECK(report["n"] == 3);

    // history shows both runs, newest first
    result = run_cli(dir, "history segments.csv --json");
    REQUIRE_MESSAGE(result.exit_code == 0, result.err);
    const auto history = json::parse(result.out);
    REQUIRE(history.size() == 2);
    CHECK(history[0]["output_column"] == "out:dev:pass2");
    CHECK(history[1]["output_column"] == "out:dev:pass1");
    CHECK(history[0]["model"] == "mock:seed1");
}

TEST_CASE("run emits JSON progress lines on standard error") {
    TempDir dir;
    write_file(dir, "interview.txt", kInterview);
    write_file(dir, "codebook.json", kCodebook);
    REQUIRE(run_cli(dir, "segment interview.txt --mode speaker -o t.csv").exit_code == 0);
    REQUIRE(run_cli(dir, "prompt build codebook.json --library prompts").exit_code == 0);

    const auto result = run_cli(dir, "run t.csv --prompt Development --model mock:seed1 "
                                     "--out out:dev:pass1 --library prompts");
    REQUIRE_MESSAGE(result.exit_code == 0, result.err);
    size_t lines = 0;
    std::istringstream err(result.err);
    for (std::string line; std::getline(err, line);) {
        if (line.empty()) continue;
        const auto event = json::parse(line);
        CHECK(event.contains("row"));
        CHECK(event.contains("status"));
        CHECK(event.contains("elapsed_ms"));
        ++lines;
    }
    CHECK(lines == 3);
}

TEST_CASE("exit codes distinguish config, auth, and partial failures") {
    TempDir dir;
    write_file(dir, "interview.txt", kInterview);
    write_file(dir, "codebook.json", kCodebook);
    REQUIRE(run_cli(dir, "segment interview.txt --mode speaker -o t.csv").exit_code == 0);
    REQUIRE(run_cli(dir, "prompt build codebook.json --library prompts").exit_code == 0);

    SUBCASE("missing input file is a config error") {
        const auto result = run_cli(dir, "segment nope.txt -o x.csv");
        CHECK(result.exit_code == 2);
        CHECK(result.err.find("nope.txt") != std::string::npos);
    }
    SUBCASE("unknown template is a config error") {
        const auto result = run_cli(dir, "run t.csv --prompt missing --model mock:s "
                                         "--out out:x:pass1 --library prompts");
        CHECK(result.exit_code == 2);
    }
    SUBCASE("bad output column grammar is a config error") {
        const auto result = run_cli(dir, "run t.csv --prompt Development --model mock:s "
                                         "--out results --library prompts");
        CHECK(result.exit_code == 2);
    }
    SUBCASE("missing api key variable is an auth error") {
        ::unsetenv("ATOMCODE_CLI_TEST_KEY");
        const auto result =
            run_cli(dir, "run t.csv --prompt Development --model openai:gpt-4o "
                         "--api-key-env ATOMCODE_CLI_TEST_KEY --out out:x:pass1 "
                         "--library prompts");
        CHECK(result.exit_code == 3);
        CHECK(result.err.find("ATOMCODE_CLI_TEST_KEY") != std::string::npos);
    }
    SUBCASE("a run with errored rows exits partial and resumes clean") {
        // Fixture mock with no entries: every row errors.
        write_file(dir, "replay.json", "{}");
        auto result = run_cli(dir, "run t.csv --prompt Development "
                                   "--model mock:fixture=replay.json --out out:fx:pass1 "
                                   "--library prompts --quiet --json");
        CHECK(result.exit_code == 1);
        const auto summary = json::parse(result.out);
        CHECK(summary["error"] == 3);
        const std::string session = summary["session_id"];

        // Switch the session's checkpoint to a provider that can answer, by
        // filling the fixture with the recorded prompt hashes.
        json replay;
        for (const auto& error : summary["errors"]) {
            const std::string message = error.get<std::string>();
            const std::string hash = message.substr(message.size() - 64);
            replay[hash] = "{\"label\": \"Present\", \"count\": 1}";
        }
        write_file(dir, "replay.json", replay.dump());

        result = run_cli(dir, "run t.csv --resume " + session + " --quiet --json");
        CHECK(result.exit_code == 0);
        CHECK(json::parse(result.out)["ok"] == 3);
        CHECK(json::parse(result.out)["session_id"] == session);
    }
    SUBCASE("resume rejects job-shape flags") {
        const auto result = run_cli(dir, "run t.csv --resume abc --model mock:s");
        CHECK(result.exit_code == 2);
        CHECK(result.err.find("--resume") != std::string::npos);
    }
}

TEST_CASE("no command output ever contains an api key value") {
    TempDir dir;
    const std::string canary = "sk-canary-do-not-print-8d61";
    ::setenv("ATOMCODE_CANARY_KEY", canary.c_str(), 1);
    write_file(dir, "interview.txt", kInterview);
    write_file(dir, "codebook.json", kCodebook);
    write_file(dir, "config.json",
               R"({"model": {"kind": "mock", "model_id": "seed1",)"
               R"( "api_key_env": "ATOMCODE_CANARY_KEY"}, "library": "prompts"})");

    const std::vector<std::string> commands = {
        "--config config.json --print-config",
        "segment interview.txt --mode speaker -o t.csv --json",
        "prompt build codebook.json --library prompts --json",
        "--config config.json run t.csv --prompt Development --out out:dev:pass1 --json",
        "--config config.json history t.csv --json",
    };
    for (const auto& command : commands) {
        CAPTURE(command);
        const auto result = run_cli(dir, command);
        REQUIRE_MESSAGE(result.exit_code == 0, result.err);
        CHECK(result.out.find(canary) == std::string::npos);
        CHECK(result.err.find(canary) == std::string::npos);
    }
    // The variable *name* is fair game and appears in --print-config.
    const auto printed = run_cli(dir, "--config config.json --print-config");
    CHECK(printed.out.find("ATOMCODE_CANARY_KEY") != std::string::npos);
    ::unsetenv("ATOMCODE_CANARY_KEY");
}

TEST_CASE("a config file supplies defaults and the ledger stores no secrets") {
    TempDir dir;
    write_file(dir, "interview.txt", kInterview);
    write_file(dir, "codebook.json", kCodebook);
    write_file(dir, "config.json",
               R"({"model": {"kind": "mock", "model_id": "from-config"},)"
               R"( "library": "prompts", "parallelism": 2})");
    REQUIRE(run_cli(dir, "segment interview.txt --mode whole -o t.csv").exit_code == 0);
    REQUIRE(run_cli(dir, "prompt build codebook.json --library prompts").exit_code == 0);

    const auto result = run_cli(
        dir, "--config config.json run t.csv --prompt Development --out out:dev:pass1 "
             "--quiet --json");
    REQUIRE_MESSAGE(result.exit_code == 0, result.err);
    CHECK(json::parse(result.out)["ok"] == 1);  // whole-file mode: one row

    const auto history = run_cli(dir, "history t.csv --model from-config --json");
    CHECK(json::parse(history.out).size() == 1);

    SUBCASE("a config file holding a raw api_key is rejected outright") {
        write_file(dir, "bad.json", R"({"model": {"api_key": "sk-oops"}})");
        const auto rejected = run_cli(dir, "--config bad.json --print-config");
        CHECK(rejected.exit_code == 2);
        CHECK(rejected.err.find("api_key_env") != std::string::npos);
        CHECK(rejected.err.find("sk-oops") == std::string::npos);
    }
}

TEST_CASE("tabulate combines two extracted score columns") {
    TempDir dir;
    write_file(dir, "t.csv",
               "doc_id,segment_index,data,out:dev.score:pass1,out:dev.score:pass2\n"
               "d1,0,a,4,4\n"
               "d1,1,b,4,5\n"
               "d1,2,c,2,5\n"
               "d1,3,d,4,\n");
    const auto result = run_cli(dir, "tabulate t.csv --col-a out:dev.score:pass1 "
                                     "--col-b out:dev.score:pass2 --out out:dev.llm:final --json");
    REQUIRE_MESSAGE(result.exit_code == 0, result.err);
    const auto summary = json::parse(result.out);
    CHECK(summary["ok"] == 2);
    CHECK(summary["adjudicate"] == 1);
    CHECK(summary["missing"] == 1);

    const std::string csv = read_file(dir.file("t.csv"));
    CHECK(csv.find("out:dev.llm:final") != std::string::npos);
    CHECK(csv.find("out:dev.llm.flag:final") != std::string::npos);
    CHECK(csv.find("4.5") != std::string::npos);   // mean of (4,5)
    CHECK(csv.find("adjudicate") != std::string::npos);
}

TEST_CASE("prompt render prints the exact prompt for a row") {
    TempDir dir;
    write_file(dir, "interview.txt", kInterview);
    write_file(dir, "codebook.json", kCodebook);
    REQUIRE(run_cli(dir, "segment interview.txt --mode speaker -o t.csv").exit_code == 0);
    REQUIRE(run_cli(dir, "prompt build codebook.json --library prompts").exit_code == 0);

    const auto result =
        run_cli(dir, "prompt render Development --table t.csv --row 2 --library prompts");
    REQUIRE_MESSAGE(result.exit_code == 0, result.err);
    CHECK(result.out.find("P01: The second week was harder.") != std::string::npos);
    CHECK(result.out.find("{{data}}") == std::string::npos);  // substituted

    SUBCASE("a row outside the table is a config error") {
        const auto bad =
            run_cli(dir, "prompt render Development --table t.csv --row 99 --library prompts");
        CHECK(bad.exit_code == 2);
    }
    SUBCASE("list shows the saved version") {
        const auto list = run_cli(dir, "prompt list --library prompts --json");
        const auto entries = json::parse(list.out);
        REQUIRE(entries.size() == 1);
        CHECK(entries[0]["name"] == "Development");
    }
}
