/**
 * @file
 * @brief End-to-end tests of the command-line surface and its exit codes.
 * @copyright Apache License v.2 (http://www.apache.org/licenses/LICENSE-2.0)
*/
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <limits>
#include <string>

#include "pine/model_io.h"
#include "pine/rng.h"
#include "testutil.h"

namespace {

struct CliResult {
    int exit_code = -1;
    std::string out;
    std::string err;
};

CliResult run_cli(const testutil::TempDir& dir, const std::string& args) {
    const std::string out_path = dir.file("stdout.txt");
    const std::string err_path = dir.file("stderr.txt");
    const std::string cmd = std::string(PINE_CLI_PATH) + " " + args + " > " +
                            out_path + " 2> " + err_path;
    const int status = std::system(cmd.c_str());
    CliResult result;
    result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    result.out = testutil::read_file(out_path);
    result.err = testutil::read_file(err_path);
    return result;
}

std::string make_corpus(const testutil::TempDir& dir) {
    const char* animals[] = {"cat", "dog", "fox", "owl", "bee", "ant"};
    auto rng = pine::make_rng(3);
    std::uniform_int_distribution<int> pick(0, 5);
    std::string text;
    for (int line = 0; line < 400; ++line) {
        text += "the ";
        text += animals[pick(rng)];
        text += " saw the ";
        text += animals[pick(rng)];
        text += " today\n";
    }
    const auto path = dir.file("corpus.txt");
    testutil::write_file(path, text);
    return path;
}

const std::string kTrainFlags =
    " --dim 12 --dprime 4 --window 2 --min-count 1 --sample 1.0 --buckets 300"
    " --negatives 3 --seed 11 --threads 1";

}  // namespace

TEST_CASE("train, predict, positions, words, bounds and export round-trip") {
    testutil::TempDir dir("cli_flow");
    const auto corpus = make_corpus(dir);
    const auto model = dir.file("model.pine");

    auto r = run_cli(dir, "train --input " + corpus + " --output " + model +
                              " --kind constrained" + kTrainFlags);
    CHECK(r.exit_code == 0);
    CHECK(r.out.find("\"kind\": \"constrained\"") != std::string::npos);

    r = run_cli(dir, "--model " + model + " predict \"the cat <mask> the dog\""
                     " --top 3");
    CHECK(r.exit_code == 0);
    CHECK(r.out.find("\"predictions\"") != std::string::npos);

    r = run_cli(dir, "--model " + model + " positions --clusters 2");
    CHECK(r.exit_code == 0);
    CHECK(r.out.find("\"clusters\"") != std::string::npos);

    r = run_cli(dir, "--model " + model + " --format csv positions --clusters 0");
    CHECK(r.exit_code == 0);
    CHECK(r.out.rfind("position,norm,scaled", 0) == 0);

    r = run_cli(dir, "--model " + model + " words cat dog saw --clusters 2");
    CHECK(r.exit_code == 0);
    CHECK(r.out.find("\"best_cluster\"") != std::string::npos);

    r = run_cli(dir, "--model " + model + " bounds --trials 100");
    CHECK(r.exit_code == 0);
    CHECK(r.out.find("\"ok\": true") != std::string::npos);

    const auto vectors = dir.file("vectors.vec");
    r = run_cli(dir, "--model " + model + " export --output " + vectors);
    CHECK(r.exit_code == 0);
    const auto text = testutil::read_file(vectors);
    CHECK(text.rfind("9 12", 0) == 0);  // 9 vocab words, D = 12
}

TEST_CASE("analogy command reports accuracy") {
    testutil::TempDir dir("cli_analogy");
    const auto corpus = make_corpus(dir);
    const auto model = dir.file("model.pine");
    auto r = run_cli(dir, "train --input " + corpus + " --output " + model +
                              " --kind subword" + kTrainFlags);
    REQUIRE(r.exit_code == 0);

    const auto questions = dir.file("questions.txt");
    testutil::write_file(questions,
                         ": section\ncat dog fox owl\nthe saw cat dog\n");
    r = run_cli(dir, "--model " + model + " analogy --questions " + questions);
    CHECK(r.exit_code == 0);
    CHECK(r.out.find("\"accuracy\"") != std::string::npos);
}

TEST_CASE("init-stats reports the moment estimates") {
    testutil::TempDir dir("cli_stats");
    const auto r = run_cli(
        dir, "init-stats --scheme sqrt-normal --dim 10 --k 9 --samples 200000");
    CHECK(r.exit_code == 0);
    CHECK(r.out.find("\"variance_ratio\"") != std::string::npos);
}

TEST_CASE("sweep runs the grid") {
    testutil::TempDir dir("cli_sweep");
    const auto corpus = make_corpus(dir);
    const auto r = run_cli(dir, "sweep --input " + corpus +
                                    " --kind constrained --windows 2"
                                    " --dprimes 3,6 --dim 12 --min-count 1"
                                    " --sample 1.0 --buckets 300");
    CHECK(r.exit_code == 0);
    CHECK(r.out.find("\"sweep\"") != std::string::npos);
    CHECK(r.out.find("\"dprime\": 6") != std::string::npos);
}

TEST_CASE("exit codes distinguish usage, data and numeric failures") {
    testutil::TempDir dir("cli_codes");

    // Usage: unknown flag.
    auto r = run_cli(dir, "train --no-such-flag");
    CHECK(r.exit_code == 1);

    // Usage: predict without a model.
    r = run_cli(dir, "predict \"a <mask> b\"");
    CHECK(r.exit_code == 1);

    // Data: missing model file.
    r = run_cli(dir, "--model " + dir.file("absent.pine") + " positions");
    CHECK(r.exit_code == 2);

    // Data: corrupted model file.
    const auto bad = dir.file("bad.pine");
    testutil::write_file(bad, "XINE not a model");
    r = run_cli(dir, "--model " + bad + " positions");
    CHECK(r.exit_code == 2);
    CHECK(r.err.find("data error") != std::string::npos);

    // Numeric: a model with non-finite parameters.
    const auto corpus = make_corpus(dir);
    const auto model = dir.file("model.pine");
    r = run_cli(dir, "train --input " + corpus + " --output " + model +
                         " --kind positional" + kTrainFlags);
    REQUIRE(r.exit_code == 0);
    auto poisoned = pine::load_model(model);
    poisoned.params.input.row(0)[0] = std::numeric_limits<float>::quiet_NaN();
    pine::save_model(poisoned, model);
    r = run_cli(dir, "--model " + model + " positions");
    CHECK(r.exit_code == 3);
    CHECK(r.err.find("numeric failure") != std::string::npos);

    // Help exits cleanly.
    r = run_cli(dir, "--help");
    CHECK(r.exit_code == 0);
}
