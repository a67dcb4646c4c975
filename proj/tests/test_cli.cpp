#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "dipmark/io.hpp"
#include "dipmark/lm.hpp"

using namespace dipmark;
namespace fs = std::filesystem;

namespace {

struct RunResult {
    int exit_code;
    std::string out;
};

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

RunResult run_cli(const std::string& args) {
    static int counter = 0;
    fs::create_directories(DIPMARK_TEST_TMP);
    std::string out_path =
        std::string(DIPMARK_TEST_TMP) + "/cli_out_" + std::to_string(counter++) + ".txt";
    std::string cmd = std::string(DIPMARK_CLI_PATH) + " " + args + " > " + out_path + " 2>/dev/null";
    int status = std::system(cmd.c_str());
    int code = status == -1 ? -1 : WEXITSTATUS(status);
    return {code, slurp(out_path)};
}

std::string tmp_file(const std::string& name, const std::string& content) {
    fs::create_directories(DIPMARK_TEST_TMP);
    std::string path = std::string(DIPMARK_TEST_TMP) + "/" + name;
    std::ofstream out(path);
    out << content;
    return path;
}

const char* kKeyHex = "00112233445566778899aabbccddeeff";

}  // namespace

TEST_CASE("cli: --version prints the cipher encoding") {
    auto r = run_cli("--version");
    CHECK(r.exit_code == 0);
    CHECK(r.out.find("dipmark") != std::string::npos);
    CHECK(r.out.find("dipmark-cipher-v1") != std::string::npos);
}

TEST_CASE("cli: missing required flags exit 1 with usage") {
    auto r = run_cli("detect --input nowhere.jsonl");
    CHECK(r.exit_code == 1);
    auto r2 = run_cli("generate --key aabb");
    CHECK(r2.exit_code == 1);
}

TEST_CASE("cli: generate -> detect round trip") {
    // small uniform table model
    TableModel model = TableModel::uniform(512);
    std::string model_path = tmp_file("model_uniform.json", model_to_json(model));
    std::string tokens_path = std::string(DIPMARK_TEST_TMP) + "/tokens.jsonl";

    auto gen = run_cli("generate --model " + model_path + " --key " + kKeyHex +
                       " --strategy dip:alpha=0.45 --window 1 --len 120 --num 3 " +
                       "--prompt-ids 1,2 --seed 9 --out " + tokens_path);
    REQUIRE(gen.exit_code == 0);
    auto sequences = read_token_file(tokens_path, 512);
    REQUIRE(sequences.size() == 3);
    CHECK(sequences[0].size() == 120);

    auto det = run_cli("detect --key " + std::string(kKeyHex) +
                       " --gamma 0.5 --window 1 --fpr 0.01 --mode exact --vocab-size 512 "
                       "--input " + tokens_path);
    REQUIRE(det.exit_code == 0);
    std::istringstream lines(det.out);
    std::string line;
    int rows = 0;
    while (std::getline(lines, line)) {
        if (line.empty()) continue;
        auto j = nlohmann::json::parse(line);
        CHECK(j["scored"] == 119);
        CHECK(j["decision"].is_boolean());
        CHECK(j["decision"].get<bool>());  // watermarked input
        CHECK(j["p_exact"].get<double>() <= j["p_kl"].get<double>());
        ++rows;
    }
    CHECK(rows == 3);

    // identical invocation is byte-identical
    std::string tokens2 = std::string(DIPMARK_TEST_TMP) + "/tokens2.jsonl";
    auto gen2 = run_cli("generate --model " + model_path + " --key " + kKeyHex +
                        " --strategy dip:alpha=0.45 --window 1 --len 120 --num 3 " +
                        "--prompt-ids 1,2 --seed 9 --out " + tokens2);
    REQUIRE(gen2.exit_code == 0);
    CHECK(slurp(tokens_path) == slurp(tokens2));
}

TEST_CASE("cli: detection decision flips off for unwatermarked input") {
    TableModel model = TableModel::uniform(32);
    std::string model_path = tmp_file("model_uniform2.json", model_to_json(model));
    std::string tokens_path = std::string(DIPMARK_TEST_TMP) + "/plain.jsonl";
    auto gen = run_cli("generate --model " + model_path + " --key " + kKeyHex +
                       " --strategy identity --len 200 --num 1 --prompt-ids 1 --seed 4 "
                       "--out " + tokens_path);
    REQUIRE(gen.exit_code == 0);
    auto det = run_cli("detect --key " + std::string(kKeyHex) +
                       " --vocab-size 32 --fpr 0.01 --mode exact --input " + tokens_path);
    REQUIRE(det.exit_code == 0);
    auto j = nlohmann::json::parse(det.out.substr(0, det.out.find('\n')));
    CHECK_FALSE(j["decision"].get<bool>());
}

TEST_CASE("cli: certify prints the worked radius") {
    auto r = run_cli("certify --phi 0.2 --z 0.1 --gamma 0.5 --window 1");
    REQUIRE(r.exit_code == 0);
    auto j = nlohmann::json::parse(r.out);
    CHECK(std::abs(j["epsilon0"].get<double>() - 0.038462) < 1e-6);
    CHECK(j["basis"] == "length_varying");
}

TEST_CASE("cli: attack edits the requested fraction") {
    std::string tokens_path = tmp_file("attack_in.jsonl", "{\"tokens\":[0,1,2,3,4,5,6,7,8,9]}\n");
    auto r = run_cli("attack --input " + tokens_path +
                     " --eps 0.2 --mode delete --seed 3 --vocab-size 10");
    REQUIRE(r.exit_code == 0);
    auto j = nlohmann::json::parse(r.out.substr(0, r.out.find('\n')));
    CHECK(j["tokens"].size() == 8);
}

TEST_CASE("cli: plain-line token files parse and bad ones exit 1") {
    std::string plain = tmp_file("plain.txt", "3 1 4 1 5\n");
    auto seqs = read_token_file(plain);
    REQUIRE(seqs.size() == 1);
    CHECK(seqs[0] == std::vector<TokenId>{3, 1, 4, 1, 5});

    std::string bad = tmp_file("bad.txt", "3 x 4\n");
    CHECK_THROWS_AS(read_token_file(bad), ParseError);
    auto r = run_cli("detect --key " + std::string(kKeyHex) +
                     " --vocab-size 8 --input " + bad);
    CHECK(r.exit_code == 1);

    std::string oov = tmp_file("oov.txt", "3 9 4\n");
    CHECK_THROWS_AS(read_token_file(oov, 8), OutOfVocab);
    auto r2 = run_cli("detect --key " + std::string(kKeyHex) +
                      " --vocab-size 8 --input " + oov);
    CHECK(r2.exit_code == 1);
}

TEST_CASE("cli: bench preserve_mc writes metrics to the out dir") {
    std::string cfg = tmp_file("bench_cfg.json",
                               "{\"trials\":1,\"rng_seed\":5,\"alpha\":0.45,"
                               "\"vocab_n\":16,\"samples\":2000}");
    std::string dir = std::string(DIPMARK_TEST_TMP) + "/bench_cli_out";
    fs::remove_all(dir);
    auto r = run_cli("bench preserve_mc --config " + cfg + " --out " + dir);
    REQUIRE(r.exit_code == 0);
    CHECK(r.out.find("tv_distance") != std::string::npos);
    CHECK(fs::exists(dir + "/metrics.csv"));
    CHECK(fs::exists(dir + "/manifest.json"));
}
