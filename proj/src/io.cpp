#include "dipmark/io.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace dipmark {

std::string to_hex(const std::uint8_t* data, std::size_t len) {
    static const char* k = "0123456789abcdef";
    std::string s;
    s.reserve(2 * len);
    for (std::size_t i = 0; i < len; ++i) {
        s.push_back(k[data[i] >> 4]);
        s.push_back(k[data[i] & 0xf]);
    }
    return s;
}

namespace {

void check_vocab(std::uint64_t id, std::optional<std::uint32_t> vocab_size,
                 std::size_t line_no) {
    if (id > 0xffffffffull ||
        (vocab_size && id >= static_cast<std::uint64_t>(*vocab_size)))
        throw OutOfVocab("token id " + std::to_string(id) + " out of vocabulary at line " +
                         std::to_string(line_no));
}

std::vector<TokenId> parse_plain_line(const std::string& line, std::size_t line_no,
                                      std::optional<std::uint32_t> vocab_size) {
    std::vector<TokenId> out;
    std::istringstream ss(line);
    std::string word;
    while (ss >> word) {
        std::uint64_t id = 0;
        std::size_t pos = 0;
        try {
            id = std::stoull(word, &pos);
        } catch (const std::exception&) {
            throw ParseError("bad token id '" + word + "' at line " + std::to_string(line_no));
        }
        if (pos != word.size())
            throw ParseError("bad token id '" + word + "' at line " + std::to_string(line_no));
        check_vocab(id, vocab_size, line_no);
        out.push_back(static_cast<TokenId>(id));
    }
    return out;
}

}  // namespace

std::vector<std::vector<TokenId>> parse_token_sequences(
    const std::string& text, std::optional<std::uint32_t> vocab_size) {
    std::vector<std::vector<TokenId>> out;
    std::istringstream lines(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(lines, line)) {
        ++line_no;
        auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos) continue;
        if (line[first] == '{') {
            nlohmann::json j;
            try {
                j = nlohmann::json::parse(line);
            } catch (const std::exception& e) {
                throw ParseError("bad JSON at line " + std::to_string(line_no) + ": " +
                                 e.what());
            }
            if (!j.contains("tokens") || !j["tokens"].is_array())
                throw ParseError("missing tokens array at line " + std::to_string(line_no));
            std::vector<TokenId> seq;
            for (const auto& v : j["tokens"]) {
                if (!v.is_number_unsigned())
                    throw ParseError("non-integer token at line " + std::to_string(line_no));
                std::uint64_t id = v.get<std::uint64_t>();
                check_vocab(id, vocab_size, line_no);
                seq.push_back(static_cast<TokenId>(id));
            }
            out.push_back(std::move(seq));
        } else {
            out.push_back(parse_plain_line(line, line_no, vocab_size));
        }
    }
    return out;
}

std::vector<std::vector<TokenId>> read_token_file(
    const std::string& path, std::optional<std::uint32_t> vocab_size) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open token file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_token_sequences(ss.str(), vocab_size);
}

void atomic_write_file(const std::string& path, const std::string& content) {
    namespace fs = std::filesystem;
    fs::path target(path);
    if (target.has_parent_path()) fs::create_directories(target.parent_path());
    fs::path tmp = target;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot open output file: " + tmp.string());
        out << content;
        if (!out) throw Error("write failed: " + tmp.string());
    }
    fs::rename(tmp, target);
}

}  // namespace dipmark
