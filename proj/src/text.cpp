#include "ofdb/text.hpp"

#include "ofdb/errors.hpp"

#include <charconv>
#include <cstdio>

namespace ofdb {

std::string format_real(double value) {
    char buf[40];
    const int n = std::snprintf(buf, sizeof buf, "%.17g", value);
    return std::string(buf, static_cast<std::size_t>(n));
}

std::vector<std::string_view> split_lines(std::string_view text) {
    std::vector<std::string_view> lines;
    while (!text.empty()) {
        const auto pos = text.find('\n');
        std::string_view line = text.substr(0, pos);
        if (!line.empty() && line.back() == '\r') {
            line.remove_suffix(1);
        }
        lines.push_back(line);
        if (pos == std::string_view::npos) {
            break;
        }
        text.remove_prefix(pos + 1);
    }
    return lines;
}

std::string_view TokenReader::next_token() {
    const auto begin = rest_.find_first_not_of(" \t,");
    if (begin == std::string_view::npos) {
        fail("unexpected end of line");
    }
    rest_.remove_prefix(begin);
    const auto end = rest_.find_first_of(" \t,");
    std::string_view token = rest_.substr(0, end);
    rest_.remove_prefix(end == std::string_view::npos ? rest_.size() : end);
    return token;
}

std::uint64_t TokenReader::next_uint() {
    const auto token = next_token();
    std::uint64_t value = 0;
    const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
    if (ec != std::errc{} || ptr != token.data() + token.size()) {
        fail("expected an unsigned integer, got '" + std::string(token) + "'");
    }
    return value;
}

double TokenReader::next_real() {
    const auto token = next_token();
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
    if (ec != std::errc{} || ptr != token.data() + token.size()) {
        fail("expected a real number, got '" + std::string(token) + "'");
    }
    return value;
}

void TokenReader::expect_end() {
    if (rest_.find_first_not_of(" \t,") != std::string_view::npos) {
        fail("trailing fields");
    }
}

void TokenReader::fail(const std::string& what) const {
    throw FormatError("line " + std::to_string(line_no_) + ": " + what);
}

} // namespace ofdb
