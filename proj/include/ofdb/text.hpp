#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace ofdb {

// %.17g; parsing the result restores the exact double.
std::string format_real(double value);

std::vector<std::string_view> split_lines(std::string_view text);

// Whitespace-separated token cursor over one line of a text format.
class TokenReader {
public:
    TokenReader(std::string_view line, std::size_t line_no) : rest_(line), line_no_(line_no) {}

    std::uint64_t next_uint();
    double next_real();
    std::string_view next_token();
    void expect_end();

private:
    [[noreturn]] void fail(const std::string& what) const;

    std::string_view rest_;
    std::size_t line_no_;
};

} // namespace ofdb
