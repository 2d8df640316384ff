#pragma once

#include <charconv>
#include <ostream>
#include <string>
#include <string_view>

namespace rbrw {

// Shortest round-trip decimal for a double; identical bytes for identical
// values, which the output determinism contract relies on.
inline std::string format_double(double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

class CsvWriter {
public:
    explicit CsvWriter(std::ostream& out) : out_(out) {}

    void header(std::string_view line) { out_ << line << '\n'; }

    CsvWriter& field(double v) {
        sep();
        out_ << format_double(v);
        return *this;
    }
    CsvWriter& field(long long v) {
        sep();
        out_ << v;
        return *this;
    }
    CsvWriter& field(int v) {
        sep();
        out_ << v;
        return *this;
    }
    CsvWriter& field(unsigned long long v) {
        sep();
        out_ << v;
        return *this;
    }
    CsvWriter& field(std::string_view v) {
        sep();
        out_ << v;
        return *this;
    }
    void endrow() {
        out_ << '\n';
        first_ = true;
    }

private:
    void sep() {
        if (!first_) out_ << ',';
        first_ = false;
    }
    std::ostream& out_;
    bool first_ = true;
};

}  // namespace rbrw
