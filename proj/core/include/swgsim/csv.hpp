#pragma once

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

#include "swgsim/errors.hpp"

namespace swg {

// Shortest round-trip decimal form of a double. Deterministic, so CSVs
// produced from identical runs compare byte-for-byte.
inline std::string format_double(double value) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    (void)ec;
    return std::string(buf, ptr);
}

// Row-oriented CSV writer with a mandatory header. LF line endings.
class CsvWriter {
public:
    CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header)
        : out_(path, std::ios::binary) {
        if (!out_) {
            throw IoError("cannot open for writing: " + path.string());
        }
        write_row_strings(header);
    }

    void write_row_strings(const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i > 0) out_.put(',');
            out_ << cells[i];
        }
        out_.put('\n');
    }

    class Row {
    public:
        explicit Row(CsvWriter& writer) : writer_(writer) {}
        Row& add(double v) { return add_cell(format_double(v)); }
        Row& add(int v) { return add_cell(std::to_string(v)); }
        Row& add(std::uint64_t v) { return add_cell(std::to_string(v)); }
        Row& add(std::string_view v) { return add_cell(std::string(v)); }
        ~Row() { writer_.out_.put('\n'); }

        Row(const Row&) = delete;
        Row& operator=(const Row&) = delete;

    private:
        Row& add_cell(const std::string& cell) {
            if (!first_) writer_.out_.put(',');
            first_ = false;
            writer_.out_ << cell;
            return *this;
        }
        CsvWriter& writer_;
        bool first_ = true;
    };

    Row row() { return Row(*this); }

    void flush() { out_.flush(); }

private:
    std::ofstream out_;
};

}  // namespace swg
