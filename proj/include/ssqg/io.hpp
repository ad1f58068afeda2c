#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace ssqg {

// Shortest round-trippable decimal form (%.17g), locale-independent.
// Used everywhere a double lands in a report so outputs are byte-stable.
std::string format_double(double x);

std::uint64_t fnv1a64(const std::string& bytes);
std::string hex16(std::uint64_t v);

void ensure_directory(const std::string& path); // throws UsageError-ish on failure
void write_text_file(const std::string& path, const std::string& contents);

// Minimal CSV assembly: quote-free numeric tables, one header row.
struct CsvWriter {
    explicit CsvWriter(std::vector<std::string> columns);
    void row(const std::vector<std::string>& cells);
    const std::string& str() const { return buf_; }

  private:
    std::string buf_;
    size_t ncols_;
};

} // namespace ssqg
