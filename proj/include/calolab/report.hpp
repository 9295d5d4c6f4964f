#pragma once

#include <cstdio>
#include <string>
#include <vector>

#include "calolab/core.hpp"

namespace calolab {

// Appends records to `path` as JSON lines.  The new content is written to a
// sibling temporary file and renamed over the target, so readers never see a
// partially written file.  An empty record list still creates the file.
void emit_report(const std::vector<RunRecord>& records, const std::string& path);

// Streaming variant: one record at a time, constant memory per record.
class JsonLinesWriter {
public:
    explicit JsonLinesWriter(std::string path);
    ~JsonLinesWriter();
    JsonLinesWriter(const JsonLinesWriter&) = delete;
    JsonLinesWriter& operator=(const JsonLinesWriter&) = delete;

    void write(const RunRecord& record);
    void commit();  // rename temp over target; called by the destructor if needed

private:
    std::string path_, tmp_;
    std::FILE* fp_ = nullptr;
};

class CsvTable {
public:
    explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

    void add_row(std::vector<std::string> cells);
    const std::vector<std::string>& header() const { return header_; }
    std::size_t rows() const { return rows_.size(); }
    std::string str() const;
    void write(const std::string& path) const;

private:
    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;
};

// Shortest round-trip representation, so CSV output is deterministic.
std::string fmt_num(double v);

void write_file_atomic(const std::string& path, const std::string& content);

}  // namespace calolab
