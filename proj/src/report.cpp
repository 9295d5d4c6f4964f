#include "calolab/report.hpp"

#include <cerrno>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace calolab {

namespace fs = std::filesystem;

namespace {
std::runtime_error io_error(const std::string& what, const std::string& path)
{
    return std::runtime_error(what + " '" + path + "': " + std::strerror(errno));
}
}  // namespace

std::string fmt_num(double v)
{
    char buf[40];
    for (int prec = 15; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof buf, "%.*g", prec, v);
        if (std::strtod(buf, nullptr) == v) break;
    }
    return buf;
}

void write_file_atomic(const std::string& path, const std::string& content)
{
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw io_error("cannot open", tmp);
        out << content;
        if (!out) throw io_error("write failed", tmp);
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) throw std::runtime_error("cannot rename '" + tmp + "' to '" + path + "': " + ec.message());
}

JsonLinesWriter::JsonLinesWriter(std::string path) : path_(std::move(path)), tmp_(path_ + ".tmp")
{
    std::error_code ec;
    if (fs::exists(path_, ec)) {
        fs::copy_file(path_, tmp_, fs::copy_options::overwrite_existing, ec);
        if (ec) throw std::runtime_error("cannot stage '" + path_ + "': " + ec.message());
        fp_ = std::fopen(tmp_.c_str(), "ab");
    } else {
        fp_ = std::fopen(tmp_.c_str(), "wb");
    }
    if (!fp_) throw io_error("cannot open", tmp_);
}

JsonLinesWriter::~JsonLinesWriter()
{
    if (fp_) {
        try {
            commit();
        } catch (...) {
        }
    }
}

void JsonLinesWriter::write(const RunRecord& record)
{
    const std::string line = record.to_json_line() + "\n";
    if (std::fwrite(line.data(), 1, line.size(), fp_) != line.size()) throw io_error("write failed", tmp_);
}

void JsonLinesWriter::commit()
{
    if (!fp_) return;
    if (std::fclose(fp_) != 0) {
        fp_ = nullptr;
        throw io_error("close failed", tmp_);
    }
    fp_ = nullptr;
    std::error_code ec;
    fs::rename(tmp_, path_, ec);
    if (ec) throw std::runtime_error("cannot rename '" + tmp_ + "' to '" + path_ + "': " + ec.message());
}

void emit_report(const std::vector<RunRecord>& records, const std::string& path)
{
    JsonLinesWriter w(path);
    for (const auto& r : records) w.write(r);
    w.commit();
}

void CsvTable::add_row(std::vector<std::string> cells)
{
    if (cells.size() != header_.size()) throw std::logic_error("CSV row width does not match header");
    rows_.push_back(std::move(cells));
}

std::string CsvTable::str() const
{
    std::ostringstream out;
    auto line = [&](const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) out << ',';
            const bool quote = cells[i].find_first_of(",\"\n") != std::string::npos;
            if (!quote) {
                out << cells[i];
                continue;
            }
            out << '"';
            for (char c : cells[i]) {
                if (c == '"') out << '"';
                out << c;
            }
            out << '"';
        }
        out << '\n';
    };
    line(header_);
    for (const auto& r : rows_) line(r);
    return out.str();
}

void CsvTable::write(const std::string& path) const { write_file_atomic(path, str()); }

}  // namespace calolab
