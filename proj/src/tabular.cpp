#include "otcut/tabular.hpp"
#include "otcut/errors.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>

namespace otcut {

namespace {

bool needs_quoting(const std::string& s) {
    return s.find_first_of(",\"\r\n") != std::string::npos;
}

void append_field(std::string& out, const std::string& s) {
    if (!needs_quoting(s)) {
        out += s;
        return;
    }
    out += '"';
    for (char c : s) {
        if (c == '"')
            out += '"';
        out += c;
    }
    out += '"';
}

std::optional<double> parse_double(const std::string& s) {
    double v = 0.0;
    const char* b = s.data();
    const char* e = b + s.size();
    auto [p, ec] = std::from_chars(b, e, v);
    if (ec != std::errc{} || p != e)
        return std::nullopt;
    return v;
}

} // namespace

std::size_t Table::col(const std::string& name) const {
    for (std::size_t i = 0; i < columns.size(); ++i)
        if (columns[i] == name)
            return i;
    throw MissingColumn("no column '" + name + "' in table");
}

void Table::add_row(std::vector<std::string> row) {
    if (row.size() != columns.size())
        throw LengthMismatch("row has " + std::to_string(row.size()) +
                             " cells for " + std::to_string(columns.size()) +
                             " columns");
    rows.push_back(std::move(row));
}

void Table::sort_rows(const std::vector<std::string>& by) {
    std::vector<std::size_t> idx;
    idx.reserve(by.size());
    for (const auto& name : by)
        idx.push_back(col(name));
    std::stable_sort(rows.begin(), rows.end(),
                     [&](const std::vector<std::string>& a,
                         const std::vector<std::string>& b) {
                         for (std::size_t k : idx) {
                             const std::string& sa = a[k];
                             const std::string& sb = b[k];
                             if (sa == sb)
                                 continue;
                             auto na = parse_double(sa);
                             auto nb = parse_double(sb);
                             if (na && nb) {
                                 if (*na == *nb)
                                     continue;
                                 return *na < *nb;
                             }
                             return sa < sb;
                         }
                         return false;
                     });
}

std::string csv_num(double v) {
    char buf[64];
    auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    if (ec != std::errc{})
        throw Error("cannot format numeric cell");
    return std::string(buf, p);
}

void write_csv(const std::string& path, const Table& table) {
    if (table.columns.empty())
        throw EmptyData("table has no columns");
    std::filesystem::path p(path);
    if (p.has_parent_path())
        std::filesystem::create_directories(p.parent_path());
    std::string out;
    for (std::size_t i = 0; i < table.columns.size(); ++i) {
        if (i)
            out += ',';
        append_field(out, table.columns[i]);
    }
    out += "\r\n";
    for (const auto& row : table.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i)
                out += ',';
            append_field(out, row[i]);
        }
        out += "\r\n";
    }
    std::ofstream f(path, std::ios::binary);
    if (!f)
        throw Error("cannot open '" + path + "' for writing");
    f.write(out.data(), std::streamsize(out.size()));
    if (!f)
        throw Error("short write to '" + path + "'");
}

Table read_csv(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f)
        throw Error("cannot open '" + path + "' for reading");
    std::string text((std::istreambuf_iterator<char>(f)),
                     std::istreambuf_iterator<char>());

    std::vector<std::vector<std::string>> records;
    std::vector<std::string> record;
    std::string field;
    bool quoted = false;
    bool any = false;
    std::size_t i = 0;
    auto end_field = [&]() {
        record.push_back(field);
        field.clear();
        any = true;
    };
    auto end_record = [&]() {
        end_field();
        records.push_back(record);
        record.clear();
        any = false;
    };
    while (i < text.size()) {
        char c = text[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field += '"';
                    i += 2;
                    continue;
                }
                quoted = false;
                ++i;
                continue;
            }
            field += c;
            ++i;
            continue;
        }
        if (c == '"' && field.empty()) {
            quoted = true;
            ++i;
            continue;
        }
        if (c == ',') {
            end_field();
            ++i;
            continue;
        }
        if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') {
            end_record();
            i += 2;
            continue;
        }
        if (c == '\n') {
            end_record();
            ++i;
            continue;
        }
        field += c;
        ++i;
    }
    if (quoted)
        throw Error("unterminated quoted field in '" + path + "'");
    if (any || !field.empty())
        end_record();

    if (records.empty())
        throw EmptyData("'" + path + "' has no header row");
    Table t;
    t.columns = records.front();
    for (std::size_t r = 1; r < records.size(); ++r) {
        if (records[r].size() != t.columns.size())
            throw LengthMismatch("row " + std::to_string(r) + " of '" + path +
                                 "' has " + std::to_string(records[r].size()) +
                                 " cells for " +
                                 std::to_string(t.columns.size()) + " columns");
        t.rows.push_back(std::move(records[r]));
    }
    return t;
}

} // namespace otcut
