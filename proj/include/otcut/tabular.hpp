#pragma once
#include <cstddef>
#include <string>
#include <vector>

namespace otcut {

/// In-memory CSV table: a mandatory header row plus string cells. Serialized
/// per RFC 4180 (CRLF line ends, quoting only where required), so identical
/// tables produce byte-identical files.
struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;

    /// index of a header name; throws MissingColumn
    std::size_t col(const std::string& name) const;
    /// append a row; throws LengthMismatch unless it has one cell per column
    void add_row(std::vector<std::string> row);
    /// sort rows lexicographically by the given columns (numeric-aware: cells
    /// that parse as doubles compare numerically), making aggregation order
    /// independent of production order
    void sort_rows(const std::vector<std::string>& by);
};

/// fixed-format numeric cell: shortest round-trip double formatting
std::string csv_num(double v);

/// write per RFC 4180; creates parent directories; throws Error on I/O failure
void write_csv(const std::string& path, const Table& table);

/// parse an RFC 4180 file written by write_csv (quotes, CRLF or LF accepted);
/// throws EmptyData when there is no header row
Table read_csv(const std::string& path);

} // namespace otcut
