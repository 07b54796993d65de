#pragma once

// Result tables written as delimited text, and JSON-lines event logs.
//
// A table file starts with '#' metadata lines ("# key: value"), followed by
// a header row of "name [unit]" cells and one row per record. Numbers are
// written with a fixed number of significant digits per column, so the same
// table always produces the same bytes.

#include "ssqr/mcsim.hpp"

#include <filesystem>
#include <fstream>
#include <iosfwd>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace ssqr::io {

enum class ColumnKind { real, integer, text };

struct Column {
    std::string name;
    std::string unit;  ///< empty for dimensionless or text
    ColumnKind kind = ColumnKind::real;
    int digits = 6;    ///< significant digits for real columns (6 or 17)

    static Column real(std::string name, std::string unit, int digits = 6);
    static Column exact(std::string name, std::string unit) { return real(std::move(name), std::move(unit), 17); }
    static Column integer(std::string name, std::string unit = "");
    static Column text(std::string name);
    bool operator==(const Column&) const = default;
};

using Cell = std::variant<double, long long, std::string>;

class ResultTable {
public:
    ResultTable() = default;
    ResultTable(std::string name, std::vector<Column> columns);

    const std::string& name() const { return name_; }
    const std::vector<Column>& columns() const { return columns_; }
    const std::vector<std::vector<Cell>>& rows() const { return rows_; }
    const std::vector<std::pair<std::string, std::string>>& metadata() const { return metadata_; }

    /// Throws std::invalid_argument if the row width or a cell type does not
    /// match the schema. Integers are accepted in real columns.
    void add_row(std::vector<Cell> row);
    void set_meta(const std::string& key, const std::string& value);
    std::string meta(const std::string& key) const;  ///< empty if absent

    std::size_t column_index(const std::string& name) const;
    double real_at(std::size_t row, const std::string& column) const;

    bool operator==(const ResultTable&) const = default;

private:
    std::string name_;
    std::vector<Column> columns_;
    std::vector<std::vector<Cell>> rows_;
    std::vector<std::pair<std::string, std::string>> metadata_;
};

std::string format_real(double value, int digits);

void write_csv(const ResultTable& table, std::ostream& out);
ResultTable read_csv(std::istream& in);

/// Creates parent directories; throws std::runtime_error if the file cannot
/// be written.
void write_table(const ResultTable& table, const std::filesystem::path& path);
ResultTable read_table(const std::filesystem::path& path);

/// One JSON object per swap event:
/// {"t":..,"wait_A_s":..,"wait_B_s":..,"fidelity":..,"bsm_success":..,"trial_id":..}
class EventLogWriter {
public:
    explicit EventLogWriter(const std::filesystem::path& path);
    void write(int trial_id, const mc::SwapEvent& event);
    void write(const mc::TrialRecord& record);
    std::size_t written() const { return written_; }

private:
    std::ofstream out_;
    std::size_t written_ = 0;
};

struct LoggedEvent {
    int trial_id = 0;
    mc::SwapEvent event;
};

std::vector<LoggedEvent> read_event_log(const std::filesystem::path& path);

}  // namespace ssqr::io
